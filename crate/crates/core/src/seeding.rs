//! Deterministic seed derivation and k-means++ center selection.

use ndarray::ArrayView2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// Mixes a base seed with a tag sequence (splitmix64 finalizer per step).
///
/// Used to give every restart, fold and subsample its own stream without
/// depending on the order in which work units are executed.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = base;
    for &t in tags {
        state = splitmix(state ^ splitmix(t.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    splitmix(state)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Picks `k` row indices by D² sampling: the first uniformly, each later one
/// with probability proportional to its squared distance from the nearest
/// center chosen so far. Falls back to uniform picks when every remaining
/// distance is zero.
pub fn kmeans_plus_plus<R: Rng>(data: ArrayView2<f64>, k: usize, rng: &mut R) -> Vec<usize> {
    let n = data.nrows();
    assert!(k >= 1 && k <= n, "k-means++ needs 1 <= k <= n");
    let rows: Vec<Vec<f64>> = data.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut d2: Vec<f64> = rows.iter().map(|x| squared_distance(x, &rows[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` past the final partial sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("total > 0"))
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (d, x) in d2.iter_mut().zip(&rows) {
            *d = d.min(squared_distance(x, &rows[next]));
        }
    }
    chosen
}
