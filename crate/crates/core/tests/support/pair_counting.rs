//! Brute-force adjusted Rand index by counting point pairs, and an
//! enumerator of every set partition of `n` points.

/// ARI from the four pair counts, as an exact `(numerator, denominator)`.
///
/// `n11`: pairs together in both, `n00`: apart in both, `n10`/`n01`: together
/// in only one of the two.
pub fn pair_counting_ratio(a: &[usize], b: &[usize]) -> (i128, i128) {
    let (mut n11, mut n10, mut n01, mut n00) = (0i128, 0i128, 0i128, 0i128);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1,
                (true, false) => n10 += 1,
                (false, true) => n01 += 1,
                (false, false) => n00 += 1,
            }
        }
    }
    let num = 2 * (n00 * n11 - n01 * n10);
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    (num, den)
}

pub fn pair_counting_ari(a: &[usize], b: &[usize]) -> f64 {
    match pair_counting_ratio(a, b) {
        (_, 0) => 1.0,
        (num, den) => num as f64 / den as f64,
    }
}

/// All set partitions of `n` points as restricted growth strings.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for label in 0..=limit {
            prefix.push(label);
            grow(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(n), 0, n, &mut out);
    out
}
