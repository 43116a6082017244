use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::Labeling;
use crate::error::{Error, Result};
use crate::seeding::{kmeans_plus_plus, rng_from, squared_distance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    /// Z-score each feature before clustering. Centroids are reported in the
    /// original units either way.
    pub standardize: bool,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { max_iterations: 300, standardize: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansFit {
    /// Centroids in the original feature units.
    pub centroids: Vec<Vec<f64>>,
    pub labeling: Labeling,
    /// Within-cluster sum of squares after each assignment step, in the
    /// (possibly standardized) working space. Non-increasing.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    scaling: Option<Scaling>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Scaling {
    center: Vec<f64>,
    scale: Vec<f64>,
}

impl Scaling {
    fn fit(data: ArrayView2<f64>) -> Self {
        let n = data.nrows() as f64;
        let mut center = Vec::new();
        let mut scale = Vec::new();
        for col in data.axis_iter(Axis(1)) {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            center.push(mean);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Scaling { center, scale }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).zip(&self.scale).map(|((v, c), s)| (v - c) / s).collect()
    }

    fn backward(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).zip(&self.scale).map(|((v, c), s)| v * s + c).collect()
    }
}

impl KMeansFit {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Index of the nearest centroid; ties go to the lower index.
    pub fn predict(&self, point: &[f64]) -> usize {
        match &self.scaling {
            Some(s) => {
                let z = s.forward(point);
                let working: Vec<Vec<f64>> = self.centroids.iter().map(|c| s.forward(c)).collect();
                nearest(&working, &z).0
            }
            None => nearest(&self.centroids, point).0,
        }
    }

    pub fn predict_rows(&self, data: ArrayView2<f64>) -> Vec<usize> {
        data.rows().into_iter().map(|r| self.predict(&r.to_vec())).collect()
    }

    pub fn final_inertia(&self) -> f64 {
        self.inertia_trace.last().copied().unwrap_or(0.0)
    }
}

fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Lloyd's k-means with k-means++ seeding and default settings.
pub fn kmeans(data: ArrayView2<f64>, k: usize, seed: u64) -> Result<KMeansFit> {
    kmeans_with(data, k, seed, &KMeansConfig::default())
}

/// Lloyd's k-means. Iterates until assignments stop changing or the
/// iteration cap is hit. A cluster that empties is re-seeded at the point
/// farthest from its current centroid.
pub fn kmeans_with(data: ArrayView2<f64>, k: usize, seed: u64, config: &KMeansConfig) -> Result<KMeansFit> {
    let n = data.nrows();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InsufficientData { required: k, available: n });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("data contains non-finite values".into()));
    }
    let scaling = config.standardize.then(|| Scaling::fit(data));
    let working: Array2<f64> = match &scaling {
        Some(s) => {
            let mut w = data.to_owned();
            for mut row in w.rows_mut() {
                let z = s.forward(&row.to_vec());
                row.iter_mut().zip(z).for_each(|(v, zv)| *v = zv);
            }
            w
        }
        None => data.to_owned(),
    };
    let points: Vec<Vec<f64>> = working.rows().into_iter().map(|r| r.to_vec()).collect();
    let dim = working.ncols();

    let mut rng = rng_from(seed);
    let mut centroids: Vec<Vec<f64>> =
        kmeans_plus_plus(working.view(), k, &mut rng).into_iter().map(|i| points[i].clone()).collect();

    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (j, d) = nearest(&centroids, p);
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
            dists[i] = d;
        }
        // Re-seed empty clusters; moving a centroid onto a point never raises the objective.
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                .expect("k <= n leaves a cluster with two or more points");
            counts[labels[far]] -= 1;
            counts[empty] = 1;
            labels[far] = empty;
            dists[far] = 0.0;
            centroids[empty] = points[far].clone();
            changed = true;
        }
        trace.push(dists.iter().sum());
        if !changed {
            converged = true;
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        for (c, (s, &m)) in centroids.iter_mut().zip(sums.iter().zip(&counts)) {
            *c = s.iter().map(|v| v / m as f64).collect();
        }
    }
    let centroids = match &scaling {
        Some(s) => centroids.iter().map(|c| s.backward(c)).collect(),
        None => centroids,
    };
    Ok(KMeansFit {
        centroids,
        labeling: Labeling::new(labels, k)?,
        inertia_trace: trace,
        iterations,
        converged,
        scaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn two_obvious_clusters() {
        let data = array![[0.0], [0.1], [0.2], [10.0], [10.1], [10.2]];
        let fit = kmeans(data.view(), 2, 1).unwrap();
        let l = fit.labeling.labels();
        assert_eq!(l[0], l[1]);
        assert_eq!(l[0], l[2]);
        assert_eq!(l[3], l[5]);
        assert_ne!(l[0], l[3]);
        assert!(fit.converged);
        assert_eq!(fit.predict(&[9.0]), l[3]);
    }

    #[test]
    fn k_equals_n_zero_inertia() {
        let data = array![[0.0, 1.0], [2.0, 3.0], [5.0, -1.0], [7.0, 7.0]];
        let fit = kmeans(data.view(), 4, 9).unwrap();
        assert_eq!(fit.final_inertia(), 0.0);
        let mut l = fit.labeling.labels().to_vec();
        l.sort();
        assert_eq!(l, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k_too_large() {
        let data = array![[0.0], [1.0]];
        assert_eq!(kmeans(data.view(), 3, 0).unwrap_err(), Error::InsufficientData { required: 3, available: 2 });
        assert!(kmeans(data.view(), 0, 0).is_err());
    }

    #[test]
    fn standardized_centroids_in_original_units() {
        let data = array![[100.0, 1.0], [102.0, 1.1], [300.0, 3.0], [302.0, 3.1]];
        let cfg = KMeansConfig { standardize: true, ..Default::default() };
        let fit = kmeans_with(data.view(), 2, 3, &cfg).unwrap();
        let mut xs: Vec<f64> = fit.centroids.iter().map(|c| c[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] - 101.0).abs() < 1e-9 && (xs[1] - 301.0).abs() < 1e-9);
        assert_eq!(fit.predict(&[299.0, 2.9]), fit.labeling.labels()[2]);
    }

    #[test]
    fn deterministic() {
        let data = array![[0.0], [1.0], [4.0], [5.0], [9.0], [11.0]];
        assert_eq!(kmeans(data.view(), 3, 5).unwrap(), kmeans(data.view(), 3, 5).unwrap());
    }

    proptest! {
        #[test]
        fn inertia_non_increasing(
            pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..60),
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            let k = k.min(pts.len());
            let mut data = Array2::zeros((pts.len(), 2));
            for (i, (x, y)) in pts.iter().enumerate() {
                data[[i, 0]] = *x;
                data[[i, 1]] = *y;
            }
            let fit = kmeans(data.view(), k, seed).unwrap();
            for w in fit.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
            }
            let mut seen = vec![false; k];
            fit.labeling.labels().iter().for_each(|&l| seen[l] = true);
            prop_assert!(seen.iter().all(|&s| s), "every cluster is non-empty");
        }
    }
}
