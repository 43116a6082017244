use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::Prepared;
use super::MixtureModel;
use crate::seeding::rng_from;

/// Draws `n` points: a component by weight, then a Gaussian draw from it.
///
/// Returns the points (N×D) and the generating component of each point.
/// Output is a pure function of `(model, n, seed)`.
pub fn sample_labeled(model: &MixtureModel, n: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let dim = model.dim();
    let mut rng = rng_from(seed);
    let factors: Vec<[f64; 3]> = model
        .components()
        .iter()
        .map(|c| Prepared::new(c).expect("validated model").cholesky())
        .collect();
    let cumulative: Vec<f64> = model
        .components()
        .iter()
        .scan(0.0, |acc, c| {
            *acc += c.weight;
            Some(*acc)
        })
        .collect();
    let mut points = Array2::zeros((n, dim));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
        let j = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
        let comp = &model.components()[j];
        let l = factors[j];
        let z0: f64 = rng.sample(StandardNormal);
        points[[i, 0]] = comp.mean[0] + l[0] * z0;
        if dim == 2 {
            let z1: f64 = rng.sample(StandardNormal);
            points[[i, 1]] = comp.mean[1] + l[1] * z0 + l[2] * z1;
        }
        labels.push(j);
    }
    (points, labels)
}

/// [`sample_labeled`] without the labels.
pub fn sample(model: &MixtureModel, n: usize, seed: u64) -> Array2<f64> {
    sample_labeled(model, n, seed).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::GaussianComponent;

    #[test]
    fn standard_normal_moments() {
        let m = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 0.0, 1.0).unwrap()]).unwrap();
        let x = sample(&m, 10_000, 1);
        let mean = x.mean().unwrap();
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 10_000.0;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn occupancy_follows_weights() {
        let w = [0.645, 0.226, 0.129];
        let m = MixtureModel::new(
            w.iter().enumerate().map(|(j, &wj)| GaussianComponent::univariate(wj, j as f64 * 100.0, 1.0).unwrap()).collect(),
        )
        .unwrap();
        let (_, labels) = sample_labeled(&m, 10_000, 11);
        for (j, &wj) in w.iter().enumerate() {
            let frac = labels.iter().filter(|&&l| l == j).count() as f64 / 10_000.0;
            assert!((frac - wj).abs() < 0.02, "component {j}: {frac}");
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let m = MixtureModel::new(vec![
            GaussianComponent::bivariate(0.4, [1.0, 2.0], [1.0, 0.5], 0.3).unwrap(),
            GaussianComponent::bivariate(0.6, [5.0, 3.0], [2.0, 0.2], -0.5).unwrap(),
        ])
        .unwrap();
        let a = sample(&m, 500, 99);
        let b = sample(&m, 500, 99);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(sample(&m, 500, 100), a);
    }

    #[test]
    fn correlated_draws_have_target_covariance() {
        let m = MixtureModel::new(vec![GaussianComponent::bivariate(1.0, [0.0, 0.0], [2.0, 1.0], 0.5).unwrap()]).unwrap();
        let x = sample(&m, 20_000, 5);
        let n = x.nrows() as f64;
        let cov01 = x.rows().into_iter().map(|r| r[0] * r[1]).sum::<f64>() / n;
        assert!((cov01 - 1.0).abs() < 0.08, "cov {cov01}");
    }

    #[test]
    fn zero_draws() {
        let m = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 0.0, 1.0).unwrap()]).unwrap();
        assert_eq!(sample(&m, 0, 1).dim(), (0, 1));
    }
}
