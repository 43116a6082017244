//! Gaussian mixtures in one and two dimensions, fitted by expectation-maximization.

mod density;
mod em;
mod sample;

pub use density::{e_step, gaussian_density, log_likelihood, predict, predict_rows, Posterior};
pub use em::{fit_em, m_step, CovarianceKind, FitConfig, FitResult, RestartSummary};
pub use sample::{sample, sample_labeled};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported feature-space dimensions.
pub const MAX_DIM: usize = 2;

/// One weighted Gaussian: `weight · N(mean, covariance)`.
///
/// `covariance` is stored row-major, `dim × dim`; in one dimension it is the
/// single variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub covariance: Vec<f64>,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let c = GaussianComponent { weight, mean, covariance };
        c.validate()?;
        Ok(c)
    }

    /// 1D component from mean and standard deviation.
    pub fn univariate(weight: f64, mean: f64, sd: f64) -> Result<Self> {
        Self::new(weight, vec![mean], vec![sd * sd])
    }

    /// 2D component from means, standard deviations and a correlation coefficient.
    pub fn bivariate(weight: f64, mean: [f64; 2], sd: [f64; 2], rho: f64) -> Result<Self> {
        let cov = rho * sd[0] * sd[1];
        Self::new(weight, mean.to_vec(), vec![sd[0] * sd[0], cov, cov, sd[1] * sd[1]])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Covariance entry `(r, c)`.
    pub fn cov(&self, r: usize, c: usize) -> f64 {
        self.covariance[r * self.dim() + c]
    }

    /// Marginal standard deviation along one axis.
    pub fn sd(&self, axis: usize) -> f64 {
        self.cov(axis, axis).sqrt()
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {d} not in 1..={MAX_DIM}")));
        }
        if self.covariance.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "covariance has {} entries, expected {}",
                self.covariance.len(),
                d * d
            )));
        }
        if !(self.weight > 0.0 && self.weight <= 1.0) {
            return Err(Error::InvalidArgument(format!("weight {} not in (0, 1]", self.weight)));
        }
        if self.mean.iter().chain(&self.covariance).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite component parameter".into()));
        }
        if d == 2 && self.covariance[1] != self.covariance[2] {
            return Err(Error::InvalidArgument("covariance is not symmetric".into()));
        }
        density::Prepared::new(self).map(|_| ())
    }
}

/// `k` weighted Gaussian components sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    dim: usize,
    components: Vec<GaussianComponent>,
}

impl MixtureModel {
    /// Validates the components and renormalizes the weights.
    ///
    /// Weights must already sum to one within 1e-6; they are then rescaled so
    /// the sum is one to machine precision.
    pub fn new(mut components: Vec<GaussianComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("mixture needs at least one component".into()))?;
        let dim = first.dim();
        for c in &components {
            c.validate()?;
            if c.dim() != dim {
                return Err(Error::InvalidArgument("components differ in dimension".into()));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        for c in &mut components {
            c.weight /= total;
        }
        Ok(MixtureModel { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// Means along one axis, in component order.
    pub fn means(&self, axis: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.mean[axis]).collect()
    }

    /// Component order that sorts by ascending first-coordinate mean (stable).
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.k()).collect();
        order.sort_by(|&a, &b| self.components[a].mean[0].total_cmp(&self.components[b].mean[0]));
        order
    }

    /// Copy with components sorted by ascending first-coordinate mean.
    pub fn sorted(&self) -> MixtureModel {
        let components = self.ascending_order().into_iter().map(|j| self.components[j].clone()).collect();
        MixtureModel { dim: self.dim, components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_validation() {
        let a = GaussianComponent::univariate(0.5, 0.0, 1.0).unwrap();
        let b = GaussianComponent::univariate(0.5, 2.0, 1.0).unwrap();
        let m = MixtureModel::new(vec![a.clone(), b]).unwrap();
        assert_eq!(m.k(), 2);
        assert!(MixtureModel::new(vec![a.clone()]).is_err(), "weight 0.5 alone does not sum to 1");
        assert!(MixtureModel::new(vec![]).is_err());
        assert!(GaussianComponent::univariate(0.0, 0.0, 1.0).is_err());
        assert!(GaussianComponent::univariate(1.0, 0.0, 0.0).is_err());
        let two_d = GaussianComponent::bivariate(0.5, [0.0, 0.0], [1.0, 1.0], 0.0).unwrap();
        assert!(MixtureModel::new(vec![a, two_d]).is_err());
    }

    #[test]
    fn singular_and_asymmetric_covariances_rejected() {
        assert!(GaussianComponent::bivariate(1.0, [0.0, 0.0], [1.0, 1.0], 1.0).is_err());
        assert!(GaussianComponent::new(1.0, vec![0.0, 0.0], vec![1.0, 0.2, 0.3, 1.0]).is_err());
    }

    #[test]
    fn weights_renormalized() {
        let m = MixtureModel::new(vec![
            GaussianComponent::univariate(0.645, 145.55, 14.12).unwrap(),
            GaussianComponent::univariate(0.226, 226.50, 38.42).unwrap(),
            GaussianComponent::univariate(0.129, 337.02, 31.69).unwrap(),
        ])
        .unwrap();
        assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sorting_by_first_mean() {
        let m = MixtureModel::new(vec![
            GaussianComponent::univariate(0.2, 5.0, 1.0).unwrap(),
            GaussianComponent::univariate(0.3, -1.0, 1.0).unwrap(),
            GaussianComponent::univariate(0.5, 2.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.ascending_order(), vec![1, 2, 0]);
        assert_eq!(m.sorted().means(0), vec![-1.0, 2.0, 5.0]);
    }
}
