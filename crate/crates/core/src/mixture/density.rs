use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};

use super::{GaussianComponent, MixtureModel};
use crate::error::{Error, Result};

/// Cholesky-factored component, ready for repeated log-density evaluation.
///
/// Only `dim <= 2` is supported so the factor lives in fixed arrays.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Prepared {
    dim: usize,
    mean: [f64; 2],
    // Lower Cholesky factor [l11, l21, l22].
    chol: [f64; 3],
    // Reciprocal diagonal of the factor.
    inv_diag: [f64; 2],
    // -0.5 * (dim * ln 2π + ln det Σ)
    log_norm: f64,
    log_weight: f64,
}

impl Prepared {
    pub(crate) fn new(c: &GaussianComponent) -> Result<Self> {
        let dim = c.dim();
        let singular = || Error::NumericalDegeneracy("covariance is not positive definite".into());
        let (chol, log_det) = match dim {
            1 => {
                let v = c.covariance[0];
                if !(v > 0.0) || !v.is_finite() {
                    return Err(singular());
                }
                let l = v.sqrt();
                ([l, 0.0, 0.0], v.ln())
            }
            2 => {
                let (a, b, d) = (c.covariance[0], c.covariance[1], c.covariance[3]);
                if !(a > 0.0) || !a.is_finite() {
                    return Err(singular());
                }
                let l11 = a.sqrt();
                let l21 = b / l11;
                // l22² = det / a. Kahan's fused determinant keeps thin
                // (floor-bound) covariances accurate where d - l21² cancels.
                let bb = b * b;
                let det = a.mul_add(d, -bb) + b.mul_add(-b, bb);
                if !(det > 0.0) || !det.is_finite() {
                    return Err(singular());
                }
                let l22 = (det / a).sqrt();
                ([l11, l21, l22], det.ln())
            }
            _ => return Err(Error::InvalidArgument(format!("dimension {dim} unsupported"))),
        };
        let mut mean = [0.0; 2];
        mean[..dim].copy_from_slice(&c.mean);
        Ok(Prepared {
            dim,
            mean,
            chol,
            inv_diag: [1.0 / chol[0], if dim == 2 { 1.0 / chol[2] } else { 0.0 }],
            log_norm: -0.5 * (dim as f64 * (2.0 * PI).ln() + log_det),
            log_weight: c.weight.ln(),
        })
    }

    /// Lower Cholesky factor packed as `[l11, l21, l22]`.
    pub(crate) fn cholesky(&self) -> [f64; 3] {
        self.chol
    }

    /// Squared Mahalanobis distance of `x` from the mean.
    #[inline]
    pub(crate) fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let z1 = (x[0] - self.mean[0]) * self.inv_diag[0];
        if self.dim == 1 {
            z1 * z1
        } else {
            let z2 = (x[1] - self.mean[1] - self.chol[1] * z1) * self.inv_diag[1];
            z1 * z1 + z2 * z2
        }
    }

    /// `ln N(x | µ, Σ)`, weight not applied.
    #[inline]
    pub(crate) fn log_density(&self, x: &[f64]) -> f64 {
        self.log_norm - 0.5 * self.mahalanobis_sq(x)
    }

    #[inline]
    pub(crate) fn weighted_log_density(&self, x: &[f64]) -> f64 {
        self.log_weight + self.log_density(x)
    }
}

pub(crate) fn prepare(model: &MixtureModel) -> Result<Vec<Prepared>> {
    model.components().iter().map(Prepared::new).collect()
}

fn check_dim(data: &ArrayView2<f64>, model: &MixtureModel) -> Result<()> {
    if data.ncols() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "data has {} columns but the model is {}-dimensional",
            data.ncols(),
            model.dim()
        )));
    }
    if data.nrows() == 0 {
        return Err(Error::EmptyInput("no data points".into()));
    }
    Ok(())
}

/// Density of a single (unweighted) component at `x`.
pub fn gaussian_density(x: &[f64], component: &GaussianComponent) -> Result<f64> {
    if x.len() != component.dim() {
        return Err(Error::InvalidArgument("point and component dimensions differ".into()));
    }
    let p = Prepared::new(component)?;
    Ok(p.log_density(x).exp())
}

/// Fills `resp` (N×k) with posteriors and returns per-point log mixture
/// densities. All work is done in log space with a per-row max shift.
pub(crate) fn e_step_into(
    data: &ArrayView2<f64>,
    comps: &[Prepared],
    resp: &mut Array2<f64>,
    point_ll: &mut [f64],
) -> Result<f64> {
    let dim = data.ncols();
    let k = comps.len();
    let rows = data.as_slice().expect("data in standard layout");
    let resp = resp.as_slice_mut().expect("responsibilities in standard layout");
    let mut total = 0.0;
    for (i, (x, r)) in rows.chunks_exact(dim).zip(resp.chunks_exact_mut(k)).enumerate() {
        let mut max = f64::NEG_INFINITY;
        for (rj, c) in r.iter_mut().zip(comps) {
            let l = c.weighted_log_density(x);
            *rj = l;
            if l > max {
                max = l;
            }
        }
        if !max.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "mixture density at point {i} is zero or undefined"
            )));
        }
        let mut sum = 0.0;
        for rj in r.iter_mut() {
            *rj = (*rj - max).exp();
            sum += *rj;
        }
        let inv = 1.0 / sum;
        for rj in r.iter_mut() {
            *rj *= inv;
        }
        let ll = max + sum.ln();
        point_ll[i] = ll;
        total += ll;
    }
    Ok(total)
}

/// `Σ_i ln Σ_j α_j N(x_i | µ_j, Σ_j)`, stabilized per point with log-sum-exp.
pub fn log_likelihood(data: ArrayView2<f64>, model: &MixtureModel) -> Result<f64> {
    check_dim(&data, model)?;
    let comps = prepare(model)?;
    let mut terms = vec![0.0; comps.len()];
    let mut total = 0.0;
    for (i, x) in data.rows().into_iter().enumerate() {
        let x = x.to_vec();
        let mut max = f64::NEG_INFINITY;
        for (t, c) in terms.iter_mut().zip(&comps) {
            *t = c.weighted_log_density(&x);
            max = max.max(*t);
        }
        if !max.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "mixture density at point {i} is zero or undefined"
            )));
        }
        total += max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
    }
    Ok(total)
}

/// Posterior component probabilities `p(j | x_i)` for every point (N×k).
pub fn e_step(data: ArrayView2<f64>, model: &MixtureModel) -> Result<Array2<f64>> {
    check_dim(&data, model)?;
    let comps = prepare(model)?;
    let data = data.as_standard_layout();
    let mut resp = Array2::zeros((data.nrows(), model.k()));
    let mut point_ll = vec![0.0; data.nrows()];
    e_step_into(&data.view(), &comps, &mut resp, &mut point_ll)?;
    Ok(resp)
}

/// Hard assignment for one point plus its full posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub component: usize,
    pub probabilities: Vec<f64>,
}

/// Most probable component for `point`; exact ties go to the lower index.
pub fn predict(model: &MixtureModel, point: &[f64]) -> Result<Posterior> {
    if point.len() != model.dim() {
        return Err(Error::InvalidArgument("point and model dimensions differ".into()));
    }
    let comps = prepare(model)?;
    Ok(predict_prepared(&comps, point))
}

pub(crate) fn predict_prepared(comps: &[Prepared], point: &[f64]) -> Posterior {
    let logs: Vec<f64> = comps.iter().map(|c| c.weighted_log_density(point)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probabilities: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= sum);
    let mut component = 0;
    for (j, p) in probabilities.iter().enumerate() {
        if *p > probabilities[component] {
            component = j;
        }
    }
    Posterior { component, probabilities }
}

/// Hard labels for every row of `data`.
pub fn predict_rows(model: &MixtureModel, data: ArrayView2<f64>) -> Result<Vec<usize>> {
    check_dim(&data, model)?;
    let comps = prepare(model)?;
    Ok(data
        .rows()
        .into_iter()
        .map(|x| predict_prepared(&comps, &x.to_vec()).component)
        .collect())
}
