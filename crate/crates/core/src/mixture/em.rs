use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::density::{e_step_into, prepare};
use super::{GaussianComponent, MixtureModel, MAX_DIM};
use crate::error::{Error, Result};
use crate::seeding::{derive_seed, kmeans_plus_plus, rng_from};
use crate::select;

/// Components whose effective count falls below this are considered empty.
pub const EMPTY_COMPONENT_THRESHOLD: f64 = 1e-8;

/// A run is abandoned as degenerate once it has needed this many re-seeds.
pub const RESEED_LIMIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceKind {
    #[default]
    Full,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Stop once `|Δ ln L|` between iterations drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub n_restarts: usize,
    pub seed: u64,
    /// Lower bound on covariance eigenvalues after each M-step, GPa².
    pub reg_floor: f64,
    pub covariance: CovarianceKind,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tolerance: 1e-6,
            max_iterations: 500,
            n_restarts: 10,
            seed: 0,
            reg_floor: 1e-6,
            covariance: CovarianceKind::Full,
        }
    }
}

impl FitConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, n_restarts: usize) -> Self {
        self.n_restarts = n_restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance >= 0.0) || self.max_iterations == 0 || self.n_restarts == 0 {
            return Err(Error::InvalidArgument(
                "tolerance must be >= 0, max_iterations and n_restarts >= 1".into(),
            ));
        }
        if !(self.reg_floor >= 0.0) || !self.reg_floor.is_finite() {
            return Err(Error::InvalidArgument("regularization floor must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub attempted: usize,
    pub degenerate: usize,
    /// Index of the restart that produced the reported fit.
    pub best: usize,
}

/// Outcome of [`fit_em`]. Components are sorted by ascending first-coordinate
/// mean and the responsibility columns follow the same order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: MixtureModel,
    pub log_likelihood: f64,
    pub bic: f64,
    pub param_count: usize,
    pub n_points: usize,
    pub n_iterations: usize,
    pub converged: bool,
    pub seed: u64,
    pub covariance: CovarianceKind,
    pub restarts: RestartSummary,
    /// `p(j | x_i)` under the final model, N×k.
    #[serde(skip)]
    pub responsibilities: Array2<f64>,
    /// ln L after initialization and after every iteration of the winning run.
    #[serde(skip)]
    pub log_likelihood_trace: Vec<f64>,
    /// Iterations of the winning run at which an empty component was re-seeded.
    #[serde(skip)]
    pub reseed_iterations: Vec<usize>,
}

impl FitResult {
    /// Hard labels: argmax of each responsibility row, ties to the lower index.
    pub fn labels(&self) -> Vec<usize> {
        self.responsibilities
            .rows()
            .into_iter()
            .map(|r| {
                let mut best = 0;
                for (j, &p) in r.iter().enumerate() {
                    if p > r[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

struct SufficientStats {
    counts: Vec<f64>,
    means: Vec<[f64; 2]>,
    // Packed symmetric [s11, s12, s22].
    scatter: Vec<[f64; 3]>,
}

fn accumulate(data: &ArrayView2<f64>, resp: &ArrayView2<f64>) -> SufficientStats {
    let k = resp.ncols();
    let dim = data.ncols();
    let data = data.as_standard_layout();
    let resp = resp.as_standard_layout();
    let xs = data.as_slice().expect("standard layout");
    let ps = resp.as_slice().expect("standard layout");
    let mut counts = vec![0.0; k];
    let mut sums = vec![[0.0f64; 2]; k];
    for (x, r) in xs.chunks_exact(dim).zip(ps.chunks_exact(k)) {
        for ((c, s), &p) in counts.iter_mut().zip(sums.iter_mut()).zip(r) {
            *c += p;
            s[0] += p * x[0];
            if dim == 2 {
                s[1] += p * x[1];
            }
        }
    }
    let means: Vec<[f64; 2]> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0.0 { [s[0] / c, s[1] / c] } else { [0.0; 2] })
        .collect();
    // Second pass around the final means keeps the scatter free of cancellation.
    let mut scatter = vec![[0.0f64; 3]; k];
    for (x, r) in xs.chunks_exact(dim).zip(ps.chunks_exact(k)) {
        for ((sc, m), &p) in scatter.iter_mut().zip(&means).zip(r) {
            let d0 = x[0] - m[0];
            sc[0] += p * d0 * d0;
            if dim == 2 {
                let d1 = x[1] - m[1];
                sc[1] += p * d0 * d1;
                sc[2] += p * d1 * d1;
            }
        }
    }
    SufficientStats { counts, means, scatter }
}

/// Raises the eigenvalues of a packed symmetric 2×2 matrix `[a, b, d]` to at
/// least `floor`. Matrices already above the floor are returned unchanged.
fn clamp_eigenvalues([a, b, d]: [f64; 3], floor: f64) -> [f64; 3] {
    let l1 = 0.5 * (a + d) + (0.5 * (a - d)).hypot(b);
    // det / l1 avoids the cancellation in (a + d)/2 - disc for thin matrices.
    let l2 = if l1 > 0.0 { a.mul_add(d, -(b * b)) / l1 } else { l1 };
    if l2 >= floor {
        return [a, b, d];
    }
    // Eigenvector of l1 from whichever row of (S - l1 I) is better conditioned.
    let (vx, vy) = if a >= d { (l1 - d, b) } else { (b, l1 - a) };
    let norm = vx.hypot(vy);
    if norm == 0.0 {
        return [a.max(floor), 0.0, d.max(floor)];
    }
    let (ux, uy) = (vx / norm, vy / norm);
    let (m1, m2) = (l1.max(floor), floor);
    [m1 * ux * ux + m2 * uy * uy, (m1 - m2) * ux * uy, m1 * uy * uy + m2 * ux * ux]
}

fn component_from_stats(
    stats: &SufficientStats,
    j: usize,
    dim: usize,
    total: f64,
    reg_floor: f64,
    kind: CovarianceKind,
) -> GaussianComponent {
    let c = stats.counts[j];
    let s = stats.scatter[j];
    let covariance = if dim == 1 {
        vec![(s[0] / c).max(reg_floor)]
    } else {
        let [a, b, d] = match kind {
            CovarianceKind::Full => clamp_eigenvalues([s[0] / c, s[1] / c, s[2] / c], reg_floor),
            CovarianceKind::Diagonal => [(s[0] / c).max(reg_floor), 0.0, (s[2] / c).max(reg_floor)],
        };
        vec![a, b, b, d]
    };
    GaussianComponent { weight: c / total, mean: stats.means[j][..dim].to_vec(), covariance }
}

/// Re-estimates weights, means and covariances from responsibilities.
///
/// Means are responsibility-weighted averages and weights the effective
/// counts over N. Covariances are the responsibility-weighted scatter divided
/// by the effective count (the maximum-likelihood form), with eigenvalues
/// raised to at least `reg_floor`. That is the exact maximizer of the EM
/// objective over covariances bounded below by the floor, so EM keeps its
/// likelihood ascent while components cannot collapse onto single points.
pub fn m_step(
    data: ArrayView2<f64>,
    responsibilities: ArrayView2<f64>,
    reg_floor: f64,
    kind: CovarianceKind,
) -> Result<MixtureModel> {
    let (n, dim) = data.dim();
    if responsibilities.nrows() != n || responsibilities.ncols() == 0 {
        return Err(Error::InvalidArgument("responsibilities must be N×k with k >= 1".into()));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimension {dim} unsupported")));
    }
    let stats = accumulate(&data, &responsibilities);
    if let Some((j, &c)) =
        stats.counts.iter().enumerate().find(|(_, &c)| !(c >= EMPTY_COMPONENT_THRESHOLD))
    {
        return Err(Error::EmptyComponent { component: j, effective_count: c });
    }
    let total: f64 = stats.counts.iter().sum();
    let components = (0..stats.counts.len())
        .map(|j| component_from_stats(&stats, j, dim, total, reg_floor, kind))
        .collect();
    Ok(MixtureModel { dim, components })
}

/// Biased covariance of all points, eigenvalues floored.
fn pooled_covariance(data: &ArrayView2<f64>, reg_floor: f64, kind: CovarianceKind) -> Vec<f64> {
    let ones = Array2::from_elem((data.nrows(), 1), 1.0);
    let stats = accumulate(data, &ones.view());
    let comp = component_from_stats(&stats, 0, data.ncols(), stats.counts[0], reg_floor, kind);
    let mut cov = comp.covariance;
    // Identical points leave only the floor; keep the start well-conditioned.
    for a in 0..data.ncols() {
        let idx = a * data.ncols() + a;
        if cov[idx] <= 0.0 {
            cov[idx] = 1.0;
        }
    }
    cov
}

struct Run {
    model: MixtureModel,
    log_likelihood: f64,
    responsibilities: Array2<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    reseeds: Vec<usize>,
}

fn run_once(
    data: &ArrayView2<f64>,
    k: usize,
    config: &FitConfig,
    pooled: &[f64],
    seed: u64,
) -> Result<Run> {
    let (n, dim) = data.dim();
    let mut rng = rng_from(seed);
    let centers = kmeans_plus_plus(data.view(), k, &mut rng);
    let components = centers
        .iter()
        .map(|&i| GaussianComponent {
            weight: 1.0 / k as f64,
            mean: data.row(i).to_vec(),
            covariance: pooled.to_vec(),
        })
        .collect();
    let mut model = MixtureModel { dim, components };

    let mut resp = Array2::zeros((n, k));
    let mut point_ll = vec![0.0; n];
    let mut ll = e_step_into(data, &prepare(&model)?, &mut resp, &mut point_ll)?;
    let mut trace = vec![ll];
    let mut reseeds = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iterations {
        iterations = it;
        model = match m_step(data.view(), resp.view(), config.reg_floor, config.covariance) {
            Ok(m) => m,
            Err(Error::EmptyComponent { .. }) => {
                reseeds.push(it);
                if reseeds.len() >= RESEED_LIMIT {
                    return Err(Error::NumericalDegeneracy(format!(
                        "{RESEED_LIMIT} empty-component re-seeds in one run"
                    )));
                }
                reseed(data, &resp, &point_ll, config, pooled)
            }
            Err(e) => return Err(e),
        };
        let next = e_step_into(data, &prepare(&model)?, &mut resp, &mut point_ll)?;
        trace.push(next);
        let delta = next - ll;
        ll = next;
        if delta.abs() < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(Run { model, log_likelihood: ll, responsibilities: resp, iterations, converged, trace, reseeds })
}

/// M-step that moves every empty component onto a poorly explained point.
///
/// Dead components restart at the points with the lowest mixture density
/// (one distinct point each) with the pooled covariance and a weight of one
/// point.
fn reseed(
    data: &ArrayView2<f64>,
    resp: &Array2<f64>,
    point_ll: &[f64],
    config: &FitConfig,
    pooled: &[f64],
) -> MixtureModel {
    let dim = data.ncols();
    let stats = accumulate(data, &resp.view());
    let mut worst: Vec<usize> = (0..point_ll.len()).collect();
    worst.sort_by(|&a, &b| point_ll[a].total_cmp(&point_ll[b]));
    let mut worst = worst.into_iter();
    let raw: Vec<f64> = stats
        .counts
        .iter()
        .map(|&c| if c >= EMPTY_COMPONENT_THRESHOLD { c } else { 1.0 })
        .collect();
    let total: f64 = raw.iter().sum();
    let components = (0..raw.len())
        .map(|j| {
            if stats.counts[j] >= EMPTY_COMPONENT_THRESHOLD {
                let mut c = component_from_stats(&stats, j, dim, total, config.reg_floor, config.covariance);
                c.weight = raw[j] / total;
                c
            } else {
                let i = worst.next().expect("at least as many points as components");
                GaussianComponent {
                    weight: raw[j] / total,
                    mean: data.row(i).to_vec(),
                    covariance: pooled.to_vec(),
                }
            }
        })
        .collect();
    MixtureModel { dim, components }
}

/// Fits a `k`-component mixture by EM with `config.n_restarts` k-means++
/// initializations, keeping the run with the highest final log-likelihood.
///
/// Each restart seeds the means by D² sampling on the data, starts every
/// covariance at the pooled data covariance and the weights uniform. With a
/// single component every restart is identical, so only one is run.
pub fn fit_em(data: ArrayView2<f64>, k: usize, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let (n, dim) = data.dim();
    if k == 0 {
        return Err(Error::InvalidArgument("k_components must be >= 1".into()));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!("dimension {dim} unsupported")));
    }
    if n < k {
        return Err(Error::InsufficientData { required: k, available: n });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("data contains non-finite values".into()));
    }
    let data = data.as_standard_layout();
    let data = data.view();
    let pooled = pooled_covariance(&data, config.reg_floor, config.covariance);

    let attempted = if k == 1 { 1 } else { config.n_restarts };
    let mut best: Option<(usize, Run)> = None;
    let mut degenerate = 0;
    let mut last_error = None;
    for r in 0..attempted {
        let seed = derive_seed(config.seed, &[k as u64, r as u64]);
        match run_once(&data, k, config, &pooled, seed) {
            Ok(run) => {
                if best.as_ref().is_none_or(|(_, b)| run.log_likelihood > b.log_likelihood) {
                    best = Some((r, run));
                }
            }
            Err(e) => {
                degenerate += 1;
                last_error = Some(e);
            }
        }
    }
    let (best_restart, run) = best.ok_or_else(|| {
        Error::NumericalDegeneracy(format!(
            "all {attempted} restarts degenerate (last: {})",
            last_error.map(|e| e.to_string()).unwrap_or_default()
        ))
    })?;

    let order = run.model.ascending_order();
    let model = MixtureModel {
        dim,
        components: order.iter().map(|&j| run.model.components[j].clone()).collect(),
    };
    let responsibilities = Array2::from_shape_fn((n, k), |(i, j)| run.responsibilities[[i, order[j]]]);
    let param_count = select::param_count_for(k, dim, config.covariance);
    Ok(FitResult {
        bic: select::bic(run.log_likelihood, param_count, n),
        model,
        log_likelihood: run.log_likelihood,
        param_count,
        n_points: n,
        n_iterations: run.iterations,
        converged: run.converged,
        seed: config.seed,
        covariance: config.covariance,
        restarts: RestartSummary { attempted, degenerate, best: best_restart },
        responsibilities,
        log_likelihood_trace: run.trace,
        reseed_iterations: run.reseeds,
    })
}
