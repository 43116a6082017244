//! Parameter counting, BIC, and sweeps over the number of components.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mixture::{fit_em, CovarianceKind, FitConfig, FitResult};

/// Free parameters of a full-covariance mixture: `k·D` means,
/// `k·D(D+1)/2` covariance entries and `k − 1` weights.
pub fn param_count(k_components: usize, dim: usize) -> usize {
    param_count_for(k_components, dim, CovarianceKind::Full)
}

/// [`param_count`] for either covariance structure.
pub fn param_count_for(k_components: usize, dim: usize, kind: CovarianceKind) -> usize {
    let cov_entries = match kind {
        CovarianceKind::Full => dim * (dim + 1) / 2,
        CovarianceKind::Diagonal => dim,
    };
    k_components * dim + k_components * cov_entries + k_components.saturating_sub(1)
}

/// `−2 ln L + d ln n`.
pub fn bic(log_likelihood: f64, d: usize, n: usize) -> f64 {
    -2.0 * log_likelihood + bic_penalty(d, n)
}

/// The complexity term `d ln n` on its own.
pub fn bic_penalty(d: usize, n: usize) -> f64 {
    d as f64 * (n as f64).ln()
}

/// Inclusive range of component counts to try.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl KRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::InvalidArgument(format!("invalid k range [{min}, {max}]")));
        }
        Ok(KRange { min, max })
    }
}

impl Default for KRange {
    fn default() -> Self {
        KRange { min: 1, max: 9 }
    }
}

/// One k of a sweep: either a fit or the reason every restart failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SweepEntry {
    Fitted(FitResult),
    Failed { error: String },
}

impl SweepEntry {
    pub fn fit(&self) -> Option<&FitResult> {
        match self {
            SweepEntry::Fitted(f) => Some(f),
            SweepEntry::Failed { .. } => None,
        }
    }
}

/// A row of the BIC curve table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub log_likelihood: Option<f64>,
    pub param_count: usize,
    pub bic: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicSweep {
    pub k_range: KRange,
    pub entries: BTreeMap<usize, SweepEntry>,
    pub optimal_k: usize,
    pub n_points: usize,
    pub dim: usize,
}

impl BicSweep {
    /// Assembles a sweep from per-k outcomes and picks the BIC minimum,
    /// breaking exact ties toward the smaller k.
    pub fn from_entries(
        k_range: KRange,
        entries: BTreeMap<usize, SweepEntry>,
        n_points: usize,
        dim: usize,
    ) -> Result<Self> {
        let optimal_k = argmin_bic(&entries).ok_or_else(|| {
            Error::NumericalDegeneracy("every k in the sweep failed to fit".into())
        })?;
        Ok(BicSweep { k_range, entries, optimal_k, n_points, dim })
    }

    pub fn optimal(&self) -> &FitResult {
        self.entries[&self.optimal_k].fit().expect("optimal k always has a fit")
    }

    /// Successful `(k, bic)` pairs in ascending k.
    pub fn bics(&self) -> Vec<(usize, f64)> {
        self.entries.iter().filter_map(|(&k, e)| e.fit().map(|f| (k, f.bic))).collect()
    }

    pub fn table(&self) -> Vec<SweepRow> {
        self.entries
            .iter()
            .map(|(&k, e)| SweepRow {
                k,
                log_likelihood: e.fit().map(|f| f.log_likelihood),
                param_count: e.fit().map_or_else(|| param_count(k, self.dim), |f| f.param_count),
                bic: e.fit().map(|f| f.bic),
                converged: e.fit().is_some_and(|f| f.converged),
            })
            .collect()
    }
}

fn argmin_bic(entries: &BTreeMap<usize, SweepEntry>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&k, e) in entries {
        if let Some(f) = e.fit() {
            if best.is_none_or(|(_, b)| f.bic < b) {
                best = Some((k, f.bic));
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Fits every k in `k_range` and selects the minimum-BIC model.
///
/// A k whose restarts all degenerate is kept as a [`SweepEntry::Failed`]
/// record; the sweep only errors when no k succeeds.
pub fn sweep(data: ArrayView2<f64>, k_range: KRange, config: &FitConfig) -> Result<BicSweep> {
    let n = data.nrows();
    if k_range.min == 0 || k_range.min > k_range.max {
        return Err(Error::InvalidArgument("invalid k range".into()));
    }
    if k_range.max > n {
        return Err(Error::InsufficientData { required: k_range.max, available: n });
    }
    let mut entries = BTreeMap::new();
    for k in k_range.min..=k_range.max {
        let entry = match fit_em(data, k, config) {
            Ok(fit) => SweepEntry::Fitted(fit),
            Err(e @ (Error::NumericalDegeneracy(_) | Error::EmptyComponent { .. })) => {
                SweepEntry::Failed { error: e.to_string() }
            }
            Err(e) => return Err(e),
        };
        entries.insert(k, entry);
    }
    BicSweep::from_entries(k_range, entries, n, data.ncols())
}

/// How decisively the optimal k beat the runner-up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BicMargin {
    pub optimal_k: usize,
    pub runner_up_k: usize,
    /// `BIC(runner-up) − BIC(optimal)`, never negative.
    pub margin: f64,
    /// `d ln N` of the optimal model, for judging the margin's size.
    pub reference_scale: f64,
}

pub fn bic_margin(sweep: &BicSweep) -> Result<BicMargin> {
    let bics = sweep.bics();
    if bics.len() < 2 {
        return Err(Error::InsufficientSweep(format!(
            "need at least 2 successful entries, have {}",
            bics.len()
        )));
    }
    let optimal_bic = sweep.optimal().bic;
    let (runner_up_k, runner_up_bic) = bics
        .iter()
        .filter(|(k, _)| *k != sweep.optimal_k)
        .copied()
        .fold(None, |acc: Option<(usize, f64)>, (k, b)| match acc {
            Some((_, best)) if best <= b => acc,
            _ => Some((k, b)),
        })
        .expect("at least one other entry");
    Ok(BicMargin {
        optimal_k: sweep.optimal_k,
        runner_up_k,
        margin: runner_up_bic - optimal_bic,
        reference_scale: bic_penalty(sweep.optimal().param_count, sweep.n_points),
    })
}
