//! Data-sufficiency checks: cross-validated agreement between fold models and
//! a full-data ground truth, swept over dataset size and component count.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{fit_em, predict_rows, FitConfig};
use crate::seeding::{derive_seed, rng_from};
use crate::stats::{adjusted_rand, kmeans, Labeling};

const TAG_SUBSAMPLE: u64 = 1;
const TAG_SPLIT: u64 = 2;
const TAG_FOLD_FIT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Gmm,
    Kmeans,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmm" => Ok(Algorithm::Gmm),
            "kmeans" => Ok(Algorithm::Kmeans),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm '{s}' (gmm, kmeans)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k_components: usize,
    pub n_folds_range: Vec<usize>,
    /// Algorithm trained on each fold. The ground truth is always a mixture fit.
    pub algorithm: Algorithm,
    pub seed: u64,
    pub size_step: usize,
    /// Used for the ground-truth fit and, with `fold_restarts`, for fold fits.
    pub fit: FitConfig,
    /// Restarts for each fold's mixture fit; `None` uses `fit.n_restarts`.
    pub fold_restarts: Option<usize>,
    /// Every score at the largest size must exceed this.
    pub min_score: f64,
    /// Score spread at the largest size must stay below this.
    pub max_std: f64,
}

impl CvConfig {
    pub fn new(k_components: usize) -> Self {
        CvConfig {
            k_components,
            n_folds_range: (2..=7).collect(),
            algorithm: Algorithm::Gmm,
            seed: 0,
            size_step: 50,
            fit: FitConfig::default(),
            fold_restarts: None,
            min_score: 0.95,
            max_std: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_components == 0 {
            return Err(Error::InvalidArgument("k_components must be >= 1".into()));
        }
        if self.n_folds_range.is_empty() || self.n_folds_range.iter().any(|&f| f < 2) {
            return Err(Error::InvalidArgument("n_folds values must be >= 2 and non-empty".into()));
        }
        if self.size_step == 0 {
            return Err(Error::InvalidArgument("size_step must be >= 1".into()));
        }
        if self.fold_restarts == Some(0) {
            return Err(Error::InvalidArgument("fold_restarts must be >= 1".into()));
        }
        self.fit.validate()
    }

    fn fold_fit(&self, seed: u64) -> FitConfig {
        let mut cfg = self.fit.clone().with_seed(seed);
        if let Some(r) = self.fold_restarts {
            cfg.n_restarts = r;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `0..n` cut into `n_folds` contiguous folds. The first
/// `n % n_folds` folds hold one extra element.
pub fn kfold_split(n: usize, n_folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if n_folds < 2 {
        return Err(Error::InvalidArgument("n_folds must be >= 2".into()));
    }
    if n < n_folds {
        return Err(Error::InvalidArgument(format!("{n} points cannot fill {n_folds} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from(seed));
    let (base, extra) = (n / n_folds, n % n_folds);
    let mut start = 0;
    let mut folds = Vec::with_capacity(n_folds);
    for f in 0..n_folds {
        let len = base + usize::from(f < extra);
        let test = perm[start..start + len].to_vec();
        let train = perm[..start].iter().chain(&perm[start + len..]).copied().collect();
        folds.push(Fold { train, test });
        start += len;
    }
    Ok(folds)
}

/// Labels from a mixture fitted once to all of `data`.
pub fn ground_truth_labels(data: ArrayView2<f64>, k_components: usize, fit: &FitConfig) -> Result<Labeling> {
    let result = fit_em(data, k_components, fit)?;
    Labeling::new(predict_rows(&result.model, data)?, k_components)
}

/// Score of one test fold, or why it could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub n_folds: usize,
    pub fold: usize,
    pub score: Option<f64>,
    pub error: Option<String>,
}

fn rows(data: &ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    data.select(Axis(0), idx)
}

fn score_fold(
    data: &ArrayView2<f64>,
    truth: &Labeling,
    fold: &Fold,
    config: &CvConfig,
    seed: u64,
) -> Result<f64> {
    let train = rows(data, &fold.train);
    let test = rows(data, &fold.test);
    let predicted = match config.algorithm {
        Algorithm::Gmm => {
            let fit = fit_em(train.view(), config.k_components, &config.fold_fit(seed))?;
            predict_rows(&fit.model, test.view())?
        }
        Algorithm::Kmeans => kmeans(train.view(), config.k_components, seed)?.predict_rows(test.view()),
    };
    adjusted_rand(&predicted, truth.subset(&fold.test).labels())
}

/// Trains on every fold split for every `n_folds` in the config and scores
/// the held-out predictions against `truth` by adjusted Rand index.
///
/// `salt` separates the random streams of different callers (the size sweep
/// passes the subsample size). Failed fits are returned as outcomes without
/// a score.
pub fn cross_validate(
    data: ArrayView2<f64>,
    truth: &Labeling,
    config: &CvConfig,
    salt: u64,
) -> Result<Vec<FoldOutcome>> {
    config.validate()?;
    let n = data.nrows();
    if truth.len() != n {
        return Err(Error::InvalidArgument("ground truth length differs from data".into()));
    }
    let mut out = Vec::new();
    for &n_folds in &config.n_folds_range {
        let folds = kfold_split(n, n_folds, derive_seed(config.seed, &[TAG_SPLIT, salt, n_folds as u64]))?;
        for (f, fold) in folds.iter().enumerate() {
            let seed = derive_seed(config.seed, &[TAG_FOLD_FIT, salt, n_folds as u64, f as u64]);
            let outcome = match score_fold(&data, truth, fold, config, seed) {
                Ok(s) => FoldOutcome { n_folds, fold: f, score: Some(s), error: None },
                Err(e) => FoldOutcome { n_folds, fold: f, score: None, error: Some(e.to_string()) },
            };
            out.push(outcome);
        }
    }
    Ok(out)
}

/// Mean and population standard deviation of the successful scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub count: usize,
    pub failures: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
}

impl ScoreSummary {
    fn of<'a>(outcomes: impl Iterator<Item = &'a FoldOutcome>) -> Self {
        let mut scores = Vec::new();
        let mut failures = 0;
        for o in outcomes {
            match o.score {
                Some(s) => scores.push(s),
                None => failures += 1,
            }
        }
        if scores.is_empty() {
            return ScoreSummary { count: 0, failures, mean: None, std: None, min: None };
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
        ScoreSummary { count: scores.len(), failures, mean: Some(mean), std: Some(var.sqrt()), min: Some(min) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub size: usize,
    pub outcomes: Vec<FoldOutcome>,
    /// All `n_folds` values pooled.
    pub summary: ScoreSummary,
    pub per_n_folds: BTreeMap<usize, ScoreSummary>,
}

impl SizeReport {
    fn new(size: usize, outcomes: Vec<FoldOutcome>) -> Self {
        let summary = ScoreSummary::of(outcomes.iter());
        let mut per_n_folds = BTreeMap::new();
        for f in outcomes.iter().map(|o| o.n_folds) {
            per_n_folds
                .entry(f)
                .or_insert_with(|| ScoreSummary::of(outcomes.iter().filter(|o| o.n_folds == f)));
        }
        SizeReport { size, outcomes, summary, per_n_folds }
    }

    pub fn scores(&self) -> Vec<f64> {
        self.outcomes.iter().filter_map(|o| o.score).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: CvConfig,
    pub n_points: usize,
    pub per_size: BTreeMap<usize, SizeReport>,
    pub verdict: bool,
}

/// One point of a score-vs-size chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub size: usize,
    pub n_folds: usize,
    pub fold: usize,
    pub score: Option<f64>,
}

impl CvReport {
    pub fn largest(&self) -> &SizeReport {
        self.per_size.values().next_back().expect("at least one size")
    }

    /// Sufficiency at the largest size for arbitrary thresholds: every fold
    /// scored, all scores above `min_score` and their spread below `max_std`.
    pub fn verdict_with(&self, min_score: f64, max_std: f64) -> bool {
        let s = &self.largest().summary;
        match (s.min, s.std) {
            (Some(min), Some(std)) => s.failures == 0 && min > min_score && std < max_std,
            _ => false,
        }
    }

    pub fn table(&self) -> Vec<ScoreRow> {
        self.per_size
            .values()
            .flat_map(|r| {
                r.outcomes.iter().map(move |o| ScoreRow {
                    size: r.size,
                    n_folds: o.n_folds,
                    fold: o.fold,
                    score: o.score,
                })
            })
            .collect()
    }
}

/// Subsample sizes: multiples of `step` up to `n`, or just `n` when the step
/// exceeds it.
pub fn sweep_sizes(n: usize, step: usize) -> Vec<usize> {
    let sizes: Vec<usize> = (1..).map(|i| i * step).take_while(|&s| s <= n).collect();
    if sizes.is_empty() {
        vec![n]
    } else {
        sizes
    }
}

/// Cross-validates nested seeded subsamples of growing size against one
/// ground truth fitted to all of `data`.
pub fn data_size_sweep(data: ArrayView2<f64>, config: &CvConfig) -> Result<CvReport> {
    config.validate()?;
    let n = data.nrows();
    let max_folds = *config.n_folds_range.iter().max().expect("validated non-empty");
    if n < max_folds.max(2) {
        return Err(Error::InsufficientData { required: max_folds.max(2), available: n });
    }
    let truth = ground_truth_labels(data, config.k_components, &config.fit.clone().with_seed(config.seed))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(derive_seed(config.seed, &[TAG_SUBSAMPLE])));

    let mut per_size = BTreeMap::new();
    for size in sweep_sizes(n, config.size_step) {
        if size < max_folds {
            return Err(Error::InsufficientData { required: max_folds, available: size });
        }
        let idx = &order[..size];
        let sub = rows(&data, idx);
        let outcomes = cross_validate(sub.view(), &truth.subset(idx), config, size as u64)?;
        per_size.insert(size, SizeReport::new(size, outcomes));
    }
    let mut report = CvReport { config: config.clone(), n_points: n, per_size, verdict: false };
    report.verdict = report.verdict_with(config.min_score, config.max_std);
    Ok(report)
}

/// Runs [`data_size_sweep`] once per candidate component count.
pub fn cluster_count_scan(data: ArrayView2<f64>, k_list: &[usize], config: &CvConfig) -> Result<BTreeMap<usize, CvReport>> {
    if k_list.is_empty() {
        return Err(Error::InvalidArgument("k list is empty".into()));
    }
    k_list
        .iter()
        .map(|&k| {
            let cfg = CvConfig { k_components: k, ..config.clone() };
            data_size_sweep(data, &cfg).map(|r| (k, r))
        })
        .collect()
}
