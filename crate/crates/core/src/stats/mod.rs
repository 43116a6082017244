//! Supporting statistics: normality testing, a k-means baseline and the
//! adjusted Rand index.

mod ari;
mod kmeans;
mod shapiro;

pub use ari::adjusted_rand;
pub use kmeans::{kmeans, kmeans_with, KMeansConfig, KMeansFit};
pub use shapiro::{shapiro_wilk, NormalityResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cluster assignment of a set of points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    labels: Vec<usize>,
    k: usize,
}

impl Labeling {
    /// Every label must lie in `[0, k)`.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!("label {bad} outside [0, {k})")));
        }
        Ok(Labeling { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels at the given positions, same k.
    pub fn subset(&self, indices: &[usize]) -> Labeling {
        Labeling { labels: indices.iter().map(|&i| self.labels[i]).collect(), k: self.k }
    }
}
