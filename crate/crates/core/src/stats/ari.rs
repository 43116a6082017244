use std::collections::HashMap;

use crate::error::{Error, Result};

/// Maps arbitrary labels onto `0..m` in order of first appearance.
fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let dense = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (dense, map.len())
}

fn pairs(n: u64) -> i128 {
    (n as i128) * (n as i128 - 1) / 2
}

/// Adjusted Rand index of two partitions of the same points.
///
/// Uses the permutation-model correction computed from the contingency table:
/// `(index − expected) / (max − expected)`. Everything up to the final
/// division is exact integer arithmetic, so the result does not depend on
/// label values or argument order. When the correction degenerates (both
/// partitions are the same trivial partition) the score is 1.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "labelings differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument("adjusted Rand index needs at least 2 points".into()));
    }
    let (da, ka) = densify(a);
    let (db, kb) = densify(b);
    let mut table = vec![0u64; ka * kb];
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for (&i, &j) in da.iter().zip(&db) {
        table[i * kb + j] += 1;
        rows[i] += 1;
        cols[j] += 1;
    }
    let index: i128 = table.iter().map(|&c| pairs(c)).sum();
    let sum_a: i128 = rows.iter().map(|&c| pairs(c)).sum();
    let sum_b: i128 = cols.iter().map(|&c| pairs(c)).sum();
    let total = pairs(n as u64);
    // ARI = (index − sa·sb/T) / ((sa+sb)/2 − sa·sb/T), cleared of fractions.
    let numerator = 2 * (total * index - sum_a * sum_b);
    let denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(numerator as f64 / denominator as f64)
}
