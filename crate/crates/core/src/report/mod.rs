//! Tables and plot data derived from fits: phase tables, volume fractions,
//! histogram/PDF overlays and covariance ellipses, plus minimal SVG renderings.

pub mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Feature;
use crate::mixture::{gaussian_density, FitResult, MixtureModel};

/// Default histogram bin count.
pub const DEFAULT_BINS: usize = 20;
/// Points on each PDF curve.
pub const PDF_GRID_POINTS: usize = 512;
/// Points on each ellipse polyline.
pub const ELLIPSE_POINTS: usize = 128;
/// Default Mahalanobis radii for ellipse isolines.
pub const DEFAULT_LEVELS: [f64; 2] = [1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub label: String,
    /// GPa, one per feature.
    pub mean: Vec<f64>,
    /// Per-feature standard deviation; reported for 1D fits only.
    pub sd: Option<Vec<f64>>,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub material: String,
    pub features: Vec<Feature>,
    pub rows: Vec<PhaseRow>,
}

/// One row per component, ascending by modulus (first-coordinate) mean.
///
/// 1D rows are labelled by feature symbol (`E_1`, `E_2`, ...) and carry the
/// standard deviation; 2D rows are labelled `P_1`, ... and carry means only.
pub fn phase_table(fit: &FitResult, material: &str, features: &[Feature]) -> Result<PhaseTable> {
    if !fit.converged {
        return Err(Error::NotConverged(format!(
            "fit stopped after {} iterations without meeting the tolerance; refusing to tabulate",
            fit.n_iterations
        )));
    }
    let model = fit.model.sorted();
    if features.len() != model.dim() {
        return Err(Error::InvalidArgument(format!(
            "{} feature names for a {}-dimensional fit",
            features.len(),
            model.dim()
        )));
    }
    let rows = model
        .components()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let (label, sd) = if model.dim() == 1 {
                (format!("{}_{}", features[0].symbol(), j + 1), Some(vec![c.sd(0)]))
            } else {
                (format!("P_{}", j + 1), None)
            };
            PhaseRow { label, mean: c.mean.clone(), sd, percentage: 100.0 * c.weight }
        })
        .collect();
    Ok(PhaseTable { material: material.to_string(), features: features.to_vec(), rows })
}

impl PhaseTable {
    pub fn to_text(&self) -> String {
        let mut out = format!("material: {}\n", self.material);
        let heads: Vec<String> = self.features.iter().map(|f| format!("mean {} [GPa]", f.symbol())).collect();
        out.push_str(&format!("{:<6} {}", "phase", heads.iter().map(|h| format!("{h:>16}")).collect::<String>()));
        if self.features.len() == 1 {
            out.push_str(&format!("{:>16}", "sd [GPa]"));
        }
        out.push_str(&format!("{:>12}\n", "percent"));
        for r in &self.rows {
            out.push_str(&format!("{:<6} ", r.label));
            for m in &r.mean {
                out.push_str(&format!("{m:>16.2}"));
            }
            if let Some(sd) = &r.sd {
                out.push_str(&format!("{:>16.2}", sd[0]));
            }
            out.push_str(&format!("{:>12.1}\n", r.percentage));
        }
        out
    }
}

/// Fraction of everything except the phase whose modulus mean lies nearest
/// `cu_reference_modulus`, i.e. `1 − w_Cu`.
pub fn volume_fraction(model: &MixtureModel, cu_reference_modulus: f64) -> Result<f64> {
    if model.k() < 2 {
        return Err(Error::UndefinedFraction("a single phase has no second-phase fraction".into()));
    }
    let cu = model
        .components()
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a.mean[0] - cu_reference_modulus).abs().total_cmp(&(b.mean[0] - cu_reference_modulus).abs())
        })
        .map(|(j, _)| j)
        .expect("k >= 2");
    Ok(1.0 - model.components()[cu].weight)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    /// count / (N · width)
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdfOverlay {
    pub bins: Vec<HistogramBin>,
    pub grid: Vec<f64>,
    pub mixture: Vec<f64>,
    /// Weighted per-component curves, `components[j][i]` at `grid[i]`.
    pub components: Vec<Vec<f64>>,
}

/// Density histogram of a 1D marginal and the fitted mixture sampled on a
/// grid spanning the data range widened by three pooled standard deviations.
pub fn pdf_overlay(marginal: &[f64], model: &MixtureModel, bins: usize) -> Result<PdfOverlay> {
    if model.dim() != 1 {
        return Err(Error::InvalidArgument("PDF overlay needs a 1D fit".into()));
    }
    if marginal.is_empty() || bins == 0 {
        return Err(Error::InvalidArgument("PDF overlay needs data and at least one bin".into()));
    }
    let n = marginal.len() as f64;
    let lo = marginal.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = marginal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = marginal.iter().sum::<f64>() / n;
    let mut sd = (marginal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd == 0.0 {
        sd = model.components().iter().map(|c| c.sd(0)).fold(0.0, f64::max);
    }
    let (blo, bhi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (bhi - blo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in marginal {
        let b = (((v - blo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let bins = counts
        .iter()
        .enumerate()
        .map(|(b, &count)| HistogramBin {
            left: blo + b as f64 * width,
            right: if b + 1 == bins { bhi } else { blo + (b + 1) as f64 * width },
            count,
            density: count as f64 / (n * width),
        })
        .collect();

    let (glo, ghi) = (lo - 3.0 * sd, hi + 3.0 * sd);
    let step = (ghi - glo) / (PDF_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..PDF_GRID_POINTS).map(|i| glo + i as f64 * step).collect();
    let components = model
        .components()
        .iter()
        .map(|c| grid.iter().map(|&x| gaussian_density(&[x], c).map(|d| c.weight * d)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mixture = (0..grid.len()).map(|i| components.iter().map(|c| c[i]).sum()).collect();
    Ok(PdfOverlay { bins, grid, mixture, components })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Isoline {
    pub component: usize,
    pub level: f64,
    pub mean: [f64; 2],
    pub points: Vec<[f64; 2]>,
}

/// Semi-axis lengths (major first) and the major-axis angle of the unit
/// Mahalanobis ellipse of a 2×2 covariance.
pub fn ellipse_axes(cov: [f64; 4]) -> Result<([f64; 2], f64)> {
    let (a, b, d) = (cov[0], cov[1], cov[3]);
    let half_trace = 0.5 * (a + d);
    let disc = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let (l1, l2) = (half_trace + disc, half_trace - disc);
    if !(l2 > 0.0) || !l1.is_finite() {
        return Err(Error::NumericalDegeneracy(format!("covariance eigenvalues {l1}, {l2} not positive")));
    }
    let angle = 0.5 * (2.0 * b).atan2(a - d);
    Ok(([l1.sqrt(), l2.sqrt()], angle))
}

/// Ellipses `(x−µ)ᵀ Σ⁻¹ (x−µ) = r²` for every component and level, each a
/// closed polyline of 128 points starting on the positive major axis.
pub fn ellipse_isolines(model: &MixtureModel, levels: &[f64]) -> Result<Vec<Isoline>> {
    if model.dim() != 2 {
        return Err(Error::InvalidArgument("ellipse isolines need a 2D fit".into()));
    }
    if levels.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidArgument("ellipse levels must be positive".into()));
    }
    let mut out = Vec::new();
    for (j, c) in model.components().iter().enumerate() {
        let cov = [c.covariance[0], c.covariance[1], c.covariance[2], c.covariance[3]];
        let ([s1, s2], angle) = ellipse_axes(cov)?;
        let (ca, sa) = (angle.cos(), angle.sin());
        for &r in levels {
            let points = (0..ELLIPSE_POINTS)
                .map(|i| {
                    let t = 2.0 * std::f64::consts::PI * i as f64 / ELLIPSE_POINTS as f64;
                    let (u, v) = (r * s1 * t.cos(), r * s2 * t.sin());
                    [c.mean[0] + ca * u - sa * v, c.mean[1] + sa * u + ca * v]
                })
                .collect();
            out.push(Isoline { component: j, level: r, mean: [c.mean[0], c.mean[1]], points });
        }
    }
    Ok(out)
}
