//! Named parameter sets: cleaning windows for each material and the fitted
//! mixtures reported for the Cu, Cr, CuCr25 and CuCr60 maps, used to drive the
//! synthetic-data generator.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ingest::{CleaningFilter, Dataset, Feature, IndentRecord};
use crate::mixture::{sample, GaussianComponent, MixtureModel};
use crate::seeding::{derive_seed, rng_from};

/// Modulus of the pure-Cu phase, GPa. Default reference for volume fractions.
pub const CU_REFERENCE_MODULUS: f64 = 118.80;

/// Correlation assumed between modulus and hardness within a phase for the 2D
/// presets. Only the 2D means and weights were published.
pub const ASSUMED_2D_CORRELATION: f64 = 0.3;

pub const FILTER_PRESETS: [&str; 4] = ["cu", "cr", "cucr25", "cucr60"];

pub const MIXTURE_PRESETS: [&str; 12] = [
    "cu-1d-E",
    "cu-1d-H",
    "cr-1d-E",
    "cr-1d-H",
    "cucr25-1d-E",
    "cucr25-1d-H",
    "cucr60-1d-E",
    "cucr60-1d-H",
    "cucr25-2d",
    "cucr60-2d",
    "cu-2d",
    "cr-2d",
];

/// Depth window and modulus/hardness ranges for one material.
pub fn filter_preset(name: &str) -> Result<CleaningFilter> {
    let depth = (800.0, 1200.0);
    let (e, h) = match name {
        "cu" => ((50.0, 250.0), (0.3, 2.5)),
        "cr" => ((200.0, 550.0), (1.0, 6.0)),
        "cucr25" => ((100.0, 400.0), (0.8, 4.5)),
        "cucr60" => ((100.0, 500.0), (1.0, 5.0)),
        _ => return Err(unknown("filter", name, &FILTER_PRESETS)),
    };
    CleaningFilter::new(depth, e, h)
}

/// A generating mixture with the features its coordinates stand for.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePreset {
    pub name: &'static str,
    pub material: &'static str,
    pub features: Vec<Feature>,
    /// Where the numbers come from.
    pub note: &'static str,
    pub model: MixtureModel,
}

fn unknown(kind: &str, name: &str, known: &[&str]) -> Error {
    Error::InvalidArgument(format!("unknown {kind} preset '{name}' (known: {})", known.join(", ")))
}

/// `(weight, mean, sd)` triples.
fn uni(rows: &[(f64, f64, f64)]) -> MixtureModel {
    let comps =
        rows.iter().map(|&(w, m, s)| GaussianComponent::univariate(w, m, s).expect("valid preset")).collect();
    MixtureModel::new(comps).expect("valid preset")
}

/// `(weight, [E, H] mean, [E, H] sd)` triples.
fn bi(rows: &[(f64, [f64; 2], [f64; 2])]) -> MixtureModel {
    let comps = rows
        .iter()
        .map(|&(w, m, s)| GaussianComponent::bivariate(w, m, s, ASSUMED_2D_CORRELATION).expect("valid preset"))
        .collect();
    MixtureModel::new(comps).expect("valid preset")
}

pub fn mixture_preset(name: &str) -> Result<MixturePreset> {
    use Feature::{Hardness as H, Modulus as E};
    let (material, features, note, model) = match name {
        "cu-1d-E" => ("Cu", vec![E], "pure Cu, 1D modulus fit", uni(&[(1.0, 118.80, 9.45)])),
        "cu-1d-H" => ("Cu", vec![H], "pure Cu, 1D hardness fit", uni(&[(1.0, 0.91, 0.06)])),
        "cr-1d-E" => ("Cr", vec![E], "pure Cr, 1D modulus fit", uni(&[(1.0, 371.24, 10.54)])),
        "cr-1d-H" => ("Cr", vec![H], "pure Cr, 1D hardness fit", uni(&[(1.0, 3.21, 0.10)])),
        "cucr25-1d-E" => (
            "CuCr25",
            vec![E],
            "CuCr25, 1D modulus fit at the BIC optimum",
            uni(&[(0.645, 145.55, 14.12), (0.226, 226.50, 38.42), (0.129, 337.02, 31.69)]),
        ),
        "cucr25-1d-H" => (
            "CuCr25",
            vec![H],
            "CuCr25, 1D hardness fit at the BIC optimum",
            uni(&[(0.501, 1.14, 0.09), (0.226, 1.47, 0.23), (0.273, 2.92, 0.62)]),
        ),
        "cucr60-1d-E" => (
            "CuCr60",
            vec![E],
            "CuCr60, 1D modulus fit at the BIC optimum",
            uni(&[(0.522, 177.35, 24.17), (0.224, 272.17, 29.75), (0.254, 379.32, 34.34)]),
        ),
        "cucr60-1d-H" => (
            "CuCr60",
            vec![H],
            "CuCr60, 1D hardness fit at the BIC optimum (two phases)",
            uni(&[(0.5, 1.45, 0.22), (0.5, 2.96, 0.56)]),
        ),
        "cucr25-2d" => (
            "CuCr25",
            vec![E, H],
            "CuCr25, 2D (E, H) fit: published means and weights; spreads borrowed from the 1D fits, correlation assumed",
            bi(&[
                (0.611, [144.91, 1.17], [14.12, 0.09]),
                (0.271, [220.92, 2.25], [38.42, 0.23]),
                (0.118, [340.52, 3.18], [31.69, 0.62]),
            ]),
        ),
        "cucr60-2d" => (
            "CuCr60",
            vec![E, H],
            "CuCr60, 2D (E, H) fit: published means and weights; spreads borrowed from the 1D fits, correlation assumed",
            bi(&[
                (0.434, [172.32, 1.42], [24.17, 0.22]),
                (0.346, [262.63, 2.67], [29.75, 0.56]),
                (0.220, [383.35, 3.02], [34.34, 0.56]),
            ]),
        ),
        "cu-2d" => ("Cu", vec![E, H], "pure Cu, 1D modulus and hardness fits combined", bi(&[(1.0, [118.80, 0.91], [9.45, 0.06])])),
        "cr-2d" => ("Cr", vec![E, H], "pure Cr, 1D modulus and hardness fits combined", bi(&[(1.0, [371.24, 3.21], [10.54, 0.10])])),
        _ => return Err(unknown("mixture", name, &MIXTURE_PRESETS)),
    };
    let name = MIXTURE_PRESETS.iter().find(|&&n| n == name).copied().expect("matched above");
    Ok(MixturePreset { name, material, features, note, model })
}

/// Companion 1D preset for the other feature of the same material, used to
/// fill the unmodelled column when synthesizing from a 1D preset.
pub fn companion(name: &str) -> Option<&'static str> {
    match name {
        "cu-1d-E" => Some("cu-1d-H"),
        "cu-1d-H" => Some("cu-1d-E"),
        "cr-1d-E" => Some("cr-1d-H"),
        "cr-1d-H" => Some("cr-1d-E"),
        "cucr25-1d-E" => Some("cucr25-1d-H"),
        "cucr25-1d-H" => Some("cucr25-1d-E"),
        "cucr60-1d-E" => Some("cucr60-1d-H"),
        "cucr60-1d-H" => Some("cucr60-1d-E"),
        _ => None,
    }
}

/// Spacing of the synthetic indentation grid, µm.
pub const GRID_SPACING_UM: f64 = 20.0;

/// Indentation records drawn from a mixture preset.
///
/// Features the preset does not model are drawn from its companion preset.
/// Depths are uniform over the 800-1200 nm window and positions fill a square
/// grid row by row. Every record is tagged with the preset name.
pub fn synthesize(name: &str, n: usize, seed: u64) -> Result<Dataset> {
    let preset = mixture_preset(name)?;
    let mut columns: Vec<(Feature, Vec<f64>)> = Vec::new();
    let main = sample(&preset.model, n, derive_seed(seed, &[0]));
    for (axis, &f) in preset.features.iter().enumerate() {
        columns.push((f, main.column(axis).to_vec()));
    }
    if preset.features.len() == 1 {
        let other = companion(name)
            .ok_or_else(|| Error::InvalidArgument(format!("preset '{name}' has no companion feature")))?;
        let extra = mixture_preset(other)?;
        let drawn = sample(&extra.model, n, derive_seed(seed, &[1]));
        columns.push((extra.features[0], drawn.column(0).to_vec()));
    }
    let get = |f: Feature, i: usize| columns.iter().find(|(g, _)| *g == f).map(|(_, v)| v[i]).expect("both features");
    let mut rng = rng_from(derive_seed(seed, &[2]));
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    let records = (0..n)
        .map(|i| IndentRecord {
            modulus: get(Feature::Modulus, i),
            hardness: get(Feature::Hardness, i),
            depth: rng.random_range(800.0..1200.0),
            pos_x: (i % side) as f64 * GRID_SPACING_UM,
            pos_y: (i / side) as f64 * GRID_SPACING_UM,
            source_id: preset.name.to_string(),
        })
        .collect();
    Ok(Dataset::from_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for name in MIXTURE_PRESETS {
            let p = mixture_preset(name).unwrap();
            assert_eq!(p.features.len(), p.model.dim());
            assert!((p.model.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for name in FILTER_PRESETS {
            filter_preset(name).unwrap();
        }
        assert!(mixture_preset("nope").is_err());
        assert!(filter_preset("nope").is_err());
    }

    #[test]
    fn companions_swap_feature() {
        for name in MIXTURE_PRESETS {
            if let Some(other) = companion(name) {
                let (a, b) = (mixture_preset(name).unwrap(), mixture_preset(other).unwrap());
                assert_eq!(a.material, b.material);
                assert_ne!(a.features, b.features);
            }
        }
    }

    #[test]
    fn synthesized_records_pass_their_filter() {
        let d = synthesize("cucr25-1d-E", 300, 7).unwrap();
        assert_eq!(d.n_clean(), 300);
        let f = filter_preset("cucr25").unwrap();
        let kept = d.records().iter().filter(|r| f.accepts(r)).count();
        assert!(kept as f64 / 300.0 > 0.95);
        assert_eq!(d, synthesize("cucr25-1d-E", 300, 7).unwrap());
        assert_eq!(synthesize("cucr60-2d", 10, 1).unwrap().records()[3].pos_x, 60.0);
    }

    #[test]
    fn cucr25_filter_window() {
        let f = filter_preset("cucr25").unwrap();
        assert_eq!((f.depth_min, f.depth_max), (800.0, 1200.0));
        assert_eq!((f.e_min, f.e_max, f.h_min, f.h_max), (100.0, 400.0, 0.8, 4.5));
    }
}
