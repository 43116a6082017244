//! Worked examples for likelihood, prediction and BIC sweeps on data drawn
//! from the published phase parameters.

use nanophase::mixture::{fit_em, log_likelihood, predict, sample, FitConfig, GaussianComponent, MixtureModel};
use nanophase::presets::mixture_preset;
use nanophase::select::{sweep, KRange};

/// Direct summation of `ln Σ_j w_j N(x_i; µ_j, σ_j²)` for 1D data.
fn direct_log_likelihood(x: &[f64], model: &MixtureModel) -> f64 {
    x.iter()
        .map(|&v| {
            model
                .components()
                .iter()
                .map(|c| {
                    let sd = c.covariance[0].sqrt();
                    let z = (v - c.mean[0]) / sd;
                    c.weight * (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
                })
                .sum::<f64>()
                .ln()
        })
        .sum()
}

#[test]
fn per_point_log_likelihood_in_published_range() {
    let model = mixture_preset("cucr60-1d-E").unwrap().model;
    let x = sample(&model, 300, 11);
    let ll = log_likelihood(x.view(), &model).unwrap();
    let direct = direct_log_likelihood(x.as_slice().unwrap(), &model);
    assert!((ll - direct).abs() < 1e-9 * direct.abs(), "{ll} vs {direct}");
    let per_point = ll / 300.0;
    assert!((-10.0..=-4.0).contains(&per_point), "mean ln L per point {per_point}");
}

#[test]
fn stiff_hard_indent_belongs_to_the_cr_rich_phase() {
    let model = mixture_preset("cucr60-2d").unwrap().model;
    let post = predict(&model, &[383.0, 3.0]).unwrap();
    let c = &model.components()[post.component];
    assert_eq!(c.mean, vec![383.35, 3.02]);
    assert!(post.probabilities[post.component] > 0.9, "{:?}", post.probabilities);
}

#[test]
fn three_separated_phases_are_selected() {
    let model = mixture_preset("cucr60-1d-E").unwrap().model;
    let hits = (0..20)
        .filter(|&seed| {
            let x = sample(&model, 500, seed);
            let s = sweep(x.view(), KRange::new(1, 5).unwrap(), &FitConfig::default().with_seed(seed)).unwrap();
            s.optimal_k == 3
        })
        .count();
    assert!(hits >= 18, "k=3 selected in {hits} of 20");
}

#[test]
fn nested_fits_do_not_lose_likelihood() {
    let model = mixture_preset("cucr60-1d-E").unwrap().model;
    let x = sample(&model, 500, 3);
    let s = sweep(x.view(), KRange::new(1, 5).unwrap(), &FitConfig::default()).unwrap();
    let lls: Vec<f64> = (1..=5).map(|k| s.entries[&k].fit().unwrap().log_likelihood).collect();
    for w in lls.windows(2) {
        assert!(w[1] >= w[0] - 1e-6 * w[0].abs(), "{lls:?}");
    }
}

#[test]
fn single_gaussian_prefers_one_component() {
    let model = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 118.80, 9.45).unwrap()]).unwrap();
    let x = sample(&model, 500, 7);
    let fit = fit_em(x.view(), 1, &FitConfig::default()).unwrap();
    let s = sweep(x.view(), KRange::new(1, 5).unwrap(), &FitConfig::default()).unwrap();
    assert_eq!(s.optimal_k, 1);
    assert_eq!(s.optimal().log_likelihood, fit.log_likelihood);
}
