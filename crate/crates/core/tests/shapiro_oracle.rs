//! Shapiro-Wilk against reference values from an independent AS R94
//! implementation (scipy.stats.shapiro), frozen in `support/shapiro_corpus.rs`.

use nanophase::mixture::{sample, GaussianComponent, MixtureModel};
use nanophase::stats::shapiro_wilk;

#[path = "support/shapiro_corpus.rs"]
mod corpus;

use corpus::{series, CORPUS};

#[test]
fn corpus_matches_reference() {
    let mut worst_p: f64 = 0.0;
    for &(family, n, off, w_ref, p_ref) in &CORPUS {
        let r = shapiro_wilk(&series(family, n, off)).unwrap();
        assert!((r.w_statistic - w_ref).abs() < 1e-4, "family {family} n {n}: W {} vs {w_ref}", r.w_statistic);
        assert!((r.p_value - p_ref).abs() < 1e-3, "family {family} n {n}: p {} vs {p_ref}", r.p_value);
        worst_p = worst_p.max((r.p_value - p_ref).abs());
    }
    println!("largest p-value deviation: {worst_p:.2e}");
}

#[test]
fn skewed_eleven_point_series_rejected() {
    let x = [148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0];
    let r = shapiro_wilk(&x).unwrap();
    // Reference: W = 0.788815, p = 0.006704.
    assert!((r.w_statistic - 0.788815).abs() < 1e-4, "W = {}", r.w_statistic);
    assert!((r.p_value - 0.006704).abs() < 1e-3, "p = {}", r.p_value);
    assert!(!r.is_normal(0.05));
}

/// At α = 0.05 a calibrated test rejects about 5 of 100 normal draws; a
/// binomial(100, 0.05) count lands in [2, 10] with probability ~0.97.
#[test]
fn rejection_rate_on_normal_draws() {
    let model = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 0.0, 1.0).unwrap()]).unwrap();
    let rejected = (0..100)
        .filter(|&seed| {
            let x = sample(&model, 500, seed);
            !shapiro_wilk(x.as_slice().unwrap()).unwrap().is_normal(0.05)
        })
        .count();
    assert!((2..=10).contains(&rejected), "{rejected} of 100 rejected");
}
