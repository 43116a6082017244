//! Deterministic Shapiro-Wilk series and reference values from an
//! independent AS R94 implementation (scipy.stats.shapiro), frozen.

const PHI: f64 = 0.6180339887498949;
const S2: f64 = 0.7548776662466927;

fn weyl(i: usize, a: f64, off: f64) -> f64 {
    (((i + 1) as f64 * a + off) % 1.0).clamp(1e-12, 1.0 - 1e-12)
}

/// Deterministic test series; must stay in lockstep with the generator used
/// to produce the reference values.
pub fn series(family: usize, n: usize, off: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let u1 = weyl(i, PHI, off);
            let u2 = weyl(i, S2, off * 0.5);
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            match family {
                0 => 150.0 + 12.0 * z,
                1 => u1 * 10.0,
                2 => -u1.ln(),
                3 => z + if u2 < 0.3 { 4.0 } else { 0.0 },
                _ => (0.6 * z).exp(),
            }
        })
        .collect()
}

/// (family, n, offset, W, p)
pub const CORPUS: [(usize, usize, f64, f64, f64); 20] = [
    (0, 10, 0.1, 0.9622363683056245, 0.8110421971947473),
    (1, 10, 0.2, 0.9625392449500879, 0.8143940230440708),
    (2, 10, 0.30000000000000004, 0.720121211894161, 0.0015454395638377831),
    (3, 10, 0.4, 0.8847033106926443, 0.1476985805024894),
    (4, 10, 0.5, 0.7889017808014079, 0.010625332435709574),
    (0, 50, 0.13, 0.9883228556610391, 0.8994089398985436),
    (1, 50, 0.23, 0.9512055669930455, 0.038244214147935496),
    (2, 50, 0.33000000000000007, 0.8558431198060604, 2.2355279307688616e-05),
    (3, 50, 0.43000000000000005, 0.8721285241169243, 6.511276739191656e-05),
    (4, 50, 0.53, 0.7908242647260874, 5.423798830152286e-07),
    (0, 200, 0.16, 0.9979722173847008, 0.9970288256113826),
    (1, 200, 0.26, 0.9540504106083653, 4.731420964200146e-06),
    (2, 200, 0.36000000000000004, 0.8321108880152439, 6.29376506237653e-14),
    (3, 200, 0.46, 0.8786697640679749, 1.340028243974845e-11),
    (4, 200, 0.56, 0.8617982441884859, 1.6687600225235075e-12),
    (0, 500, 0.19, 0.9982590713325193, 0.9008131995883152),
    (1, 500, 0.29000000000000004, 0.954790476772501, 3.017879955083729e-11),
    (2, 500, 0.39, 0.8294740642419773, 1.0781500665325182e-22),
    (3, 500, 0.49, 0.8798912645391134, 3.011238752467291e-19),
    (4, 500, 0.59, 0.8164482180778312, 1.862846564070289e-23),
];
