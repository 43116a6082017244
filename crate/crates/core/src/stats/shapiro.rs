use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Smallest and largest sample sizes for which the p-value approximation holds.
pub const MIN_N: usize = 3;
pub const MAX_N: usize = 5000;

const SMALL: f64 = 1e-19;

const G: [f64; 2] = [-2.273, 0.459];
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

/// Outcome of a Shapiro-Wilk test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub w_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

impl NormalityResult {
    /// True when normality is not rejected at level `alpha`.
    pub fn is_normal(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Polynomial `cc[0] + cc[1] x + ... ` evaluated Horner style.
fn poly(cc: &[f64], x: f64) -> f64 {
    let mut ret = cc[0];
    if cc.len() > 1 {
        let mut p = x * cc[cc.len() - 1];
        for &c in cc[1..cc.len() - 1].iter().rev() {
            p = (p + c) * x;
        }
        ret += p;
    }
    ret
}

/// Half of the antisymmetric coefficient vector, `a[0..n/2]`.
fn coefficients(n: usize, normal: &Normal) -> Vec<f64> {
    let nn2 = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an = n as f64;
    let an25 = an + 0.25;
    let mut a: Vec<f64> = (1..=nn2).map(|i| normal.inverse_cdf((i as f64 - 0.375) / an25)).collect();
    let summ2 = 2.0 * a.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - a[0] / ssumm2;
    let (i1, fac) = if n > 5 {
        let a2 = -a[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        a[1] = a2;
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * a[0] * a[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    a[0] = a1;
    for v in &mut a[i1..] {
        *v /= -fac;
    }
    a
}

/// Shapiro-Wilk test of normality, using Royston's approximations for the
/// coefficients and for the null distribution of W.
///
/// Valid for `3 <= n <= 5000`. A series with zero range is an error.
pub fn shapiro_wilk(series: &[f64]) -> Result<NormalityResult> {
    let n = series.len();
    if !(MIN_N..=MAX_N).contains(&n) {
        return Err(Error::UnsupportedSampleSize { n });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("series contains non-finite values".into()));
    }
    let mut x = series.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < SMALL {
        return Err(Error::DegenerateSample("series has zero range".into()));
    }
    let normal = Normal::standard();
    let a = coefficients(n, &normal);

    // Signed coefficient for sorted position i: -a[i] in the lower half, +a in
    // the upper half, zero at the median of an odd sample.
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => -a[i],
            std::cmp::Ordering::Greater => a[j],
            std::cmp::Ordering::Equal => 0.0,
        }
    };
    let sa = (0..n).map(coef).sum::<f64>() / n as f64;
    let sx = x.iter().map(|v| v / range).sum::<f64>() / n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in x.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = xi / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    // 1 - W computed directly to keep precision when W is close to 1.
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p_value = if n == 3 {
        let pi6 = 6.0 / std::f64::consts::PI;
        let stqr = std::f64::consts::FRAC_PI_3;
        (pi6 * (w.sqrt().asin() - stqr)).max(0.0)
    } else {
        let an = n as f64;
        let mut y = w1.ln();
        let (m, s) = if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                return Ok(NormalityResult { w_statistic: w, p_value: 1e-99, n });
            }
            y = -(gamma - y).ln();
            (poly(&C3, an), poly(&C4, an).exp())
        } else {
            let xx = an.ln();
            (poly(&C5, xx), poly(&C6, xx).exp())
        };
        normal.sf((y - m) / s)
    };
    Ok(NormalityResult { w_statistic: w, p_value: p_value.clamp(0.0, 1.0), n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_limits() {
        assert_eq!(shapiro_wilk(&[1.0, 2.0]), Err(Error::UnsupportedSampleSize { n: 2 }));
        let big: Vec<f64> = (0..5001).map(|i| i as f64).collect();
        assert_eq!(shapiro_wilk(&big), Err(Error::UnsupportedSampleSize { n: 5001 }));
        assert!(shapiro_wilk(&big[..5000]).is_ok());
    }

    #[test]
    fn constant_series_is_degenerate() {
        assert!(matches!(shapiro_wilk(&[5.0; 20]), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn order_invariant() {
        let a = [3.1, 1.2, 5.5, 2.2, 4.8, 0.3, 2.9];
        let mut b = a;
        b.reverse();
        assert_eq!(shapiro_wilk(&a).unwrap(), shapiro_wilk(&b).unwrap());
    }

    #[test]
    fn three_points_exact() {
        // Equally spaced triple gives W = 1 and p = 1.
        let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((r.w_statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jittered_constant_rejected() {
        let mut s = vec![5.0; 49];
        s.push(5.000001);
        let r = shapiro_wilk(&s).unwrap();
        assert!(r.p_value < 0.05);
    }

    #[test]
    fn poly_matches_direct() {
        let x = 0.37f64;
        let direct = C1.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum::<f64>();
        assert!((poly(&C1, x) - direct).abs() < 1e-14);
    }
}
