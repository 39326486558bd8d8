//! Gamma-shaped saccade velocity curves.

use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

/// Upper-tail mass cut off the Gamma support when mapping it onto a
/// segment. Small enough that truncation moves the third standardized
/// moment by well under 1%.
pub const SUPPORT_TAIL: f64 = 1e-5;

/// Gamma shape for a target skewness: skewness of Gamma(k) is `2/sqrt(k)`.
pub fn shape_for_skewness(skewness: f64) -> f64 {
    (2.0 / skewness).powi(2)
}

/// `x` with `P(X > x) = tail` for `X ~ Gamma(shape, 1)`.
pub fn upper_quantile(shape: f64, tail: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) || !(tail > 0.0 && tail < 1.0) {
        return Err(Error::Numeric(format!(
            "gamma quantile undefined for shape {shape}, tail {tail}"
        )));
    }
    let mut lo = 0.0;
    let mut hi = shape + 10.0 * shape.sqrt() + 20.0;
    let mut guard = 0;
    while gamma_ur(shape, hi) > tail {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 60 || !hi.is_finite() {
            return Err(Error::Numeric(format!("gamma quantile diverged for shape {shape}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma_ur(shape, mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gamma density shape sampled at `n` evenly spaced points spanning
/// `[0, upper_quantile]`, scaled so the largest sample is exactly 1.
pub fn saccade_shape(n: usize, skewness: f64) -> Result<Vec<f64>> {
    let skew_err = |why: &str| {
        Error::param(
            "saccade.skewness",
            format!("skewness {skewness} {why}"),
        )
    };
    if !(skewness > 0.0 && skewness.is_finite()) {
        return Err(skew_err("must be positive and finite"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let k = shape_for_skewness(skewness);
    let q = upper_quantile(k, SUPPORT_TAIL).map_err(|_| skew_err("gives a non-finite support"))?;
    let log_density: Vec<f64> = (0..n)
        .map(|i| {
            let x = q * i as f64 / (n - 1) as f64;
            if x == 0.0 {
                if k > 1.0 {
                    f64::NEG_INFINITY
                } else if k == 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (k - 1.0) * x.ln() - x
            }
        })
        .collect();
    let peak = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(skew_err("gives a non-finite profile"));
    }
    let shape: Vec<f64> = log_density.iter().map(|&l| (l - peak).exp()).collect();
    if shape.iter().any(|v| !v.is_finite()) {
        return Err(skew_err("gives a non-finite profile"));
    }
    Ok(shape)
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_matches_exponential_closed_form() {
        // Gamma(1) is Exp(1): P(X > x) = e^-x.
        let q = upper_quantile(1.0, 1e-5).unwrap();
        assert!((q - 1e5f64.ln()).abs() < 1e-9, "{q}");
    }

    #[test]
    fn shape_peak_is_one() {
        for s in [0.3, 0.5, 1.0, 1.7, 2.0] {
            let v = saccade_shape(200, s).unwrap();
            let m = v.iter().copied().fold(0.0, f64::max);
            assert_eq!(m, 1.0);
        }
    }

    #[test]
    fn extreme_skew_is_rejected_with_value() {
        let err = saccade_shape(50, 3.0).unwrap_err();
        assert!(err.to_string().contains("skewness 3"), "{err}");
        assert!(saccade_shape(50, 0.0).is_err());
    }

    #[test]
    fn mode_position_matches_analytic() {
        // s = 1 -> k = 4; mode of Gamma(4, 1) at 3.
        let n = 100;
        let v = saccade_shape(n, 1.0).unwrap();
        let q = upper_quantile(4.0, SUPPORT_TAIL).unwrap();
        let analytic = 3.0 / q * (n - 1) as f64;
        let idx = argmax(&v).unwrap() as f64;
        assert!((idx - analytic).abs() <= 2.0, "{idx} vs {analytic}");
    }
}
