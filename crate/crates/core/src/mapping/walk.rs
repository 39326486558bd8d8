use std::f64::consts::TAU;

use crate::rng::RandomSource;

/// Strength of the pull back toward the fixation center per step.
pub const RESTORING_PULL: f64 = 0.1;

/// Mean-reverting random walk of `n` points around `center`, confined to
/// the disc of radius `dispersion`.
pub fn fixation_walk(
    center: (f64, f64),
    n: usize,
    dispersion: f64,
    rng: &mut RandomSource,
) -> Vec<(f64, f64)> {
    let mut pos = center;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if dispersion > 0.0 {
            let theta = TAU * rng.unit_uniform();
            let len = (rng.unit_normal() * dispersion / 3.0)
                .abs()
                .min(dispersion / 2.0);
            let mut x = pos.0 + len * theta.cos() + RESTORING_PULL * (center.0 - pos.0);
            let mut y = pos.1 + len * theta.sin() + RESTORING_PULL * (center.1 - pos.1);
            let r = (x - center.0).hypot(y - center.1);
            if r > dispersion {
                x = center.0 + (x - center.0) * dispersion / r;
                y = center.1 + (y - center.1) * dispersion / r;
            }
            pos = (x, y);
        }
        out.push(pos);
    }
    out
}
