//! Conversion of a base-rate profile to a constant or fluctuating target
//! sampling rate. Each output sample is the mean of the base samples that
//! fall in `(t_prev, t_curr]`.

use serde::{Deserialize, Serialize};

use crate::distribution::BoundedDistribution;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::signal::{MovementLabel, SampledSignal, SignalSample, VelocityProfile};

/// Tolerance, in base samples, when locating window edges on the grid.
const GRID_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    /// Instantaneous rate in Hz, drawn once per output sample.
    pub rate: BoundedDistribution,
}

impl RateSpec {
    pub fn constant(hz: f64) -> Self {
        Self {
            rate: BoundedDistribution::constant(hz),
        }
    }

    pub fn validate(&self, base_rate: f64) -> Result<()> {
        self.rate.validate_as("sampling.rate")?;
        if !(self.rate.min > 0.0) {
            return Err(Error::param("sampling.rate", "min must be positive"));
        }
        if self.rate.max > base_rate {
            return Err(Error::param(
                "sampling.rate",
                format!("max {} Hz exceeds the base rate {base_rate} Hz", self.rate.max),
            ));
        }
        Ok(())
    }
}

/// Majority label; ties go to the label whose latest occurrence is latest.
fn window_label(labels: &[MovementLabel]) -> MovementLabel {
    let mut counts = [0usize; 4];
    let mut last_seen = [0usize; 4];
    for (i, l) in labels.iter().enumerate() {
        counts[l.index()] += 1;
        last_seen[l.index()] = i;
    }
    let best = *counts.iter().max().expect("four slots");
    labels
        .iter()
        .copied()
        .filter(|l| counts[l.index()] == best)
        .max_by_key(|l| last_seen[l.index()])
        .expect("non-empty window")
}

pub fn resample(
    profile: &VelocityProfile,
    spec: &RateSpec,
    rng: &mut RandomSource,
) -> Result<SampledSignal> {
    if profile.is_empty() {
        return Err(Error::param("profile", "cannot resample an empty profile"));
    }
    let base = profile.base_rate();
    spec.validate(base)?;
    let duration = profile.duration();
    let velocities = profile.velocities();
    let labels = profile.labels();
    // Window edges in units of base samples.
    let grid = |t: f64| ((t * base + GRID_EPS).floor() as usize).min(profile.len());

    let mut out = Vec::new();
    let mut t_prev = 0.0;
    let mut lo = 0;
    loop {
        let r = spec.rate.sample(rng);
        let t_curr = t_prev + 1.0 / r;
        if t_curr > duration * (1.0 + 1e-12) + 1e-12 {
            break;
        }
        let hi = grid(t_curr);
        if hi <= lo {
            return Err(Error::Numeric(format!(
                "empty resampling window ({t_prev}, {t_curr}] s"
            )));
        }
        let window = &velocities[lo..hi];
        let velocity = window.iter().sum::<f64>() / window.len() as f64;
        out.push(SignalSample {
            time: t_curr,
            velocity,
            label: window_label(&labels[lo..hi]),
        });
        t_prev = t_curr;
        lo = hi;
    }
    Ok(SampledSignal { samples: out })
}
