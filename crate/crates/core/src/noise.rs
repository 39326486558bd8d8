//! Noise injection: a fixed fraction of samples is overwritten (or
//! offset) with random velocities and relabeled as noise.

use serde::{Deserialize, Serialize};

use crate::distribution::BoundedDistribution;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::signal::{MovementLabel, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLocation {
    Uniform,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// The magnitude draw becomes the sample's velocity.
    Replace,
    /// The magnitude draw is added to the velocity, floored at zero.
    Add,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSpec {
    /// Portion of samples affected, in [0, 1].
    pub fraction: f64,
    pub location: NoiseLocation,
    /// Center of the Normal location distribution, as a fraction of N.
    pub location_center: f64,
    /// Std of the Normal location distribution, as a fraction of N.
    pub location_std: f64,
    /// deg/s.
    pub magnitude: BoundedDistribution,
    pub mode: NoiseMode,
    /// Contiguous samples per placement; a zero-magnitude burst models a blink.
    pub burst_length: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            fraction: 0.0,
            location: NoiseLocation::Uniform,
            location_center: 0.5,
            location_std: 0.25,
            magnitude: BoundedDistribution::uniform(0.0, 600.0),
            mode: NoiseMode::Replace,
            burst_length: 1,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::param("noise.fraction", "must lie in [0, 1]"));
        }
        self.magnitude.validate_as("noise.magnitude")?;
        if self.mode == NoiseMode::Replace && self.magnitude.min < 0.0 {
            return Err(Error::param(
                "noise.magnitude",
                "replacement velocities must be >= 0",
            ));
        }
        if self.burst_length == 0 {
            return Err(Error::param("noise.burst_length", "must be at least 1"));
        }
        if !(self.location_std >= 0.0) || !self.location_center.is_finite() {
            return Err(Error::param("noise.location_std", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Number of affected samples for a signal of `n` samples.
    pub fn count(&self, n: usize) -> usize {
        ((self.fraction * n as f64).round() as usize).min(n)
    }
}

const COLLISION_REDRAWS: usize = 64;

fn draw_location(spec: &NoiseSpec, n: usize, rng: &mut RandomSource) -> usize {
    match spec.location {
        NoiseLocation::Uniform => rng.below(n),
        NoiseLocation::Normal => {
            let center = spec.location_center * n as f64;
            let std = spec.location_std * n as f64;
            let x = (center + std * rng.unit_normal()).round();
            x.clamp(0.0, (n - 1) as f64) as usize
        }
    }
}

/// Indices affected by noise, without replacement, in selection order.
pub fn select_indices(spec: &NoiseSpec, n: usize, rng: &mut RandomSource) -> Vec<usize> {
    let k = spec.count(n);
    let mut taken = vec![false; n];
    let mut chosen = Vec::with_capacity(k);
    if k == 0 {
        return chosen;
    }
    if spec.location == NoiseLocation::Uniform && spec.burst_length == 1 {
        // partial Fisher-Yates
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + rng.below(n - i);
            pool.swap(i, j);
            chosen.push(pool[i]);
        }
        return chosen;
    }
    while chosen.len() < k {
        let mut start = draw_location(spec, n, rng);
        let mut redraws = 0;
        while taken[start] && redraws < COLLISION_REDRAWS {
            start = draw_location(spec, n, rng);
            redraws += 1;
        }
        if taken[start] {
            // Nearest free index; ties go to the lower one.
            start = (1..n)
                .flat_map(|d| [start.checked_sub(d), Some(start + d)])
                .flatten()
                .find(|&i| i < n && !taken[i])
                .expect("fewer than n indices taken");
        }
        let mut i = start;
        while i < n && !taken[i] && chosen.len() < k && i - start < spec.burst_length {
            taken[i] = true;
            chosen.push(i);
            i += 1;
        }
    }
    chosen
}

pub fn inject_noise(
    signal: &SampledSignal,
    spec: &NoiseSpec,
    rng: &mut RandomSource,
) -> Result<SampledSignal> {
    spec.validate()?;
    let mut out = signal.clone();
    for i in select_indices(spec, signal.len(), rng) {
        let draw = spec.magnitude.sample(rng);
        let s = &mut out.samples[i];
        s.velocity = match spec.mode {
            NoiseMode::Replace => draw,
            NoiseMode::Add => (s.velocity + draw).max(0.0),
        };
        s.label = MovementLabel::Noise;
    }
    Ok(out)
}
