//! Per-segment velocity generators and their concatenation.

mod gamma;

pub use gamma::{argmax, saccade_shape, shape_for_skewness, upper_quantile, SUPPORT_TAIL};

use serde::{Deserialize, Serialize};

use crate::distribution::BoundedDistribution;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::signal::{MovementLabel, VelocityProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixationParams {
    /// Seconds.
    pub duration: BoundedDistribution,
    /// Mean drift level, deg/s.
    pub base_velocity: f64,
    /// Per-sample fluctuation amplitude, deg/s.
    pub consistency: BoundedDistribution,
}

impl Default for FixationParams {
    fn default() -> Self {
        Self {
            duration: BoundedDistribution::uniform(0.15, 0.4),
            base_velocity: 0.5,
            consistency: BoundedDistribution::uniform(0.0, 1.0),
        }
    }
}

impl FixationParams {
    pub fn validate(&self) -> Result<()> {
        self.duration.validate_as("fixation.duration")?;
        self.consistency.validate_as("fixation.consistency")?;
        if !(self.duration.min > 0.0) {
            return Err(Error::param("fixation.duration", "min must be positive"));
        }
        if !(self.base_velocity >= 0.0 && self.base_velocity.is_finite()) {
            return Err(Error::param("fixation.base_velocity", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaccadeParams {
    /// Seconds.
    pub duration: BoundedDistribution,
    /// deg/s.
    pub peak_velocity: BoundedDistribution,
    /// Skewness of the Gamma-shaped profile (dimensionless, > 0).
    pub skewness: BoundedDistribution,
    /// Jitter amplitude, deg/s.
    pub consistency: BoundedDistribution,
}

impl Default for SaccadeParams {
    fn default() -> Self {
        Self {
            duration: BoundedDistribution::uniform(0.03, 0.08),
            peak_velocity: BoundedDistribution::uniform(300.0, 500.0),
            skewness: BoundedDistribution::uniform(0.8, 1.6),
            consistency: BoundedDistribution::uniform(0.0, 5.0),
        }
    }
}

impl SaccadeParams {
    pub fn validate(&self) -> Result<()> {
        self.duration.validate_as("saccade.duration")?;
        self.peak_velocity.validate_as("saccade.peak_velocity")?;
        self.skewness.validate_as("saccade.skewness")?;
        self.consistency.validate_as("saccade.consistency")?;
        if !(self.duration.min > 0.0) {
            return Err(Error::param("saccade.duration", "min must be positive"));
        }
        if self.peak_velocity.min < 0.0 {
            return Err(Error::param("saccade.peak_velocity", "min must be >= 0"));
        }
        if !(self.skewness.min > 0.0) {
            return Err(Error::param("saccade.skewness", "min must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    LinearIncreasing,
    LinearDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PursuitParams {
    /// Seconds.
    pub duration: BoundedDistribution,
    /// Plateau (trend start) velocity, deg/s.
    pub velocity: BoundedDistribution,
    /// Seconds.
    pub onset_duration: BoundedDistribution,
    pub trend: Trend,
    /// Velocity at the end of a linear trend, deg/s.
    pub trend_end_velocity: BoundedDistribution,
    /// Jitter amplitude, deg/s.
    pub consistency: BoundedDistribution,
}

impl Default for PursuitParams {
    fn default() -> Self {
        Self {
            duration: BoundedDistribution::uniform(0.4, 1.0),
            velocity: BoundedDistribution::uniform(10.0, 30.0),
            onset_duration: BoundedDistribution::uniform(0.08, 0.15),
            trend: Trend::Constant,
            trend_end_velocity: BoundedDistribution::uniform(5.0, 40.0),
            consistency: BoundedDistribution::uniform(0.0, 1.0),
        }
    }
}

impl PursuitParams {
    pub fn validate(&self) -> Result<()> {
        self.duration.validate_as("pursuit.duration")?;
        self.velocity.validate_as("pursuit.velocity")?;
        self.onset_duration.validate_as("pursuit.onset_duration")?;
        self.trend_end_velocity.validate_as("pursuit.trend_end_velocity")?;
        self.consistency.validate_as("pursuit.consistency")?;
        if !(self.duration.min > 0.0) {
            return Err(Error::param("pursuit.duration", "min must be positive"));
        }
        if self.onset_duration.min < 0.0 {
            return Err(Error::param("pursuit.onset_duration", "min must be >= 0"));
        }
        if self.onset_duration.min >= self.duration.max {
            return Err(Error::param(
                "pursuit.onset_duration",
                "onset can never be shorter than the pursuit",
            ));
        }
        if self.velocity.min < 0.0 {
            return Err(Error::param("pursuit.velocity", "min must be >= 0"));
        }
        if self.trend_end_velocity.min < 0.0 {
            return Err(Error::param("pursuit.trend_end_velocity", "min must be >= 0"));
        }
        Ok(())
    }
}

fn sample_count(duration: f64, base_rate: f64, field: &str) -> Result<usize> {
    let n = (duration * base_rate).round();
    if !(n >= 1.0) {
        return Err(Error::param(
            field,
            format!("{duration} s at {base_rate} Hz yields no samples"),
        ));
    }
    Ok(n as usize)
}

/// Add one zero-centered jitter draw per sample and floor at zero.
fn add_jitter(values: &mut [f64], consistency: &BoundedDistribution, rng: &mut RandomSource) {
    let jitter = consistency.zero_centered();
    for v in values.iter_mut() {
        *v = (*v + jitter.sample(rng)).max(0.0);
    }
}

/// `n` fixation samples around `base_velocity`.
pub fn fixation_samples(
    n: usize,
    base_velocity: f64,
    consistency: &BoundedDistribution,
    rng: &mut RandomSource,
) -> Vec<f64> {
    let mut v = vec![base_velocity; n];
    add_jitter(&mut v, consistency, rng);
    v
}

pub fn gen_fixation(
    p: &FixationParams,
    base_rate: f64,
    rng: &mut RandomSource,
) -> Result<VelocityProfile> {
    p.validate()?;
    let duration = p.duration.sample(rng);
    let n = sample_count(duration, base_rate, "fixation.duration")?;
    let v = fixation_samples(n, p.base_velocity, &p.consistency, rng);
    VelocityProfile::from_velocities(base_rate, v, MovementLabel::Fixation)
}

/// Saccade draws made before shaping, exposed for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaccadeDraw {
    pub duration: f64,
    pub peak: f64,
    pub skewness: f64,
    /// Normalized duration position in [0, 1].
    pub unit_length: f64,
    /// Normalized velocity position in [0, 1].
    pub unit_velocity: f64,
}

impl SaccadeDraw {
    /// Peak couples to duration: the two unit positions are multiplied, so
    /// shorter saccades reach lower maximal velocities.
    pub fn coupled_peak(p: &SaccadeParams, unit_length: f64, unit_velocity: f64) -> f64 {
        p.peak_velocity.min + unit_length * unit_velocity * p.peak_velocity.range()
    }

    pub fn draw(p: &SaccadeParams, rng: &mut RandomSource) -> Self {
        // A fixed duration does not restrict the peak.
        let unit_length = p.duration.sample_unit(rng, 1.0);
        let unit_velocity = p.peak_velocity.sample_unit(rng, 1.0);
        let duration = p.duration.min + unit_length * p.duration.range();
        let skewness = p.skewness.sample(rng);
        Self {
            duration,
            peak: Self::coupled_peak(p, unit_length, unit_velocity),
            skewness,
            unit_length,
            unit_velocity,
        }
    }
}

/// Scale a unit shape to `peak` and jitter it. Jittered values stay in
/// `[0, peak]` and the argmax sample keeps the exact peak.
pub fn saccade_samples(
    shape: &[f64],
    peak: f64,
    consistency: &BoundedDistribution,
    rng: &mut RandomSource,
) -> Vec<f64> {
    let top = argmax(shape);
    let jitter = consistency.zero_centered();
    shape
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let j = jitter.sample(rng);
            if Some(i) == top {
                peak
            } else {
                (peak * s + j).clamp(0.0, peak)
            }
        })
        .collect()
}

pub fn gen_saccade_with_draw(
    p: &SaccadeParams,
    base_rate: f64,
    rng: &mut RandomSource,
) -> Result<(VelocityProfile, SaccadeDraw)> {
    p.validate()?;
    let draw = SaccadeDraw::draw(p, rng);
    let n = sample_count(draw.duration, base_rate, "saccade.duration")?;
    let shape = saccade_shape(n, draw.skewness)?;
    let v = saccade_samples(&shape, draw.peak, &p.consistency, rng);
    Ok((
        VelocityProfile::from_velocities(base_rate, v, MovementLabel::Saccade)?,
        draw,
    ))
}

pub fn gen_saccade(
    p: &SaccadeParams,
    base_rate: f64,
    rng: &mut RandomSource,
) -> Result<VelocityProfile> {
    gen_saccade_with_draw(p, base_rate, rng).map(|(profile, _)| profile)
}

/// Logistic onset reaching 1% of `plateau` at t = 0 and 99% at `t = onset`.
pub fn logistic_onset(t: f64, onset: f64, plateau: f64) -> f64 {
    let steepness = 2.0 * 99f64.ln() / onset;
    plateau / (1.0 + (-steepness * (t - 0.5 * onset)).exp())
}

/// Jitter-free pursuit geometry for one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitShape {
    /// Seconds.
    pub duration: f64,
    /// Seconds; zero disables the onset phase.
    pub onset: f64,
    pub plateau: f64,
    pub trend: Trend,
    /// Velocity reached at the end of the segment for linear trends.
    pub trend_end: f64,
}

impl PursuitShape {
    /// Velocity at time `t` seconds into the segment.
    pub fn velocity_at(&self, t: f64) -> f64 {
        if t < self.onset {
            return logistic_onset(t, self.onset, self.plateau);
        }
        match self.trend {
            Trend::Constant => self.plateau,
            Trend::LinearIncreasing | Trend::LinearDecreasing => {
                let span = self.duration - self.onset;
                if span <= 0.0 {
                    return self.plateau;
                }
                let frac = ((t - self.onset) / span).clamp(0.0, 1.0);
                self.plateau + (self.trend_end - self.plateau) * frac
            }
        }
    }

    /// `n` samples at `base_rate`, sample `i` at `i / base_rate`.
    pub fn sample(&self, n: usize, base_rate: f64) -> Vec<f64> {
        (0..n)
            .map(|i| self.velocity_at(i as f64 / base_rate))
            .collect()
    }
}

pub const MAX_ONSET_ATTEMPTS: usize = 100;

pub fn draw_pursuit_shape(p: &PursuitParams, rng: &mut RandomSource) -> Result<PursuitShape> {
    let duration = p.duration.sample(rng);
    let mut onset = None;
    for _ in 0..MAX_ONSET_ATTEMPTS {
        let o = p.onset_duration.sample(rng);
        if o < duration {
            onset = Some(o);
            break;
        }
    }
    let onset = onset.ok_or_else(|| {
        Error::param(
            "pursuit.onset_duration",
            format!("no onset shorter than the {duration} s pursuit in {MAX_ONSET_ATTEMPTS} draws"),
        )
    })?;
    let mut plateau = p.velocity.sample(rng);
    let mut trend_end = match p.trend {
        Trend::Constant => plateau,
        _ => p.trend_end_velocity.sample(rng),
    };
    let needs_swap = match p.trend {
        Trend::Constant => false,
        Trend::LinearIncreasing => trend_end < plateau,
        Trend::LinearDecreasing => trend_end > plateau,
    };
    if needs_swap {
        std::mem::swap(&mut plateau, &mut trend_end);
    }
    Ok(PursuitShape {
        duration,
        onset,
        plateau,
        trend: p.trend,
        trend_end,
    })
}

pub fn gen_pursuit(
    p: &PursuitParams,
    base_rate: f64,
    rng: &mut RandomSource,
) -> Result<VelocityProfile> {
    gen_pursuit_with_shape(p, base_rate, rng).map(|(profile, _)| profile)
}

pub fn gen_pursuit_with_shape(
    p: &PursuitParams,
    base_rate: f64,
    rng: &mut RandomSource,
) -> Result<(VelocityProfile, PursuitShape)> {
    p.validate()?;
    let shape = draw_pursuit_shape(p, rng)?;
    let n = sample_count(shape.duration, base_rate, "pursuit.duration")?;
    let mut v = shape.sample(n, base_rate);
    add_jitter(&mut v, &p.consistency, rng);
    Ok((
        VelocityProfile::from_velocities(base_rate, v, MovementLabel::SmoothPursuit)?,
        shape,
    ))
}

/// Generator parameters for all three movement types.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorParams {
    pub fixation: FixationParams,
    pub saccade: SaccadeParams,
    pub pursuit: PursuitParams,
}

/// Generate one segment per label and concatenate them without blending.
pub fn assemble(
    seq: &[MovementLabel],
    params: &GeneratorParams,
    base_rate: f64,
    rng: &mut RandomSource,
) -> Result<VelocityProfile> {
    if seq.is_empty() {
        return Err(Error::param("sequence", "must not be empty"));
    }
    let mut out = VelocityProfile::new(base_rate)?;
    for (index, &label) in seq.iter().enumerate() {
        let segment = match label {
            MovementLabel::Fixation => gen_fixation(&params.fixation, base_rate, rng),
            MovementLabel::Saccade => gen_saccade(&params.saccade, base_rate, rng),
            MovementLabel::SmoothPursuit => gen_pursuit(&params.pursuit, base_rate, rng),
            MovementLabel::Noise => Err(Error::param("sequence", "noise is not a movement type")),
        }
        .map_err(|e| Error::Segment {
            index,
            source: Box::new(e),
        })?;
        out.append(&segment)?;
    }
    Ok(out)
}
