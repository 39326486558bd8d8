//! Labeled velocity signals.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovementLabel {
    Fixation,
    Saccade,
    SmoothPursuit,
    /// Sample overwritten by the noise injector.
    Noise,
}

impl MovementLabel {
    /// The three generated movement types, in canonical order.
    pub const MOVEMENTS: [MovementLabel; 3] = [
        MovementLabel::Fixation,
        MovementLabel::Saccade,
        MovementLabel::SmoothPursuit,
    ];

    /// Short code used in CSV files.
    pub fn code(self) -> &'static str {
        match self {
            MovementLabel::Fixation => "FIX",
            MovementLabel::Saccade => "SACC",
            MovementLabel::SmoothPursuit => "SP",
            MovementLabel::Noise => "NOISE",
        }
    }

    pub fn is_movement(self) -> bool {
        self != MovementLabel::Noise
    }

    pub(crate) fn index(self) -> usize {
        match self {
            MovementLabel::Fixation => 0,
            MovementLabel::Saccade => 1,
            MovementLabel::SmoothPursuit => 2,
            MovementLabel::Noise => 3,
        }
    }
}

impl fmt::Display for MovementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MovementLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FIX" => Ok(MovementLabel::Fixation),
            "SACC" => Ok(MovementLabel::Saccade),
            "SP" => Ok(MovementLabel::SmoothPursuit),
            "NOISE" => Ok(MovementLabel::Noise),
            other => Err(format!(
                "unknown label `{other}` (expected FIX, SACC, SP or NOISE)"
            )),
        }
    }
}

/// Maximal runs of equal labels, as index ranges.
pub fn label_runs(labels: &[MovementLabel]) -> Vec<(MovementLabel, Range<usize>)> {
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=labels.len() {
        if i == labels.len() || labels[i] != labels[start] {
            if i > start {
                runs.push((labels[start], start..i));
            }
            start = i;
        }
    }
    runs
}

/// A velocity signal (deg/s) sampled uniformly at `base_rate` Hz, one
/// label per sample. Sample `i` covers the interval `(i/rate, (i+1)/rate]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    base_rate: f64,
    velocities: Vec<f64>,
    labels: Vec<MovementLabel>,
}

impl VelocityProfile {
    pub fn new(base_rate: f64) -> Result<Self> {
        if !(base_rate > 0.0 && base_rate.is_finite()) {
            return Err(Error::param("base_rate_hz", "must be positive and finite"));
        }
        Ok(Self {
            base_rate,
            velocities: Vec::new(),
            labels: Vec::new(),
        })
    }

    /// Build a single-label profile from raw velocities.
    pub fn from_velocities(
        base_rate: f64,
        velocities: Vec<f64>,
        label: MovementLabel,
    ) -> Result<Self> {
        let labels = vec![label; velocities.len()];
        Self::from_parts(base_rate, velocities, labels)
    }

    pub fn from_parts(
        base_rate: f64,
        velocities: Vec<f64>,
        labels: Vec<MovementLabel>,
    ) -> Result<Self> {
        let mut p = Self::new(base_rate)?;
        if velocities.len() != labels.len() {
            return Err(Error::param("labels", "one label per sample required"));
        }
        if let Some(v) = velocities.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param(
                "velocity",
                format!("velocities must be finite and non-negative, got {v}"),
            ));
        }
        p.velocities = velocities;
        p.labels = labels;
        Ok(p)
    }

    pub fn base_rate(&self) -> f64 {
        self.base_rate
    }

    pub fn len(&self) -> usize {
        self.velocities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.velocities.is_empty()
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.base_rate
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn labels(&self) -> &[MovementLabel] {
        &self.labels
    }

    /// Append another profile recorded at the same rate.
    pub fn append(&mut self, other: &VelocityProfile) -> Result<()> {
        if other.base_rate != self.base_rate {
            return Err(Error::param("base_rate_hz", "cannot join profiles of different rates"));
        }
        self.velocities.extend_from_slice(&other.velocities);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSample {
    /// Seconds.
    pub time: f64,
    /// deg/s.
    pub velocity: f64,
    pub label: MovementLabel,
}

/// A labeled velocity signal at arbitrary (possibly irregular) timestamps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledSignal {
    pub samples: Vec<SignalSample>,
}

impl SampledSignal {
    pub fn new(samples: Vec<SignalSample>) -> Result<Self> {
        let s = Self { samples };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(first) = self.samples.first() {
            if !(first.time >= 0.0) {
                return Err(Error::param("time", "first timestamp must be >= 0"));
            }
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].time > w[0].time) {
                return Err(Error::param(
                    "time",
                    format!("timestamps must increase strictly (sample {})", i + 1),
                ));
            }
        }
        for s in &self.samples {
            if !s.velocity.is_finite() {
                return Err(Error::param("velocity", "velocities must be finite"));
            }
        }
        Ok(())
    }

    /// Signal with one sample per base sample, stamped at the end of its
    /// interval.
    pub fn from_profile(profile: &VelocityProfile) -> Self {
        let rate = profile.base_rate();
        let samples = profile
            .velocities()
            .iter()
            .zip(profile.labels())
            .enumerate()
            .map(|(i, (&velocity, &label))| SignalSample {
                time: (i + 1) as f64 / rate,
                velocity,
                label,
            })
            .collect();
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn velocities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.velocity).collect()
    }

    pub fn labels(&self) -> Vec<MovementLabel> {
        self.samples.iter().map(|s| s.label).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MovementLabel::*;

    #[test]
    fn label_codes_round_trip() {
        for l in [Fixation, Saccade, SmoothPursuit, Noise] {
            assert_eq!(l.code().parse::<MovementLabel>().unwrap(), l);
        }
        assert_eq!("FIX".parse::<MovementLabel>().unwrap(), Fixation);
        assert!("fix".parse::<MovementLabel>().is_err());
    }

    #[test]
    fn runs_partition_labels() {
        let labels = [Fixation, Fixation, Saccade, Fixation, Noise, Noise];
        let runs = label_runs(&labels);
        assert_eq!(
            runs,
            vec![(Fixation, 0..2), (Saccade, 2..3), (Fixation, 3..4), (Noise, 4..6)]
        );
        assert!(label_runs(&[]).is_empty());
    }

    #[test]
    fn profile_duration() {
        let p = VelocityProfile::from_velocities(1000.0, vec![0.0; 250], Fixation).unwrap();
        assert_eq!(p.duration(), 0.25);
        assert!(VelocityProfile::new(0.0).is_err());
        assert!(VelocityProfile::from_velocities(10.0, vec![-1.0], Fixation).is_err());
    }

    #[test]
    fn signal_requires_increasing_time() {
        let s = |t| SignalSample { time: t, velocity: 0.0, label: Fixation };
        assert!(SampledSignal::new(vec![s(0.0), s(0.1)]).is_ok());
        assert!(SampledSignal::new(vec![s(0.1), s(0.1)]).is_err());
        assert!(SampledSignal::new(vec![s(-0.1)]).is_err());
    }
}
