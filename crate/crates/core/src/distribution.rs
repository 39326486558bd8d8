//! Bounded random quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Normal,
}

/// A Uniform or Normal random source confined to `[min, max]`.
///
/// Normal draws are centered on the midpoint of the bounds and clamped into
/// them, so each sample costs exactly one unit draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundedDistribution {
    pub kind: DistributionKind,
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub std: f64,
}

impl BoundedDistribution {
    pub fn uniform(min: f64, max: f64) -> Self {
        Self {
            kind: DistributionKind::Uniform,
            min,
            max,
            std: 0.0,
        }
    }

    pub fn normal(min: f64, max: f64, std: f64) -> Self {
        Self {
            kind: DistributionKind::Normal,
            min,
            max,
            std,
        }
    }

    /// Degenerate distribution that always yields `value`.
    pub fn constant(value: f64) -> Self {
        Self::uniform(value, value)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || !self.std.is_finite() {
            return Err(Error::param("", "bounds and std must be finite"));
        }
        if self.min > self.max {
            return Err(Error::param(
                "",
                format!("min ({}) exceeds max ({})", self.min, self.max),
            ));
        }
        if self.std < 0.0 {
            return Err(Error::param("", format!("std ({}) is negative", self.std)));
        }
        Ok(())
    }

    /// Validate, naming the offending field in the error.
    pub fn validate_as(&self, field: &str) -> Result<()> {
        self.validate().map_err(|e| match e {
            Error::Parameter { reason, .. } => Error::param(field, reason),
            other => other,
        })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// Draw one value in `[min, max]`.
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        match self.kind {
            DistributionKind::Uniform => {
                let u = rng.unit_uniform();
                (self.min + u * (self.max - self.min)).clamp(self.min, self.max)
            }
            DistributionKind::Normal => {
                let n = rng.unit_normal();
                (self.midpoint() + self.std * n).clamp(self.min, self.max)
            }
        }
    }

    /// Position of a draw within the bounds, in [0, 1]. Degenerate bounds
    /// still consume the draw and report `degenerate`.
    pub fn sample_unit(&self, rng: &mut RandomSource, degenerate: f64) -> f64 {
        let v = self.sample(rng);
        if self.range() > 0.0 {
            ((v - self.min) / self.range()).clamp(0.0, 1.0)
        } else {
            degenerate
        }
    }

    /// The same distribution shape re-centered on zero with bounds
    /// `[-c, c]`, `c = max(|min|, |max|)`. Used for additive jitter.
    pub fn zero_centered(&self) -> Self {
        let c = self.min.abs().max(self.max.abs());
        Self {
            kind: self.kind,
            min: -c,
            max: c,
            std: self.std,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.min == 0.0 && self.max == 0.0
    }
}

/// Draw from `dist` with validation.
pub fn sample_bounded(dist: &BoundedDistribution, rng: &mut RandomSource) -> Result<f64> {
    dist.validate()?;
    Ok(dist.sample(rng))
}
