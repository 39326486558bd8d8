//! Placement of a labeled velocity signal onto a stimulus as 2D gaze.
//!
//! Fixations sit on a target and wander by a bounded random walk.
//! Saccades and pursuits travel from the current position to a newly
//! chosen target; each sample advances in proportion to its velocity, the
//! path is rescaled so it ends exactly on the target, and interior samples
//! deviate sideways by at most `max_path_deviation`, tapering to zero at
//! both ends.

mod remap;
mod walk;

pub use remap::{extract_velocities, fixation_centroids, remap_real, RemapMode};
pub use walk::{fixation_walk, RESTORING_PULL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::saliency::{Target, TargetSet};
use crate::signal::{label_runs, MovementLabel, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    /// Seconds.
    pub time: f64,
    /// Pixels.
    pub x: f64,
    /// Pixels.
    pub y: f64,
    /// deg/s.
    pub velocity: f64,
    pub label: MovementLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GazeTrace {
    pub samples: Vec<GazeSample>,
    pub width: usize,
    pub height: usize,
    pub pixels_per_degree: f64,
}

impl GazeTrace {
    pub fn validate(&self) -> Result<()> {
        if !(self.pixels_per_degree > 0.0) {
            return Err(Error::param("mapping.pixels_per_degree", "must be positive"));
        }
        for (i, w) in self.samples.windows(2).enumerate() {
            if !(w[1].time > w[0].time) {
                return Err(Error::param(
                    "trace",
                    format!("timestamps must increase strictly (sample {})", i + 1),
                ));
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.x >= 0.0 && s.y >= 0.0 && s.x < self.width as f64 && s.y < self.height as f64) {
                return Err(Error::param(
                    "trace",
                    format!(
                        "sample {i} at ({}, {}) lies outside the {}x{} stimulus",
                        s.x, s.y, self.width, self.height
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<MovementLabel> {
        self.samples.iter().map(|s| s.label).collect()
    }
}

/// Targets for a static image or a frame sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum SceneTargets {
    Static(TargetSet),
    Dynamic {
        /// `(frame_time_s, targets)` with strictly increasing times.
        frames: Vec<(f64, TargetSet)>,
        frame_rate: f64,
    },
}

impl SceneTargets {
    /// Frames at `index / frame_rate`.
    pub fn from_frames(frames: Vec<TargetSet>, frame_rate: f64) -> Result<Self> {
        if !(frame_rate > 0.0) {
            return Err(Error::param("scene.frame_rate", "must be positive"));
        }
        let frames = frames
            .into_iter()
            .enumerate()
            .map(|(i, t)| (i as f64 / frame_rate, t))
            .collect();
        Ok(SceneTargets::Dynamic { frames, frame_rate })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SceneTargets::Static(t) => t.validate(),
            SceneTargets::Dynamic { frames, .. } => {
                if frames.is_empty() {
                    return Err(Error::param("scene", "dynamic scene has no frames"));
                }
                let (w, h) = (frames[0].1.width, frames[0].1.height);
                for (i, (time, set)) in frames.iter().enumerate() {
                    set.validate()?;
                    if (set.width, set.height) != (w, h) {
                        return Err(Error::param("scene", format!("frame {i} changes the stimulus size")));
                    }
                    if i > 0 && !(*time > frames[i - 1].0) {
                        return Err(Error::param("scene", "frame times must increase strictly"));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn size(&self) -> (usize, usize) {
        match self {
            SceneTargets::Static(t) => (t.width, t.height),
            SceneTargets::Dynamic { frames, .. } => frames
                .first()
                .map(|(_, t)| (t.width, t.height))
                .unwrap_or((0, 0)),
        }
    }

    /// Index and targets of the frame nearest `time` (earlier frame on ties).
    pub fn at(&self, time: f64) -> (usize, &TargetSet) {
        match self {
            SceneTargets::Static(t) => (0, t),
            SceneTargets::Dynamic { frames, .. } => {
                let after = frames.partition_point(|(ft, _)| *ft < time);
                let idx = if after == 0 {
                    0
                } else if after == frames.len() {
                    frames.len() - 1
                } else if time - frames[after - 1].0 <= frames[after].0 - time {
                    after - 1
                } else {
                    after
                };
                (idx, &frames[idx].1)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSelection {
    /// Probability proportional to saliency weight.
    Weighted,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationDistribution {
    Uniform,
    /// Normal with std of a third of the local bound, clamped to it.
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MappingParams {
    pub pixels_per_degree: f64,
    /// Pixels.
    pub max_path_deviation: f64,
    /// Pixels.
    pub fixation_dispersion: f64,
    /// Pixels.
    pub target_jitter_px: f64,
    /// Minimum distance between saliency maxima, pixels.
    pub min_distance_px: f64,
    /// Minimum saliency of a maximum, in [0, 1].
    pub threshold: f64,
    pub selection: TargetSelection,
    pub deviation: DeviationDistribution,
}

impl Default for MappingParams {
    fn default() -> Self {
        Self {
            pixels_per_degree: 30.0,
            max_path_deviation: 5.0,
            fixation_dispersion: 3.0,
            target_jitter_px: 5.0,
            min_distance_px: 20.0,
            threshold: 0.1,
            selection: TargetSelection::Weighted,
            deviation: DeviationDistribution::Uniform,
        }
    }
}

impl MappingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pixels_per_degree > 0.0 && self.pixels_per_degree.is_finite()) {
            return Err(Error::param("mapping.pixels_per_degree", "must be positive"));
        }
        let non_negative = [
            ("mapping.max_path_deviation", self.max_path_deviation),
            ("mapping.fixation_dispersion", self.fixation_dispersion),
            ("mapping.target_jitter_px", self.target_jitter_px),
            ("mapping.min_distance_px", self.min_distance_px),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(field, "must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::param("mapping.threshold", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// One target decision made while mapping, for inspection and logging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetChoice {
    /// Index of the label run in the signal.
    pub run: usize,
    pub label: MovementLabel,
    /// Time used for the frame lookup, seconds.
    pub lookup_time: f64,
    pub frame: usize,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappedTrace {
    pub trace: GazeTrace,
    pub choices: Vec<TargetChoice>,
}

fn choose_target(
    set: &TargetSet,
    selection: TargetSelection,
    avoid: Option<(f64, f64)>,
    time: f64,
    rng: &mut RandomSource,
) -> Result<Target> {
    if set.is_empty() {
        return Err(Error::Mapping {
            time,
            reason: "no fixation targets available".into(),
        });
    }
    let away = |t: &Target| avoid.is_none_or(|(x, y)| (t.x - x).hypot(t.y - y) > 1e-9);
    let any_away = set.points.iter().any(away);
    let weights: Vec<f64> = set
        .points
        .iter()
        .map(|t| {
            if any_away && !away(t) {
                0.0
            } else {
                match selection {
                    TargetSelection::Weighted => t.weight,
                    TargetSelection::Uniform => 1.0,
                }
            }
        })
        .collect();
    let idx = match rng.weighted_index(&weights) {
        Some(i) => i,
        None => {
            // every usable weight is zero
            let usable: Vec<usize> = (0..set.len())
                .filter(|&i| !any_away || away(&set.points[i]))
                .collect();
            usable[rng.below(usable.len())]
        }
    };
    Ok(set.points[idx])
}

/// Labels with noise samples attributed to the surrounding movement, and
/// velocities with noise samples replaced by their nearest clean neighbour.
fn underlying(signal: &SampledSignal) -> (Vec<MovementLabel>, Vec<f64>) {
    let n = signal.len();
    let mut labels: Vec<Option<MovementLabel>> = signal
        .samples
        .iter()
        .map(|s| s.label.is_movement().then_some(s.label))
        .collect();
    let mut velocities: Vec<Option<f64>> = signal
        .samples
        .iter()
        .map(|s| s.label.is_movement().then_some(s.velocity))
        .collect();
    for i in 1..n {
        if labels[i].is_none() {
            labels[i] = labels[i - 1];
            velocities[i] = velocities[i - 1];
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        if labels[i].is_none() {
            labels[i] = labels[i + 1];
            velocities[i] = velocities[i + 1];
        }
    }
    (
        labels
            .into_iter()
            .map(|l| l.unwrap_or(MovementLabel::Fixation))
            .collect(),
        velocities.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
    )
}

/// Fraction of the path covered after each sample of a movement run.
fn path_progress(steps: &[f64]) -> Vec<f64> {
    let n = steps.len();
    let total: f64 = steps.iter().sum();
    let mut progress: Vec<f64> = if total > 0.0 && total.is_finite() {
        let mut acc = 0.0;
        steps
            .iter()
            .map(|s| {
                acc += s;
                acc / total
            })
            .collect()
    } else {
        (1..=n).map(|i| i as f64 / n as f64).collect()
    };
    if let Some(last) = progress.last_mut() {
        *last = 1.0;
    }
    progress
}

pub fn map_to_gaze(
    signal: &SampledSignal,
    targets: &SceneTargets,
    p: &MappingParams,
    rng: &mut RandomSource,
) -> Result<GazeTrace> {
    map_to_gaze_logged(signal, targets, p, rng).map(|m| m.trace)
}

/// [`map_to_gaze`] that also reports every target decision.
pub fn map_to_gaze_logged(
    signal: &SampledSignal,
    targets: &SceneTargets,
    p: &MappingParams,
    rng: &mut RandomSource,
) -> Result<MappedTrace> {
    p.validate()?;
    targets.validate()?;
    if signal.is_empty() {
        return Err(Error::param("signal", "cannot map an empty signal"));
    }
    signal.validate()?;
    let (width, height) = targets.size();
    let (max_x, max_y) = ((width - 1) as f64, (height - 1) as f64);
    let clamp = |x: f64, y: f64| (x.clamp(0.0, max_x), y.clamp(0.0, max_y));

    let (labels, velocities) = underlying(signal);
    let times: Vec<f64> = signal.samples.iter().map(|s| s.time).collect();
    let dt: Vec<f64> = (0..times.len())
        .map(|i| match i {
            0 if times[0] > 0.0 => times[0],
            0 => times.get(1).map_or(0.0, |t1| t1 - times[0]),
            _ => times[i] - times[i - 1],
        })
        .collect();

    let mut positions: Vec<(f64, f64)> = Vec::with_capacity(signal.len());
    let mut choices = Vec::new();
    let mut current: Option<(f64, f64)> = None;
    let mut landed_on: Option<(f64, f64)> = None;

    for (run, (label, range)) in label_runs(&labels).into_iter().enumerate() {
        let t_start = times[range.start];
        let t_end = times[range.end - 1];
        let mut pick = |lookup: f64, avoid: Option<(f64, f64)>, rng: &mut RandomSource| {
            let (frame, set) = targets.at(lookup);
            let target = choose_target(set, p.selection, avoid, lookup, rng)?;
            choices.push(TargetChoice {
                run,
                label,
                lookup_time: lookup,
                frame,
                target,
            });
            Ok::<_, Error>(target)
        };
        match label {
            MovementLabel::Fixation => {
                let center = match landed_on.take() {
                    Some(c) => c,
                    None => {
                        let t = pick(t_start, current, rng)?;
                        (t.x, t.y)
                    }
                };
                for (x, y) in fixation_walk(center, range.len(), p.fixation_dispersion, rng) {
                    positions.push(clamp(x, y));
                }
            }
            _ => {
                let start = match current {
                    Some(c) => c,
                    None => {
                        let t = pick(t_start, None, rng)?;
                        (t.x, t.y)
                    }
                };
                let goal = pick(t_end, Some(start), rng)?;
                let steps: Vec<f64> = range
                    .clone()
                    .map(|i| velocities[i] * dt[i] * p.pixels_per_degree)
                    .collect();
                let (dx, dy) = (goal.x - start.0, goal.y - start.1);
                let len = dx.hypot(dy);
                let normal = if len > 0.0 { (-dy / len, dx / len) } else { (0.0, 0.0) };
                for prog in path_progress(&steps) {
                    let bound = p.max_path_deviation * 2.0 * prog.min(1.0 - prog).max(0.0);
                    let offset = if bound > 0.0 {
                        match p.deviation {
                            DeviationDistribution::Uniform => (2.0 * rng.unit_uniform() - 1.0) * bound,
                            DeviationDistribution::Normal => {
                                (rng.unit_normal() * bound / 3.0).clamp(-bound, bound)
                            }
                        }
                    } else {
                        0.0
                    };
                    positions.push(clamp(
                        start.0 + prog * dx + offset * normal.0,
                        start.1 + prog * dy + offset * normal.1,
                    ));
                }
                landed_on = Some((goal.x, goal.y));
            }
        }
        current = positions.last().copied();
    }

    let samples = signal
        .samples
        .iter()
        .zip(&positions)
        .map(|(s, &(x, y))| GazeSample {
            time: s.time,
            x,
            y,
            velocity: s.velocity,
            label: s.label,
        })
        .collect();
    Ok(MappedTrace {
        trace: GazeTrace {
            samples,
            width,
            height,
            pixels_per_degree: p.pixels_per_degree,
        },
        choices,
    })
}

#[cfg(test)]
mod tests;
