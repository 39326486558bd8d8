use super::{map_to_gaze, GazeTrace, MappingParams, SceneTargets};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::saliency::{Target, TargetSet};
use crate::signal::{label_runs, MovementLabel, SampledSignal, SignalSample};

#[derive(Debug, Clone, PartialEq)]
pub enum RemapMode {
    /// Targets are the centroids of the input's own fixations.
    SameStimulus,
    NewStimulus(SceneTargets),
}

/// Speed at each sample in deg/s from central differences of position
/// (one-sided at the ends).
pub fn extract_velocities(trace: &GazeTrace) -> Vec<f64> {
    let s = &trace.samples;
    let n = s.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let dist = (s[b].x - s[a].x).hypot(s[b].y - s[a].y);
            dist / (s[b].time - s[a].time) / trace.pixels_per_degree
        })
        .collect()
}

/// Centroid of every fixation run, each with unit weight.
pub fn fixation_centroids(trace: &GazeTrace) -> TargetSet {
    let points = label_runs(&trace.labels())
        .into_iter()
        .filter(|(l, _)| *l == MovementLabel::Fixation)
        .map(|(_, r)| {
            let n = r.len() as f64;
            let run = &trace.samples[r];
            Target {
                x: run.iter().map(|s| s.x).sum::<f64>() / n,
                y: run.iter().map(|s| s.y).sum::<f64>() / n,
                weight: 1.0,
            }
        })
        .collect();
    TargetSet {
        width: trace.width,
        height: trace.height,
        points,
    }
}

/// Shuffles the labeled segments of a real trace and maps them again.
pub fn remap_real(
    real: &GazeTrace,
    mode: &RemapMode,
    p: &MappingParams,
    rng: &mut RandomSource,
) -> Result<GazeTrace> {
    real.validate()?;
    if real.samples.is_empty() {
        return Err(Error::param("real_data", "trace is empty"));
    }
    if !real.samples.iter().any(|s| s.label.is_movement()) {
        return Err(Error::param(
            "real_data",
            "trace carries no eye-movement labels",
        ));
    }
    let owned;
    let targets = match mode {
        RemapMode::SameStimulus => {
            let centroids = fixation_centroids(real);
            if centroids.is_empty() {
                return Err(Error::Mapping {
                    time: real.samples[0].time,
                    reason: "input has no fixations to use as targets".into(),
                });
            }
            owned = SceneTargets::Static(centroids);
            &owned
        }
        RemapMode::NewStimulus(t) => t,
    };

    let velocities = extract_velocities(real);
    let s = &real.samples;
    let dt: Vec<f64> = (0..s.len())
        .map(|i| match i {
            0 => s.get(1).map_or(0.0, |b| b.time - s[0].time),
            _ => s[i].time - s[i - 1].time,
        })
        .collect();
    let mut runs = label_runs(&real.labels());
    rng.shuffle(&mut runs);

    let mut time = s[0].time;
    let mut samples = Vec::with_capacity(s.len());
    for (label, range) in runs {
        for i in range {
            if !samples.is_empty() {
                time += dt[i];
            }
            samples.push(SignalSample {
                time,
                velocity: velocities[i],
                label,
            });
        }
    }
    let signal = SampledSignal::new(samples)?;
    map_to_gaze(&signal, targets, p, rng)
}
