//! Complete runs of each mode. Inputs are read from the configured paths;
//! outputs are returned in memory so callers decide how to persist them.
//!
//! Every stage draws from its own stream derived from the run seed, so
//! changing one stage's configuration leaves the others' draws intact.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::eval::evaluate_dataset;
use crate::generators::assemble;
use crate::io::{self, Mode, RemapTarget, RunConfig};
use crate::mapping::{map_to_gaze_logged, remap_real, MappingParams, RemapMode, SceneTargets};
use crate::noise::inject_noise;
use crate::resample::resample;
use crate::rng::RandomSource;
use crate::saliency::{jitter_targets, local_maxima, spectral_residual, SaliencyMap, TargetSet};
use crate::sequence::build_sequence;
use crate::signal::{label_runs, MovementLabel, SampledSignal};

const SEQUENCE: u64 = 1;
const SEGMENTS: u64 = 2;
const SAMPLING: u64 = 3;
const NOISE: u64 = 4;
const TARGETS: u64 = 5;
const MAPPING: u64 = 6;
const EVALUATION: u64 = 7;
const REMAP: u64 = 8;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    /// Files to write, in order.
    pub files: Vec<(PathBuf, Vec<u8>)>,
    /// Human-readable report lines.
    pub summary: Vec<String>,
}

/// sequence, generators, resampler, noise. Returns the movement
/// sequence alongside the signal.
pub fn generate_signal(cfg: &RunConfig, root: &RandomSource) -> Result<(Vec<MovementLabel>, SampledSignal)> {
    let seq = build_sequence(&cfg.sequence, &mut root.derive(&[SEQUENCE]))?;
    let profile = assemble(&seq, &cfg.generator_params(), cfg.base_rate_hz, &mut root.derive(&[SEGMENTS]))?;
    let sampled = resample(&profile, &cfg.rate_spec(), &mut root.derive(&[SAMPLING]))?;
    let signal = inject_noise(&sampled, &cfg.noise, &mut root.derive(&[NOISE]))?;
    Ok((seq, signal))
}

/// Local maxima of a saliency map, plus one jittered copy of each when
/// `target_jitter_px` is positive.
pub fn targets_from_saliency(map: &SaliencyMap, p: &MappingParams, rng: &mut RandomSource) -> TargetSet {
    let maxima = local_maxima(map, p.min_distance_px, p.threshold);
    if p.target_jitter_px > 0.0 {
        jitter_targets(&maxima, p.target_jitter_px, rng)
    } else {
        maxima
    }
}

fn static_saliency(cfg: &RunConfig) -> Result<SaliencyMap> {
    match (&cfg.paths.saliency, &cfg.paths.stimulus) {
        (Some(path), _) => SaliencyMap::from_precomputed(io::read_pgm_file(path)?),
        (None, Some(path)) => spectral_residual(&io::read_pgm_file(path)?),
        (None, None) => Err(Error::Config("no stimulus or saliency map configured".into())),
    }
}

fn static_targets(cfg: &RunConfig, root: &RandomSource) -> Result<TargetSet> {
    let map = static_saliency(cfg)?;
    Ok(targets_from_saliency(&map, &cfg.mapping, &mut root.derive(&[TARGETS, 0])))
}

fn dynamic_targets(cfg: &RunConfig, root: &RandomSource) -> Result<SceneTargets> {
    let dir = cfg
        .paths
        .frames_dir
        .as_ref()
        .ok_or_else(|| Error::Config("no frames_dir configured".into()))?;
    let mut frames = Vec::new();
    for (i, path) in io::frame_paths(dir)?.iter().enumerate() {
        let image = io::read_pgm_file(path)?;
        let map = if cfg.scene.precomputed {
            SaliencyMap::from_precomputed(image)?
        } else {
            spectral_residual(&image)?
        };
        frames.push(targets_from_saliency(&map, &cfg.mapping, &mut root.derive(&[TARGETS, i as u64])));
    }
    SceneTargets::from_frames(frames, cfg.scene.frame_rate)
}

fn output_path(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.paths
        .output
        .clone()
        .ok_or_else(|| Error::Config("no output path configured".into()))
}

/// `sequence` is the generated segment list, if any; otherwise segments
/// are counted as label runs.
fn describe_signal(sequence: Option<&[MovementLabel]>, signal: &SampledSignal) -> Vec<String> {
    let mut runs: BTreeMap<MovementLabel, usize> = BTreeMap::new();
    let counted: Vec<MovementLabel> = match sequence {
        Some(seq) => seq.to_vec(),
        None => label_runs(&signal.labels()).into_iter().map(|(l, _)| l).collect(),
    };
    for label in counted.into_iter().filter(|l| l.is_movement()) {
        *runs.entry(label).or_default() += 1;
    }
    let noise = signal.samples.iter().filter(|s| s.label == MovementLabel::Noise).count();
    let segments: Vec<String> = runs.iter().map(|(l, n)| format!("{} {n}", l.code())).collect();
    vec![
        format!("segments: {}", segments.join(", ")),
        format!("samples: {} ({noise} noise)", signal.len()),
        format!(
            "duration: {:.3} s",
            signal.samples.last().map_or(0.0, |s| s.time)
        ),
    ]
}

fn finish(mut out: RunOutput) -> RunOutput {
    for (path, _) in &out.files {
        out.summary.push(format!("wrote {}", path.display()));
    }
    out
}

/// Runs the configured mode. The config must carry a mode.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    cfg.check_inputs()?;
    let root = RandomSource::new(cfg.seed);
    let mut out = RunOutput::default();
    match cfg.mode()? {
        Mode::Velocity => {
            let (seq, signal) = generate_signal(cfg, &root)?;
            out.summary.extend(describe_signal(Some(&seq), &signal));
            out.files.push((output_path(cfg)?, io::write_velocity_csv(&signal)));
        }
        mode @ (Mode::MapStatic | Mode::MapDynamic) => {
            let (seq, signal) = match &cfg.paths.velocity {
                Some(path) => (None, io::read_signal_csv(&io::read_file(path)?)?),
                None => {
                    let (seq, signal) = generate_signal(cfg, &root)?;
                    (Some(seq), signal)
                }
            };
            let scene = if mode == Mode::MapStatic {
                SceneTargets::Static(static_targets(cfg, &root)?)
            } else {
                dynamic_targets(cfg, &root)?
            };
            let mapped = map_to_gaze_logged(&signal, &scene, &cfg.mapping, &mut root.derive(&[MAPPING]))?;
            out.summary.extend(describe_signal(seq.as_deref(), &signal));
            let (w, h) = scene.size();
            out.summary.push(format!("stimulus: {w}x{h} px, {} target choices", mapped.choices.len()));
            out.files.push((output_path(cfg)?, io::write_gaze_csv(&mapped.trace)));
            if let Some(log) = &cfg.paths.target_log {
                out.files.push((log.clone(), io::write_target_log(&mapped.choices)));
            }
        }
        Mode::Remap => {
            let needs_image = cfg.remap.target == RemapTarget::NewStimulus
                || cfg.remap.width.is_none()
                || cfg.remap.height.is_none();
            let image_targets = if needs_image { Some(static_targets(cfg, &root)?) } else { None };
            let (width, height) = match (cfg.remap.width, cfg.remap.height, &image_targets) {
                (Some(w), Some(h), _) => (w, h),
                (_, _, Some(t)) => (t.width, t.height),
                _ => return Err(Error::Config("remap needs remap.width and remap.height or a stimulus".into())),
            };
            let path = cfg.paths.real_data.as_ref().expect("checked by check_inputs");
            let real = io::read_gaze_csv(&io::read_file(path)?, width, height, cfg.mapping.pixels_per_degree)?;
            let mode = match (cfg.remap.target, image_targets) {
                (RemapTarget::NewStimulus, Some(t)) => RemapMode::NewStimulus(SceneTargets::Static(t)),
                _ => RemapMode::SameStimulus,
            };
            let trace = remap_real(&real, &mode, &cfg.mapping, &mut root.derive(&[REMAP]))?;
            out.summary.push(format!("remapped {} samples onto {}x{} px", trace.samples.len(), trace.width, trace.height));
            out.files.push((output_path(cfg)?, io::write_gaze_csv(&trace)));
        }
        Mode::Evaluate => {
            let path = cfg.paths.real_data.as_ref().expect("checked by check_inputs");
            let real = io::read_signal_csv(&io::read_file(path)?)?;
            let eval = evaluate_dataset(&real, cfg.eval.repeats, &root.derive(&[EVALUATION]))?;
            for (label, s) in &eval.summaries {
                out.summary.push(format!(
                    "{}: {} errors, median {}, mean {}",
                    label.code(),
                    s.count,
                    io::format_g6(s.median),
                    io::format_g6(s.mean)
                ));
            }
            if !eval.inexact_fits.is_empty() {
                out.summary.push(format!(
                    "{} saccades had an unreachable peak position",
                    eval.inexact_fits.len()
                ));
            }
            out.files.push((output_path(cfg)?, io::write_summary_csv(&eval)));
            if let Some(errors) = &cfg.paths.errors {
                out.files.push((errors.clone(), io::write_pooled_csv(&eval)));
            }
        }
        Mode::Saliency => {
            let map = static_saliency(cfg)?;
            let targets = targets_from_saliency(&map, &cfg.mapping, &mut root.derive(&[TARGETS, 0]));
            out.summary.push(format!("saliency map {}x{} px, {} targets", map.width(), map.height(), targets.len()));
            out.files.push((output_path(cfg)?, io::write_pgm(map.grid())));
            if let Some(path) = &cfg.paths.targets {
                out.files.push((path.clone(), io::write_targets_csv(&targets)));
            }
        }
    }
    Ok(finish(out))
}
