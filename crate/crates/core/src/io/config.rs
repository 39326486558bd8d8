//! Run configuration: a strict JSON document with dotted-path overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::generators::{FixationParams, GeneratorParams, PursuitParams, SaccadeParams};
use crate::mapping::MappingParams;
use crate::noise::NoiseSpec;
use crate::resample::RateSpec;
use crate::sequence::SequenceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Velocity,
    MapStatic,
    MapDynamic,
    Remap,
    Evaluate,
    Saliency,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Velocity => "velocity",
            Mode::MapStatic => "map_static",
            Mode::MapDynamic => "map_dynamic",
            Mode::Remap => "remap",
            Mode::Evaluate => "evaluate",
            Mode::Saliency => "saliency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    /// Hz, for numbered frame directories.
    pub frame_rate: f64,
    /// Frames are saliency maps rather than stimulus images.
    pub precomputed: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            frame_rate: 25.0,
            precomputed: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemapTarget {
    SameStimulus,
    NewStimulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemapConfig {
    pub target: RemapTarget,
    /// Size of the stimulus the real data was recorded on, pixels.
    pub width: Option<usize>,
    pub height: Option<usize>,
}

impl Default for RemapConfig {
    fn default() -> Self {
        Self {
            target: RemapTarget::SameStimulus,
            width: None,
            height: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub repeats: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            repeats: crate::eval::DEFAULT_REPEATS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    /// Grayscale stimulus image (PGM).
    pub stimulus: Option<PathBuf>,
    /// Precomputed saliency map (PGM).
    pub saliency: Option<PathBuf>,
    /// Directory of numbered PGM frames.
    pub frames_dir: Option<PathBuf>,
    /// Labeled recording (gaze or velocity CSV).
    pub real_data: Option<PathBuf>,
    /// Velocity CSV to map instead of generating one.
    pub velocity: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Pooled squared errors of an evaluation.
    pub errors: Option<PathBuf>,
    /// Targets CSV written by the saliency mode.
    pub targets: Option<PathBuf>,
    /// Log of every target choice made while mapping.
    pub target_log: Option<PathBuf>,
}

fn default_base_rate() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_base_rate")]
    pub base_rate_hz: f64,
    #[serde(default)]
    pub sequence: SequenceSpec,
    #[serde(default)]
    pub fixation: FixationParams,
    #[serde(default)]
    pub saccade: SaccadeParams,
    #[serde(default)]
    pub pursuit: PursuitParams,
    /// Output sampling; the base rate when absent.
    #[serde(default)]
    pub sampling: Option<RateSpec>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub mapping: MappingParams,
    #[serde(default)]
    pub scene: SceneConfig,
    #[serde(default)]
    pub remap: RemapConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

/// Nearest candidate for an unknown key or variant in a serde message.
fn suggestion(message: &str) -> Option<String> {
    if !message.starts_with("unknown field") && !message.starts_with("unknown variant") {
        return None;
    }
    let quoted: Vec<&str> = message.split('`').skip(1).step_by(2).collect();
    let (unknown, candidates) = quoted.split_first()?;
    candidates
        .iter()
        .min_by_key(|c| strsim::levenshtein(unknown, c))
        .map(|best| format!("; did you mean `{best}`?"))
}

fn describe(e: &serde_json::Error, origin: &str) -> Error {
    let full = e.to_string();
    let message = match full.rfind(" at line ") {
        Some(i) if e.line() > 0 => &full[..i],
        _ => &full,
    };
    let hint = suggestion(message).unwrap_or_default();
    if e.line() > 0 {
        Error::Config(format!(
            "{origin} line {}, column {}: {message}{hint}",
            e.line(),
            e.column()
        ))
    } else {
        Error::Config(format!("{origin}: {message}{hint}"))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| describe(&e, "config"))
}

/// Sets `a.b.c=value` in a JSON tree. The value is read as JSON when it
/// parses, otherwise as a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override key `{path}` is malformed")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, key) in keys.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("override `{path}`: `{}` is not an object", keys[..i].join(".")))
        })?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last key")
}

/// Parses `text` and applies `overrides` in order.
pub fn config_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let cfg = parse_config(text)?;
    if overrides.is_empty() {
        return Ok(cfg);
    }
    let mut tree: Value = serde_json::from_str(text).map_err(|e| describe(&e, "config"))?;
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    serde_json::from_value(tree).map_err(|e| describe(&e, "after overrides"))
}

/// Reads a config file (or starts from defaults) and resolves relative
/// paths against the file's directory.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let (text, base) = match path {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| Error::io(p.display().to_string(), e))?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => ("{}".to_string(), PathBuf::new()),
    };
    let mut cfg = config_with_overrides(&text, overrides)?;
    cfg.resolve_paths(&base);
    Ok(cfg)
}

fn require<'a>(p: &'a Option<PathBuf>, key: &str, mode: Mode) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("mode {} requires paths.{key}", mode.name())))
}

fn exists(p: &Path) -> Result<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(Error::io(
            p.display().to_string(),
            std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
        ))
    }
}

impl RunConfig {
    pub fn mode(&self) -> Result<Mode> {
        self.mode
            .ok_or_else(|| Error::Config("no mode given".into()))
    }

    pub fn rate_spec(&self) -> RateSpec {
        self.sampling.unwrap_or(RateSpec::constant(self.base_rate_hz))
    }

    pub fn generator_params(&self) -> GeneratorParams {
        GeneratorParams {
            fixation: self.fixation.clone(),
            saccade: self.saccade.clone(),
            pursuit: self.pursuit.clone(),
        }
    }

    /// Whether the selected mode synthesizes a velocity signal.
    pub fn generates_signal(&self) -> bool {
        match self.mode {
            Some(Mode::Velocity) => true,
            Some(Mode::MapStatic | Mode::MapDynamic) => self.paths.velocity.is_none(),
            _ => false,
        }
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        for slot in [
            &mut p.stimulus,
            &mut p.saliency,
            &mut p.frames_dir,
            &mut p.real_data,
            &mut p.velocity,
            &mut p.output,
            &mut p.errors,
            &mut p.targets,
            &mut p.target_log,
        ] {
            if let Some(path) = slot {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }

    /// Parameter checks; independent of the filesystem.
    pub fn validate(&self) -> Result<()> {
        let mode = self.mode()?;
        if !(self.base_rate_hz > 0.0 && self.base_rate_hz.is_finite()) {
            return Err(Error::param("base_rate_hz", "must be positive"));
        }
        self.fixation.validate()?;
        self.saccade.validate()?;
        self.pursuit.validate()?;
        if self.generates_signal() {
            self.sequence.validate()?;
        }
        self.rate_spec().validate(self.base_rate_hz)?;
        self.noise.validate()?;
        self.mapping.validate()?;
        if !(self.scene.frame_rate > 0.0 && self.scene.frame_rate.is_finite()) {
            return Err(Error::param("scene.frame_rate", "must be positive"));
        }
        if self.eval.repeats == 0 {
            return Err(Error::param("eval.repeats", "must be at least 1"));
        }
        if self.remap.width == Some(0) || self.remap.height == Some(0) {
            return Err(Error::param("remap.width", "stimulus size must be positive"));
        }
        require(&self.paths.output, "output", mode)?;
        Ok(())
    }

    /// Checks that every input the mode reads is configured and exists.
    pub fn check_inputs(&self) -> Result<()> {
        let mode = self.mode()?;
        let p = &self.paths;
        let image = || -> Result<()> {
            match (&p.saliency, &p.stimulus) {
                (Some(s), _) | (None, Some(s)) => exists(s),
                (None, None) => Err(Error::Config(format!(
                    "mode {} requires paths.stimulus or paths.saliency",
                    mode.name()
                ))),
            }
        };
        match mode {
            Mode::Velocity => Ok(()),
            Mode::MapStatic => {
                if let Some(v) = &p.velocity {
                    exists(v)?;
                }
                image()
            }
            Mode::MapDynamic => {
                if let Some(v) = &p.velocity {
                    exists(v)?;
                }
                exists(require(&p.frames_dir, "frames_dir", mode)?)
            }
            Mode::Remap => {
                exists(require(&p.real_data, "real_data", mode)?)?;
                let sized = self.remap.width.is_some() && self.remap.height.is_some();
                if self.remap.target == RemapTarget::NewStimulus || !sized {
                    image()?;
                }
                Ok(())
            }
            Mode::Evaluate => exists(require(&p.real_data, "real_data", mode)?),
            Mode::Saliency => image(),
        }
    }
}

/// Config keys read by each mode, for help texts.
pub fn keys_for(mode: Mode) -> Vec<&'static str> {
    const GENERATE: &[&str] = &[
        "seed",
        "base_rate_hz",
        "sequence.counts | sequence.length | sequence.explicit",
        "sequence.rules",
        "fixation.{duration, base_velocity, consistency}",
        "saccade.{duration, peak_velocity, skewness, consistency}",
        "pursuit.{duration, velocity, onset_duration, trend, trend_end_velocity, consistency}",
        "sampling.rate",
        "noise.{fraction, location, location_center, location_std, magnitude, mode, burst_length}",
        "paths.output",
    ];
    const MAP: &[&str] = &[
        "mapping.{pixels_per_degree, max_path_deviation, fixation_dispersion, target_jitter_px}",
        "mapping.{min_distance_px, threshold, selection, deviation}",
        "scene.{frame_rate, precomputed}",
        "paths.{stimulus, saliency, frames_dir, velocity, output, target_log}",
        "(generate keys apply unless paths.velocity is set)",
    ];
    const REMAP: &[&str] = &[
        "seed",
        "remap.{target, width, height}",
        "mapping.*",
        "paths.{real_data, stimulus, saliency, output, target_log}",
    ];
    const EVALUATE: &[&str] = &["seed", "base_rate_hz", "eval.repeats", "paths.{real_data, output, errors}"];
    const SALIENCY: &[&str] = &[
        "seed",
        "mapping.{min_distance_px, threshold, target_jitter_px}",
        "paths.{stimulus, saliency, output, targets}",
    ];
    match mode {
        Mode::Velocity => GENERATE.to_vec(),
        Mode::MapStatic | Mode::MapDynamic => {
            let generate = GENERATE.iter().filter(|k| **k != "paths.output");
            generate.chain(MAP).copied().collect()
        }
        Mode::Remap => REMAP.to_vec(),
        Mode::Evaluate => EVALUATE.to_vec(),
        Mode::Saliency => SALIENCY.to_vec(),
    }
}
