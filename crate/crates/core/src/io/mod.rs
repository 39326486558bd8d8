//! Readers and writers for every file the simulator touches.

mod config;
mod pgm;
mod tables;

pub use config::{
    apply_override, config_with_overrides, keys_for, load_config, parse_config, EvalConfig, Mode,
    Paths, RemapConfig, RemapTarget, RunConfig, SceneConfig,
};
pub use pgm::{read_pgm, write_pgm, MAX_PIXELS};
pub use tables::{
    format_g6, read_gaze_csv, read_signal_csv, read_targets_csv, read_velocity_csv, write_gaze_csv,
    write_pooled_csv, write_summary_csv, write_target_log, write_targets_csv, write_velocity_csv,
    GAZE_HEADER, POOLED_HEADER, SUMMARY_HEADER, TARGETS_HEADER, TARGET_LOG_HEADER, VELOCITY_HEADER,
};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::saliency::GrayImage;

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_pgm_file(path: &Path) -> Result<GrayImage> {
    read_pgm(&read_file(path)?).map_err(|e| match e {
        Error::Format { what, position, reason } => Error::Format {
            what,
            position: format!("{} {position}", path.display()),
            reason,
        },
        other => other,
    })
}

/// PGM files of a directory ordered by the number in their file stem,
/// e.g. `frame_0001.pgm`.
pub fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir.display().to_string(), e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("pgm") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let digits: String = stem
            .chars()
            .rev()
            .take_while(char::is_ascii_digit)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        let index: u64 = digits.parse().map_err(|_| {
            Error::Config(format!("frame file {} has no frame number", path.display()))
        })?;
        frames.push((index, path));
    }
    frames.sort();
    if let Some(w) = frames.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Config(format!(
            "frame number {} appears twice in {}",
            w[0].0,
            dir.display()
        )));
    }
    if frames.is_empty() {
        return Err(Error::Config(format!("no .pgm frames in {}", dir.display())));
    }
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

/// Writes every file or none: all contents go to temporary siblings
/// first and are renamed into place only once all writes succeeded.
pub fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    let cleanup = |staged: &[(PathBuf, &PathBuf)]| {
        for (tmp, _) in staged {
            let _ = std::fs::remove_file(tmp);
        }
    };
    for (path, bytes) in files {
        let tmp = temp_path(path);
        if let Err(e) = std::fs::write(&tmp, bytes) {
            cleanup(&staged);
            return Err(Error::io(path.display().to_string(), e));
        }
        staged.push((tmp, path));
    }
    for (i, (tmp, path)) in staged.iter().enumerate() {
        if let Err(e) = std::fs::rename(tmp, path) {
            cleanup(&staged[i..]);
            return Err(Error::io(path.display().to_string(), e));
        }
    }
    Ok(())
}
