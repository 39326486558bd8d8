use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use gazeforge::io::{self, keys_for, Mode};
use gazeforge::pipeline;
use gazeforge::Error;

/// Synthetic eye-movement velocity profiles and gaze traces with
/// ground-truth labels.
#[derive(Debug, Parser)]
#[command(name = "gazeforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled velocity signal (CSV).
    Generate(Common),
    /// Place a velocity signal on a stimulus image or frame sequence (gaze CSV).
    Map(Common),
    /// Shuffle the segments of a labeled recording and map them again (gaze CSV).
    Remap(Common),
    /// Compute a saliency map (PGM) and its fixation targets (CSV).
    Saliency(Common),
    /// Simulate every segment of a labeled recording and report squared errors (CSV).
    Evaluate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration. Relative paths inside it resolve against its directory.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a config value by dotted path, e.g. `noise.fraction=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Random seed; replaces `seed` from the config.
    #[arg(long, env = "GAZEFORGE_SEED")]
    seed: Option<u64>,
    /// Main output file; replaces `paths.output`.
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Generate(c) => ("generate", c),
            Command::Map(c) => ("map", c),
            Command::Remap(c) => ("remap", c),
            Command::Saliency(c) => ("saliency", c),
            Command::Evaluate(c) => ("evaluate", c),
        }
    }
}

fn modes_of(subcommand: &str) -> &'static [Mode] {
    match subcommand {
        "generate" => &[Mode::Velocity],
        "map" => &[Mode::MapStatic, Mode::MapDynamic],
        "remap" => &[Mode::Remap],
        "saliency" => &[Mode::Saliency],
        _ => &[Mode::Evaluate],
    }
}

fn key_help(subcommand: &str) -> String {
    let modes = modes_of(subcommand);
    let names: Vec<&str> = modes.iter().map(|m| m.name()).collect();
    let mut text = format!("Config mode: {}\nConfig keys read:\n", names.join(" or "));
    for key in keys_for(modes[0]) {
        text.push_str("  ");
        text.push_str(key);
        text.push('\n');
    }
    text
}

fn execute(command: &Command) -> Result<Vec<String>, Error> {
    let (name, common) = command.parts();
    let mut cfg = io::load_config(common.config.as_deref(), &common.overrides)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(output) = &common.output {
        cfg.paths.output = Some(output.clone());
    }
    let allowed = modes_of(name);
    cfg.mode = match cfg.mode {
        Some(m) if allowed.contains(&m) => Some(m),
        Some(m) => {
            return Err(Error::Config(format!(
                "config mode {} cannot run under `{name}`",
                m.name()
            )))
        }
        None if name == "map" && cfg.paths.frames_dir.is_some() => Some(Mode::MapDynamic),
        None => Some(allowed[0]),
    };
    let out = pipeline::run(&cfg)?;
    io::write_all_atomic(&out.files)?;
    let mut lines = vec![format!("mode: {}, seed: {}", cfg.mode()?.name(), cfg.seed)];
    lines.extend(out.summary);
    Ok(lines)
}

fn main() -> ExitCode {
    let mut cmd = Cli::command();
    for name in ["generate", "map", "remap", "saliency", "evaluate"] {
        let help = key_help(name);
        cmd = cmd.mut_subcommand(name, |sub| sub.after_help(help));
    }
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(&cli.command) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
