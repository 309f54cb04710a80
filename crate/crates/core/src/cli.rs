//! The `alperf` command line.
//!
//! Exit status: 0 on success, 1 for usage and validation errors, 2 when the
//! file system fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::harness::{self, ExperimentSpec};
use crate::io::{self, IoError, BUILTIN_IDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Seed written into exported built-in configurations.
pub const BUILTIN_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "alperf", version, about = "Simulate runtime performance estimators for active learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write raw.csv, summary.json, boxplots.svg and config.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `master_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Summarize a raw CSV into grouped boxplot statistics (JSON).
    Report {
        raw: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render boxplots from a raw CSV.
    Plot {
        raw: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in scenario configurations.
    Scenarios {
        /// Also write each built-in as `<id>.json` into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn exit_code(e: &IoError) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_INVALID
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit status.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_INVALID,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), IoError> {
    match command {
        Command::Run { config, out, seed, workers } => run(&config, &out, seed, workers, stdout),
        Command::Report { raw, out } => {
            let summary = io::summarize_rows(&io::read_rows_file(&raw)?)?;
            io::write_summary_file(&out, &summary)?;
            let _ = writeln!(stdout, "{} groups -> {}", summary.groups.len(), out.display());
            Ok(())
        }
        Command::Plot { raw, out } => {
            let summary = io::summarize_rows(&io::read_rows_file(&raw)?)?;
            io::write_svg_file(&out, &summary)?;
            let _ = writeln!(stdout, "{} boxes -> {}", summary.groups.len(), out.display());
            Ok(())
        }
        Command::Scenarios { export } => scenarios(export.as_deref(), stdout),
    }
}

fn run(config: &Path, out: &Path, seed: Option<u64>, workers: Option<usize>, stdout: &mut dyn Write) -> Result<(), IoError> {
    let text = fs::read_to_string(config).map_err(|e| IoError::file(config, e))?;
    let mut parsed = io::parse_config(&text)?;
    if let Some(seed) = seed {
        parsed.spec.master_seed = seed;
        parsed.applied_defaults.retain(|f| f != "master_seed");
    }
    let workers = match workers {
        Some(0) => return Err(IoError::Validation("invalid `--workers`: must be >= 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let records = harness::run(&parsed.spec, workers)?;
    let bundle = io::write_bundle(out, &parsed, &records)?;
    let _ = writeln!(
        stdout,
        "{} records ({}, seed {}) -> {}",
        records.len(),
        parsed.spec.scenario,
        bundle.seed,
        out.display()
    );
    if !parsed.applied_defaults.is_empty() {
        let _ = writeln!(stdout, "defaults applied: {}", parsed.applied_defaults.join(", "));
    }
    Ok(())
}

fn scenarios(export: Option<&Path>, stdout: &mut dyn Write) -> Result<(), IoError> {
    if let Some(dir) = export {
        fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    }
    for (id, scenario) in BUILTIN_IDS {
        let spec = ExperimentSpec::defaults_for(scenario, BUILTIN_SEED);
        let estimators: Vec<String> = spec.estimators.iter().map(|e| e.label()).collect();
        let _ = writeln!(
            stdout,
            "{id}\t{scenario}\treps={} budgets={:?} samplers={} estimators={}",
            spec.repetitions,
            spec.budgets,
            spec.samplers.len(),
            estimators.join(",")
        );
        if let Some(dir) = export {
            let path = dir.join(format!("{id}.json"));
            let mut text = serde_json::to_string_pretty(&io::document_for(&spec)).expect("documents serialize");
            text.push('\n');
            fs::write(&path, text).map_err(|e| IoError::file(&path, e))?;
        }
    }
    Ok(())
}
