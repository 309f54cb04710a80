//! Configuration parsing, result files and figures.

pub mod config;
pub mod records;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

pub use config::{document_for, parse_config, resolve, ConfigDocument, ParsedConfig, BUILTIN_IDS};
pub use records::{
    format_decimal, read_records_csv, summarize_records, summarize_rows, write_records_csv, write_rows_csv,
    write_summary_json, RecordRow, Summary, SummaryGroup, CSV_HEADER,
};
pub use svg::{render_boxplots_svg, LayoutOptions};

use crate::harness::{HarnessError, RunRecord};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum IoError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("refusing to write non-finite {column} value {value}")]
    NonFinite { column: String, value: f64 },
    #[error("csv: {0}")]
    Csv(String),
    #[error("nothing to plot")]
    EmptyPlot,
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IoError {
    /// True for failures of the file system rather than of the input.
    pub fn is_io(&self) -> bool {
        matches!(self, Self::File { .. } | Self::Io(_))
    }

    pub fn file(path: &Path, source: std::io::Error) -> Self {
        Self::File { path: path.to_path_buf(), source }
    }
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Self::Io(io),
                other => Self::Csv(format!("{other:?}")),
            }
        } else {
            Self::Csv(e.to_string())
        }
    }
}

impl From<HarnessError> for IoError {
    fn from(e: HarnessError) -> Self {
        Self::Validation(e.to_string())
    }
}

/// Files written by one `run`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultBundle {
    pub tool_version: String,
    pub seed: u64,
    pub raw_csv: PathBuf,
    pub summary_json: PathBuf,
    pub svg: Vec<PathBuf>,
    pub config_echo: PathBuf,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    tool_version: &'a str,
    seed: u64,
    applied_defaults: &'a [String],
    config: ConfigDocument,
    outputs: [&'a str; 3],
}

pub const RAW_CSV: &str = "raw.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const BOXPLOTS_SVG: &str = "boxplots.svg";
pub const CONFIG_ECHO: &str = "config.json";

fn create(path: &Path) -> Result<fs::File, IoError> {
    fs::File::create(path).map_err(|e| IoError::file(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| IoError::file(path, e))
}

/// Writes raw records, summary, boxplots and the resolved config to `dir`.
pub fn write_bundle(dir: &Path, parsed: &ParsedConfig, records: &[RunRecord]) -> Result<ResultBundle, IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    let bundle = ResultBundle {
        tool_version: TOOL_VERSION.to_string(),
        seed: parsed.spec.master_seed,
        raw_csv: dir.join(RAW_CSV),
        summary_json: dir.join(SUMMARY_JSON),
        svg: vec![dir.join(BOXPLOTS_SVG)],
        config_echo: dir.join(CONFIG_ECHO),
    };
    // validate everything before touching the output files
    let rows = records.iter().map(RecordRow::from_record).collect::<Result<Vec<_>, _>>()?;
    let summary = summarize_rows(&rows)?;

    write_rows_csv(&rows, std::io::BufWriter::new(create(&bundle.raw_csv)?))?;
    write_summary_json(&summary, std::io::BufWriter::new(create(&bundle.summary_json)?))?;
    if !summary.groups.is_empty() {
        write_text(&bundle.svg[0], &render_boxplots_svg(&summary, &LayoutOptions::default())?)?;
    }
    let echo = ConfigEcho {
        tool_version: TOOL_VERSION,
        seed: bundle.seed,
        applied_defaults: &parsed.applied_defaults,
        config: document_for(&parsed.spec),
        outputs: [RAW_CSV, SUMMARY_JSON, BOXPLOTS_SVG],
    };
    let mut text = serde_json::to_string_pretty(&echo).map_err(|e| IoError::Validation(e.to_string()))?;
    text.push('\n');
    write_text(&bundle.config_echo, &text)?;
    Ok(bundle)
}

pub fn read_rows_file(path: &Path) -> Result<Vec<RecordRow>, IoError> {
    read_records_csv(fs::File::open(path).map_err(|e| IoError::file(path, e))?)
}

pub fn write_summary_file(path: &Path, summary: &Summary) -> Result<(), IoError> {
    write_summary_json(summary, std::io::BufWriter::new(create(path)?))
}

pub fn write_svg_file(path: &Path, summary: &Summary) -> Result<(), IoError> {
    write_text(path, &render_boxplots_svg(summary, &LayoutOptions::default())?)
}
