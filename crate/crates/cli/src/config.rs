//! Run configuration: the merged view of command line and config file, and
//! the flat "key = value" config-file parser.

use std::path::{Path, PathBuf};

use crate::run::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Step,
    Trajectory,
    Limit,
    Sweep,
    Verify,
}

impl Mode {
    fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "step" => Ok(Self::Step),
            "trajectory" => Ok(Self::Trajectory),
            "limit" => Ok(Self::Limit),
            "sweep" => Ok(Self::Sweep),
            "verify" => Ok(Self::Verify),
            other => Err(CliError::Usage(format!(
                "unknown mode {other:?}: expected step|trajectory|limit|sweep|verify"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arithmetic {
    #[default]
    Floating,
    Rational,
}

impl Arithmetic {
    fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "floating" => Ok(Self::Floating),
            "rational" => Ok(Self::Rational),
            other => Err(CliError::Usage(format!(
                "unknown arithmetic {other:?}: expected rational|floating"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(CliError::Usage(format!(
                "unknown format {other:?}: expected csv|json"
            ))),
        }
    }
}

/// Values read from a config file; every field is optional, command-line
/// flags take precedence.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub mode: Option<Mode>,
    pub points: Vec<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub a_grid: Option<String>,
    pub b_grid: Option<String>,
    pub eps: Option<String>,
    pub max_steps: Option<usize>,
    pub arithmetic: Option<Arithmetic>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

/// The fully merged run configuration, still in textual form where values
/// depend on the arithmetic backend.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub mode: Mode,
    pub points: Vec<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub a_grid: Option<String>,
    pub b_grid: Option<String>,
    pub eps: Option<String>,
    pub max_steps: Option<usize>,
    pub arithmetic: Arithmetic,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Io(format!("cannot read config file {}: {e}", path.display()))
    })?;
    parse_file(&text)
}

fn parse_file(text: &str) -> Result<FileConfig, CliError> {
    let mut cfg = FileConfig::default();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected `key = value`, got {line:?}",
                index + 1
            ))
        })?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "mode" => cfg.mode = Some(Mode::parse(value)?),
            "point" => cfg.points.push(value.to_string()),
            "a" => cfg.a = Some(value.to_string()),
            "b" => cfg.b = Some(value.to_string()),
            "a_grid" => cfg.a_grid = Some(value.to_string()),
            "b_grid" => cfg.b_grid = Some(value.to_string()),
            "eps" => cfg.eps = Some(value.to_string()),
            "max_steps" => {
                cfg.max_steps = Some(value.parse().map_err(|_| {
                    CliError::Usage(format!(
                        "config line {}: max_steps must be a positive integer, got {value:?}",
                        index + 1
                    ))
                })?)
            }
            "arithmetic" => cfg.arithmetic = Some(Arithmetic::parse(value)?),
            "output_format" | "format" => cfg.format = Some(Format::parse(value)?),
            "output_path" | "out" => cfg.out = Some(PathBuf::from(value)),
            other => {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {other:?}",
                    index + 1
                )))
            }
        }
    }
    Ok(cfg)
}
