//! Front end for the `kgruss` binary.
//!
//! Every setting can come from a command-line flag or from a flat TOML file
//! passed with `--config`; a flag always wins over the file key of the same
//! name. File keys use the long flag names with `-` replaced by `_`
//! (`n_values`, `pair_floor`, `max_ratio`, ...).

pub mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::{default_rate_degrees, run_sweep, RateFit, Residual, ResidualKind};
use crate::function_space::{corpus, lookup, GridSpec, SmoothFunction};
use crate::gruss::{BoundCheckRecord, EstimateConfig, GrussEstimator, NormMode, OmegaMode};
use crate::kantorovich::{QuadratureRule, MAX_DEGREE};

pub use report::{
    write_corpus, write_records, write_records_to, write_sweep, write_sweep_to, Destination,
    OutputFormat, ReportError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Two-point Grüss-Voronovskaya estimate over all grid pairs.
    Verify,
    /// Perturbed Grüss estimate over all grid pairs.
    Perturbed,
    /// Pointwise `|K_n h - h|` bound over the grid.
    Ah,
    /// Sup-norm residual sweep with a log-log rate fit.
    Rates,
    /// List the function corpus.
    Corpus,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verify => "verify",
            Self::Perturbed => "perturbed",
            Self::Ah => "ah",
            Self::Rates => "rates",
            Self::Corpus => "corpus",
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kgruss",
    version,
    about = "Numerical checks of Grüss-Voronovskaya-type estimates for Bernstein-Kantorovich polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Check the two-point Grüss-Voronovskaya inequality on every grid pair
    Verify(Flags),
    /// Check the perturbed Grüss inequality on every grid pair
    Perturbed(Flags),
    /// Check |K_n(h) - h| <= ||h'||/(2n) + 8||h''||/(9n) on the grid
    Ah(Flags),
    /// Sweep a sup-norm residual over n and fit its rate
    Rates(Flags),
    /// List the corpus with its derivative bounds
    Corpus(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// First corpus function
    #[arg(short = 'f', long = "first")]
    first: Option<String>,
    /// Second corpus function
    #[arg(short = 'g', long = "second")]
    second: Option<String>,
    /// Comma-separated degrees
    #[arg(short = 'n', long = "n-values", allow_hyphen_values = true)]
    n_values: Option<String>,
    /// Number of grid points on [0, 1], endpoints included
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Minimum |x - y| for two-point evaluations
    #[arg(long = "pair-floor", allow_hyphen_values = true)]
    pair_floor: Option<String>,
    /// Numerical slack added to the right-hand side
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// Modulus estimator: lower | upper
    #[arg(long)]
    omega: Option<String>,
    /// Norm source: grid | analytic
    #[arg(long)]
    norm: Option<String>,
    /// Residual for `rates`: gv | gruss | nfn
    #[arg(long)]
    residual: Option<String>,
    /// Gate `rates`: fail if n^a * sup exceeds this multiple of its first value
    #[arg(long = "max-ratio", allow_hyphen_values = true)]
    max_ratio: Option<String>,
    /// Record file; stdout when absent
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Flat TOML file of defaults; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("unknown corpus function `{name}` given for `{key}`")]
    UnknownFunction { key: &'static str, name: String },
    #[error("malformed value `{value}` for `{key}`: {reason}")]
    Malformed {
        key: &'static str,
        value: String,
        reason: String,
    },
    #[error("`{key}` must list at least one degree")]
    EmptyNList { key: &'static str },
    #[error("`{command}` needs a function for `{key}`")]
    MissingFunction { command: Command, key: &'static str },
    #[error("cannot read config file {path}: {source}")]
    ReadFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config file {path} is not valid TOML: {message}")]
    FileSyntax { path: String, message: String },
    #[error("config file {path} has unknown key `{key}`")]
    UnknownFileKey { path: String, key: String },
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Canonical corpus names, first then second.
    pub function_names: Vec<String>,
    pub n_values: Vec<usize>,
    pub grid_points: usize,
    pub pair_floor: f64,
    pub tau_check: f64,
    pub omega_mode: OmegaMode,
    pub norm_mode: NormMode,
    pub residual: ResidualKind,
    pub max_ratio: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.grid_points, self.pair_floor).expect("validated when parsed")
    }

    pub fn estimate_config(&self) -> EstimateConfig {
        EstimateConfig::new(self.tau_check, self.omega_mode, self.norm_mode)
            .expect("validated when parsed")
    }

    fn functions(&self) -> Vec<SmoothFunction> {
        self.function_names
            .iter()
            .map(|n| lookup(n).expect("validated when parsed"))
            .collect()
    }
}

const FILE_KEYS: [&str; 12] = [
    "first",
    "second",
    "n_values",
    "grid",
    "pair_floor",
    "tau",
    "omega",
    "norm",
    "residual",
    "max_ratio",
    "output",
    "format",
];

/// Flat key/value view of a config file, every value rendered as the string
/// a flag would have carried.
#[derive(Debug, Default)]
struct FileValues(std::collections::BTreeMap<String, String>);

impl FileValues {
    fn load(path: &Path) -> Result<Self, ConfigError> {
        let label = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::ReadFile {
            path: label.clone(),
            source,
        })?;
        let table: toml::Table =
            text.parse()
                .map_err(|e: toml::de::Error| ConfigError::FileSyntax {
                    path: label.clone(),
                    message: e.message().to_string(),
                })?;
        let mut values = std::collections::BTreeMap::new();
        for (key, value) in table {
            if !FILE_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownFileKey { path: label, key });
            }
            let rendered = match value {
                toml::Value::String(s) => s,
                toml::Value::Array(items) => items
                    .iter()
                    .map(|v| match v {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            values.insert(key, rendered);
        }
        Ok(Self(values))
    }

    fn get(&self, key: &str) -> Option<String> {
        self.0.get(key).cloned()
    }
}

fn parse_number<T: std::str::FromStr>(key: &'static str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e: T::Err| ConfigError::Malformed {
            key,
            value: raw.to_string(),
            reason: e.to_string(),
        })
}

fn malformed(key: &'static str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Malformed {
        key,
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn parse_n_list(raw: &str) -> Result<Vec<usize>, ConfigError> {
    const KEY: &str = "n_values";
    let mut values = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_number::<usize>(KEY, s))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(ConfigError::EmptyNList { key: KEY });
    }
    if let Some(&bad) = values.iter().find(|&&n| n == 0 || n > MAX_DEGREE) {
        return Err(malformed(
            KEY,
            &bad.to_string(),
            format!("degrees must lie in 1..={MAX_DEGREE}"),
        ));
    }
    values.sort_unstable();
    values.dedup();
    Ok(values)
}

/// Parses `args` (program name first) into a [`RunConfig`].
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ConfigError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (command, flags) = match cli.command {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Perturbed(f) => (Command::Perturbed, f),
        Sub::Ah(f) => (Command::Ah, f),
        Sub::Rates(f) => (Command::Rates, f),
        Sub::Corpus(f) => (Command::Corpus, f),
    };
    let file = match &flags.config {
        Some(path) => FileValues::load(path)?,
        None => FileValues::default(),
    };
    resolve(command, flags, &file)
}

fn resolve(command: Command, flags: Flags, file: &FileValues) -> Result<RunConfig, ConfigError> {
    let pick = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key));

    let residual = match pick(flags.residual, "residual") {
        Some(raw) => raw
            .parse::<ResidualKind>()
            .map_err(|e| malformed("residual", &raw, e))?,
        None => ResidualKind::Gv,
    };

    let first = pick(flags.first, "first");
    let second = pick(flags.second, "second");
    let resolve_name =
        |key: &'static str, name: Option<String>| -> Result<Option<String>, ConfigError> {
            name.map(|n| {
                lookup(&n)
                    .map(|f| f.name().to_string())
                    .map_err(|_| ConfigError::UnknownFunction { key, name: n })
            })
            .transpose()
        };
    let first = resolve_name("first", first)?;
    let second = resolve_name("second", second)?;
    let required: &[&'static str] = match command {
        Command::Verify | Command::Perturbed => &["first", "second"],
        Command::Ah => &["first"],
        Command::Rates if residual.needs_pair() => &["first", "second"],
        Command::Rates | Command::Corpus => &[],
    };
    let mut function_names = Vec::new();
    for &key in required {
        let name = if key == "first" { &first } else { &second };
        match name {
            Some(n) => function_names.push(n.clone()),
            None => return Err(ConfigError::MissingFunction { command, key }),
        }
    }

    let n_values = match pick(flags.n_values, "n_values") {
        Some(raw) => parse_n_list(&raw)?,
        None => match command {
            Command::Rates => default_rate_degrees(),
            _ => (0..=6).map(|p| 1usize << p).collect(),
        },
    };

    let grid_points = match pick(flags.grid, "grid") {
        Some(raw) => parse_number::<usize>("grid", &raw)?,
        None => GridSpec::VERIFICATION_POINTS,
    };
    let pair_floor = match pick(flags.pair_floor, "pair_floor") {
        Some(raw) => parse_number::<f64>("pair_floor", &raw)?,
        None => GridSpec::DEFAULT_PAIR_FLOOR,
    };
    if let Err(e) = GridSpec::new(grid_points, pair_floor) {
        let (key, value) = if grid_points < 2 {
            ("grid", grid_points.to_string())
        } else {
            ("pair_floor", pair_floor.to_string())
        };
        return Err(malformed(key, &value, e.to_string()));
    }

    let tau_check = match pick(flags.tau, "tau") {
        Some(raw) => {
            let tau = parse_number::<f64>("tau", &raw)?;
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(malformed(
                    "tau",
                    &raw,
                    "must be a nonnegative finite number",
                ));
            }
            tau
        }
        None => EstimateConfig::DEFAULT_TAU,
    };

    let omega_mode = match pick(flags.omega, "omega").as_deref() {
        None | Some("lower") => OmegaMode::Lower,
        Some("upper") => OmegaMode::Upper,
        Some(other) => return Err(malformed("omega", other, "expected lower or upper")),
    };
    let norm_mode = match pick(flags.norm, "norm").as_deref() {
        None | Some("grid") | Some("grid_lower") => NormMode::GridLower,
        Some("analytic") | Some("analytic_upper") => NormMode::AnalyticUpper,
        Some(other) => return Err(malformed("norm", other, "expected grid or analytic")),
    };
    let output_format = match pick(flags.format, "format").as_deref() {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return Err(malformed("format", other, "expected csv or json")),
    };

    let max_ratio = match pick(flags.max_ratio, "max_ratio") {
        Some(raw) => {
            let r = parse_number::<f64>("max_ratio", &raw)?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(malformed("max_ratio", &raw, "must be positive"));
            }
            Some(r)
        }
        None => None,
    };
    let output_path = flags
        .output
        .or_else(|| file.get("output").map(PathBuf::from));

    Ok(RunConfig {
        command,
        function_names,
        n_values,
        grid_points,
        pair_floor,
        tau_check,
        omega_mode,
        norm_mode,
        residual,
        max_ratio,
        output_path,
        output_format,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportSummary {
    pub command: Command,
    pub total_checks: usize,
    pub passes: usize,
    pub min_slack: Option<f64>,
    pub max_lhs: Option<f64>,
    pub elapsed_seconds: f64,
    /// Present for `rates`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_fit: Option<RateFit>,
}

impl ReportSummary {
    pub fn all_passed(&self) -> bool {
        self.passes == self.total_checks
    }

    fn from_records(command: Command, records: &[BoundCheckRecord], start: Instant) -> Self {
        Self {
            command,
            total_checks: records.len(),
            passes: records.iter().filter(|r| r.pass).count(),
            min_slack: records.iter().map(|r| r.slack).reduce(f64::min),
            max_lhs: records.iter().map(|r| r.lhs).reduce(f64::max),
            elapsed_seconds: start.elapsed().as_secs_f64(),
            rate_fit: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Executes the configured command and writes its record file.
pub fn run(config: &RunConfig) -> Result<ReportSummary, RunError> {
    let start = Instant::now();
    let rule = QuadratureRule::default();
    let grid = config.grid();
    let dest = Destination(config.output_path.clone());
    let functions = config.functions();

    match config.command {
        Command::Verify | Command::Perturbed => {
            let est = GrussEstimator::new(&rule, grid, config.estimate_config());
            let (f, g) = (&functions[0], &functions[1]);
            let mut records = Vec::new();
            for &n in &config.n_values {
                let report = if config.command == Command::Verify {
                    est.check_theorem(f, g, n)?
                } else {
                    est.check_perturbed(f, g, n)?
                };
                records.extend(report.records);
            }
            write_records(&records, config.output_format, &dest)?;
            Ok(ReportSummary::from_records(config.command, &records, start))
        }
        Command::Ah => {
            let est = GrussEstimator::new(&rule, grid, config.estimate_config());
            let mut records = Vec::new();
            for &n in &config.n_values {
                records.extend(est.ah_bound_check(&functions[0], n)?);
            }
            write_records(&records, config.output_format, &dest)?;
            Ok(ReportSummary::from_records(config.command, &records, start))
        }
        Command::Rates => {
            let residual = match config.residual {
                ResidualKind::Gv => Residual::Gv(&functions[0], &functions[1]),
                ResidualKind::Gruss => Residual::Gruss(&functions[0], &functions[1]),
                ResidualKind::Nfn => Residual::Nfn,
            };
            let sweep = run_sweep(residual, &config.n_values, &grid, &rule)?;
            write_sweep(&sweep, config.output_format, &dest)?;
            let mut summary = ReportSummary {
                command: config.command,
                total_checks: 0,
                passes: 0,
                min_slack: None,
                max_lhs: None,
                elapsed_seconds: 0.0,
                rate_fit: Some(sweep.fit),
            };
            if let Some(limit) = config.max_ratio {
                // Scaled residual n^α · sup relative to the first degree.
                let alpha = config.residual.claimed_order();
                let scaled: Vec<f64> = sweep
                    .points
                    .iter()
                    .map(|p| (p.n as f64).powf(alpha) * p.sup_value)
                    .collect();
                let base = scaled[0];
                let ratios: Vec<f64> = scaled
                    .iter()
                    .map(|s| {
                        if base == 0.0 && *s == 0.0 {
                            0.0
                        } else {
                            s / base
                        }
                    })
                    .collect();
                summary.total_checks = ratios.len();
                summary.passes = ratios.iter().filter(|&&r| r <= limit).count();
                summary.min_slack = ratios.iter().map(|r| limit - r).reduce(f64::min);
                summary.max_lhs = ratios.iter().copied().reduce(f64::max);
            }
            summary.elapsed_seconds = start.elapsed().as_secs_f64();
            Ok(summary)
        }
        Command::Corpus => {
            write_corpus(&corpus(), config.output_format, &dest)?;
            Ok(ReportSummary {
                command: config.command,
                total_checks: 0,
                passes: 0,
                min_slack: None,
                max_lhs: None,
                elapsed_seconds: start.elapsed().as_secs_f64(),
                rate_fit: None,
            })
        }
    }
}
