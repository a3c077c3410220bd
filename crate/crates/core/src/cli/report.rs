//! Record and sweep writers.
//!
//! CSV reals are written with 17 significant digits in scientific notation,
//! which round-trips every `f64` and does not depend on locale.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{RateFit, SweepPoint, SweepResult};
use crate::function_space::SmoothFunction;
use crate::gruss::BoundCheckRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("cannot encode {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Where a report goes: a file, or stdout when no path is configured.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Destination(pub Option<PathBuf>);

impl Destination {
    fn label(&self) -> String {
        match &self.0 {
            Some(p) => p.display().to_string(),
            None => "<stdout>".to_string(),
        }
    }

    fn open(&self) -> Result<Box<dyn Write>, ReportError> {
        match &self.0 {
            Some(p) => {
                let file = File::create(p).map_err(|source| ReportError::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                Ok(Box::new(BufWriter::new(file)))
            }
            None => Ok(Box::new(io::stdout().lock())),
        }
    }
}

impl From<&Path> for Destination {
    fn from(p: &Path) -> Self {
        Self(Some(p.to_path_buf()))
    }
}

/// `{:.16e}`: 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub const RECORD_COLUMNS: [&str; 7] = ["n", "x", "y", "lhs", "rhs", "slack", "pass"];
pub const SWEEP_COLUMNS: [&str; 3] = ["residual", "n", "sup_value"];

fn csv_rows<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
    label: &str,
) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: label.to_string(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: label.to_string(),
        source,
    })
}

fn json_value<W: Write, T: Serialize>(
    mut out: W,
    value: &T,
    label: &str,
) -> Result<(), ReportError> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|source| ReportError::Json {
        path: label.to_string(),
        source,
    })?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|source| ReportError::Io {
            path: label.to_string(),
            source,
        })
}

/// Writes check records as CSV (`n,x,y,lhs,rhs,slack,pass`) or as a JSON
/// array of objects with the same keys.
pub fn write_records_to<W: Write>(
    out: W,
    records: &[BoundCheckRecord],
    format: OutputFormat,
    label: &str,
) -> Result<(), ReportError> {
    match format {
        OutputFormat::Csv => csv_rows(
            out,
            &RECORD_COLUMNS,
            records.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    format_real(r.x),
                    format_real(r.y),
                    format_real(r.lhs),
                    format_real(r.rhs),
                    format_real(r.slack),
                    r.pass.to_string(),
                ]
            }),
            label,
        ),
        OutputFormat::Json => json_value(out, &records, label),
    }
}

pub fn write_records(
    records: &[BoundCheckRecord],
    format: OutputFormat,
    dest: &Destination,
) -> Result<(), ReportError> {
    write_records_to(dest.open()?, records, format, &dest.label())
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct SweepRow {
    residual: String,
    n: usize,
    sup_value: f64,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct FitFooter {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

/// JSON layout of a sweep file. `fit` is `null` for an identically zero
/// series.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct SweepDocument {
    points: Vec<SweepRow>,
    fit: Option<FitFooter>,
}

/// Writes a sweep as CSV (`residual,n,sup_value`) or JSON (`points` plus a
/// `fit` footer object).
pub fn write_sweep_to<W: Write>(
    out: W,
    sweep: &SweepResult,
    format: OutputFormat,
    label: &str,
) -> Result<(), ReportError> {
    match format {
        OutputFormat::Csv => csv_rows(
            out,
            &SWEEP_COLUMNS,
            sweep.points.iter().map(|p: &SweepPoint| {
                vec![
                    sweep.residual_name.clone(),
                    p.n.to_string(),
                    format_real(p.sup_value),
                ]
            }),
            label,
        ),
        OutputFormat::Json => {
            let doc = SweepDocument {
                points: sweep
                    .points
                    .iter()
                    .map(|p| SweepRow {
                        residual: sweep.residual_name.clone(),
                        n: p.n,
                        sup_value: p.sup_value,
                    })
                    .collect(),
                fit: match sweep.fit {
                    RateFit::IdenticallyZero => None,
                    RateFit::PowerLaw {
                        slope,
                        intercept,
                        r_squared,
                    } => Some(FitFooter {
                        slope,
                        intercept,
                        r_squared,
                    }),
                },
            };
            json_value(out, &doc, label)
        }
    }
}

pub fn write_sweep(
    sweep: &SweepResult,
    format: OutputFormat,
    dest: &Destination,
) -> Result<(), ReportError> {
    write_sweep_to(dest.open()?, sweep, format, &dest.label())
}

#[derive(Serialize)]
struct CorpusRow<'a> {
    name: &'a str,
    norm_bound_0: f64,
    norm_bound_1: f64,
    norm_bound_2: f64,
    norm_bound_3: f64,
}

/// Corpus listing with the analytic derivative bounds.
pub fn write_corpus(
    members: &[SmoothFunction],
    format: OutputFormat,
    dest: &Destination,
) -> Result<(), ReportError> {
    let label = dest.label();
    let out = dest.open()?;
    match format {
        OutputFormat::Csv => csv_rows(
            out,
            &[
                "name",
                "norm_bound_0",
                "norm_bound_1",
                "norm_bound_2",
                "norm_bound_3",
            ],
            members.iter().map(|f| {
                std::iter::once(f.name().to_string())
                    .chain(f.norm_bounds().iter().map(|&b| format_real(b)))
                    .collect()
            }),
            &label,
        ),
        OutputFormat::Json => {
            let rows: Vec<CorpusRow> = members
                .iter()
                .map(|f| {
                    let [b0, b1, b2, b3] = f.norm_bounds();
                    CorpusRow {
                        name: f.name(),
                        norm_bound_0: b0,
                        norm_bound_1: b1,
                        norm_bound_2: b2,
                        norm_bound_3: b3,
                    }
                })
                .collect();
            json_value(out, &rows, &label)
        }
    }
}
