//! Result records and their CSV/JSON serialization.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// One replication outcome. `exceeded` always equals `observed > threshold`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    #[serde(rename = "T")]
    pub t: u64,
    pub n: u64,
    pub replication: u64,
    pub seed: u64,
    pub observed: f64,
    pub threshold: f64,
    pub exceeded: bool,
    pub wall_ms: f64,
}

impl ResultRecord {
    pub fn new(
        experiment: impl Into<String>,
        t: u64,
        n: u64,
        replication: u64,
        seed: u64,
        observed: f64,
        threshold: f64,
        wall_ms: f64,
    ) -> Self {
        ResultRecord {
            experiment: experiment.into(),
            t,
            n,
            replication,
            seed,
            observed,
            threshold,
            exceeded: observed > threshold,
            wall_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Invalid(format!("unknown format {other:?}, expected csv or json"))),
        }
    }
}

/// 17 significant digits, enough for exact f64 round-trips.
pub fn fmt_float17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str = "experiment,T,n,replication,seed,observed,threshold,exceeded,wall_ms";

/// Render records in the requested format. CSV columns are exactly
/// `experiment,T,n,replication,seed,observed,threshold,exceeded,wall_ms`;
/// JSON is an array of objects with identical keys. Floats carry 17
/// significant digits in both formats.
pub fn render_records(records: &[ResultRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.experiment,
                    r.t,
                    r.n,
                    r.replication,
                    r.seed,
                    fmt_float17(r.observed),
                    fmt_float17(r.threshold),
                    r.exceeded,
                    fmt_float17(r.wall_ms)
                );
            }
            out
        }
        OutputFormat::Json => {
            let mut out = String::from("[");
            for (i, r) in records.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                let _ = write!(
                    out,
                    "{{\"experiment\":{},\"T\":{},\"n\":{},\"replication\":{},\"seed\":{},\
                     \"observed\":{},\"threshold\":{},\"exceeded\":{},\"wall_ms\":{}}}",
                    serde_json::to_string(&r.experiment).expect("string serializes"),
                    r.t,
                    r.n,
                    r.replication,
                    r.seed,
                    fmt_float17(r.observed),
                    fmt_float17(r.threshold),
                    r.exceeded,
                    fmt_float17(r.wall_ms)
                );
            }
            out.push_str("\n]\n");
            out
        }
    }
}

/// Parse records back from the JSON rendering.
pub fn parse_records_json(text: &str) -> Result<Vec<ResultRecord>> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("record JSON parse: {e}")))
}

/// Write records to `path`, or to stdout when `path` is `None`.
pub fn emit_results(
    records: &[ResultRecord],
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<()> {
    let rendered = render_records(records, format);
    match path {
        Some(path) => {
            std::fs::write(path, rendered).map_err(|e| Error::io(path, e))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}
