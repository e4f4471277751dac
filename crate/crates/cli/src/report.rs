//! CSV and JSON output. Both are byte-stable for identical inputs.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::{SweepConfig, SweepFunctional, Tolerances};
use crate::error::{CliError, CliResult};
use crate::sweep::{CriticalSqueezingResult, SweepRow};

/// Bumped whenever a column is added, removed or reordered.
pub const CSV_VERSION: u32 = 1;

const SWEEP_COLUMNS: &str = "r_db,eta,n_th,n,functional,value,bound,violated,status";
const DISTANCE_COLUMNS: &str = "r_db,eta,n_th,n,inputs,distance_raw,distance_per_setting,status";
const CRITICAL_COLUMNS: &str = "functional,n,eta,n_th,r_crit,lower,upper,r_min,r_max,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?} (csv or json)")),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace(['\n', '\r'], " "))
    } else {
        s.to_string()
    }
}

fn header(kind: &str, columns: &str) -> String {
    format!(
        "# gkp-bell {} {kind} csv v{CSV_VERSION}: {columns}\n{columns}\n",
        env!("CARGO_PKG_VERSION")
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> CliResult<String> {
    let first = rows.first().ok_or_else(|| CliError::Config("nothing to report: empty sweep".into()))?;
    let distance = first.functional == SweepFunctional::Distance;
    let mut out = if distance {
        header("distance", DISTANCE_COLUMNS)
    } else {
        header("sweep", SWEEP_COLUMNS)
    };
    for r in rows {
        if distance {
            let per = r.distance_per_setting.unwrap_or(f64::NAN);
            writeln!(out, "{},{},{},{},{},{},{},{}", r.r_db, r.eta, r.n_th, r.n, r.inputs, r.value, per, csv_field(&r.status))
        } else {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.r_db,
                r.eta,
                r.n_th,
                r.n,
                r.functional.name(),
                r.value,
                r.bound,
                r.violated,
                csv_field(&r.status)
            )
        }
        .expect("write to string");
    }
    Ok(out)
}

pub fn critical_csv(results: &[CriticalSqueezingResult]) -> CliResult<String> {
    if results.is_empty() {
        return Err(CliError::Config("nothing to report: no channels".into()));
    }
    let mut out = header("critical-squeezing", CRITICAL_COLUMNS);
    for r in results {
        let (lo, hi) = match r.bracket {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (String::new(), String::new()),
        };
        let status = serde_json::to_value(r.status).expect("status serializes");
        writeln!(
            out,
            "{},{},{},{},{},{lo},{hi},{},{},{}",
            r.functional.name(),
            r.n,
            r.eta,
            r.n_th,
            r.r_crit_label(),
            r.range.0,
            r.range.1,
            status.as_str().unwrap_or_default()
        )
        .expect("write to string");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStats {
    pub points: usize,
    pub ok: usize,
    pub failed: usize,
    pub violated: usize,
    pub min_value: Option<f64>,
    pub max_value: Option<f64>,
}

impl SweepStats {
    pub fn of(rows: &[SweepRow]) -> Self {
        let ok: Vec<f64> = rows.iter().filter(|r| r.status == "ok").map(|r| r.value).collect();
        Self {
            points: rows.len(),
            ok: ok.len(),
            failed: rows.len() - ok.len(),
            violated: rows.iter().filter(|r| r.violated).count(),
            min_value: ok.iter().copied().reduce(f64::min),
            max_value: ok.iter().copied().reduce(f64::max),
        }
    }
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    csv_version: u32,
    config: &'a SweepConfig,
    tolerances: &'a Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<SweepStats>,
    results: &'a [T],
}

/// JSON summary and CSV detail of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: String,
    pub csv: String,
}

impl Report {
    pub fn render(&self, format: Format) -> &str {
        match format {
            Format::Csv => &self.csv,
            Format::Json => &self.json,
        }
    }
}

fn summary<T: Serialize>(config: &SweepConfig, stats: Option<SweepStats>, results: &[T]) -> String {
    let s = Summary {
        tool: "gkp-bell",
        version: env!("CARGO_PKG_VERSION"),
        csv_version: CSV_VERSION,
        config,
        tolerances: &config.tolerances,
        stats,
        results,
    };
    // NaN is not JSON; failed points carry null values
    let mut text = serde_json::to_string_pretty(&s).expect("summary serializes");
    text.push('\n');
    text
}

pub fn emit_report(rows: &[SweepRow], config: &SweepConfig) -> CliResult<Report> {
    let csv = sweep_csv(rows)?;
    Ok(Report {
        json: summary(config, Some(SweepStats::of(rows)), rows),
        csv,
    })
}

pub fn emit_critical_report(results: &[CriticalSqueezingResult], config: &SweepConfig) -> CliResult<Report> {
    let csv = critical_csv(results)?;
    Ok(Report {
        json: summary(config, None, results),
        csv,
    })
}

/// Writes to `path`, or stdout when absent.
pub fn write_output(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}
