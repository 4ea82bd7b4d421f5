use crate::arith::DivisorTable;
use crate::error::Result;
use crate::experiments::{variance_theorem1, ExperimentConfig, ExperimentRecord};
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

const COLUMNS: [&str; 9] =
    ["x", "q", "Y", "variance", "normalized_variance", "theorem2_sum", "normalized_t2", "parseval_gap", "wall_ms"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Serializes rows as CSV with a header, or as a pretty JSON array.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// A configuration that could not be evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFailure {
    pub x: u64,
    pub q: u64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalingRun {
    /// One record per successful configuration, in configuration order.
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<ScalingFailure>,
    /// Configurations whose records were already on disk.
    pub skipped: usize,
}

fn same_config(r: &ExperimentRecord, c: &ExperimentConfig) -> bool {
    r.x == c.x && r.q == c.q && r.y.to_bits() == c.y.to_bits()
}

/// `<out>.failures.csv`.
pub fn failures_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".failures.csv");
    PathBuf::from(name)
}

/// Runs every configuration not yet present in `out`, appending one CSV row
/// per success. Failures go to [`failures_path`], rewritten on each run.
pub fn scaling_table(configs: &[ExperimentConfig], out: &Path, table: &DivisorTable) -> Result<ScalingRun> {
    let existing = if out.exists() && std::fs::metadata(out)?.len() > 0 {
        read_records(out)?
    } else {
        let mut w = csv::Writer::from_path(out)?;
        w.write_record(COLUMNS)?;
        w.flush()?;
        Vec::new()
    };
    let mut writer =
        csv::WriterBuilder::new().has_headers(false).from_writer(OpenOptions::new().append(true).open(out)?);
    let mut run = ScalingRun::default();
    for cfg in configs {
        if let Some(r) = existing.iter().find(|r| same_config(r, cfg)) {
            run.records.push(r.clone());
            run.skipped += 1;
            continue;
        }
        match variance_theorem1(cfg, table) {
            Ok(record) => {
                writer.serialize(&record)?;
                writer.flush()?;
                run.records.push(record);
            }
            Err(e) => run.failures.push(ScalingFailure { x: cfg.x, q: cfg.q, y: cfg.y, error: e.to_string() }),
        }
    }
    let sidecar = failures_path(out);
    if run.failures.is_empty() {
        if sidecar.exists() {
            std::fs::remove_file(&sidecar)?;
        }
    } else {
        write_rows(&run.failures, File::create(&sidecar)?, OutputFormat::Csv)?;
    }
    Ok(run)
}

/// Least-squares slope of `log y` against `log x`; `None` with fewer than
/// two distinct abscissae or a non-positive value.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}
