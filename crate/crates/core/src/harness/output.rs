//! Output rows and their CSV / JSONL writers. Each row type serializes with
//! a fixed header; column order is part of the file format.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::{Experiment, OutputFormat};
use crate::params::EnsembleParams;

/// `n,p,q,route,samples,seed,mean,stderr,flagged,asymptotic,ratio`.
/// KL rows use `route = "kl"` and leave `asymptotic` and `ratio` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub route: String,
    pub samples: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    pub flagged: u64,
    pub asymptotic: Option<f64>,
    pub ratio: Option<f64>,
}

/// `n,p,q,exp1,exp2,mc1,mc2,stderr1,stderr2,within_budget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub exp1: f64,
    pub exp2: f64,
    pub mc1: f64,
    pub mc2: f64,
    pub stderr1: f64,
    pub stderr2: f64,
    pub within_budget: bool,
}

/// `n,p,q,seed,index,lambda_max,lambda_min,slln_max,slln_min,tw_max_normalized,ratio`.
/// `ratio` is empty unless `p = q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub seed: u64,
    pub index: u64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub slln_max: f64,
    pub slln_min: f64,
    pub tw_max_normalized: f64,
    pub ratio: Option<f64>,
}

/// Per-grid-point summary of an extremal run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSummary {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub samples: u64,
    pub seed: u64,
    pub slln_max_mean: f64,
    pub slln_max_stderr: f64,
    pub slln_min_mean: f64,
    pub slln_min_stderr: f64,
    pub stated_limit_max: f64,
    pub stated_limit_min: f64,
    pub edge_limit_min: f64,
    /// KS distance of the ratio statistic to `exp(-4/x^2)` when `p = q`.
    pub ratio_ks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub samples: u64,
    pub seed: u64,
    pub kl: f64,
    pub kl_stderr: f64,
    pub fisher: f64,
    pub fisher_stderr: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub trials: u64,
    pub seed: u64,
    pub max_rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub samples: u64,
    pub seed: u64,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RecordBody {
    Estimate(EstimateRow),
    Moments(MomentsRow),
    Extremal(ExtremalSummary),
    Lsi(LsiRow),
    Identity(IdentityRow),
    Agreement(AgreementRow),
}

/// One grid point's result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub experiment: Experiment,
    pub params: EnsembleParams,
    pub body: RecordBody,
    pub wall_time_s: f64,
}

impl OutputRecord {
    /// Equality of everything but the wall time.
    pub fn same_result(&self, other: &OutputRecord) -> bool {
        self.experiment == other.experiment
            && self.params == other.params
            && self.body == other.body
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Write rows as CSV (with header) or JSONL.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T], format: OutputFormat) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
            for row in rows {
                w.serialize(row).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            let mut w = BufWriter::new(File::create(path)?);
            for row in rows {
                serde_json::to_writer(&mut w, row)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Write the bodies of homogeneous records.
pub fn write_records(path: &Path, records: &[OutputRecord], format: OutputFormat) -> Result<()> {
    macro_rules! bodies {
        ($variant:ident) => {
            records
                .iter()
                .map(|r| match &r.body {
                    RecordBody::$variant(row) => Ok(row.clone()),
                    other => Err(Error::Argument(format!("mixed record types: {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()
        };
    }
    match records.first().map(|r| &r.body) {
        None => write_rows::<EstimateRow>(path, &[], format),
        Some(RecordBody::Estimate(_)) => write_rows(path, &bodies!(Estimate)?, format),
        Some(RecordBody::Moments(_)) => write_rows(path, &bodies!(Moments)?, format),
        Some(RecordBody::Extremal(_)) => write_rows(path, &bodies!(Extremal)?, format),
        Some(RecordBody::Lsi(_)) => write_rows(path, &bodies!(Lsi)?, format),
        Some(RecordBody::Identity(_)) => write_rows(path, &bodies!(Identity)?, format),
        Some(RecordBody::Agreement(_)) => write_rows(path, &bodies!(Agreement)?, format),
    }
}

/// One line of a spectrum dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub seed: u64,
    pub index: u64,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub spectrum: Vec<f64>,
}

/// Long-format CSV line of a spectrum dump: one eigenvalue per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub seed: u64,
    pub index: u64,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub lambda: f64,
}

/// Write spectra as long-format CSV or one JSON array per line.
pub fn write_spectra(path: &Path, records: &[SpectrumRecord], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Jsonl => write_rows(path, records, format),
        OutputFormat::Csv => {
            let rows: Vec<SpectrumEntry> = records
                .iter()
                .flat_map(|r| {
                    r.spectrum
                        .iter()
                        .enumerate()
                        .map(move |(k, &lambda)| SpectrumEntry {
                            seed: r.seed,
                            index: r.index,
                            n: r.n,
                            p: r.p,
                            q: r.q,
                            k,
                            lambda,
                        })
                })
                .collect();
            write_rows(path, &rows, format)
        }
    }
}
