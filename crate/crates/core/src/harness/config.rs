use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::Workers;
use crate::fisher::FisherRoute;
use crate::params::EnsembleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fisher,
    Kl,
    Lsi,
    Moments,
    Extremal,
    IdentityCheck,
    SamplerAgreement,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Fisher => "fisher",
            Experiment::Kl => "kl",
            Experiment::Lsi => "lsi",
            Experiment::Moments => "moments",
            Experiment::Extremal => "extremal",
            Experiment::IdentityCheck => "identity-check",
            Experiment::SamplerAgreement => "sampler-agreement",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

/// One unvalidated `(n, p, q)` entry as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

impl From<EnsembleParams> for GridPoint {
    fn from(p: EnsembleParams) -> Self {
        GridPoint {
            n: p.n(),
            p: p.p(),
            q: p.q(),
        }
    }
}

/// Declarative description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub grid: Vec<GridPoint>,
    pub samples: u64,
    pub seed: u64,
    #[serde(default)]
    pub route: Option<FisherRoute>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    #[serde(default)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Validate every grid entry and the sample count, naming the first
    /// offending entry.
    pub fn validate(&self) -> Result<Vec<EnsembleParams>> {
        if self.samples == 0 {
            return Err(Error::Argument("samples must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Argument(
                "grid must contain at least one (n, p, q) entry".into(),
            ));
        }
        self.grid
            .iter()
            .enumerate()
            .map(|(i, g)| {
                EnsembleParams::new(g.n, g.p, g.q).map_err(|e| {
                    Error::Argument(format!(
                        "grid entry {i} (n={}, p={}, q={}): {e}",
                        g.n, g.p, g.q
                    ))
                })
            })
            .collect()
    }

    pub fn worker_pool(&self) -> Workers {
        match self.workers {
            Some(k) => Workers::Fixed(k),
            None => Workers::Global,
        }
    }
}
