//! Streaming Monte-Carlo estimates and the deterministic parallel engine.
//!
//! Sample `i` always draws from `sample_stream(seed, i)`. Indices are cut into
//! fixed chunks of [`CHUNK`] samples, each chunk is accumulated sequentially,
//! and chunk results are merged in index order. The result is therefore
//! bit-identical for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::EnsembleParams;
use crate::rng::{sample_stream, RandomSource};

/// Samples per chunk of the fixed partition.
pub const CHUNK: u64 = 4096;

/// Flagged fraction above which an estimate carries a warning.
pub const FLAGGED_WARNING_FRACTION: f64 = 1e-3;

/// What an estimate is an estimate of; merges require equal provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: EnsembleParams,
    pub method: String,
}

/// Mean and standard error of a Monte-Carlo functional, accumulated with
/// Welford's update and merged with the pairwise (Chan et al.) rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    m2: f64,
    pub count: u64,
    pub seed: u64,
    /// Samples excluded from the mean (outside the support).
    pub flagged: u64,
    pub provenance: Option<Provenance>,
}

impl MCEstimate {
    pub fn empty(seed: u64, provenance: Option<Provenance>) -> Self {
        MCEstimate {
            mean: 0.0,
            m2: 0.0,
            count: 0,
            seed,
            flagged: 0,
            provenance,
        }
    }

    /// Build an estimate from summary values; `stderr` is converted back to
    /// the internal sum of squared deviations.
    pub fn from_summary(mean: f64, stderr: f64, count: u64, seed: u64) -> Self {
        let n = count as f64;
        let m2 = if count > 1 {
            stderr * stderr * n * (n - 1.0)
        } else {
            0.0
        };
        MCEstimate {
            mean,
            m2,
            count,
            seed,
            flagged: 0,
            provenance: None,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn flag(&mut self) {
        self.flagged += 1;
    }

    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count > 0 {
            (self.variance() / self.count as f64).sqrt()
        } else {
            0.0
        }
    }

    pub fn flagged_fraction(&self) -> f64 {
        let total = self.count + self.flagged;
        if total == 0 {
            0.0
        } else {
            self.flagged as f64 / total as f64
        }
    }

    pub fn warning(&self) -> Option<String> {
        let frac = self.flagged_fraction();
        (frac > FLAGGED_WARNING_FRACTION).then(|| {
            format!(
                "{} of {} samples ({:.2e}) were flagged and excluded",
                self.flagged,
                self.count + self.flagged,
                frac
            )
        })
    }

    /// Combine with an estimate over a disjoint set of samples.
    pub fn merge(&self, other: &MCEstimate) -> Result<MCEstimate> {
        if self.seed != other.seed || self.provenance != other.provenance {
            return Err(Error::Argument(format!(
                "cannot merge estimates with different provenance: seed {} {:?} vs seed {} {:?}",
                self.seed, self.provenance, other.seed, other.provenance
            )));
        }
        Ok(self.merge_unchecked(other))
    }

    fn merge_unchecked(&self, other: &MCEstimate) -> MCEstimate {
        let flagged = self.flagged + other.flagged;
        if other.count == 0 {
            return MCEstimate {
                flagged,
                ..self.clone()
            };
        }
        if self.count == 0 {
            return MCEstimate {
                flagged,
                ..other.clone()
            };
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        MCEstimate {
            mean: self.mean + delta * (nb / n),
            m2: self.m2 + other.m2 + delta * delta * (na * nb / n),
            count: self.count + other.count,
            seed: self.seed,
            flagged,
            provenance: self.provenance.clone(),
        }
    }
}

/// Worker pool selection for the parallel engine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Workers {
    /// rayon's global pool.
    #[default]
    Global,
    Fixed(usize),
}

fn with_workers<T: Send>(workers: Workers, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Workers::Global => Ok(job()),
        Workers::Fixed(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Estimate `K` functionals of the same draw over `n_samples` indexed streams.
///
/// `sample` returns `Ok(None)` for a flagged draw, which is counted and
/// excluded from every component.
pub fn run_indexed<const K: usize, F>(
    n_samples: u64,
    seed: u64,
    workers: Workers,
    provenance: [Option<Provenance>; K],
    sample: F,
) -> Result<[MCEstimate; K]>
where
    F: Fn(&mut RandomSource) -> Result<Option<[f64; K]>> + Sync,
{
    if n_samples == 0 {
        return Err(Error::Argument("n_samples must be at least 1".into()));
    }
    let fresh = || -> [MCEstimate; K] {
        std::array::from_fn(|k| MCEstimate::empty(seed, provenance[k].clone()))
    };
    let chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<Result<[MCEstimate; K]>> = with_workers(workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = fresh();
                let end = ((c + 1) * CHUNK).min(n_samples);
                for i in c * CHUNK..end {
                    let mut rng = sample_stream(seed, i);
                    match sample(&mut rng)? {
                        Some(values) => {
                            for (a, v) in acc.iter_mut().zip(values) {
                                a.push(v);
                            }
                        }
                        None => acc.iter_mut().for_each(MCEstimate::flag),
                    }
                }
                Ok(acc)
            })
            .collect()
    })?;
    let mut total = fresh();
    for part in partials {
        let part = part?;
        for (t, p) in total.iter_mut().zip(&part) {
            *t = t.merge_unchecked(p);
        }
    }
    Ok(total)
}

/// Single-functional form of [`run_indexed`].
pub fn run_indexed_scalar<F>(
    n_samples: u64,
    seed: u64,
    workers: Workers,
    provenance: Option<Provenance>,
    sample: F,
) -> Result<MCEstimate>
where
    F: Fn(&mut RandomSource) -> Result<Option<f64>> + Sync,
{
    let [est] = run_indexed(n_samples, seed, workers, [provenance], |rng| {
        Ok(sample(rng)?.map(|v| [v]))
    })?;
    Ok(est)
}

/// Collect one value per index, in index order.
pub fn collect_indexed<T, F>(
    n_samples: u64,
    seed: u64,
    workers: Workers,
    sample: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomSource) -> Result<T> + Sync,
{
    with_workers(workers, || {
        (0..n_samples)
            .into_par_iter()
            .map(|i| sample(&mut sample_stream(seed, i)))
            .collect::<Result<Vec<T>>>()
    })?
}
