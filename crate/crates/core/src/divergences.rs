//! Log-density ratio of `sqrt(n) Z` against the Gaussian, Kullback-Leibler
//! estimation, and the Gaussian log-Sobolev check `2 D_KL <= I`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimate::{run_indexed_scalar, MCEstimate, Provenance, Workers};
use crate::jacobi::sample_jacobi_spectrum;
use crate::params::EnsembleParams;
use crate::spectrum::Spectrum;

/// `log omega(s, t)` where
/// `1 / omega(s, t) = pi^{t(t-1)/4} 2^{st/2} prod_{j=1}^t Gamma((s - j + 1) / 2)`.
pub fn log_wishart_constant(s: f64, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::Argument("t must be a positive integer".into()));
    }
    let tf = t as f64;
    if !s.is_finite() || s <= tf - 1.0 {
        return Err(Error::Argument(format!(
            "Wishart constant needs s > t - 1, got s={s}, t={t}"
        )));
    }
    let gammas: f64 = (1..=t).map(|j| ln_gamma((s - j as f64 + 1.0) / 2.0)).sum();
    Ok(-(tf * (tf - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + s * tf / 2.0 * std::f64::consts::LN_2
        + gammas))
}

/// `log B_{n,p,q}`, the constant of `f_n / g_n`.
///
/// `f_n` has constant `(2 pi)^{-pq/2} n^{-pq/2} omega(n-p, q) / omega(n, q)`
/// and `g_n` has `(2 pi)^{-pq/2}`, so
/// `log B = -(pq/2) log n + log omega(n-p, q) - log omega(n, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalizer {
    pub log_b: f64,
}

impl LogNormalizer {
    pub fn new(params: &EnsembleParams) -> Result<Self> {
        let (n, p, q) = (params.n() as f64, params.p() as f64, params.q());
        let log_b = -(p * q as f64 / 2.0) * n.ln() + log_wishart_constant(n - p, q)?
            - log_wishart_constant(n, q)?;
        Ok(LogNormalizer { log_b })
    }
}

/// `log (f_n / g_n)(sqrt(n) Z) = log B + c_n sum log(1 - lambda_k) + (n/2) sum lambda_k`.
pub fn log_density_ratio(
    spec: &Spectrum,
    params: &EnsembleParams,
    normalizer: &LogNormalizer,
) -> Result<f64> {
    let lambdas = spec.lambdas();
    if lambdas.len() != params.q() {
        return Err(Error::Argument(format!(
            "spectrum has {} eigenvalues, params expect q = {}",
            lambdas.len(),
            params.q()
        )));
    }
    let n = params.n() as f64;
    let c = params.c_n();
    let mut log_det = 0.0;
    let mut trace = 0.0;
    for &l in &lambdas {
        if !(0.0..1.0).contains(&l) {
            return Err(Error::Domain(format!("eigenvalue {l} outside [0, 1)")));
        }
        log_det += (-l).ln_1p();
        trace += l;
    }
    Ok(normalizer.log_b + c * log_det + n / 2.0 * trace)
}

/// Monte-Carlo `D_KL(L(sqrt(n) Z_n) | L(G_n)) = E_f log(f_n / g_n)` over
/// bidiagonal Jacobi spectra.
pub fn estimate_kl(params: &EnsembleParams, n_samples: u64, seed: u64) -> Result<MCEstimate> {
    estimate_kl_with(params, n_samples, seed, Workers::Global)
}

pub fn estimate_kl_with(
    params: &EnsembleParams,
    n_samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<MCEstimate> {
    let norm = LogNormalizer::new(params)?;
    let provenance = Provenance {
        params: *params,
        method: "kl".into(),
    };
    run_indexed_scalar(n_samples, seed, workers, Some(provenance), |rng| {
        let spec = sample_jacobi_spectrum(params, rng)?;
        if !spec.is_interior() {
            return Ok(None);
        }
        Ok(Some(log_density_ratio(&spec, params, &norm)?))
    })
}

/// Monte-Carlo `E_f[g_n / f_n]`, which equals the Gaussian mass of the
/// support of `f_n` (1 up to a negligible tail once `n` is moderate).
pub fn estimate_importance_weight(
    params: &EnsembleParams,
    n_samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let norm = LogNormalizer::new(params)?;
    let provenance = Provenance {
        params: *params,
        method: "importance".into(),
    };
    run_indexed_scalar(n_samples, seed, Workers::Global, Some(provenance), |rng| {
        let spec = sample_jacobi_spectrum(params, rng)?;
        if !spec.is_interior() {
            return Ok(None);
        }
        Ok(Some((-log_density_ratio(&spec, params, &norm)?).exp()))
    })
}

/// Outcome of the empirical log-Sobolev check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiReport {
    pub params: Option<EnsembleParams>,
    pub kl: f64,
    pub kl_stderr: f64,
    pub fisher: f64,
    pub fisher_stderr: f64,
    /// `fisher - 2 kl`.
    pub slack: f64,
    pub holds: bool,
}

/// `2 kl <= fisher` up to three standard errors of `2 kl - fisher`.
pub fn check_lsi(kl: &MCEstimate, fisher: &MCEstimate) -> Result<LsiReport> {
    let params = match (&kl.provenance, &fisher.provenance) {
        (Some(a), Some(b)) if a.params != b.params => {
            return Err(Error::Argument(format!(
                "KL estimate is for {} but Fisher estimate is for {}",
                a.params, b.params
            )))
        }
        (Some(a), _) => Some(a.params),
        (None, Some(b)) => Some(b.params),
        (None, None) => None,
    };
    let combined = ((2.0 * kl.stderr()).powi(2) + fisher.stderr().powi(2)).sqrt();
    Ok(LsiReport {
        params,
        kl: kl.mean,
        kl_stderr: kl.stderr(),
        fisher: fisher.mean,
        fisher_stderr: fisher.stderr(),
        slack: fisher.mean - 2.0 * kl.mean,
        holds: 2.0 * kl.mean <= fisher.mean + 3.0 * combined,
    })
}
