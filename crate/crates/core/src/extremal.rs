//! Extreme eigenvalues of `Z'Z` at large `n`, drawn through the bidiagonal
//! sampler.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::sample_jacobi_spectrum;
use crate::params::EnsembleParams;

/// `pq / n` above which the small-`pq/n` regime is considered left.
pub const REGIME_PQ_OVER_N: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extreme {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalSample {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub params: EnsembleParams,
    /// `q / p`.
    pub gamma: f64,
}

/// Warning text when `pq / n` is too large for the extremal limits to apply.
pub fn regime_warning(params: &EnsembleParams) -> Option<String> {
    let r = (params.p() * params.q()) as f64 / params.n() as f64;
    (r > REGIME_PQ_OVER_N).then(|| format!("pq/n = {r:.3} exceeds {REGIME_PQ_OVER_N} for {params}"))
}

pub fn sample_extremal<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
) -> Result<ExtremalSample> {
    let spec = sample_jacobi_spectrum(params, rng)?;
    if !spec.is_interior() {
        return Err(Error::Domain(format!(
            "extremal draw left (0, 1): [{}, {}]",
            spec.min(),
            spec.max()
        )));
    }
    Ok(ExtremalSample {
        lambda_max: spec.max(),
        lambda_min: spec.min(),
        params: *params,
        gamma: params.gamma(),
    })
}

/// `(n lambda - p) / sqrt(pq)` for the chosen extreme.
pub fn slln_normalize(s: &ExtremalSample, which: Extreme) -> f64 {
    let lambda = match which {
        Extreme::Max => s.lambda_max,
        Extreme::Min => s.lambda_min,
    };
    let (n, p, q) = (
        s.params.n() as f64,
        s.params.p() as f64,
        s.params.q() as f64,
    );
    (n * lambda - p) / (p * q).sqrt()
}

/// The almost-sure limits `2 + sqrt(gamma)` and `2 - sqrt(gamma)` as stated
/// for the normalized maximum and minimum.
pub fn slln_limit(gamma: f64, which: Extreme) -> f64 {
    match which {
        Extreme::Max => 2.0 + gamma.sqrt(),
        Extreme::Min => 2.0 - gamma.sqrt(),
    }
}

/// Limits implied by the Wishart spectral edges `(sqrt p +- sqrt q)^2`:
/// `2 + sqrt(gamma)` for the maximum and `sqrt(gamma) - 2` for the minimum.
/// The minimum differs from [`slln_limit`] by sign.
pub fn edge_limit(gamma: f64, which: Extreme) -> f64 {
    match which {
        Extreme::Max => 2.0 + gamma.sqrt(),
        Extreme::Min => gamma.sqrt() - 2.0,
    }
}

/// `(pq)^{1/6} (sqrt p + sqrt q)^{-4/3} (n lambda_max - (sqrt p + sqrt q)^2)`,
/// exported as a raw fluctuation sample.
pub fn tw_normalized_max(s: &ExtremalSample) -> f64 {
    let (n, p, q) = (
        s.params.n() as f64,
        s.params.p() as f64,
        s.params.q() as f64,
    );
    let edge = p.sqrt() + q.sqrt();
    (p * q).powf(1.0 / 6.0) * edge.powf(-4.0 / 3.0) * (n * s.lambda_max - edge * edge)
}

/// `(1/q) sqrt(lambda_max / lambda_min)`; requires `p = q`.
pub fn ratio_statistic(s: &ExtremalSample) -> Result<f64> {
    if s.params.p() != s.params.q() {
        return Err(Error::Argument(format!(
            "ratio statistic needs p = q, got {}",
            s.params
        )));
    }
    Ok((s.lambda_max / s.lambda_min).sqrt() / s.params.q() as f64)
}

/// `H(x) = exp(-4 / x^2)`, the antiderivative of `h(x) = 8 x^{-3} exp(-4/x^2)`.
pub fn ratio_limit_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-4.0 / (x * x)).exp()
    }
}

/// Limit law of the ratio statistic for real matrices, from Edelman's law of
/// `q sigma_min^2` for a square real Gaussian matrix:
/// `P(X <= x) = exp(-2/x^2 - 2/x)`.
pub fn ratio_limit_cdf_real(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-2.0 / (x * x) - 2.0 / x).exp()
    }
}
