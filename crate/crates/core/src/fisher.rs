//! Relative Fisher information of `L(sqrt(n) Z)` with respect to the standard
//! Gaussian law on `p x q` matrices.
//!
//! The per-sample integrand `1/4 |grad log(f_n / g_n)|^2` is available two
//! ways: from the spectrum of `Z'Z` alone, and from the entrywise gradient of
//! `c_n log det(I - z'z/n) + tr(z'z)/2`. The two must agree sample by sample.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_corner_submatrix, squared_singular_spectrum, MatrixSample};
use crate::error::{Error, Result};
use crate::estimate::{run_indexed_scalar, MCEstimate, Provenance, Workers};
use crate::jacobi::sample_jacobi_spectrum;
use crate::params::EnsembleParams;
use crate::spectrum::Spectrum;

/// `1/4 |grad log(f_n / g_n)|^2` at one sample; nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct IntegrandValue(pub f64);

impl IntegrandValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Spectral form of the integrand.
///
/// With `x_k = n lambda_k` and `n - 2 c_n = p + q + 1 =: m`, the integrand is
/// `1/4 sum_k x_k (m - x_k)^2 / (n - x_k)^2`. This is the expanded
/// `1/4 [4 c_n q + sum x_k - 4 c_n (c_n + n) sum (n - x_k)^{-1}
/// + 4 n c_n^2 sum (n - x_k)^{-2}]` regrouped term by term, which avoids the
/// cancellation of `O(n q)` terms.
pub fn integrand_spectral(spec: &Spectrum, params: &EnsembleParams) -> Result<IntegrandValue> {
    let lambdas = spec.lambdas();
    if lambdas.len() != params.q() {
        return Err(Error::Argument(format!(
            "spectrum has {} eigenvalues, params expect q = {}",
            lambdas.len(),
            params.q()
        )));
    }
    let n = params.n() as f64;
    let m = params.p_plus_q_plus_one();
    let mut total = 0.0;
    for &l in &lambdas {
        if !(0.0..1.0).contains(&l) {
            return Err(Error::Domain(format!("eigenvalue {l} outside [0, 1)")));
        }
        let one_minus = 1.0 - l;
        let t = (m - n * l) / one_minus;
        total += l * t * t / n;
    }
    Ok(IntegrandValue(0.25 * total))
}

/// Gradient form of the integrand on a `p x q` sample `Z`.
///
/// With `z = sqrt(n) Z` and `D = I - z'z / n`, each row `i` solves
/// `D xi_i = -(1/n) z_i`, so that `c_n d/dz_ij log det D = 2 c_n xi_ij`; the
/// value is `1/4 sum_ij (z_ij + 2 c_n xi_ij)^2`.
pub fn integrand_gradient(z: &MatrixSample, params: &EnsembleParams) -> Result<IntegrandValue> {
    let (p, q) = (params.p(), params.q());
    if z.rows() != p || z.cols() != q {
        return Err(Error::Argument(format!(
            "sample is {}x{}, params expect {p}x{q}",
            z.rows(),
            z.cols()
        )));
    }
    let n = params.n() as f64;
    let zs: DMatrix<f64> = z.as_matrix() * n.sqrt();
    let s = zs.transpose() * &zs;
    let d = DMatrix::<f64>::identity(q, q) - s / n;
    let chol = Cholesky::new(d.clone()).ok_or_else(|| {
        let smallest = d
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Error::Domain(format!(
            "I - z'z/n is not positive definite (smallest eigenvalue {smallest:e})"
        ))
    })?;
    let two_c = 2.0 * params.c_n();
    let mut total = 0.0;
    for i in 0..p {
        let row: DVector<f64> = zs.row(i).transpose();
        let xi = chol.solve(&(-&row / n));
        total += row
            .iter()
            .zip(xi.iter())
            .map(|(zij, xij)| (zij + two_c * xij).powi(2))
            .sum::<f64>();
    }
    Ok(IntegrandValue(0.25 * total))
}

/// How [`estimate_fisher`] draws its samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FisherRoute {
    /// Bidiagonal Jacobi spectra, spectral integrand. `O(q)` per draw.
    #[default]
    SpectralJacobi,
    /// Haar corner submatrices, spectral integrand.
    SpectralHaar,
    /// Haar corner submatrices, gradient integrand.
    GradientHaar,
}

impl FisherRoute {
    pub const ALL: [FisherRoute; 3] = [
        FisherRoute::SpectralJacobi,
        FisherRoute::SpectralHaar,
        FisherRoute::GradientHaar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FisherRoute::SpectralJacobi => "spectral-jacobi",
            FisherRoute::SpectralHaar => "spectral-haar",
            FisherRoute::GradientHaar => "gradient-haar",
        }
    }
}

impl fmt::Display for FisherRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FisherRoute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FisherRoute::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown route {s:?}")))
    }
}

/// Monte-Carlo estimate of `I(L(sqrt(n) Z_n) | L(G_n))`.
pub fn estimate_fisher(
    params: &EnsembleParams,
    n_samples: u64,
    seed: u64,
    route: FisherRoute,
) -> Result<MCEstimate> {
    estimate_fisher_with(params, n_samples, seed, route, Workers::Global)
}

pub fn estimate_fisher_with(
    params: &EnsembleParams,
    n_samples: u64,
    seed: u64,
    route: FisherRoute,
    workers: Workers,
) -> Result<MCEstimate> {
    let provenance = Provenance {
        params: *params,
        method: format!("fisher/{route}"),
    };
    run_indexed_scalar(
        n_samples,
        seed,
        workers,
        Some(provenance),
        |rng| match route {
            FisherRoute::SpectralJacobi => {
                let spec = sample_jacobi_spectrum(params, rng)?;
                if !spec.is_interior() {
                    return Ok(None);
                }
                Ok(Some(integrand_spectral(&spec, params)?.0))
            }
            FisherRoute::SpectralHaar | FisherRoute::GradientHaar => {
                let z = sample_corner_submatrix(params, rng);
                let spec = squared_singular_spectrum(&z)?;
                if !spec.is_interior() {
                    return Ok(None);
                }
                let v = if route == FisherRoute::SpectralHaar {
                    integrand_spectral(&spec, params)?
                } else {
                    integrand_gradient(&z, params)?
                };
                Ok(Some(v.0))
            }
        },
    )
}

/// Leading-order asymptotic `p^2 q (q + 1) / (4 n^2)`.
pub fn fisher_asymptotic(params: &EnsembleParams) -> f64 {
    let (n, p, q) = (params.n() as f64, params.p() as f64, params.q() as f64);
    p * p * q * (q + 1.0) / (4.0 * n * n)
}
