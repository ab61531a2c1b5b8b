//! The real Jacobi ensemble realized by a random lower bidiagonal matrix.
//!
//! With independent beta variates `c_i`, `c'_i` and complements `s_i = 1 - c_i`,
//! `s'_i = 1 - c'_i`, the matrix `D` with diagonal `sqrt(c_i c'_{i+1})` and
//! subdiagonal `-sqrt(s_i s'_i)` has `D'D` eigenvalues `1 - lambda_k`, where
//! `lambda_k` are the eigenvalues of `Z'Z` for a `p x q` Haar corner. One draw
//! costs `O(q)` beta variates instead of an `O(n q^2)` QR.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::bidiag::bidiagonal_singular_values;
use crate::error::{Error, Result};
use crate::params::EnsembleParams;
use crate::spectrum::Spectrum;

/// `Beta(alpha, beta)` as `G1 / (G1 + G2)` with independent unit-scale gammas.
pub fn sample_beta<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    let mut resamples = 0;
    sample_beta_counted(alpha, beta, rng, &mut resamples)
}

/// As [`sample_beta`]; draws that round to exactly 0 or 1 are redrawn and counted.
pub fn sample_beta_counted<R: Rng + ?Sized>(
    alpha: f64,
    beta: f64,
    rng: &mut R,
    resamples: &mut u64,
) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Argument(format!(
            "beta parameters must be positive and finite, got ({alpha}, {beta})"
        )));
    }
    let ga = Gamma::new(alpha, 1.0).map_err(|e| Error::Argument(e.to_string()))?;
    let gb = Gamma::new(beta, 1.0).map_err(|e| Error::Argument(e.to_string()))?;
    loop {
        let x = ga.sample(rng);
        let y = gb.sample(rng);
        let v = x / (x + y);
        if v > 0.0 && v < 1.0 {
            return Ok(v);
        }
        *resamples += 1;
    }
}

/// Independent beta variates driving the bidiagonal model.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaChain {
    /// `c_1 .. c_q`.
    c: Vec<f64>,
    /// `c'_2 .. c'_q`.
    cp: Vec<f64>,
}

impl BetaChain {
    /// Build a chain from explicit values; `c` has length `q`, `c_prime` holds
    /// `c'_2 .. c'_q` (length `q - 1`).
    pub fn new(c: Vec<f64>, c_prime: Vec<f64>) -> Result<Self> {
        if c.is_empty() || c_prime.len() + 1 != c.len() {
            return Err(Error::Argument(format!(
                "chain needs q >= 1 values of c and q - 1 values of c', got {} and {}",
                c.len(),
                c_prime.len()
            )));
        }
        if c.iter().chain(&c_prime).any(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::Argument("chain entries must lie in (0, 1)".into()));
        }
        Ok(BetaChain { c, cp: c_prime })
    }

    pub fn q(&self) -> usize {
        self.c.len()
    }

    /// `c_i` for `1 <= i <= q`.
    pub fn c(&self, i: usize) -> f64 {
        self.c[i - 1]
    }

    /// `s_i = 1 - c_i`.
    pub fn s(&self, i: usize) -> f64 {
        1.0 - self.c(i)
    }

    /// `c'_i` for `2 <= i <= q + 1`, with `c'_{q+1} = 1`.
    pub fn c_prime(&self, i: usize) -> f64 {
        assert!(i >= 2 && i <= self.q() + 1, "c' index {i} out of range");
        if i == self.q() + 1 {
            1.0
        } else {
            self.cp[i - 2]
        }
    }

    /// `s'_i = 1 - c'_i`.
    pub fn s_prime(&self, i: usize) -> f64 {
        1.0 - self.c_prime(i)
    }
}

/// Draw `c_i ~ Beta((n-p-i+1)/2, (p-i+1)/2)` for `1 <= i <= q` and
/// `c'_i ~ Beta((n-q-i+2)/2, (q-i+1)/2)` for `2 <= i <= q`.
pub fn sample_beta_chain<R: Rng + ?Sized>(params: &EnsembleParams, rng: &mut R) -> BetaChain {
    let mut resamples = 0;
    sample_beta_chain_counted(params, rng, &mut resamples)
}

pub fn sample_beta_chain_counted<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
    resamples: &mut u64,
) -> BetaChain {
    let (n, p, q) = (params.n() as f64, params.p() as f64, params.q());
    let qf = q as f64;
    let c = (1..=q)
        .map(|i| {
            let i = i as f64;
            sample_beta_counted(0.5 * (n - p - i + 1.0), 0.5 * (p - i + 1.0), rng, resamples)
                .expect("valid params give positive beta parameters")
        })
        .collect();
    let cp = (2..=q)
        .map(|i| {
            let i = i as f64;
            sample_beta_counted(
                0.5 * (n - qf - i + 2.0),
                0.5 * (qf - i + 1.0),
                rng,
                resamples,
            )
            .expect("valid params give positive beta parameters")
        })
        .collect();
    BetaChain { c, cp }
}

/// Lower bidiagonal `q x q` matrix `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalModel {
    /// `x_1 .. x_q`, all positive.
    pub diag: Vec<f64>,
    /// `y_2 .. y_q`, all negative.
    pub subdiag: Vec<f64>,
}

impl BidiagonalModel {
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let q = self.diag.len();
        let mut d = nalgebra::DMatrix::zeros(q, q);
        for i in 0..q {
            d[(i, i)] = self.diag[i];
            if i > 0 {
                d[(i, i - 1)] = self.subdiag[i - 1];
            }
        }
        d
    }
}

pub fn build_bidiagonal(chain: &BetaChain) -> BidiagonalModel {
    let q = chain.q();
    let diag = (1..=q)
        .map(|i| (chain.c(i) * chain.c_prime(i + 1)).sqrt())
        .collect();
    let subdiag = (2..=q)
        .map(|i| -(chain.s(i) * chain.s_prime(i)).sqrt())
        .collect();
    BidiagonalModel { diag, subdiag }
}

/// `lambda_k = 1 - sigma_k(D)^2`, ascending.
///
/// Draws whose eigenvalues leave `(0, 1)` are still returned; samplers flag
/// them through [`Spectrum::is_interior`].
pub fn jacobi_spectrum(model: &BidiagonalModel) -> Result<Spectrum> {
    let sv = bidiagonal_singular_values(&model.diag, &model.subdiag)?;
    Ok(Spectrum::from_lambdas(
        sv.iter().map(|s| 1.0 - s * s).collect(),
    ))
}

/// One spectrum draw from the Jacobi law of `(n, p, q)`.
pub fn sample_jacobi_spectrum<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
) -> Result<Spectrum> {
    jacobi_spectrum(&build_bidiagonal(&sample_beta_chain(params, rng)))
}

/// Squared entries `v_{ij}^2` of `V = D^{-1}` (lower triangular), row-major
/// `q x q`, from the closed-form beta products.
pub fn inverse_entries_squared(chain: &BetaChain) -> Vec<f64> {
    let q = chain.q();
    let mut v2 = vec![0.0; q * q];
    for i in 1..=q {
        let head = 1.0 / chain.c_prime(i + 1);
        v2[(i - 1) * q + (i - 1)] = head / chain.c(i);
        let mut prod = 1.0;
        for j in (1..i).rev() {
            let l = j + 1;
            prod *= chain.s(l) * chain.s_prime(l) / (chain.c(l) * chain.c_prime(l));
            v2[(i - 1) * q + (j - 1)] = head / chain.c(j) * prod;
        }
    }
    v2
}

/// `(sum_k (1 - lambda_k)^{-1}, sum_k (1 - lambda_k)^{-2})` without an
/// eigen-decomposition: the first is `sum v_{ij}^2`, the second the squared
/// Frobenius norm of `V'V`. Every entry of `V` is nonnegative.
pub fn resolvent_traces_via_v(chain: &BetaChain) -> (f64, f64) {
    let q = chain.q();
    let v2 = inverse_entries_squared(chain);
    let t1 = v2.iter().sum();
    let v: Vec<f64> = v2.iter().map(|x| x.sqrt()).collect();
    let mut t2 = 0.0;
    for a in 0..q {
        for b in 0..q {
            // (V'V)_{ab} = sum_i v_{ia} v_{ib}, nonzero rows start at max(a, b).
            let g: f64 = (a.max(b)..q).map(|i| v[i * q + a] * v[i * q + b]).sum();
            t2 += g * g;
        }
    }
    (t1, t2)
}

/// Log of the unnormalized Jacobi eigenvalue density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobiLogDensity {
    Value(f64),
    /// Two eigenvalues coincide; the density vanishes there.
    Coincident,
}

/// `sum_i [a log(1 - x_i) + b log x_i] + sum_{i<j} log|x_i - x_j|` with
/// `a = (n-p-q-1)/2`, `b = (p-q-1)/2`.
pub fn jacobi_logdensity_unnormalized(
    x: &[f64],
    params: &EnsembleParams,
) -> Result<JacobiLogDensity> {
    if x.len() != params.q() {
        return Err(Error::Argument(format!(
            "expected {} eigenvalues, got {}",
            params.q(),
            x.len()
        )));
    }
    if let Some(bad) = x.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Domain(format!("eigenvalue {bad} outside (0, 1)")));
    }
    let a = params.c_n();
    let b = (params.p() as f64 - params.q() as f64 - 1.0) / 2.0;
    let mut total: f64 = x.iter().map(|&v| a * (-v).ln_1p() + b * v.ln()).sum();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let gap = (x[i] - x[j]).abs();
            if gap == 0.0 {
                return Ok(JacobiLogDensity::Coincident);
            }
            total += gap.ln();
        }
    }
    Ok(JacobiLogDensity::Value(total))
}
