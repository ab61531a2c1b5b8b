//! Corner submatrices of Haar orthogonal matrices compared with Gaussian
//! matrices.
//!
//! For `Z` the upper-left `p x q` block of a uniformly random `n x n`
//! orthogonal matrix, this crate samples `Z` and the eigenvalues of `Z'Z`
//! (directly, or in `O(q)` through a random bidiagonal matrix), evaluates the
//! relative Fisher information and Kullback-Leibler divergence of
//! `L(sqrt(n) Z)` from the standard Gaussian law by Monte Carlo, tabulates the
//! closed-form resolvent moments, and simulates the extreme eigenvalues.
//!
//! | module | contents |
//! |---|---|
//! | [`ensembles`] | Gaussian and Haar-corner samplers, squared singular values |
//! | [`jacobi`] | beta chains, bidiagonal model, resolvent traces, eigenvalue density |
//! | [`fisher`] | spectral and gradient integrands, Fisher estimator, leading asymptotic |
//! | [`divergences`] | Wishart constants, log-density ratio, KL, log-Sobolev check |
//! | [`moments`] | beta inverse moments, resolvent expansions, assembly |
//! | [`extremal`] | extreme-eigenvalue statistics and limit laws |
//! | [`harness`] | run configuration, experiments, output files, acceptance checks |

pub mod bidiag;
pub mod divergences;
pub mod ensembles;
pub mod error;
pub mod estimate;
pub mod extremal;
pub mod fisher;
pub mod harness;
pub mod jacobi;
pub mod moments;
pub mod params;
pub mod quadrature;
pub mod rng;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
pub use estimate::{MCEstimate, Workers};
pub use fisher::FisherRoute;
pub use params::EnsembleParams;
pub use spectrum::Spectrum;
