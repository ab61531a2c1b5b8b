//! Gaussian matrices, Haar corner submatrices, and their squared singular
//! values.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::params::EnsembleParams;
use crate::spectrum::Spectrum;

/// A dense real `rows x cols` matrix drawn by one of the samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    data: DMatrix<f64>,
}

impl MatrixSample {
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("matrix entries must be finite".into()));
        }
        Ok(MatrixSample {
            data: DMatrix::from_row_slice(rows, cols, entries),
        })
    }

    pub fn from_matrix(data: DMatrix<f64>) -> Self {
        MatrixSample { data }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.data.transpose().as_slice().to_vec()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// `p x q` matrix of independent standard normals.
pub fn sample_gaussian_matrix<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
) -> MatrixSample {
    MatrixSample {
        data: gaussian(params.p(), params.q(), rng),
    }
}

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// Uniform `n x q` Stiefel frame: Gaussian draw, thin QR, and the sign of each
/// column flipped so that the triangular factor has a positive diagonal.
///
/// Rank-deficient Gaussian draws are redrawn; `resamples` counts them.
pub fn sample_stiefel_frame<R: Rng + ?Sized>(
    n: usize,
    q: usize,
    rng: &mut R,
    resamples: &mut u64,
) -> Result<DMatrix<f64>> {
    if q == 0 || q > n {
        return Err(Error::Argument(format!(
            "Stiefel frame needs 1 <= q <= n, got n={n}, q={q}"
        )));
    }
    loop {
        let g = gaussian(n, q, rng);
        let qr = g.qr();
        let r = qr.r();
        let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = f64::EPSILON * n as f64 * rmax;
        if (0..q).any(|j| r[(j, j)].abs() <= floor) {
            *resamples += 1;
            continue;
        }
        let mut frame = qr.q();
        for j in 0..q {
            if r[(j, j)] < 0.0 {
                frame.column_mut(j).neg_mut();
            }
        }
        return Ok(frame);
    }
}

/// The upper-left `p x q` block of a Haar orthogonal `n x n` matrix, read off
/// the first `p` rows of a uniform `n x q` frame. Costs `O(n q^2)`.
pub fn sample_corner_submatrix<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
) -> MatrixSample {
    let mut resamples = 0;
    sample_corner_submatrix_counted(params, rng, &mut resamples)
}

/// As [`sample_corner_submatrix`], counting rank-deficient redraws.
pub fn sample_corner_submatrix_counted<R: Rng + ?Sized>(
    params: &EnsembleParams,
    rng: &mut R,
    resamples: &mut u64,
) -> MatrixSample {
    let frame = sample_stiefel_frame(params.n(), params.q(), rng, resamples)
        .expect("valid params imply 1 <= q <= n");
    MatrixSample {
        data: frame.rows(0, params.p()).into_owned(),
    }
}

/// Ascending eigenvalues of `Z'Z`, computed as squared singular values of `Z`.
///
/// The result is returned even when eigenvalues reach 1; callers sampling
/// corner submatrices use [`Spectrum::is_interior`] to flag such draws.
pub fn squared_singular_spectrum(z: &MatrixSample) -> Result<Spectrum> {
    if z.rows() < z.cols() {
        return Err(Error::Argument(format!(
            "spectrum of Z'Z needs rows >= cols, got {}x{}",
            z.rows(),
            z.cols()
        )));
    }
    let sv = z.data.singular_values();
    Ok(Spectrum::from_lambdas(sv.iter().map(|s| s * s).collect()))
}
