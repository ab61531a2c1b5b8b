use serde::{Deserialize, Serialize};

/// Distance from 1 below which an eigenvalue of `Z'Z` is treated as touching
/// the edge of the support.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Which matrix the stored eigenvalues belong to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// Eigenvalues `lambda_k` of `Z'Z`.
    Lambda,
    /// Eigenvalues `x_k = n lambda_k` of `z'z` with `z = sqrt(n) Z`.
    Scaled { n: usize },
}

/// Ascending eigenvalues of a `q x q` Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    scale: Scale,
}

impl Spectrum {
    /// Eigenvalues of `Z'Z`, sorted on construction.
    pub fn from_lambdas(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum {
            values,
            scale: Scale::Lambda,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The eigenvalues at the `lambda` scale regardless of how they are stored.
    pub fn lambdas(&self) -> Vec<f64> {
        match self.scale {
            Scale::Lambda => self.values.clone(),
            Scale::Scaled { n } => self.values.iter().map(|x| x / n as f64).collect(),
        }
    }

    pub fn to_lambda(&self) -> Spectrum {
        Spectrum {
            values: self.lambdas(),
            scale: Scale::Lambda,
        }
    }

    /// Rescale to `x_k = n lambda_k`.
    pub fn to_scaled(&self, n: usize) -> Spectrum {
        Spectrum {
            values: self.lambdas().iter().map(|l| l * n as f64).collect(),
            scale: Scale::Scaled { n },
        }
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// True when every `lambda_k` lies in `(0, 1 - BOUNDARY_TOL)`.
    pub fn is_interior(&self) -> bool {
        self.lambdas()
            .iter()
            .all(|&l| l > 0.0 && l < 1.0 - BOUNDARY_TOL && l.is_finite())
    }
}
