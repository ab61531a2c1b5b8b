use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The dimensions `(n, p, q)` of a corner-submatrix experiment.
///
/// `n` is the ambient dimension of the orthogonal group; the sampled block is
/// `p x q` with `1 <= q <= p` and `p + q <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EnsembleParams {
    n: usize,
    p: usize,
    q: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    p: usize,
    q: usize,
}

impl TryFrom<RawParams> for EnsembleParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        EnsembleParams::new(raw.n, raw.p, raw.q)
    }
}

impl From<EnsembleParams> for RawParams {
    fn from(p: EnsembleParams) -> Self {
        RawParams {
            n: p.n,
            p: p.p,
            q: p.q,
        }
    }
}

impl EnsembleParams {
    pub fn new(n: usize, p: usize, q: usize) -> Result<Self> {
        let reject = |reason: &str| {
            Err(Error::InvalidParams {
                n,
                p,
                q,
                reason: reason.to_string(),
            })
        };
        if q == 0 {
            return reject("q must be at least 1");
        }
        if q > p {
            return reject("q must not exceed p");
        }
        match p.checked_add(q) {
            Some(s) if s <= n => {}
            _ => return reject("p + q must not exceed n"),
        }
        Ok(EnsembleParams { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `c_n = (n - p - q - 1) / 2`, the exponent of `det(I - z'z/n)` in the
    /// density of `sqrt(n) Z`. Always a half-integer, so exact in `f64`.
    pub fn c_n(&self) -> f64 {
        (self.n as f64 - self.p as f64 - self.q as f64 - 1.0) / 2.0
    }

    /// `n - 2 c_n = p + q + 1`.
    pub(crate) fn p_plus_q_plus_one(&self) -> f64 {
        (self.p + self.q + 1) as f64
    }

    pub fn gamma(&self) -> f64 {
        self.q as f64 / self.p as f64
    }
}

impl std::fmt::Display for EnsembleParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(n={}, p={}, q={})", self.n, self.p, self.q)
    }
}
