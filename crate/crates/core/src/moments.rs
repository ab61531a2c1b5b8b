//! Closed-form and asymptotic moments of the corner-submatrix spectrum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{run_indexed, MCEstimate, Provenance, Workers};
use crate::jacobi::{resolvent_traces_via_v, sample_beta_chain};
use crate::params::EnsembleParams;

/// Default multiple of `p^2 q^2 / n^3` allowed for the dropped terms of the
/// resolvent expansions.
pub const DEFAULT_REMAINDER_CONSTANT: f64 = 10.0;

/// `E xi^{-k}` for `xi ~ Beta(alpha, beta)`, `k` in `{1, 2}`.
pub fn beta_inverse_moment(alpha: f64, beta: f64, k: u32) -> Result<f64> {
    if !(k == 1 || k == 2) {
        return Err(Error::Argument(format!(
            "inverse moment order must be 1 or 2, got {k}"
        )));
    }
    if alpha.is_nan() || alpha <= k as f64 {
        return Err(Error::Argument(format!(
            "E xi^-{k} is infinite for alpha = {alpha} <= {k}"
        )));
    }
    let a1 = alpha - 1.0;
    Ok(match k {
        1 => 1.0 + beta / a1,
        _ => {
            let a2 = alpha - 2.0;
            1.0 + beta * (1.0 / a1 + 1.0 / a2) + beta * beta / (a1 * a2)
        }
    })
}

/// An asymptotic expansion value with the size of what it leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionValue {
    pub value: f64,
    pub remainder_budget: f64,
}

fn check_expansion_guard(params: &EnsembleParams) -> Result<()> {
    let (n, p, q) = (params.n(), params.p(), params.q());
    if 2 * (p + q) > n {
        return Err(Error::Argument(format!(
            "expansion requires (p + q) / n <= 1/2, got {params}"
        )));
    }
    Ok(())
}

/// Large-`n` expansion of `E sum_k (1 - lambda_k)^{-k}` for `k` in `{1, 2}`.
pub fn resolvent_expansion(params: &EnsembleParams, k: u32) -> Result<ExpansionValue> {
    resolvent_expansion_with(params, k, DEFAULT_REMAINDER_CONSTANT)
}

pub fn resolvent_expansion_with(
    params: &EnsembleParams,
    k: u32,
    remainder_constant: f64,
) -> Result<ExpansionValue> {
    check_expansion_guard(params)?;
    let (n, p, q) = (params.n() as f64, params.p() as f64, params.q() as f64);
    let value = match k {
        1 => {
            q + p * q / (n - p)
                + p * q * (q + 1.0) / (n * n)
                + (2.0 * p * p * q * (q + 1.0) + p * q.powi(3)) / n.powi(3)
        }
        2 => {
            q + 2.0 * p * q / (n - p)
                + p * p * q / (n - p).powi(2)
                + 3.0 * p * q * (q + 1.0) / (n * n)
                + (9.0 * p * p * q * (q + 1.0) + 4.0 * p * q.powi(3)) / n.powi(3)
        }
        _ => {
            return Err(Error::Argument(format!(
                "expansion order must be 1 or 2, got {k}"
            )))
        }
    };
    Ok(ExpansionValue {
        value,
        remainder_budget: remainder_constant * p * p * q * q / n.powi(3),
    })
}

/// `E sum_k lambda_k = pq / n`.
pub fn expected_trace(params: &EnsembleParams) -> f64 {
    (params.p() * params.q()) as f64 / params.n() as f64
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Lemma-level assembly of the Fisher information from the trace and the two
/// resolvent expansions:
/// `(n/4)(pq/n) - c_n (E_1 - q) + (c_n^2 / n)(E_2 - E_1)`.
///
/// The three terms are each `O(pq)` and cancel down to `O(p^2 q^2 / n^2)`, so
/// the sum is carried out in exact rational arithmetic.
pub fn theorem_assembly(params: &EnsembleParams) -> Result<f64> {
    Ok(theorem_assembly_exact(params)?
        .to_f64()
        .expect("assembly is a finite rational"))
}

pub fn theorem_assembly_exact(params: &EnsembleParams) -> Result<BigRational> {
    check_expansion_guard(params)?;
    let (n, p, q) = (params.n() as i64, params.p() as i64, params.q() as i64);
    let c_n = ratio(n - p - q - 1, 2);
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let nn = BigInt::from(n);
    let n2 = BigRational::from_integer(&nn * &nn);
    let n3 = BigRational::from_integer(&nn * &nn * &nn);
    let nmp = int(n - p);

    // E_1 - q and E_2 - E_1 without their common leading q.
    let e1_tail = ratio(p * q, n - p)
        + int(p * q * (q + 1)) / &n2
        + int(2 * p * p * q * (q + 1) + p * q * q * q) / &n3;
    let e2_tail = ratio(2 * p * q, n - p)
        + int(p * p * q) / (&nmp * &nmp)
        + int(3 * p * q * (q + 1)) / &n2
        + int(9 * p * p * q * (q + 1) + 4 * p * q * q * q) / &n3;
    let e2_minus_e1 = &e2_tail - &e1_tail;

    let trace_term = ratio(p * q, 4);
    Ok(trace_term - &c_n * e1_tail + &c_n * &c_n / int(n) * e2_minus_e1)
}

/// The same assembly accumulated naively in `f64`.
pub fn theorem_assembly_f64(params: &EnsembleParams) -> Result<f64> {
    let e1 = resolvent_expansion(params, 1)?.value;
    let e2 = resolvent_expansion(params, 2)?.value;
    let n = params.n() as f64;
    let q = params.q() as f64;
    let c = params.c_n();
    Ok(n / 4.0 * expected_trace(params) - c * (e1 - q) + c * c / n * (e2 - e1))
}

/// Monte-Carlo `E sum (1 - lambda)^{-1}` and `E sum (1 - lambda)^{-2}` from
/// the closed-form inverse entries of bidiagonal draws.
pub fn estimate_resolvent_moments(
    params: &EnsembleParams,
    n_samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<[MCEstimate; 2]> {
    let prov = |k: u32| {
        Some(Provenance {
            params: *params,
            method: format!("resolvent-{k}"),
        })
    };
    run_indexed(n_samples, seed, workers, [prov(1), prov(2)], |rng| {
        let (t1, t2) = resolvent_traces_via_v(&sample_beta_chain(params, rng));
        Ok(Some([t1, t2]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    #[test]
    fn beta_inverse_moments_instantiated() {
        assert!((beta_inverse_moment(3.0, 2.0, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!((beta_inverse_moment(4.0, 1.0, 2).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(beta_inverse_moment(1e6, 0.0, 1).unwrap(), 1.0);
        assert!(beta_inverse_moment(1.0, 1.0, 1).is_err());
        assert!(beta_inverse_moment(2.0, 1.0, 2).is_err());
        assert!(beta_inverse_moment(5.0, 1.0, 3).is_err());
    }

    /// `E xi^{-k}` by `B(alpha - k, beta) / B(alpha, beta)`, independent of the
    /// closed forms above.
    #[test]
    fn beta_inverse_moments_against_beta_function_ratio() {
        use statrs::function::beta::ln_beta;
        for &(a, b) in &[(3.5, 0.5), (10.0, 4.0), (25.5, 3.5), (7.0, 12.0)] {
            for k in 1..=2u32 {
                let want = (ln_beta(a - k as f64, b) - ln_beta(a, b)).exp();
                let got = beta_inverse_moment(a, b, k).unwrap();
                assert!(((got - want) / want).abs() < 1e-12, "({a},{b},{k})");
            }
        }
    }

    #[test]
    fn expected_trace_values() {
        let p = EnsembleParams::new(100, 5, 3).unwrap();
        assert!((expected_trace(&p) - 0.15).abs() < 1e-16);
        for n in [2usize, 7, 100] {
            let p = EnsembleParams::new(n, n - 1, 1).unwrap();
            assert_eq!(expected_trace(&p), (n - 1) as f64 / n as f64);
        }
    }

    /// Exact `E sum (1 - lambda)^{-1}` as a sum over `v_{ij}^2` of products of
    /// independent beta inverse moments.
    fn exact_first_resolvent(params: &EnsembleParams) -> BigRational {
        let (n, p, q) = (params.n() as i64, params.p() as i64, params.q() as i64);
        let one = BigRational::one();
        // (alpha, beta) doubled to stay integral.
        let c_law = |i: i64| (n - p - i + 1, p - i + 1);
        let cp_law = |i: i64| (n - q - i + 2, q - i + 1);
        // E 1/xi = 1 + beta/(alpha - 1); E (1-xi)/xi = beta/(alpha - 1).
        let odds = |(a2, b2): (i64, i64)| ratio(b2, a2 - 2);
        let inv = |law: (i64, i64)| &one + odds(law);
        let inv_cp = |i: i64| {
            if i == q + 1 {
                one.clone()
            } else {
                inv(cp_law(i))
            }
        };
        let mut total = BigRational::zero();
        for i in 1..=q {
            for j in 1..=i {
                let mut t = inv_cp(i + 1) * inv(c_law(j));
                for l in j + 1..=i {
                    t = t * odds(c_law(l)) * odds(cp_law(l));
                }
                total += t;
            }
        }
        total
    }

    #[test]
    fn first_expansion_tracks_exact_value() {
        let params = EnsembleParams::new(2000, 40, 10).unwrap();
        let e = resolvent_expansion(&params, 1).unwrap();
        let exact = exact_first_resolvent(&params).to_f64().unwrap();
        assert!((e.value - 10.20523).abs() < 1e-5);
        assert!(
            (e.value - exact).abs() < e.remainder_budget,
            "{} vs {exact}",
            e.value
        );
    }

    #[test]
    fn exact_resolvent_matches_beta_oracle_at_q1() {
        for &(n, p) in &[(10usize, 2usize), (50, 7)] {
            let params = EnsembleParams::new(n, p, 1).unwrap();
            let exact = exact_first_resolvent(&params).to_f64().unwrap();
            let beta = beta_inverse_moment((n - p) as f64 / 2.0, p as f64 / 2.0, 1).unwrap();
            assert!((exact - beta).abs() < 1e-14);
        }
    }

    #[test]
    fn small_n_expansion_within_budget_only() {
        let params = EnsembleParams::new(10, 2, 1).unwrap();
        let e = resolvent_expansion(&params, 1).unwrap();
        let exact = beta_inverse_moment(4.0, 1.0, 1).unwrap();
        assert!((exact - 4.0 / 3.0).abs() < 1e-15);
        let gap = (e.value - exact).abs();
        assert!(gap > 1e-3 && gap < e.remainder_budget, "gap {gap}");
    }

    #[test]
    fn leading_structure_is_pq_over_n() {
        let mut prev = None;
        for n in [1_000usize, 2_000, 4_000, 8_000] {
            let params = EnsembleParams::new(n, 10, 4).unwrap();
            let e = resolvent_expansion(&params, 1).unwrap();
            let scaled = (e.value - 4.0) * n as f64 / 40.0;
            assert!((scaled - 1.0).abs() < 0.05);
            if let Some(prev) = prev {
                assert!(scaled < prev);
            }
            prev = Some(scaled);
        }
    }

    #[test]
    fn guard_rejects_large_ratio() {
        let params = EnsembleParams::new(10, 4, 3).unwrap();
        assert!(resolvent_expansion(&params, 1).is_err());
        assert!(theorem_assembly(&params).is_err());
        let ok = EnsembleParams::new(10, 3, 2).unwrap();
        assert!(resolvent_expansion(&ok, 3).is_err());
    }

    #[test]
    fn assembly_against_leading_term() {
        use crate::fisher::fisher_asymptotic;
        let params = EnsembleParams::new(100_000, 10, 5).unwrap();
        let r = theorem_assembly(&params).unwrap() / fisher_asymptotic(&params);
        // The printed expansions drop pq^2/n^3-class terms that re-enter at
        // order pq^2/n^2 after multiplication by c_n^2/n.
        assert!((r - 0.8154).abs() < 1e-3, "{r}");
        assert!((0.8..=1.2).contains(&r));
    }

    #[test]
    fn assembly_ratio_trend_on_ladder() {
        use crate::fisher::fisher_asymptotic;
        let ratios: Vec<f64> = [1_000usize, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| {
                let p = EnsembleParams::new(n, 10, 5).unwrap();
                theorem_assembly(&p).unwrap() / fisher_asymptotic(&p)
            })
            .collect();
        for w in ratios.windows(2) {
            assert!(w[1] > w[0], "{ratios:?}");
        }
    }

    #[test]
    fn naive_assembly_loses_digits_only_at_large_n() {
        let moderate = EnsembleParams::new(2_000, 10, 5).unwrap();
        let exact = theorem_assembly(&moderate).unwrap();
        let naive = theorem_assembly_f64(&moderate).unwrap();
        assert!(((naive - exact) / exact).abs() < 1e-6);

        let large = EnsembleParams::new(1_000_000, 10, 5).unwrap();
        let exact = theorem_assembly_exact(&large).unwrap();
        let as_f64 = theorem_assembly(&large).unwrap();
        let back = BigRational::from_float(as_f64).unwrap();
        let rel = ((back - &exact) / &exact).to_f64().unwrap().abs();
        assert!(rel < 1e-15);
    }
}
