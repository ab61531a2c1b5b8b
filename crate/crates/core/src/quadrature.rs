//! Tanh-sinh quadrature and the one-dimensional `p = q = 1` oracles.
//!
//! The oracles integrate the density of `sqrt(n) Z` written directly as
//! `(1 - z^2/n)^{c_n}` normalized numerically, so they share no code with the
//! spectral evaluators or the Wishart constants.

use crate::error::{Error, Result};

/// Integral of `f` over `(a, b)` by tanh-sinh with successive halving of the
/// step until two levels agree to `tol` (relative).
///
/// `f` receives `(x, x - a, b - x)`; the distances are accurate near the
/// endpoints, where `x` itself has rounded to `a` or `b`.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let pi2 = std::f64::consts::FRAC_PI_2;
    let eval = |t: f64| -> f64 {
        // Node s = tanh(u), u = (pi/2) sinh t, and its complements 1 -+ s.
        let u = pi2 * t.sinh();
        let ch = u.cosh();
        let w = pi2 * t.cosh() / (ch * ch);
        let s = u.tanh();
        let comp_hi = (-u).exp() / ch; // 1 - s
        let comp_lo = u.exp() / ch; // 1 + s
        if comp_hi == 0.0 || comp_lo == 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = mid + half * s;
        let v = f(x, half * comp_lo, half * comp_hi);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = half * h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = half * h * sum;
        if (next - estimate).abs() <= tol * next.abs().max(1e-300) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Divergent(format!(
        "tanh-sinh quadrature did not reach relative tolerance {tol:e} (last estimate {estimate:e})"
    )))
}

/// Expectation of `g(t, 1 - t^2)` under the density proportional to
/// `(1 - t^2)^{c}` on `(-cut, cut)`, where `t = z / sqrt(n)`.
fn expect_on_unit<G: Fn(f64, f64) -> f64>(c: f64, cut: f64, g: G) -> Result<f64> {
    let weight = |_: f64, lo: f64, hi: f64| {
        // On (-cut, cut), 1 - t^2 = (1 - t)(1 + t) with 1 -+ t = (1 - cut) + distance.
        let u = ((1.0 - cut) + hi) * ((1.0 - cut) + lo);
        u.powf(c)
    };
    let norm = tanh_sinh(weight, -cut, cut, 1e-12)?;
    let num = tanh_sinh(
        |t, lo, hi| {
            let u = ((1.0 - cut) + hi) * ((1.0 - cut) + lo);
            g(t, u) * u.powf(c)
        },
        -cut,
        cut,
        1e-12,
    )?;
    Ok(num / norm)
}

fn check_scalar_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Argument(format!("p = q = 1 needs n >= 2, got {n}")));
    }
    Ok(n as f64)
}

/// `I = E[(1/4)(z - 2 c_n z / (n - z^2))^2]` for `p = q = 1`.
///
/// The integral is evaluated on `(-1 + eps, 1 - eps)` in `t = z/sqrt(n)` for a
/// ladder of cuts; if the truncated values keep growing the Fisher information
/// is infinite and a domain error is returned.
pub fn fisher_oracle_1d(n: usize) -> Result<f64> {
    let nf = check_scalar_n(n)?;
    let c = (nf - 3.0) / 2.0;
    let integrand = |t: f64, u: f64| {
        let factor = 1.0 - 2.0 * c / (nf * u);
        0.25 * nf * t * t * factor * factor
    };
    if c == 0.0 {
        return expect_on_unit(c, 1.0, integrand);
    }
    let cuts = [1e-4, 1e-6, 1e-8];
    let values: Vec<f64> = cuts
        .iter()
        .map(|eps| expect_on_unit(c, 1.0 - eps, integrand))
        .collect::<Result<_>>()?;
    let (prev, last) = (values[1], values[2]);
    if ((last - prev) / last).abs() > 1e-7 {
        return Err(Error::Divergent(format!(
            "Fisher information integral diverges at n = {n}: truncated values {values:?} keep growing"
        )));
    }
    Ok(last)
}

/// `D_KL = E_f log(f/g)` for `p = q = 1`, with `f` the density of `sqrt(n) Z`
/// and `g` the standard normal density.
pub fn kl_oracle_1d(n: usize) -> Result<f64> {
    let nf = check_scalar_n(n)?;
    let c = (nf - 3.0) / 2.0;
    // log f(z) = c log(1 - t^2) - log(sqrt(n) * int (1 - t^2)^c dt).
    let norm = tanh_sinh(|_, lo, hi| (lo * hi).powf(c), -1.0, 1.0, 1e-12)?;
    let log_norm = (nf.sqrt() * norm).ln();
    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    expect_on_unit(c, 1.0, |t, u| {
        let z2 = nf * t * t;
        c * u.ln() - log_norm + half_log_2pi + 0.5 * z2
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_endpoint_singularity() {
        let v = tanh_sinh(|x, _, _| x * x, 0.0, 3.0, 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        // int_0^1 x^{-1/2} dx = 2.
        let v = tanh_sinh(|_, lo, _| lo.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
        // int_{-1}^{1} (1 - x^2)^{-1/2} dx = pi.
        let v = tanh_sinh(|_, lo, hi| (lo * hi).powf(-0.5), -1.0, 1.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn fisher_at_n3_is_quarter() {
        assert!((fisher_oracle_1d(3).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fisher_diverges_at_n4() {
        assert!(matches!(fisher_oracle_1d(4), Err(Error::Divergent(_))));
    }

    #[test]
    fn fisher_matches_beta_moments_at_n10() {
        // lambda ~ Beta(1/2, (n-1)/2); the Fisher functional in closed form.
        let n = 10.0f64;
        let c = (n - 3.0) / 2.0;
        let (a, b) = ((n - 1.0) / 2.0, 0.5);
        let e1 = 1.0 + b / (a - 1.0);
        let e2 = 1.0 + b * (1.0 / (a - 1.0) + 1.0 / (a - 2.0)) + b * b / ((a - 1.0) * (a - 2.0));
        let want = n / 4.0 * (1.0 / n) - c * (e1 - 1.0) + c * c / n * (e2 - e1);
        let got = fisher_oracle_1d(10).unwrap();
        assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn kl_at_n3_closed_form() {
        let want = 0.5 * (2.0 * std::f64::consts::PI).ln() + 0.5 - (2.0 * 3f64.sqrt()).ln();
        assert!((kl_oracle_1d(3).unwrap() - want).abs() < 1e-10);
    }
}
