//! Singular values of a real bidiagonal matrix.
//!
//! Implicit QR sweeps on the bidiagonal itself, with the Demmel-Kahan
//! zero-shift sweep whenever a shift would destroy the relative accuracy of
//! the smallest singular values. The Gram matrix is never formed, so singular
//! values of order `sqrt(eps)` keep full relative precision.

use crate::error::{Error, Result};

/// Singular values of the upper bidiagonal matrix with diagonal `d` and
/// superdiagonal `e` (`e.len() == d.len() - 1`), returned ascending.
///
/// A lower bidiagonal matrix has the same singular values as its transpose,
/// so callers pass its subdiagonal as `e`.
pub fn bidiagonal_singular_values(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if e.len() + 1 != n {
        return Err(Error::Argument(format!(
            "bidiagonal with {} diagonal entries needs {} off-diagonal entries, got {}",
            n,
            n - 1,
            e.len()
        )));
    }
    let mut d = d.to_vec();
    let mut e = e.to_vec();
    let eps = f64::EPSILON * 0.5;
    let tol = eps.powf(-0.125).clamp(10.0, 100.0) * eps;
    let max_sweeps = 6 * n * n + 10;

    let mut hi = n - 1;
    let mut sweeps = 0;
    while hi > 0 {
        if e[hi - 1] == 0.0 {
            hi -= 1;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 && e[lo - 1] != 0.0 {
            lo -= 1;
        }

        // Relative-accuracy negligibility test; `mu` ends as an estimate of
        // the smallest singular value of the block.
        let mut mu = d[lo].abs();
        let mut split = false;
        for j in lo..hi {
            if e[j].abs() <= tol * mu {
                e[j] = 0.0;
                split = true;
                break;
            }
            mu = d[j + 1].abs() * (mu / (mu + e[j].abs()));
        }
        if split {
            continue;
        }

        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence(sweeps));
        }

        let smax = d[lo..=hi]
            .iter()
            .chain(&e[lo..hi])
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut shift = 0.0;
        if (hi - lo + 1) as f64 * tol * (mu / smax) > eps {
            shift = smin_2x2(d[hi - 1], e[hi - 1], d[hi]);
            if smax > 0.0 && (shift / smax).powi(2) < eps {
                shift = 0.0;
            }
        }

        if shift == 0.0 {
            zero_shift_sweep(&mut d, &mut e, lo, hi);
        } else {
            shifted_sweep(&mut d, &mut e, lo, hi, shift);
        }
    }

    let mut s: Vec<f64> = d.into_iter().map(f64::abs).collect();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Givens rotation `(c, s, r)` with `[c s; -s c] [f; g] = [r; 0]`.
fn givens(f: f64, g: f64) -> (f64, f64, f64) {
    if g == 0.0 {
        (1.0, 0.0, f)
    } else if f == 0.0 {
        (0.0, 1.0, g)
    } else {
        let r = f.hypot(g);
        (f / r, g / r, r)
    }
}

fn zero_shift_sweep(d: &mut [f64], e: &mut [f64], lo: usize, hi: usize) {
    let mut cs = 1.0;
    let mut oldcs = 1.0;
    let mut oldsn = 0.0;
    for i in lo..hi {
        let (c, s, r) = givens(d[i] * cs, e[i]);
        cs = c;
        if i > lo {
            e[i - 1] = oldsn * r;
        }
        let (oc, os, di) = givens(oldcs * r, d[i + 1] * s);
        oldcs = oc;
        oldsn = os;
        d[i] = di;
    }
    let h = d[hi] * cs;
    d[hi] = h * oldcs;
    e[hi - 1] = h * oldsn;
}

fn shifted_sweep(d: &mut [f64], e: &mut [f64], lo: usize, hi: usize, shift: f64) {
    let mut f = (d[lo].abs() - shift) * (d[lo].signum() + shift / d[lo]);
    let mut g = e[lo];
    for i in lo..hi {
        let (cosr, sinr, r) = givens(f, g);
        if i > lo {
            e[i - 1] = r;
        }
        f = cosr * d[i] + sinr * e[i];
        e[i] = cosr * e[i] - sinr * d[i];
        g = sinr * d[i + 1];
        d[i + 1] *= cosr;
        let (cosl, sinl, r) = givens(f, g);
        d[i] = r;
        f = cosl * e[i] + sinl * d[i + 1];
        d[i + 1] = cosl * d[i + 1] - sinl * e[i];
        if i + 1 < hi {
            g = sinl * e[i + 1];
            e[i + 1] *= cosl;
        }
    }
    e[hi - 1] = f;
}

/// Smaller singular value of `[f g; 0 h]`.
fn smin_2x2(f: f64, g: f64, h: f64) -> f64 {
    let (fa, ga, ha) = (f.abs(), g.abs(), h.abs());
    let fhmn = fa.min(ha);
    let fhmx = fa.max(ha);
    if fhmn == 0.0 {
        return 0.0;
    }
    if ga < fhmx {
        let as_ = 1.0 + fhmn / fhmx;
        let at = (fhmx - fhmn) / fhmx;
        let au = (ga / fhmx).powi(2);
        let c = 2.0 / ((as_ * as_ + au).sqrt() + (at * at + au).sqrt());
        fhmn * c
    } else {
        let au = fhmx / ga;
        if au == 0.0 {
            (fhmn * fhmx) / ga
        } else {
            let as_ = 1.0 + fhmn / fhmx;
            let at = (fhmx - fhmn) / fhmx;
            let c = 1.0 / ((1.0 + (as_ * au).powi(2)).sqrt() + (1.0 + (at * au).powi(2)).sqrt());
            2.0 * (fhmn * c) * au
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn dense_upper(d: &[f64], e: &[f64]) -> DMatrix<f64> {
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = d[i];
            if i + 1 < n {
                m[(i, i + 1)] = e[i];
            }
        }
        m
    }

    fn reference(d: &[f64], e: &[f64]) -> Vec<f64> {
        let mut s: Vec<f64> = dense_upper(d, e)
            .singular_values()
            .iter()
            .copied()
            .collect();
        s.sort_by(f64::total_cmp);
        s
    }

    #[test]
    fn scalar_and_diagonal() {
        assert_eq!(bidiagonal_singular_values(&[-3.0], &[]).unwrap(), vec![3.0]);
        let s = bidiagonal_singular_values(&[2.0, -1.0, 0.5], &[0.0, 0.0]).unwrap();
        assert_eq!(s, vec![0.5, 1.0, 2.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [1 1; 0 1] has singular values (sqrt(5) -+ 1) / 2.
        let s = bidiagonal_singular_values(&[1.0, 1.0], &[1.0]).unwrap();
        let r5 = 5f64.sqrt();
        assert!((s[0] - (r5 - 1.0) / 2.0).abs() < 1e-15);
        assert!((s[1] - (r5 + 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_entry() {
        let d = [1.0, 0.0, 2.0];
        let e = [0.5, 0.25];
        let s = bidiagonal_singular_values(&d, &e).unwrap();
        let r = reference(&d, &e);
        for (a, b) in s.iter().zip(&r) {
            assert!((a - b).abs() < 1e-14, "{s:?} vs {r:?}");
        }
    }

    #[test]
    fn graded_matrix_keeps_relative_accuracy() {
        // Product of diagonal entries equals the product of singular values,
        // so a tiny singular value is pinned by the determinant.
        let d = [1.0, 1e-5, 1e-10];
        let e = [1.0, 1e-5];
        let s = bidiagonal_singular_values(&d, &e).unwrap();
        let det: f64 = d.iter().product();
        let prod: f64 = s.iter().product();
        assert!(((prod - det) / det).abs() < 1e-12, "{prod} vs {det}");
    }

    #[test]
    fn mismatched_lengths() {
        assert!(bidiagonal_singular_values(&[1.0, 2.0], &[]).is_err());
    }

    proptest! {
        #[test]
        fn matches_dense_svd(
            d in prop::collection::vec(-2.0f64..2.0, 1..12),
            seed in prop::collection::vec(-2.0f64..2.0, 12),
        ) {
            let e = &seed[..d.len() - 1];
            let s = bidiagonal_singular_values(&d, e).unwrap();
            let r = reference(&d, e);
            let scale = r.last().copied().unwrap_or(1.0).max(1e-300);
            for (a, b) in s.iter().zip(&r) {
                prop_assert!((a - b).abs() <= 1e-12 * scale, "{:?} vs {:?}", s, r);
            }
        }

        #[test]
        fn frobenius_norm_preserved(d in prop::collection::vec(0.01f64..1.0, 2..20)) {
            let e: Vec<f64> = d.iter().skip(1).map(|x| -x.sqrt() / 2.0).collect();
            let s = bidiagonal_singular_values(&d, &e).unwrap();
            let fro: f64 = d.iter().chain(&e).map(|x| x * x).sum();
            let sum: f64 = s.iter().map(|x| x * x).sum();
            prop_assert!(((fro - sum) / fro).abs() < 1e-13);
        }
    }
}
