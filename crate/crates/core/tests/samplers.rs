//! Distributional checks of the Gaussian, Haar-corner, Beta, and bidiagonal
//! samplers against closed-form laws.

use haar_fisher::ensembles::{
    sample_corner_submatrix, sample_gaussian_matrix, squared_singular_spectrum,
};
use haar_fisher::estimate::collect_indexed;
use haar_fisher::jacobi::{
    build_bidiagonal, jacobi_logdensity_unnormalized, jacobi_spectrum, resolvent_traces_via_v,
    sample_beta, sample_beta_chain, sample_jacobi_spectrum, JacobiLogDensity,
};
use haar_fisher::stats::{ks_p_value, ks_statistic};
use haar_fisher::{EnsembleParams, Workers};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

const ALPHA: f64 = 1e-3;

fn params(n: usize, p: usize, q: usize) -> EnsembleParams {
    EnsembleParams::new(n, p, q).unwrap()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn assert_ks(samples: &[f64], cdf: impl Fn(f64) -> f64, what: &str) {
    let d = ks_statistic(samples, cdf).unwrap();
    let pv = ks_p_value(d, samples.len() as f64);
    assert!(pv > ALPHA, "{what}: KS {d:.4}, p-value {pv:.2e}");
}

#[test]
fn gaussian_entries_are_standard_normal() {
    let pr = params(10, 4, 3);
    let draws: Vec<Vec<f64>> = collect_indexed(5000, 11, Workers::Global, |rng| {
        Ok(sample_gaussian_matrix(&pr, rng).to_row_major())
    })
    .unwrap();
    let entries: Vec<f64> = draws.concat();
    assert!(mean(&entries).abs() < 5.0 * stderr(&entries));
    let var = entries.iter().map(|x| x * x).sum::<f64>() / entries.len() as f64;
    assert!((var - 1.0).abs() < 0.02, "variance {var}");
    let normal = Normal::new(0.0, 1.0).unwrap();
    assert_ks(&entries, |x| normal.cdf(x), "Gaussian entries");
}

#[test]
fn haar_corner_at_n3_is_uniform_on_interval() {
    // The first coordinate of a uniform point on the 2-sphere is uniform on [-1, 1].
    let pr = params(3, 1, 1);
    let z = collect_indexed(20_000, 12, Workers::Global, |rng| {
        Ok(sample_corner_submatrix(&pr, rng).get(0, 0))
    })
    .unwrap();
    assert_ks(
        &z,
        |x| ((x + 1.0) / 2.0).clamp(0.0, 1.0),
        "corner entry at n=3",
    );
}

#[test]
fn scaled_corner_entries_have_unit_second_moment() {
    let pr = params(20, 4, 3);
    let sq = collect_indexed(20_000, 13, Workers::Global, |rng| {
        Ok(sample_corner_submatrix(&pr, rng).frobenius_sq() * 20.0 / 12.0)
    })
    .unwrap();
    assert!(
        (mean(&sq) - 1.0).abs() < 5.0 * stderr(&sq),
        "E n z^2 = {}",
        mean(&sq)
    );
}

#[test]
fn beta_sampler_matches_cdf() {
    for (i, (a, b)) in [(0.5, 0.5), (2.0, 5.0), (7.5, 1.5)].into_iter().enumerate() {
        let xs = collect_indexed(10_000, 14 + i as u64, Workers::Global, |rng| {
            sample_beta(a, b, rng)
        })
        .unwrap();
        let beta = Beta::new(a, b).unwrap();
        assert!((mean(&xs) - a / (a + b)).abs() < 5.0 * stderr(&xs));
        assert_ks(
            &xs,
            |x| beta.cdf(x.clamp(0.0, 1.0)),
            &format!("Beta({a}, {b})"),
        );
    }
}

#[test]
fn first_chain_entry_has_the_stated_beta_mean() {
    let pr = params(30, 6, 4);
    let c1 = collect_indexed(20_000, 17, Workers::Global, |rng| {
        Ok(sample_beta_chain(&pr, rng).c(1))
    })
    .unwrap();
    let (a, b) = ((30.0 - 6.0) / 2.0, 6.0 / 2.0);
    assert!((mean(&c1) - a / (a + b)).abs() < 5.0 * stderr(&c1));
}

#[test]
fn single_eigenvalue_is_beta_distributed_under_both_samplers() {
    // For q = 1, lambda = |first p coordinates of a uniform unit vector|^2 ~ Beta(p/2, (n-p)/2).
    let pr = params(12, 5, 1);
    let beta = Beta::new(2.5, 3.5).unwrap();
    let jac = collect_indexed(10_000, 18, Workers::Global, |rng| {
        Ok(sample_jacobi_spectrum(&pr, rng)?.values()[0])
    })
    .unwrap();
    let haar = collect_indexed(10_000, 19, Workers::Global, |rng| {
        Ok(squared_singular_spectrum(&sample_corner_submatrix(&pr, rng))?.values()[0])
    })
    .unwrap();
    assert_ks(&jac, |x| beta.cdf(x.clamp(0.0, 1.0)), "bidiagonal q=1");
    assert_ks(&haar, |x| beta.cdf(x.clamp(0.0, 1.0)), "Haar q=1");
}

#[test]
fn expected_trace_is_pq_over_n() {
    for (i, (n, p, q)) in [(10, 4, 3), (40, 10, 6), (100, 7, 7)]
        .into_iter()
        .enumerate()
    {
        let pr = params(n, p, q);
        let target = (p * q) as f64 / n as f64;
        let jac = collect_indexed(20_000, 20 + i as u64, Workers::Global, |rng| {
            Ok(sample_jacobi_spectrum(&pr, rng)?.trace())
        })
        .unwrap();
        let haar = collect_indexed(5_000, 30 + i as u64, Workers::Global, |rng| {
            Ok(squared_singular_spectrum(&sample_corner_submatrix(&pr, rng))?.trace())
        })
        .unwrap();
        assert!(
            (mean(&jac) - target).abs() < 5.0 * stderr(&jac),
            "{pr}: bidiagonal {}",
            mean(&jac)
        );
        assert!(
            (mean(&haar) - target).abs() < 5.0 * stderr(&haar),
            "{pr}: Haar {}",
            mean(&haar)
        );
    }
}

#[test]
fn inverse_entry_traces_match_the_spectrum_draw_by_draw() {
    let pr = params(60, 9, 5);
    let gaps = collect_indexed(2000, 40, Workers::Global, |rng| {
        let chain = sample_beta_chain(&pr, rng);
        let spec = jacobi_spectrum(&build_bidiagonal(&chain))?;
        let (t1, t2) = resolvent_traces_via_v(&chain);
        let s1: f64 = spec.values().iter().map(|l| 1.0 / (1.0 - l)).sum();
        let s2: f64 = spec.values().iter().map(|l| (1.0 - l).powi(-2)).sum();
        Ok(((t1 - s1) / s1).abs().max(((t2 - s2) / s2).abs()))
    })
    .unwrap();
    let worst = gaps.into_iter().fold(0.0, f64::max);
    assert!(worst < 1e-10, "worst relative gap {worst:e}");
}

#[test]
fn eigenvalue_density_integrates_to_the_sampled_mean_trace() {
    // At (8, 3, 2) the density is proportional to (1-x1)(1-x2)|x1-x2| on the unit square.
    let pr = params(8, 3, 2);
    let m = 600;
    let h = 1.0 / m as f64;
    let (mut mass, mut first) = (0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let x = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
            if let JacobiLogDensity::Value(v) = jacobi_logdensity_unnormalized(&x, &pr).unwrap() {
                let w = v.exp();
                mass += w;
                first += w * (x[0] + x[1]);
            }
        }
    }
    let quad = first / mass;
    assert!((quad - 0.75).abs() < 1e-3, "quadrature E[x1+x2] = {quad}");
    let traces = collect_indexed(40_000, 41, Workers::Global, |rng| {
        Ok(sample_jacobi_spectrum(&pr, rng)?.trace())
    })
    .unwrap();
    assert!((mean(&traces) - quad).abs() < 5.0 * stderr(&traces) + 1e-3);
}
