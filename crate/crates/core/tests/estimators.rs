//! Cross-route consistency and qualitative trends of the Monte-Carlo estimators.

use haar_fisher::divergences::estimate_kl;
use haar_fisher::estimate::collect_indexed;
use haar_fisher::extremal::{sample_extremal, slln_limit, slln_normalize, Extreme};
use haar_fisher::fisher::{estimate_fisher, fisher_asymptotic};
use haar_fisher::moments::{beta_inverse_moment, estimate_resolvent_moments, resolvent_expansion};
use haar_fisher::{EnsembleParams, FisherRoute, MCEstimate, Workers};

fn params(n: usize, p: usize, q: usize) -> EnsembleParams {
    EnsembleParams::new(n, p, q).unwrap()
}

fn agree(a: &MCEstimate, b: &MCEstimate) -> bool {
    (a.mean - b.mean).abs() <= 5.0 * (a.stderr().powi(2) + b.stderr().powi(2)).sqrt()
}

#[test]
fn fisher_routes_estimate_the_same_quantity() {
    let pr = params(40, 5, 3);
    let ests: Vec<MCEstimate> = FisherRoute::ALL
        .iter()
        .enumerate()
        .map(|(i, &r)| estimate_fisher(&pr, 40_000, 100 + i as u64, r).unwrap())
        .collect();
    for e in &ests[1..] {
        assert!(agree(&ests[0], e), "{} vs {}", ests[0].mean, e.mean);
    }
}

#[test]
fn haar_routes_agree_exactly_on_shared_draws() {
    let pr = params(30, 6, 4);
    let a = estimate_fisher(&pr, 3000, 7, FisherRoute::SpectralHaar).unwrap();
    let b = estimate_fisher(&pr, 3000, 7, FisherRoute::GradientHaar).unwrap();
    assert!((a.mean - b.mean).abs() <= 1e-10 * a.mean);
}

#[test]
fn fisher_decays_like_inverse_square_of_n() {
    let small = params(1000, 6, 3);
    let large = params(4000, 6, 3);
    let a = estimate_fisher(&small, 200_000, 1, FisherRoute::SpectralJacobi).unwrap();
    let b = estimate_fisher(&large, 200_000, 2, FisherRoute::SpectralJacobi).unwrap();
    let slope = (a.mean / b.mean).ln() / 4f64.ln();
    assert!((slope - 2.0).abs() < 0.1, "log-log slope {slope}");
    let (ra, rb) = (
        a.mean / fisher_asymptotic(&small),
        b.mean / fisher_asymptotic(&large),
    );
    assert!((rb - 1.0).abs() < (ra - 1.0).abs(), "ratios {ra} -> {rb}");
}

#[test]
fn kl_decreases_with_n() {
    let kl: Vec<f64> = [(50, 5, 3), (200, 5, 3), (800, 5, 3)]
        .into_iter()
        .enumerate()
        .map(|(i, (n, p, q))| {
            estimate_kl(&params(n, p, q), 200_000, 200 + i as u64)
                .unwrap()
                .mean
        })
        .collect();
    assert!(kl[0] > kl[1] && kl[1] > kl[2], "{kl:?}");
    assert!(kl[0] > 0.0);
}

#[test]
fn q1_expansions_match_exact_beta_moments() {
    for (n, p) in [(2000usize, 20usize), (5000, 9)] {
        let pr = params(n, p, 1);
        let (a, b) = ((n - p) as f64 / 2.0, p as f64 / 2.0);
        for k in [1, 2] {
            let e = resolvent_expansion(&pr, k).unwrap();
            let exact = beta_inverse_moment(a, b, k).unwrap();
            assert!(
                (e.value - exact).abs() <= e.remainder_budget,
                "{pr} k={k}: {} vs {exact}",
                e.value
            );
        }
    }
}

#[test]
fn resolvent_moments_match_expansion() {
    let pr = params(1000, 20, 6);
    let mc = estimate_resolvent_moments(&pr, 200_000, 300, Workers::Global).unwrap();
    for (k, est) in [1, 2].into_iter().zip(&mc) {
        let e = resolvent_expansion(&pr, k).unwrap();
        assert!((est.mean - e.value).abs() <= 5.0 * est.stderr() + e.remainder_budget);
    }
}

#[test]
fn largest_eigenvalue_approaches_its_strong_law_limit() {
    let gaps: Vec<f64> = [25usize, 100, 400]
        .into_iter()
        .map(|p| {
            let pr = params(1_000_000, p, p / 2);
            let target = slln_limit(pr.gamma(), Extreme::Max);
            let draws = collect_indexed(100, p as u64, Workers::Global, |rng| {
                Ok(slln_normalize(&sample_extremal(&pr, rng)?, Extreme::Max))
            })
            .unwrap();
            (draws.iter().sum::<f64>() / draws.len() as f64 - target).abs()
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}
