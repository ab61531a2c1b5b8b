//! The acceptance suite: one report per criterion, each pairing an
//! estimator with an oracle that does not share its code path.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::divergences::{estimate_importance_weight, estimate_kl};
use crate::ensembles::{sample_corner_submatrix, sample_stiefel_frame, squared_singular_spectrum};
use crate::error::Result;
use crate::estimate::{run_indexed_scalar, MCEstimate, Workers};
use crate::extremal::{ratio_limit_cdf, slln_limit, Extreme};
use crate::fisher::{estimate_fisher, fisher_asymptotic, FisherRoute};
use crate::harness::config::{Experiment, GridPoint, OutputFormat, RunConfig};
use crate::harness::run::{
    compute_records, extremal_rows, lsi_record, resolvent_trace_samples, route_identity_max_error,
    summarize_extremal, IDENTITY_TOL,
};
use crate::harness::RecordBody;
use crate::moments::{beta_inverse_moment, estimate_resolvent_moments, resolvent_expansion};
use crate::params::EnsembleParams;
use crate::quadrature::{fisher_oracle_1d, kl_oracle_1d};
use crate::rng::seeded;
use crate::stats::{ks_statistic, ks_two_sample_test};

/// Base seed of the suite; each criterion offsets it.
pub const SUITE_SEED: u64 = 20_240_601;
/// Standard errors allowed between an estimate and its oracle.
pub const SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{verdict}] criterion {}: {} -- {}",
            self.id, self.name, self.detail
        )
    }
}

/// Accumulates sub-checks of a criterion; it passes only if all of them do.
struct Checks {
    passed: bool,
    lines: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            passed: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines
            .push(format!("{}{line}", if ok { "" } else { "FAILED " }));
    }

    fn fail(&mut self, line: String) {
        self.check(false, line);
    }

    fn finish(self, id: u32, name: &str) -> CriterionReport {
        CriterionReport {
            id,
            name: name.to_string(),
            passed: self.passed,
            detail: self.lines.join("; "),
        }
    }
}

fn params(n: usize, p: usize, q: usize) -> EnsembleParams {
    EnsembleParams::new(n, p, q).expect("acceptance grid points are valid")
}

fn within_sigmas(est: &MCEstimate, target: f64, extra: f64) -> (bool, f64) {
    let dev = (est.mean - target).abs();
    (dev <= SIGMAS * est.stderr() + extra, dev / est.stderr())
}

/// Criterion 1: the gradient and spectral integrands agree per sample.
pub fn route_identity() -> Result<CriterionReport> {
    let mut c = Checks::new();
    for (i, (n, p, q)) in [(50, 5, 3), (100, 10, 4), (200, 8, 8)]
        .into_iter()
        .enumerate()
    {
        let pr = params(n, p, q);
        let err = route_identity_max_error(&pr, 1000, SUITE_SEED + 10 + i as u64, Workers::Global)?;
        c.check(
            err < IDENTITY_TOL,
            format!("{pr}: max rel err {err:.2e} (< {IDENTITY_TOL:e})"),
        );
    }
    Ok(c.finish(1, "route identity"))
}

/// Criterion 2: `n = 3` closed form and `n = 4` quadrature oracle.
pub fn exact_small_case() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let n_samples = 1_000_000;
    let p3 = params(3, 1, 1);
    let est = estimate_fisher(&p3, n_samples, SUITE_SEED + 20, FisherRoute::SpectralJacobi)?;
    let (ok, z) = within_sigmas(&est, 0.25, 0.0);
    c.check(
        ok,
        format!(
            "{p3}: {:.6} +- {:.1e} vs 0.25 ({z:.2} se)",
            est.mean,
            est.stderr()
        ),
    );

    let p4 = params(4, 1, 1);
    let est = estimate_fisher(&p4, n_samples, SUITE_SEED + 21, FisherRoute::SpectralJacobi)?;
    match fisher_oracle_1d(4) {
        Ok(oracle) => {
            let (ok, z) = within_sigmas(&est, oracle, 0.0);
            c.check(
                ok,
                format!(
                    "{p4}: {:.6} +- {:.1e} vs oracle {oracle:.6} ({z:.2} se)",
                    est.mean,
                    est.stderr()
                ),
            );
        }
        Err(e) => c.fail(format!(
            "{p4}: estimate {:.4} +- {:.1e} has no finite oracle to match ({e})",
            est.mean,
            est.stderr()
        )),
    }
    Ok(c.finish(2, "exact small case"))
}

/// Criterion 3: the Fisher estimate against `p^2 q (q+1) / (4 n^2)`.
pub fn asymptotic_rate() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let n_samples = 1_000_000;
    for (i, (n, p, q)) in [(2000, 10, 5), (5000, 12, 6)].into_iter().enumerate() {
        let base = params(n, p, q);
        let doubled = params(2 * n, p, q);
        let seed = SUITE_SEED + 30 + 2 * i as u64;
        let est = estimate_fisher(&base, n_samples, seed, FisherRoute::SpectralJacobi)?;
        let est2 = estimate_fisher(&doubled, n_samples, seed + 1, FisherRoute::SpectralJacobi)?;
        let r = est.mean / fisher_asymptotic(&base);
        let r2 = est2.mean / fisher_asymptotic(&doubled);
        c.check(
            (r - 1.0).abs() <= 0.10,
            format!("{base}: estimate/asymptotic {r:.4} (within 10%)"),
        );
        c.check(
            (r2 - 1.0).abs() < (r - 1.0).abs(),
            format!("{doubled}: ratio {r2:.4} closer to 1 than {r:.4}"),
        );
    }
    Ok(c.finish(3, "asymptotic rate"))
}

/// Criterion 4: resolvent-trace expansions and the `q = 1` Beta oracle.
pub fn resolvent_moments() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let pr = params(2000, 40, 10);
    let mc = estimate_resolvent_moments(&pr, 1_000_000, SUITE_SEED + 40, Workers::Global)?;
    for (k, est) in [1u32, 2].into_iter().zip(&mc) {
        let e = resolvent_expansion(&pr, k)?;
        let (ok, _) = within_sigmas(est, e.value, e.remainder_budget);
        c.check(
            ok,
            format!(
                "{pr} k={k}: MC {:.6} +- {:.1e} vs expansion {:.6} (budget {:.1e})",
                est.mean,
                est.stderr(),
                e.value,
                e.remainder_budget
            ),
        );
    }
    // For q = 1, 1 - lambda ~ Beta((n-p)/2, p/2); the MC side uses Haar corners.
    for (i, (n, p)) in [(10usize, 2usize), (50, 7)].into_iter().enumerate() {
        let pr = params(n, p, 1);
        let (a, b) = ((n - p) as f64 / 2.0, p as f64 / 2.0);
        for k in [1u32, 2] {
            let oracle = beta_inverse_moment(a, b, k)?;
            let est = run_indexed_scalar(
                1_000_000,
                SUITE_SEED + 41 + 2 * i as u64 + k as u64,
                Workers::Global,
                None,
                |rng| {
                    let l =
                        squared_singular_spectrum(&sample_corner_submatrix(&pr, rng))?.values()[0];
                    Ok(Some((1.0 - l).powi(-(k as i32))))
                },
            )?;
            let (ok, z) = within_sigmas(&est, oracle, 0.0);
            c.check(
                ok,
                format!(
                    "{pr} k={k}: MC {:.5} vs Beta {oracle:.5} ({z:.2} se)",
                    est.mean
                ),
            );
        }
    }
    Ok(c.finish(4, "resolvent moments"))
}

/// Criterion 5: Haar corners and bidiagonal spectra have the same resolvent law.
pub fn sampler_agreement() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let pr = params(100, 8, 5);
    let (a, b) = resolvent_trace_samples(&pr, 2000, SUITE_SEED + 50, Workers::Global)?;
    let (d, pv) = ks_two_sample_test(&a, &b)?;
    c.check(
        pv > 0.01,
        format!("{pr}: KS {d:.4}, p-value {pv:.3} (> 0.01)"),
    );
    Ok(c.finish(5, "sampler agreement"))
}

/// Criterion 6: KL oracle, empirical log-Sobolev, importance identity.
pub fn kl_and_lsi() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let p3 = params(3, 1, 1);
    let est = estimate_kl(&p3, 1_000_000, SUITE_SEED + 60)?;
    let oracle = kl_oracle_1d(3)?;
    let (ok, z) = within_sigmas(&est, oracle, 0.0);
    c.check(
        ok,
        format!("KL{p3}: {:.6} vs oracle {oracle:.6} ({z:.2} se)", est.mean),
    );

    for (i, (n, p, q)) in [(200, 5, 3), (500, 8, 4), (2000, 10, 5)]
        .into_iter()
        .enumerate()
    {
        let pr = params(n, p, q);
        let rec = lsi_record(&pr, 1_000_000, SUITE_SEED + 61 + i as u64, Workers::Global)?;
        if let RecordBody::Lsi(row) = rec.body {
            c.check(
                row.holds,
                format!(
                    "LSI{pr}: 2KL {:.4e} vs Fisher {:.4e}",
                    2.0 * row.kl,
                    row.fisher
                ),
            );
        }
    }

    let pr = params(200, 5, 3);
    let w = estimate_importance_weight(&pr, 1_000_000, SUITE_SEED + 65)?;
    let (ok, z) = within_sigmas(&w, 1.0, 0.0);
    c.check(
        ok,
        format!(
            "E_f[g/f]{pr}: {:.5} +- {:.1e} ({z:.2} se)",
            w.mean,
            w.stderr()
        ),
    );
    Ok(c.finish(6, "KL and log-Sobolev"))
}

/// Criterion 7: strong-law limits of the normalized extreme eigenvalues.
pub fn extremal_slln() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let pr = params(1_000_000, 400, 200);
    let seed = SUITE_SEED + 70;
    let rows = extremal_rows(&pr, 200, seed, Workers::Global)?;
    let s = summarize_extremal(&pr, seed, &rows)?;
    let gamma = pr.gamma();
    for (which, mean) in [
        (Extreme::Max, s.slln_max_mean),
        (Extreme::Min, s.slln_min_mean),
    ] {
        let target = slln_limit(gamma, which);
        let rel = (mean - target).abs() / target.abs();
        c.check(
            rel <= 0.10,
            format!("{which:?}: mean {mean:.5} vs {target:.5} (rel {rel:.3})"),
        );
    }
    Ok(c.finish(7, "extremal strong law"))
}

/// Criterion 8: the `p = q` extreme-ratio law.
pub fn ratio_law() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let pr = params(100_000, 30, 30);
    let rows = extremal_rows(&pr, 2000, SUITE_SEED + 80, Workers::Global)?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let d = ks_statistic(&ratios, ratio_limit_cdf)?;
    c.check(d < 0.1, format!("{pr}: KS distance {d:.4} (< 0.1)"));
    Ok(c.finish(8, "extreme ratio law"))
}

/// Criterion 9: worker-count independence, merge associativity, Haar frames.
pub fn infrastructure() -> Result<CriterionReport> {
    let mut c = Checks::new();
    let config = |workers| RunConfig {
        experiment: Experiment::Fisher,
        grid: vec![
            GridPoint { n: 60, p: 6, q: 3 },
            GridPoint { n: 200, p: 8, q: 8 },
        ],
        samples: 20_000,
        seed: SUITE_SEED + 90,
        route: Some(FisherRoute::SpectralJacobi),
        output_dir: std::env::temp_dir(),
        format: OutputFormat::Csv,
        workers: Some(workers),
    };
    let reference = compute_records(&config(1))?;
    for w in [2, 8] {
        let other = compute_records(&config(w))?;
        let same = reference.len() == other.len()
            && reference.iter().zip(&other).all(|(a, b)| a.same_result(b));
        c.check(same, format!("1 vs {w} workers bit-identical"));
    }

    let mut rng = seeded(SUITE_SEED + 91);
    let mut part = || {
        let mut e = MCEstimate::empty(0, None);
        for _ in 0..rng.random_range(1..500) {
            e.push(rng.random::<f64>() * 10.0 - 3.0);
        }
        e
    };
    let (a, b, d) = (part(), part(), part());
    let left = a.merge(&b)?.merge(&d)?;
    let right = a.merge(&b.merge(&d)?)?;
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    let err = rel(left.mean, right.mean).max(rel(left.variance(), right.variance()));
    c.check(
        err < 1e-12 && left.count == right.count,
        format!("merge associativity rel err {err:.1e}"),
    );

    let mut resamples = 0;
    let q = sample_stiefel_frame(50, 50, &mut seeded(SUITE_SEED + 92), &mut resamples)?;
    let gap = (q.transpose() * &q - DMatrix::<f64>::identity(50, 50)).amax();
    c.check(gap < 1e-12, format!("Haar n=q=50: max |Q'Q - I| {gap:.1e}"));
    Ok(c.finish(9, "infrastructure"))
}

type Criterion = fn() -> Result<CriterionReport>;

/// Every criterion in order; an error inside one becomes a failing report.
pub fn run_all() -> Vec<CriterionReport> {
    run_selected(|_| true)
}

/// The criteria whose ids are listed, in suite order.
pub fn run_all_filtered(ids: &[u32]) -> Vec<CriterionReport> {
    run_selected(|id| ids.contains(&id))
}

fn run_selected(keep: impl Fn(u32) -> bool) -> Vec<CriterionReport> {
    let suite: [(u32, &str, Criterion); 9] = [
        (1, "route identity", route_identity),
        (2, "exact small case", exact_small_case),
        (3, "asymptotic rate", asymptotic_rate),
        (4, "resolvent moments", resolvent_moments),
        (5, "sampler agreement", sampler_agreement),
        (6, "KL and log-Sobolev", kl_and_lsi),
        (7, "extremal strong law", extremal_slln),
        (8, "extreme ratio law", ratio_law),
        (9, "infrastructure", infrastructure),
    ];
    suite
        .into_iter()
        .filter(|(id, _, _)| keep(*id))
        .map(|(id, name, f)| {
            f().unwrap_or_else(|e| CriterionReport {
                id,
                name: name.to_string(),
                passed: false,
                detail: format!("error: {e}"),
            })
        })
        .collect()
}
