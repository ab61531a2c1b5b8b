//! Experiment execution: one function per experiment kind, each producing a
//! single [`OutputRecord`] for one grid point.

use std::time::Instant;

use crate::divergences::{check_lsi, estimate_kl_with};
use crate::ensembles::{sample_corner_submatrix, squared_singular_spectrum};
use crate::error::Result;
use crate::estimate::{collect_indexed, Workers};
use crate::extremal::{
    edge_limit, ratio_limit_cdf, ratio_statistic, sample_extremal, slln_limit, slln_normalize,
    tw_normalized_max, Extreme,
};
use crate::fisher::{
    estimate_fisher_with, fisher_asymptotic, integrand_gradient, integrand_spectral, FisherRoute,
};
use crate::harness::config::{Experiment, RunConfig};
use crate::harness::output::{
    write_records, write_rows, AgreementRow, EstimateRow, ExtremalRow, ExtremalSummary,
    IdentityRow, LsiRow, MomentsRow, OutputRecord, RecordBody, SpectrumRecord,
};
use crate::jacobi::sample_jacobi_spectrum;
use crate::moments::{estimate_resolvent_moments, resolvent_expansion};
use crate::params::EnsembleParams;
use crate::stats::{ks_statistic, ks_two_sample_test};
use crate::MCEstimate;

/// Relative tolerance of the per-sample route identity.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Absolute floor of the route-identity denominator.
pub const IDENTITY_FLOOR: f64 = 1e-14;
/// Significance level of the sampler-agreement KS test.
pub const AGREEMENT_ALPHA: f64 = 0.01;
/// Standard errors allowed between a Monte-Carlo mean and its expansion, on
/// top of the expansion's remainder budget.
pub const MOMENTS_SIGMAS: f64 = 5.0;

/// Seed offset separating the two sides of a two-sample comparison.
const SECOND_SAMPLE_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

fn record(
    experiment: Experiment,
    params: &EnsembleParams,
    start: Instant,
    body: RecordBody,
) -> OutputRecord {
    OutputRecord {
        experiment,
        params: *params,
        body,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn estimate_row(
    params: &EnsembleParams,
    route: &str,
    samples: u64,
    est: &MCEstimate,
    asymptotic: Option<f64>,
) -> EstimateRow {
    EstimateRow {
        n: params.n(),
        p: params.p(),
        q: params.q(),
        route: route.to_string(),
        samples,
        seed: est.seed,
        mean: est.mean,
        stderr: est.stderr(),
        flagged: est.flagged,
        asymptotic,
        ratio: asymptotic.map(|a| est.mean / a),
    }
}

pub fn fisher_record(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    route: FisherRoute,
    workers: Workers,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let est = estimate_fisher_with(params, samples, seed, route, workers)?;
    let row = estimate_row(
        params,
        route.as_str(),
        samples,
        &est,
        Some(fisher_asymptotic(params)),
    );
    Ok(record(
        Experiment::Fisher,
        params,
        start,
        RecordBody::Estimate(row),
    ))
}

pub fn kl_record(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let est = estimate_kl_with(params, samples, seed, workers)?;
    let row = estimate_row(params, "kl", samples, &est, None);
    Ok(record(
        Experiment::Kl,
        params,
        start,
        RecordBody::Estimate(row),
    ))
}

pub fn lsi_record(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let kl = estimate_kl_with(params, samples, seed, workers)?;
    let fisher = estimate_fisher_with(params, samples, seed, FisherRoute::SpectralJacobi, workers)?;
    let report = check_lsi(&kl, &fisher)?;
    let row = LsiRow {
        n: params.n(),
        p: params.p(),
        q: params.q(),
        samples,
        seed,
        kl: report.kl,
        kl_stderr: report.kl_stderr,
        fisher: report.fisher,
        fisher_stderr: report.fisher_stderr,
        slack: report.slack,
        holds: report.holds,
    };
    Ok(record(Experiment::Lsi, params, start, RecordBody::Lsi(row)))
}

pub fn moments_record(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let e1 = resolvent_expansion(params, 1)?;
    let e2 = resolvent_expansion(params, 2)?;
    let [m1, m2] = estimate_resolvent_moments(params, samples, seed, workers)?;
    let within = |e: &crate::moments::ExpansionValue, m: &MCEstimate| {
        (m.mean - e.value).abs() <= MOMENTS_SIGMAS * m.stderr() + e.remainder_budget
    };
    let row = MomentsRow {
        n: params.n(),
        p: params.p(),
        q: params.q(),
        exp1: e1.value,
        exp2: e2.value,
        mc1: m1.mean,
        mc2: m2.mean,
        stderr1: m1.stderr(),
        stderr2: m2.stderr(),
        within_budget: within(&e1, &m1) && within(&e2, &m2),
    };
    Ok(record(
        Experiment::Moments,
        params,
        start,
        RecordBody::Moments(row),
    ))
}

/// Per-draw extremal rows, in index order.
pub fn extremal_rows(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<Vec<ExtremalRow>> {
    let square = params.p() == params.q();
    let draws = collect_indexed(samples, seed, workers, |rng| sample_extremal(params, rng))?;
    Ok(draws
        .iter()
        .enumerate()
        .map(|(i, s)| ExtremalRow {
            n: params.n(),
            p: params.p(),
            q: params.q(),
            seed,
            index: i as u64,
            lambda_max: s.lambda_max,
            lambda_min: s.lambda_min,
            slln_max: slln_normalize(s, Extreme::Max),
            slln_min: slln_normalize(s, Extreme::Min),
            tw_max_normalized: tw_normalized_max(s),
            ratio: if square {
                ratio_statistic(s).ok()
            } else {
                None
            },
        })
        .collect())
}

pub fn summarize_extremal(
    params: &EnsembleParams,
    seed: u64,
    rows: &[ExtremalRow],
) -> Result<ExtremalSummary> {
    let mut max = MCEstimate::empty(seed, None);
    let mut min = MCEstimate::empty(seed, None);
    for r in rows {
        max.push(r.slln_max);
        min.push(r.slln_min);
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let ratio_ks = if ratios.is_empty() {
        None
    } else {
        Some(ks_statistic(&ratios, ratio_limit_cdf)?)
    };
    let gamma = params.gamma();
    Ok(ExtremalSummary {
        n: params.n(),
        p: params.p(),
        q: params.q(),
        samples: rows.len() as u64,
        seed,
        slln_max_mean: max.mean,
        slln_max_stderr: max.stderr(),
        slln_min_mean: min.mean,
        slln_min_stderr: min.stderr(),
        stated_limit_max: slln_limit(gamma, Extreme::Max),
        stated_limit_min: slln_limit(gamma, Extreme::Min),
        edge_limit_min: edge_limit(gamma, Extreme::Min),
        ratio_ks,
    })
}

/// Largest relative gap between the spectral and gradient integrands over
/// `trials` corner samples.
pub fn route_identity_max_error(
    params: &EnsembleParams,
    trials: u64,
    seed: u64,
    workers: Workers,
) -> Result<f64> {
    let errs = collect_indexed(trials, seed, workers, |rng| {
        let z = sample_corner_submatrix(params, rng);
        let spec = squared_singular_spectrum(&z)?;
        let a = integrand_spectral(&spec, params)?.0;
        let g = integrand_gradient(&z, params)?.0;
        Ok((a - g).abs() / a.max(IDENTITY_FLOOR))
    })?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

pub fn identity_record(
    params: &EnsembleParams,
    trials: u64,
    seed: u64,
    workers: Workers,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let max_rel_err = route_identity_max_error(params, trials, seed, workers)?;
    let row = IdentityRow {
        n: params.n(),
        p: params.p(),
        q: params.q(),
        trials,
        seed,
        max_rel_err,
        pass: max_rel_err < IDENTITY_TOL,
    };
    Ok(record(
        Experiment::IdentityCheck,
        params,
        start,
        RecordBody::Identity(row),
    ))
}

/// `tr((I - Z'Z)^{-1})` from Haar corners and from bidiagonal spectra, drawn
/// with independent seeds.
pub fn resolvent_trace_samples(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let resolvent = |lambdas: &[f64]| lambdas.iter().map(|l| 1.0 / (1.0 - l)).sum::<f64>();
    let corner = collect_indexed(samples, seed, workers, |rng| {
        let spec = squared_singular_spectrum(&sample_corner_submatrix(params, rng))?;
        Ok(resolvent(spec.values()))
    })?;
    let jacobi = collect_indexed(samples, seed ^ SECOND_SAMPLE_SALT, workers, |rng| {
        let spec = sample_jacobi_spectrum(params, rng)?;
        Ok(resolvent(spec.values()))
    })?;
    Ok((corner, jacobi))
}

pub fn agreement_record(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    workers: Workers,
) -> Result<OutputRecord> {
    let start = Instant::now();
    let (a, b) = resolvent_trace_samples(params, samples, seed, workers)?;
    let (d, p_value) = ks_two_sample_test(&a, &b)?;
    let row = AgreementRow {
        n: params.n(),
        p: params.p(),
        q: params.q(),
        samples,
        seed,
        ks_statistic: d,
        p_value,
        pass: p_value > AGREEMENT_ALPHA,
    };
    Ok(record(
        Experiment::SamplerAgreement,
        params,
        start,
        RecordBody::Agreement(row),
    ))
}

/// `samples` eigenvalue spectra (λ scale, ascending), from Haar corners when
/// `haar` is set and from the bidiagonal model otherwise.
pub fn sample_spectra(
    params: &EnsembleParams,
    samples: u64,
    seed: u64,
    haar: bool,
    workers: Workers,
) -> Result<Vec<SpectrumRecord>> {
    let spectra = collect_indexed(samples, seed, workers, |rng| {
        if haar {
            squared_singular_spectrum(&sample_corner_submatrix(params, rng))
        } else {
            sample_jacobi_spectrum(params, rng)
        }
    })?;
    Ok(spectra
        .into_iter()
        .enumerate()
        .map(|(i, s)| SpectrumRecord {
            seed,
            index: i as u64,
            n: params.n(),
            p: params.p(),
            q: params.q(),
            spectrum: s.values().to_vec(),
        })
        .collect())
}

/// Validate the configuration, run every grid point, and write
/// `<output_dir>/<experiment>.<csv|jsonl>` (plus `extremal_samples.*` for
/// extremal runs).
pub fn run_experiment(config: &RunConfig) -> Result<Vec<OutputRecord>> {
    let records = compute_records(config)?;
    let ext = config.format.extension();
    let path = config
        .output_dir
        .join(format!("{}.{ext}", config.experiment.as_str()));
    write_records(&path, &records, config.format)?;
    Ok(records)
}

/// As [`run_experiment`] without touching the filesystem (extremal per-draw
/// rows are not retained).
pub fn compute_records(config: &RunConfig) -> Result<Vec<OutputRecord>> {
    let grid = config.validate()?;
    let workers = config.worker_pool();
    let (samples, seed) = (config.samples, config.seed);
    let mut extremal_dump = Vec::new();
    let mut out = Vec::with_capacity(grid.len());
    for params in &grid {
        let rec = match config.experiment {
            Experiment::Fisher => fisher_record(
                params,
                samples,
                seed,
                config.route.unwrap_or_default(),
                workers,
            )?,
            Experiment::Kl => kl_record(params, samples, seed, workers)?,
            Experiment::Lsi => lsi_record(params, samples, seed, workers)?,
            Experiment::Moments => moments_record(params, samples, seed, workers)?,
            Experiment::IdentityCheck => identity_record(params, samples, seed, workers)?,
            Experiment::SamplerAgreement => agreement_record(params, samples, seed, workers)?,
            Experiment::Extremal => {
                let start = Instant::now();
                let rows = extremal_rows(params, samples, seed, workers)?;
                let summary = summarize_extremal(params, seed, &rows)?;
                extremal_dump.extend(rows);
                record(
                    Experiment::Extremal,
                    params,
                    start,
                    RecordBody::Extremal(summary),
                )
            }
        };
        out.push(rec);
    }
    if config.experiment == Experiment::Extremal && !extremal_dump.is_empty() {
        let path = config
            .output_dir
            .join(format!("extremal_samples.{}", config.format.extension()));
        write_rows(&path, &extremal_dump, config.format)?;
    }
    Ok(out)
}
