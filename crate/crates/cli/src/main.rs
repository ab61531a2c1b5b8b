//! `haar-fisher`: run the Monte-Carlo experiments and the acceptance suite.
//!
//! Exit codes: 0 on success, 1 when a check or acceptance criterion fails
//! (or a computation errors at run time), 2 on a configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use haar_fisher::harness::acceptance;
use haar_fisher::harness::output::write_spectra;
use haar_fisher::harness::run::sample_spectra;
use haar_fisher::harness::{
    default_output_dir, run_experiment, Experiment, GridPoint, OutputFormat, RecordBody, RunConfig,
    OUT_DIR_ENV,
};
use haar_fisher::{Error, FisherRoute};

const DEFAULT_SAMPLES: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "haar-fisher",
    version,
    about = "Fisher information and KL divergence of Haar corners versus Gaussians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump eigenvalue spectra of sampled corners.
    Sample(Common),
    /// Estimate the relative Fisher information.
    Fisher(Common),
    /// Estimate the KL divergence.
    Kl(Common),
    /// Check 2 KL <= Fisher empirically; prints one JSON report per grid point.
    Lsi(Common),
    /// Resolvent-trace expansions against Monte-Carlo means.
    MomentsTable(Common),
    /// Extreme-eigenvalue statistics.
    Extremal(Common),
    /// Per-sample agreement of the gradient and spectral integrands.
    IdentityCheck(Common),
    /// Two-sample KS test between the Haar and bidiagonal samplers.
    SamplerAgreement(Common),
    /// Run the acceptance suite.
    Verify {
        /// Criterion ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Jsonl => OutputFormat::Jsonl,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Ambient dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Corner rows.
    #[arg(long)]
    p: Option<usize>,
    /// Corner columns (q <= p).
    #[arg(long)]
    q: Option<usize>,
    /// Monte-Carlo draws per grid point [default: 100000].
    #[arg(long)]
    samples: Option<u64>,
    /// Base seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Fisher evaluation route: spectral-jacobi, spectral-haar, or gradient-haar.
    #[arg(long)]
    route: Option<FisherRoute>,
    /// Output directory [default: $HAAR_FISHER_OUT or ./out].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    workers: Option<usize>,
    /// JSON run configuration; flags given alongside it override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn run_config(&self, experiment: Experiment) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => {
                let c = RunConfig::from_json_file(path)?;
                if c.experiment != experiment {
                    return Err(Error::Argument(format!(
                        "config describes a '{}' run, not '{}'",
                        c.experiment.as_str(),
                        experiment.as_str()
                    )));
                }
                c
            }
            None => RunConfig {
                experiment,
                grid: Vec::new(),
                samples: DEFAULT_SAMPLES,
                seed: DEFAULT_SEED,
                route: None,
                output_dir: default_output_dir(),
                format: OutputFormat::default(),
                workers: None,
            },
        };
        match (self.n, self.p, self.q) {
            (Some(n), Some(p), Some(q)) => config.grid = vec![GridPoint { n, p, q }],
            (None, None, None) => {}
            _ => {
                return Err(Error::Argument(
                    "--n, --p and --q must be given together".into(),
                ))
            }
        }
        if config.grid.is_empty() {
            return Err(Error::Argument(
                "give --n, --p, --q or a --config with a grid".into(),
            ));
        }
        if let Some(samples) = self.samples {
            config.samples = samples;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(r) = self.route {
            config.route = Some(r);
        }
        if let Some(out) = &self.out {
            config.output_dir = out.clone();
        }
        if let Some(f) = self.format {
            config.format = f.into();
        }
        if self.workers.is_some() {
            config.workers = self.workers;
        }
        Ok(config)
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParams { .. } | Error::Argument(_) | Error::Json(_)
    )
}

fn run_records(common: &Common, experiment: Experiment) -> Result<bool, Error> {
    let config = common.run_config(experiment)?;
    config.validate()?;
    let records = run_experiment(&config)?;
    let mut all_pass = true;
    for rec in &records {
        match &rec.body {
            RecordBody::Lsi(row) => {
                all_pass &= row.holds;
                let report = serde_json::json!({
                    "params": rec.params,
                    "kl": row.kl,
                    "fisher": row.fisher,
                    "slack": row.slack,
                    "holds": row.holds,
                });
                println!("{report}");
            }
            RecordBody::Identity(row) => {
                all_pass &= row.pass;
                println!("{}", serde_json::to_string(row)?);
            }
            RecordBody::Agreement(row) => {
                all_pass &= row.pass;
                println!("{}", serde_json::to_string(row)?);
            }
            RecordBody::Estimate(row) => println!("{}", serde_json::to_string(row)?),
            RecordBody::Moments(row) => println!("{}", serde_json::to_string(row)?),
            RecordBody::Extremal(row) => println!("{}", serde_json::to_string(row)?),
        }
    }
    let file = config.output_dir.join(format!(
        "{}.{}",
        experiment.as_str(),
        config.format.extension()
    ));
    eprintln!("wrote {}", file.display());
    Ok(all_pass)
}

fn run_sample(common: &Common) -> Result<bool, Error> {
    let config = common.run_config(Experiment::Fisher)?;
    let grid = config.validate()?;
    let haar = matches!(
        config.route,
        Some(FisherRoute::SpectralHaar | FisherRoute::GradientHaar)
    );
    let mut records = Vec::new();
    for params in &grid {
        records.extend(sample_spectra(
            params,
            config.samples,
            config.seed,
            haar,
            config.worker_pool(),
        )?);
    }
    let path = config
        .output_dir
        .join(format!("spectra.{}", config.format.extension()));
    write_spectra(&path, &records, config.format)?;
    eprintln!("wrote {} spectra to {}", records.len(), path.display());
    Ok(true)
}

fn run_verify(only: &[u32]) -> bool {
    let reports = if only.is_empty() {
        acceptance::run_all()
    } else {
        acceptance::run_all_filtered(only)
    };
    for r in &reports {
        println!("{r}");
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", reports.len());
    passed == reports.len()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Sample(c) => run_sample(c),
        Command::Fisher(c) => run_records(c, Experiment::Fisher),
        Command::Kl(c) => run_records(c, Experiment::Kl),
        Command::Lsi(c) => run_records(c, Experiment::Lsi),
        Command::MomentsTable(c) => run_records(c, Experiment::Moments),
        Command::Extremal(c) => run_records(c, Experiment::Extremal),
        Command::IdentityCheck(c) => run_records(c, Experiment::IdentityCheck),
        Command::SamplerAgreement(c) => run_records(c, Experiment::SamplerAgreement),
        Command::Verify { only } => Ok(run_verify(only)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_config_error(&e) => {
            eprintln!("configuration error: {e}");
            eprintln!("(output directory defaults to ${OUT_DIR_ENV} or ./out)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
