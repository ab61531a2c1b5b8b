//! Experiment configuration, execution, persistence, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod output;
pub mod run;

pub use config::{Experiment, GridPoint, OutputFormat, RunConfig};
pub use output::{OutputRecord, RecordBody, SpectrumRecord};
pub use run::run_experiment;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HAAR_FISHER_OUT";

/// Output directory when neither a flag nor [`OUT_DIR_ENV`] is given.
pub fn default_output_dir() -> std::path::PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(Into::into)
        .unwrap_or_else(|| "out".into())
}
