//! Verification harness: runs spectral targets, the identity registry,
//! two-projection reports and C*-model comparisons over an `(a, N)` grid and
//! writes deterministic JSON or CSV reports.

pub mod config;
pub mod report;
pub mod suites;

use std::path::PathBuf;

pub use config::{parse_config, parse_config_with_env, Format, RunConfig, Suite};
pub use report::{write_report, Check, Report, SuiteSummary};
pub use suites::execute;

/// Exit code when every asserted check passes.
pub const EXIT_PASS: u8 = 0;
/// Exit code for configuration, execution and I/O errors.
pub const EXIT_ERROR: u8 = 1;
/// Exit code when at least one check fails.
pub const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(clap::Error),

    #[error("cannot parse parameter `{0}`: expected re, re+imi or r@deg")]
    ParseA(String),

    #[error("parameter outside open unit disk: `{a}` has modulus {modulus}")]
    OutsideDisk { a: String, modulus: f64 },

    #[error("no parameter values given")]
    EmptyA,

    #[error("empty dimension list")]
    EmptyDims,

    #[error("cannot parse dimension list `{0}`")]
    ParseDims(String),

    #[error("dimension {n} below minimum {min}")]
    DimTooSmall { n: usize, min: usize },

    #[error("unknown suite `{0}`: expected spectra, identities, twoproj or cstar")]
    UnknownSuite(String),

    #[error("no suites selected")]
    EmptySuites,

    #[error("unknown tolerance key `{0}`")]
    UnknownTolKey(String),

    #[error("bad tolerance `{0}`: expected KEY=VAL with VAL a non-negative number")]
    BadTol(String),

    #[error("config file {}: {message}", path.display())]
    ConfigFile { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] hardyops::Error),

    #[error("serialization: {0}")]
    Serialize(String),
}

/// Runs `cfg`, writes the report and prints the summary table. Returns the
/// process exit code.
pub fn run(cfg: &RunConfig) -> Result<u8, CliError> {
    let report = execute(cfg)?;
    print!("{}", report.summary_table());
    let path = write_report(&report, cfg)?;
    println!("report: {}", path.display());
    Ok(if report.all_pass() {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    })
}
