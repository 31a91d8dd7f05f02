//! Batch driver for `elrkfv-core`: run configuration, error norms,
//! convergence studies, CFL sweeps, golden-table checks and CSV/JSON output.

pub mod config;
pub mod error;
pub mod golden;
pub mod norms;
pub mod output;
pub mod run;
pub mod study;

pub use config::{RunConfig, Splitting};
pub use error::{HarnessError, Result};
pub use golden::{golden_compare, read_golden, Golden, Tolerance};
pub use norms::{error_norms, ErrorNorms, L2Convention};
pub use run::{run_single, RunOutput, State};
pub use study::{convergence_study, ConvergenceReport, ConvergenceRow};

/// Environment variable that caps the worker pool size.
pub const THREADS_ENV: &str = "ELRKFV_THREADS";

/// Sizes the global rayon pool from `ELRKFV_THREADS` when it is set.
/// Calling it more than once is harmless.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::config(format!("{THREADS_ENV}={v}")))?;
    // Fails only if the pool already exists.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
