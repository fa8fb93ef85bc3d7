//! Command orchestration for phototaxis runs: configuration, calibration,
//! single-chi simulations, sweeps, theory tables and snapshot re-analysis.
//!
//! Each `cmd_*` function writes its CSV outputs and a `key = value` manifest
//! into an output directory and also returns the computed values, so the
//! commands can be driven from tests as well as from the `phototaxis` binary.

pub mod analyze;
pub mod calibrate;
pub mod config;
pub mod engine;
pub mod error;
pub mod output;
pub mod seeds;
pub mod simulate;
pub mod snapshot;
pub mod theory_table;

pub use analyze::{analyze, cmd_analyze, AnalysisReport};
pub use calibrate::{calibrate, cmd_calibrate, Calibration};
pub use config::RunConfig;
pub use error::{HarnessError, Result};
pub use output::Layout;
pub use simulate::{cmd_simulate, cmd_sweep, run_point, PointResult};
pub use theory_table::cmd_theory;

/// Runs `f` on a dedicated pool of `threads` workers (0 for all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(f)
}
