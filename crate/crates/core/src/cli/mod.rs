//! Batch front-end: TOML configuration, runs, sweeps, convergence studies
//! and reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 blow-up halt.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_converge, cmd_report, cmd_run, cmd_sweep, estimate_constants, execute_run, run_converge, run_sweep,
    CommonArgs, ConvergeReport, ConvergeRow, ExitStatus, RunArtifacts, Summary, SweepReport, SweepRow,
};
pub use config::{ConvergeConfig, FLaw, GammaLaw, ResolvedRun, RunConfig, ScenarioRef, SweepAxis, SweepConfig, SweepScale};
pub use output::{Provenance, Quantity, TimeseriesRow};
