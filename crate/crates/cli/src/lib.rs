//! Batch case runner for the hydrogen supply-chain model.

pub mod config;
pub mod plots;
pub mod runner;

use std::path::Path;

use anyhow::{bail, Result};
use h2chain_core::scenario::synthetic;

pub use config::{Backend, CaseKind, RunConfig, Tolerances};
pub use runner::{run_config, write_outputs, CellReport, Outcome, RunRecord, RunStatus};

/// Exit code when every run produced a solution or an export.
pub const EXIT_OK: i32 = 0;
/// Exit code when some run was infeasible or unbounded; its report is still written.
pub const EXIT_UNSOLVED: i32 = 2;
pub const EXIT_ERROR: i32 = 1;

/// Runs a config, optionally twice to audit determinism, and writes the artifacts.
pub fn run_and_write(cfg: &RunConfig, out_dir: &Path, seed_check: bool) -> Result<Outcome> {
    let outcome = run_config(cfg, out_dir)?;
    if seed_check {
        let again = run_config(cfg, out_dir)?;
        if let Some(diff) = runner::first_difference(&outcome.outputs, &again.outputs) {
            bail!("determinism audit failed: {} differs between two runs", diff.display());
        }
        eprintln!("determinism audit passed: two runs produced identical artifacts");
    }
    write_outputs(&outcome.outputs, out_dir)?;
    Ok(outcome)
}

/// Writes the synthetic weather and load-shape files for `years`.
pub fn write_synthetic_data(out_dir: &Path, years: &[i32]) -> Result<()> {
    if years.is_empty() {
        bail!("no weather years requested");
    }
    let weather: Vec<_> = years.iter().map(|&y| synthetic::weather_year(y)).collect();
    runner::write_atomic(
        &out_dir.join("weather.csv"),
        synthetic::weather_csv(&weather).as_bytes(),
    )?;
    let load = synthetic::commercial_load(years[0]);
    runner::write_atomic(&out_dir.join("demand_shape.csv"), synthetic::load_csv(&load).as_bytes())?;
    Ok(())
}
