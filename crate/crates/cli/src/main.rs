use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use h2chain_cli::{
    plots, run_and_write, runner, write_synthetic_data, Backend, RunConfig, EXIT_ERROR, EXIT_OK, EXIT_UNSOLVED,
};
use h2chain_core::domain::TechnologyCatalog;
use h2chain_core::scenario::ReductionPolicy;

#[derive(Parser)]
#[command(name = "h2chain", version, about = "Hydrogen supply-chain design studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the case described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Overrides the config's backend.
        #[arg(long, value_enum)]
        backend: Option<Backend>,
        /// Overrides the config's reduction, e.g. `first_hours:672`, `seasonal_weeks:1`, `full_year`.
        #[arg(long)]
        reduction: Option<ReductionPolicy>,
        /// Run everything twice and fail unless the artifacts match byte for byte.
        #[arg(long)]
        seed_check: bool,
        /// Solver overrides, e.g. `gap_tol=1e-8,node_limit=500`.
        #[arg(long)]
        tolerances: Option<String>,
    },
    /// Collect every report.json under a directory into one long CSV.
    Plots {
        #[arg(long, default_value = "results")]
        reports: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the synthetic weather and demand-shape files.
    SynthData {
        #[arg(long, default_value = "data")]
        out_dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2019,2020,2021")]
        years: Vec<i32>,
    },
    /// Write the built-in technology catalog for a year as JSON.
    Catalog {
        #[arg(long)]
        year: u16,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run {
            config,
            out_dir,
            backend,
            reduction,
            seed_check,
            tolerances,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(b) = backend {
                cfg.backend = b;
            }
            if let Some(r) = reduction {
                cfg.reduction = r;
            }
            if let Some(t) = tolerances {
                cfg.tolerances.apply_overrides(&t)?;
            }
            let outcome = run_and_write(&cfg, &out_dir, seed_check)?;
            for report in &outcome.reports {
                if let Some(d) = &report.diversification {
                    if !d.holds {
                        eprintln!(
                            "warning: {} {} {}kt: unique {} beats base by {:e} $/kg",
                            report.case.as_str(),
                            report.year,
                            report.scale_kt,
                            d.best_unique_label,
                            -d.margin
                        );
                    }
                }
            }
            Ok(if outcome.any_unsolved() { EXIT_UNSOLVED } else { EXIT_OK })
        }
        Command::Plots { reports, out } => {
            let reports = plots::load_reports(&reports)?;
            let mut buf = Vec::new();
            plots::write_plots_csv(&mut buf, &reports)?;
            runner::write_atomic(&out, &buf)?;
            Ok(EXIT_OK)
        }
        Command::SynthData { out_dir, years } => {
            write_synthetic_data(&out_dir, &years)?;
            Ok(EXIT_OK)
        }
        Command::Catalog { year, out } => {
            let cat =
                TechnologyCatalog::default_for_year(year).with_context(|| format!("no built-in catalog for {year}"))?;
            runner::write_atomic(&out, cat.to_json().as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
