//! Flattens cell reports into one long-format CSV for external plotting.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use h2chain_core::metrics::TableERow;
use walkdir::WalkDir;

use crate::runner::{scale_dir, CellReport};

pub const HEADER: [&str; 7] = ["case", "year", "scale", "run", "metric", "component", "value"];

/// Every `report.json` below `dir`, in path order.
pub fn find_reports(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        bail!("{} is not a directory", dir.display());
    }
    let mut paths = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.with_context(|| format!("scanning {}", dir.display()))?;
        if entry.file_type().is_file() && entry.file_name() == "report.json" {
            paths.push(entry.into_path());
        }
    }
    if paths.is_empty() {
        bail!("no report.json found under {}", dir.display());
    }
    Ok(paths)
}

pub fn load_reports(dir: &Path) -> Result<Vec<CellReport>> {
    find_reports(dir)?
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

/// (metric, component, value) triples of one solved run.
pub fn run_rows(report: &h2chain_core::metrics::CostReport) -> Vec<(&'static str, &'static str, f64)> {
    let l = &report.lcoh;
    let mut rows = vec![
        ("lcoh", "co2_tax", l.co2_tax),
        ("lcoh", "electricity", l.electricity),
        ("lcoh", "natural_gas", l.natural_gas),
        ("lcoh", "facility", l.facility),
        ("lcoh", "total", report.lcoh_total),
    ];
    if let Some(v) = report.lcoe {
        rows.push(("lcoe", "total", v));
    }
    rows.push(("carbon_intensity", "total", report.carbon_intensity));
    rows.push(("emissions", "co2_kt_per_yr", report.co2_kt_per_yr));
    rows.push(("natural_gas", "ng_tbtu_per_yr", report.ng_tbtu_per_yr));
    for (name, v) in TableERow::HEADER.iter().zip(report.table_e.values()).take(9) {
        rows.push(("capacity", name, v));
    }
    rows
}

pub fn write_plots_csv<W: io::Write>(out: W, reports: &[CellReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for cell in reports {
        let year = cell.year.to_string();
        let scale = scale_dir(cell.scale_kt);
        for run in &cell.runs {
            let Some(report) = &run.report else { continue };
            for (metric, component, value) in run_rows(report) {
                w.write_record([
                    cell.case.as_str(),
                    year.as_str(),
                    scale.as_str(),
                    run.label.as_str(),
                    metric,
                    component,
                    value.to_string().as_str(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
