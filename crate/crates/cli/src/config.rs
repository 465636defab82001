//! Run configuration: one JSON document per batch of cells.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use h2chain_core::scenario::{DemandKind, ReductionPolicy};
use h2chain_milp::{LpOptions, MipOptions};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Base,
    Unique,
    NoLowC,
    ExpensiveNg,
    Co2Sweep,
    Ideal,
}

impl CaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseKind::Base => "base",
            CaseKind::Unique => "unique",
            CaseKind::NoLowC => "no_low_c",
            CaseKind::ExpensiveNg => "expensive_ng",
            CaseKind::Co2Sweep => "co2_sweep",
            CaseKind::Ideal => "ideal",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Solve in-process with the bundled branch-and-bound.
    #[default]
    Embedded,
    /// Write one MPS file per model; read `<label>.sol` back when present.
    MpsExport,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Embedded => "embedded",
            Backend::MpsExport => "mps_export",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub int_tol: f64,
    pub gap_tol: f64,
    pub node_limit: usize,
    pub max_iter: usize,
}

/// Reduced-cost tolerance of case runs. The solver default of 1e-7 leaves
/// dispatch suboptimal by a few 1e-6 of the objective, enough to flip the
/// unique-versus-base LCOH comparison.
pub const CASE_OPT_TOL: f64 = 1e-9;

impl Default for Tolerances {
    fn default() -> Self {
        let mip = MipOptions::default();
        Tolerances {
            feas_tol: mip.lp.feas_tol,
            opt_tol: CASE_OPT_TOL,
            int_tol: mip.int_tol,
            gap_tol: mip.gap_tol,
            node_limit: mip.node_limit,
            max_iter: mip.lp.max_iter,
        }
    }
}

impl Tolerances {
    pub fn mip_options(&self) -> MipOptions {
        MipOptions {
            int_tol: self.int_tol,
            gap_tol: self.gap_tol,
            node_limit: self.node_limit,
            lp: LpOptions {
                feas_tol: self.feas_tol,
                opt_tol: self.opt_tol,
                max_iter: self.max_iter,
                ..LpOptions::default()
            },
        }
    }

    /// Applies comma-separated `key=value` overrides such as `gap_tol=1e-8,node_limit=500`.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .with_context(|| format!("tolerance override `{item}` is not key=value"))?;
            let float = || -> Result<f64> {
                let v: f64 = value
                    .parse()
                    .with_context(|| format!("bad value for {key}: `{value}`"))?;
                ensure!(v > 0.0 && v.is_finite(), "{key} must be positive, got {v}");
                Ok(v)
            };
            let count =
                || -> Result<usize> { value.parse().with_context(|| format!("bad value for {key}: `{value}`")) };
            match key {
                "feas_tol" => self.feas_tol = float()?,
                "opt_tol" => self.opt_tol = float()?,
                "int_tol" => self.int_tol = float()?,
                "gap_tol" => self.gap_tol = float()?,
                "node_limit" => self.node_limit = count()?,
                "max_iter" => self.max_iter = count()?,
                _ => bail!("unknown tolerance `{key}` (feas_tol, opt_tol, int_tol, gap_tol, node_limit, max_iter)"),
            }
        }
        Ok(())
    }
}

fn default_reduction() -> ReductionPolicy {
    ReductionPolicy::FirstHours(168)
}

fn default_co2_factors() -> Vec<f64> {
    vec![0.5, 1.0, 1.5]
}

fn default_co2_reference_year() -> u16 {
    2050
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseKind,
    pub years: Vec<u16>,
    pub demand_kind: DemandKind,
    /// Annual hydrogen demand of each cell, kt/yr.
    pub scales_kt: Vec<f64>,
    #[serde(default = "default_reduction")]
    pub reduction: ReductionPolicy,
    #[serde(default)]
    pub backend: Backend,
    /// Hourly `timestamp,ghi_w_m2,temp_c` file; one scenario per calendar year.
    pub weather_csv: PathBuf,
    /// Calendar years to keep from the weather file; empty keeps all.
    #[serde(default)]
    pub weather_years: Vec<i32>,
    /// Hourly load shape, required for variable demand.
    #[serde(default)]
    pub demand_shape_csv: Option<PathBuf>,
    /// Directory of `catalog_<year>.json` files; built-in defaults otherwise.
    #[serde(default)]
    pub catalog_dir: Option<PathBuf>,
    #[serde(default)]
    pub tank_capex_per_t: Option<f64>,
    /// Multipliers on the reference-year CO2 tax for the sweep case.
    #[serde(default = "default_co2_factors")]
    pub co2_factors: Vec<f64>,
    #[serde(default = "default_co2_reference_year")]
    pub co2_reference_year: u16,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// Reads a config; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.weather_csv);
        if let Some(p) = self.demand_shape_csv.as_mut() {
            fix(p);
        }
        if let Some(p) = self.catalog_dir.as_mut() {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.years.is_empty(), "config lists no years");
        ensure!(!self.scales_kt.is_empty(), "config lists no demand scales");
        for &s in &self.scales_kt {
            ensure!(s > 0.0 && s.is_finite(), "demand scale must be positive, got {s}");
        }
        if self.demand_kind == DemandKind::Variable {
            ensure!(
                self.demand_shape_csv.is_some(),
                "variable demand needs demand_shape_csv"
            );
        }
        ensure!(
            (self.case == CaseKind::Ideal) == (self.demand_kind == DemandKind::Ideal),
            "the ideal case and the ideal demand kind go together"
        );
        if self.case == CaseKind::Co2Sweep {
            ensure!(!self.co2_factors.is_empty(), "co2_sweep needs at least one factor");
            for &f in &self.co2_factors {
                ensure!(f >= 0.0 && f.is_finite(), "CO2 factor must be non-negative, got {f}");
            }
        }
        if let Some(c) = self.tank_capex_per_t {
            ensure!(c >= 0.0 && c.is_finite(), "tank capex must be non-negative, got {c}");
        }
        Ok(())
    }
}
