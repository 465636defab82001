//! Case runner: expands a config into cells and runs, solves or exports each
//! model, and renders the per-cell artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use h2chain_core::domain::{validate_catalog, TechnologyCatalog};
use h2chain_core::formulation::{
    balance_residuals, build, BuildOptions, BuiltModel, Design, ModelStats, PowerSource, ProductionTech, Restrictions,
    Solution, Tech,
};
use h2chain_core::metrics::{lcoh_breakdown, write_table_e_csv, CostReport};
use h2chain_core::scenario::{
    make_demand, parse_demand_shape_csv, parse_weather_csv, reduce_periods, DemandKind, ReductionPolicy, ScenarioSet,
    WeatherYear,
};
use h2chain_milp::{read_solution, to_mps_string, MipStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Backend, CaseKind, RunConfig};

/// Natural-gas price of the expensive-NG case, $/MMBtu (three times the base).
pub const EXPENSIVE_NG_PRICE: f64 = 10.5;
/// Slack on the unique-versus-base LCOH comparison, $/kg.
pub const DIVERSIFICATION_TOL: f64 = 1e-6;

/// One model to build within a cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub label: String,
    pub restrictions: Restrictions,
    /// Set for single-technology combinations.
    pub combination: Option<(ProductionTech, PowerSource)>,
    pub ng_price: Option<f64>,
    pub co2_tax: Option<f64>,
}

impl RunSpec {
    fn new(label: impl Into<String>, restrictions: Restrictions) -> RunSpec {
        RunSpec {
            label: label.into(),
            restrictions,
            combination: None,
            ng_price: None,
            co2_tax: None,
        }
    }
}

/// Runs of one cell: base first, then the case's variations.
pub fn plan_runs(cfg: &RunConfig) -> Result<Vec<RunSpec>> {
    let mut base = RunSpec::new("base", Restrictions::none());
    let with_unique = |base: RunSpec| -> Vec<RunSpec> {
        let mut runs = vec![base.clone()];
        for tech in ProductionTech::ALL {
            for source in PowerSource::ALL {
                let mut restrictions = Restrictions::unique(tech, source);
                restrictions.excluded.extend(base.restrictions.excluded.iter().copied());
                runs.push(RunSpec {
                    label: format!("{}+{}", tech.as_str(), source.as_str()),
                    restrictions,
                    combination: Some((tech, source)),
                    ..base.clone()
                });
            }
        }
        runs
    };
    Ok(match cfg.case {
        CaseKind::Base | CaseKind::Ideal => vec![base],
        CaseKind::Unique => with_unique(base),
        CaseKind::NoLowC => {
            base.restrictions = base.restrictions.without(Tech::Ngcc);
            with_unique(base)
        }
        CaseKind::ExpensiveNg => {
            base.ng_price = Some(EXPENSIVE_NG_PRICE);
            with_unique(base)
        }
        CaseKind::Co2Sweep => {
            let reference = load_catalog(cfg, cfg.co2_reference_year)?.cost_book.co2_tax;
            cfg.co2_factors
                .iter()
                .map(|&f| RunSpec {
                    co2_tax: Some(reference * f),
                    ..RunSpec::new(format!("co2_tax_x{f}"), Restrictions::none())
                })
                .collect()
        }
    })
}

pub fn load_catalog(cfg: &RunConfig, year: u16) -> Result<TechnologyCatalog> {
    let mut cat = match &cfg.catalog_dir {
        Some(dir) => {
            let path = dir.join(format!("catalog_{year}.json"));
            TechnologyCatalog::load(&path).with_context(|| format!("loading catalog {}", path.display()))?
        }
        None => TechnologyCatalog::default_for_year(year)?,
    };
    if let Some(c) = cfg.tank_capex_per_t {
        cat.tank.capex_per_t = c;
    }
    let violations = validate_catalog(&cat);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        bail!("catalog for {year} is invalid: {}", list.join("; "));
    }
    Ok(cat)
}

/// Weather years and demand shape named by a config.
pub struct Inputs {
    pub weather: Vec<WeatherYear>,
    pub shape: Option<Vec<f64>>,
}

impl Inputs {
    pub fn load(cfg: &RunConfig) -> Result<Inputs> {
        let mut weather = parse_weather_csv(&cfg.weather_csv)
            .with_context(|| format!("reading weather {}", cfg.weather_csv.display()))?;
        if !cfg.weather_years.is_empty() {
            for y in &cfg.weather_years {
                if !weather.iter().any(|w| w.year == *y) {
                    bail!("weather year {y} is not in {}", cfg.weather_csv.display());
                }
            }
            weather.retain(|w| cfg.weather_years.contains(&w.year));
        }
        let shape = match &cfg.demand_shape_csv {
            Some(p) if cfg.demand_kind == DemandKind::Variable => {
                Some(parse_demand_shape_csv(p).with_context(|| format!("reading demand shape {}", p.display()))?)
            }
            _ => None,
        };
        Ok(Inputs { weather, shape })
    }

    pub fn scenarios(&self, cfg: &RunConfig, scale_kt: f64) -> Result<ScenarioSet> {
        let demand = make_demand(cfg.demand_kind, scale_kt * 1e3, self.shape.as_deref())?;
        Ok(reduce_periods(
            &self.weather,
            &demand,
            cfg.reduction,
            cfg.case == CaseKind::Ideal,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Optimal,
    NodeLimit,
    Infeasible,
    Unbounded,
    /// Model written as MPS, awaiting an external solution.
    Exported,
    /// Solution read back from an external solver.
    Imported,
}

impl RunStatus {
    /// Runs that ended without a usable solution.
    pub fn is_unsolved(self) -> bool {
        matches!(self, RunStatus::Infeasible | RunStatus::Unbounded)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    pub excluded: Vec<Tech>,
    pub ng_price: f64,
    pub co2_tax: f64,
    pub status: RunStatus,
    /// $/yr.
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub max_balance_residual: Option<f64>,
    pub design: Option<Design>,
    pub report: Option<CostReport>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diversification {
    pub base_lcoh: f64,
    pub best_unique_label: String,
    pub best_unique_lcoh: f64,
    /// Best unique LCOH minus base LCOH, $/kg.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub case: CaseKind,
    pub year: u16,
    pub scale_kt: f64,
    pub demand_kind: DemandKind,
    pub reduction: ReductionPolicy,
    pub backend: Backend,
    pub scenarios: Vec<String>,
    pub annualization: f64,
    pub annual_demand_t: f64,
    pub runs: Vec<RunRecord>,
    /// Lowest-LCOH single-technology combination, when the case has any.
    pub cheapest_unique: Option<String>,
    pub diversification: Option<Diversification>,
}

impl CellReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsEntry {
    pub label: String,
    #[serde(flatten)]
    pub stats: ModelStats,
}

/// A cell's artifacts, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct CellOutput {
    pub dir: PathBuf,
    pub files: Vec<(String, Vec<u8>)>,
}

pub struct Outcome {
    pub reports: Vec<CellReport>,
    pub outputs: Vec<CellOutput>,
}

impl Outcome {
    /// True when some run ended infeasible or unbounded.
    pub fn any_unsolved(&self) -> bool {
        self.reports
            .iter()
            .flat_map(|r| &r.runs)
            .any(|r| r.status.is_unsolved())
    }
}

pub fn scale_dir(scale_kt: f64) -> String {
    format!("{scale_kt}kt")
}

pub fn cell_dir(case: CaseKind, year: u16, scale_kt: f64) -> PathBuf {
    PathBuf::from(case.as_str())
        .join(year.to_string())
        .join(scale_dir(scale_kt))
}

struct Job<'a> {
    cell: usize,
    spec: &'a RunSpec,
}

struct JobResult {
    record: RunRecord,
    stats: ModelStats,
    mps: Option<String>,
}

/// One (year, scale) combination of a config, with its inputs resolved.
pub struct Cell {
    pub year: u16,
    pub scale_kt: f64,
    pub catalog: TechnologyCatalog,
    pub scenarios: ScenarioSet,
}

pub fn plan_cells(cfg: &RunConfig) -> Result<Vec<Cell>> {
    let inputs = Inputs::load(cfg)?;
    let mut cells = Vec::new();
    for &year in &cfg.years {
        let catalog = load_catalog(cfg, year)?;
        for &scale_kt in &cfg.scales_kt {
            cells.push(Cell {
                year,
                scale_kt,
                catalog: catalog.clone(),
                scenarios: inputs.scenarios(cfg, scale_kt)?,
            });
        }
    }
    Ok(cells)
}

/// The cell catalog with the run's price overrides, and the run's model.
pub fn build_run(cell: &Cell, spec: &RunSpec) -> Result<(TechnologyCatalog, BuiltModel)> {
    let mut catalog = cell.catalog.clone();
    if let Some(p) = spec.ng_price {
        catalog.cost_book.ng_price = p;
    }
    if let Some(t) = spec.co2_tax {
        catalog.cost_book.co2_tax = t;
    }
    let built = build(&catalog, &cell.scenarios, &spec.restrictions, BuildOptions::default())?;
    Ok((catalog, built))
}

/// Runs every (year, scale) cell of `cfg`. Solves run in parallel; results
/// do not depend on scheduling. `out_dir` is only read, for imported
/// solutions of the MPS backend.
pub fn run_config(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let specs = plan_runs(cfg)?;
    let cells = plan_cells(cfg)?;
    let jobs: Vec<Job> = (0..cells.len())
        .flat_map(|cell| specs.iter().map(move |spec| Job { cell, spec }))
        .collect();
    let results: Vec<JobResult> = jobs
        .par_iter()
        .map(|job| {
            let cell = &cells[job.cell];
            let dir = out_dir.join(cell_dir(cfg.case, cell.year, cell.scale_kt));
            run_one(cfg, cell, job.spec, &dir).with_context(|| {
                format!(
                    "{} {} {}kt run {}",
                    cfg.case.as_str(),
                    cell.year,
                    cell.scale_kt,
                    job.spec.label
                )
            })
        })
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(cells.len());
    let mut outputs = Vec::with_capacity(cells.len());
    for (ci, (cell, chunk)) in cells.iter().zip(results.chunks(specs.len())).enumerate() {
        let runs: Vec<RunRecord> = chunk.iter().map(|r| r.record.clone()).collect();
        let (cheapest_unique, diversification) = compare_unique(&specs, &runs);
        let report = CellReport {
            case: cfg.case,
            year: cell.year,
            scale_kt: cell.scale_kt,
            demand_kind: cfg.demand_kind,
            reduction: cfg.reduction,
            backend: cfg.backend,
            scenarios: cell.scenarios.scenarios.iter().map(|s| s.label.clone()).collect(),
            annualization: cell.scenarios.annualization,
            annual_demand_t: cell.scenarios.annual_demand(),
            runs,
            cheapest_unique,
            diversification,
        };
        outputs.push(render(&report, chunk).with_context(|| format!("rendering cell {ci}"))?);
        reports.push(report);
    }
    Ok(Outcome { reports, outputs })
}

fn compare_unique(specs: &[RunSpec], runs: &[RunRecord]) -> (Option<String>, Option<Diversification>) {
    let lcoh = |r: &RunRecord| r.report.as_ref().map(|c| c.lcoh_total);
    let best = specs
        .iter()
        .zip(runs)
        .filter(|(s, _)| s.combination.is_some())
        .filter_map(|(_, r)| lcoh(r).map(|v| (r, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let Some((best_run, best_lcoh)) = best else {
        return (None, None);
    };
    let base = specs
        .iter()
        .zip(runs)
        .find(|(s, _)| s.combination.is_none())
        .and_then(|(_, r)| lcoh(r));
    let div = base.map(|base_lcoh| Diversification {
        base_lcoh,
        best_unique_label: best_run.label.clone(),
        best_unique_lcoh: best_lcoh,
        margin: best_lcoh - base_lcoh,
        holds: best_lcoh >= base_lcoh - DIVERSIFICATION_TOL,
    });
    (Some(best_run.label.clone()), div)
}

fn run_one(cfg: &RunConfig, cell: &Cell, spec: &RunSpec, dir: &Path) -> Result<JobResult> {
    let started = Instant::now();
    let (catalog, built) = build_run(cell, spec)?;
    let stats = built.stats();
    let mut record = RunRecord {
        label: spec.label.clone(),
        excluded: spec.restrictions.excluded.iter().copied().collect(),
        ng_price: catalog.cost_book.ng_price,
        co2_tax: catalog.cost_book.co2_tax,
        status: RunStatus::Exported,
        objective: None,
        gap: None,
        nodes: 0,
        lp_iterations: 0,
        max_balance_residual: None,
        design: None,
        report: None,
        warnings: Vec::new(),
    };
    let mut mps = None;
    match cfg.backend {
        Backend::Embedded => {
            let out = built.solve(&cell.scenarios, &cfg.tolerances.mip_options());
            record.status = match out.status() {
                MipStatus::Optimal => RunStatus::Optimal,
                MipStatus::NodeLimit => RunStatus::NodeLimit,
                MipStatus::Infeasible => RunStatus::Infeasible,
                MipStatus::Unbounded => RunStatus::Unbounded,
            };
            record.nodes = out.mip.nodes;
            record.lp_iterations = out.mip.lp_iterations;
            if let Some(sol) = &out.solution {
                record.gap = Some(out.mip.gap);
                fill_solution(&mut record, &catalog, &cell.scenarios, sol)?;
            }
        }
        Backend::MpsExport => {
            mps = Some(to_mps_string(&built.model)?);
            let sol_path = dir.join(format!("{}.sol", spec.label));
            if sol_path.exists() {
                import(&mut record, &built, &catalog, &cell.scenarios, &sol_path)?;
            }
        }
    }
    eprintln!(
        "{} {} {}kt {}: {} in {:.2} s",
        cfg.case.as_str(),
        cell.year,
        cell.scale_kt,
        spec.label,
        serde_json::to_string(&record.status)?.trim_matches('"'),
        started.elapsed().as_secs_f64()
    );
    Ok(JobResult { record, stats, mps })
}

fn import(
    record: &mut RunRecord,
    built: &BuiltModel,
    catalog: &TechnologyCatalog,
    scenarios: &ScenarioSet,
    path: &Path,
) -> Result<()> {
    let imported = read_solution(path, &built.model).with_context(|| format!("importing {}", path.display()))?;
    let primal = &imported.solution.primal;
    let violation = built
        .model
        .max_row_violation(primal)
        .max(built.model.max_bound_violation(primal));
    record.warnings = imported.warnings;
    if violation > 1e-6 {
        record
            .warnings
            .push(format!("imported point violates the model by {violation:e}"));
    }
    record.status = RunStatus::Imported;
    let sol = built.extract(primal, imported.solution.objective, scenarios);
    fill_solution(record, catalog, scenarios, &sol)
}

fn fill_solution(
    record: &mut RunRecord,
    catalog: &TechnologyCatalog,
    scenarios: &ScenarioSet,
    sol: &Solution,
) -> Result<()> {
    record.objective = Some(sol.objective);
    record.max_balance_residual = Some(balance_residuals(catalog, scenarios, sol).max());
    record.design = Some(sol.design.clone());
    record.report = Some(lcoh_breakdown(sol, catalog, scenarios)?);
    Ok(())
}

fn render(report: &CellReport, results: &[JobResult]) -> Result<CellOutput> {
    let mut files = vec![("report.json".to_string(), report.to_json().into_bytes())];
    let rows: Vec<(String, _)> = report
        .runs
        .iter()
        .filter_map(|r| r.report.as_ref().map(|c| (r.label.clone(), c.table_e)))
        .collect();
    let mut csv = Vec::new();
    write_table_e_csv(&mut csv, &rows)?;
    files.push(("table_e.csv".to_string(), csv));
    let stats: Vec<StatsEntry> = results
        .iter()
        .map(|r| StatsEntry {
            label: r.record.label.clone(),
            stats: r.stats,
        })
        .collect();
    let mut stats_json = serde_json::to_string_pretty(&stats)?;
    stats_json.push('\n');
    files.push(("model_stats.json".to_string(), stats_json.into_bytes()));
    for r in results {
        if let Some(mps) = &r.mps {
            files.push((format!("{}.mps", r.record.label), mps.clone().into_bytes()));
        }
    }
    Ok(CellOutput {
        dir: cell_dir(report.case, report.year, report.scale_kt),
        files,
    })
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_outputs(outputs: &[CellOutput], out_dir: &Path) -> Result<()> {
    for cell in outputs {
        for (name, bytes) in &cell.files {
            write_atomic(&out_dir.join(&cell.dir).join(name), bytes)?;
        }
    }
    Ok(())
}

/// Compares two renderings of the same config; returns the first differing file.
pub fn first_difference(a: &[CellOutput], b: &[CellOutput]) -> Option<PathBuf> {
    if a.len() != b.len() {
        return Some(PathBuf::from("<cell count>"));
    }
    for (x, y) in a.iter().zip(b) {
        if x.dir != y.dir || x.files.len() != y.files.len() {
            return Some(x.dir.clone());
        }
        for ((nx, bx), (ny, by)) in x.files.iter().zip(&y.files) {
            if nx != ny || bx != by {
                return Some(x.dir.join(nx));
            }
        }
    }
    None
}
