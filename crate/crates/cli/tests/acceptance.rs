//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

#[path = "../../milp/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use h2chain_cli::config::{RunConfig, CASE_OPT_TOL};
use h2chain_cli::runner::{
    build_run, first_difference, plan_cells, plan_runs, run_config, Cell, Outcome, RunSpec, RunStatus,
};
use h2chain_core::domain::{crf, ReformerKind, TechnologyCatalog};
use h2chain_core::formulation::{build, BuildOptions, Flow, PowerSource, ProductionTech, Restrictions, Solution};
use h2chain_core::metrics::{annual_totals, carbon_intensity, table_e_row};
use h2chain_core::scenario::{make_demand, parse_weather_csv, reduce_periods, DemandKind, ReductionPolicy};
use h2chain_milp::{
    parse_mps, parse_solution, solve_lp, solve_mip, to_mps_string, LpOptions, LpStatus, MipOptions, MipStatus,
    ModelInstance, Sense,
};
use num::{BigInt, BigRational, ToPrimitive};

type Check = Result<String, String>;
type Criterion<'a> = Box<dyn FnOnce() -> Check + 'a>;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> RunConfig {
    RunConfig::load(&repo().join("configs").join(name)).expect("config loads")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tight() -> MipOptions {
    let mut o = MipOptions::default();
    o.lp.opt_tol = CASE_OPT_TOL;
    o
}

fn within_pct(name: &str, got: f64, want: f64) -> Result<(), String> {
    ensure(rel(got, want) <= 0.01, || {
        format!("{name} {got} is not within 1% of {want}")
    })
}

fn check_published_row(
    sol: &Solution,
    cat: &TechnologyCatalog,
    set: &h2chain_core::scenario::ScenarioSet,
) -> Result<String, String> {
    let totals = annual_totals(sol, cat, set);
    let (smr, ngcc) = (sol.design.smr_t_per_day, sol.design.ngcc_mw);
    let (co2, ng) = (totals.co2_t / 1e3, totals.ng_mmbtu / 1e6);
    within_pct("SMR t/day", smr, 5.48)?;
    within_pct("NGCC MW", ngcc, 0.22)?;
    within_pct("CO2 kt/yr", co2, 18.4)?;
    within_pct("NG TBtu/yr", ng, 0.260)?;
    let row = table_e_row(sol, cat, set);
    Ok(format!(
        "SMR {smr:.4} NGCC {ngcc:.4} CO2 {co2:.3} NG {ng:.4} (row {} / {} / {} / {})",
        row.smr_t_per_day, row.ngcc_mw, row.co2_kt_per_yr, row.ng_tbtu_per_yr
    ))
}

fn criterion_1() -> Check {
    let cat = TechnologyCatalog::load(&repo().join("data/catalog/catalog_2030.json")).map_err(|e| e.to_string())?;
    let weather: Vec<_> = parse_weather_csv(&repo().join("data/weather.csv"))
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|w| w.year == 2019)
        .collect();
    let demand = make_demand(DemandKind::Constant, 2000.0, None).map_err(|e| e.to_string())?;
    let restrictions = Restrictions::unique(ProductionTech::Smr, PowerSource::Ngcc);

    let reduced =
        reduce_periods(&weather, &demand, ReductionPolicy::SeasonalWeeks(1), false).map_err(|e| e.to_string())?;
    let hours: usize = reduced.scenarios.iter().map(|s| s.demand.len()).sum();
    ensure(hours == 672, || format!("reduced horizon has {hours} h"))?;
    let start = Instant::now();
    let built = build(&cat, &reduced, &restrictions, BuildOptions::default()).map_err(|e| e.to_string())?;
    let out = built.solve(&reduced, &tight());
    let secs = start.elapsed().as_secs_f64();
    let short = out.solution.ok_or("672-h solve returned no solution")?;
    ensure(secs <= 120.0, || format!("672-h solve took {secs:.1} s"))?;
    let short_row = check_published_row(&short, &cat, &reduced)?;

    // Annualized totals are the hourly sums times the annualization factor.
    let totals = annual_totals(&short, &cat, &reduced);
    let mut ng_hourly = 0.0;
    for (d, s) in short.dispatch.iter().zip(&reduced.scenarios) {
        let h2: f64 = d.get(Flow::Reform(ReformerKind::Smr)).iter().sum();
        let power: f64 = d.get(Flow::Ngcc).iter().sum();
        ng_hourly += s.weight * reduced.dt * (h2 * cat.smr.ng_rate + power * cat.ngcc.fuel_rate);
    }
    let ng_scaled = ng_hourly * reduced.annualization;
    ensure(rel(totals.ng_mmbtu, ng_scaled) <= 1e-9, || {
        format!("annual NG {} vs scaled hourly {ng_scaled}", totals.ng_mmbtu)
    })?;

    // Full year through the MPS path: write, re-read, solve the re-read file, import its solution.
    let full = reduce_periods(&weather, &demand, ReductionPolicy::FullYear, false).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let built = build(&cat, &full, &restrictions, BuildOptions::default()).map_err(|e| e.to_string())?;
    let text = to_mps_string(&built.model).map_err(|e| e.to_string())?;
    let reread = parse_mps(&text).map_err(|e| e.to_string())?;
    ensure(reread.census() == built.model.census(), || {
        "re-read census differs".into()
    })?;
    let external = solve_mip(&reread, &tight());
    ensure(external.status == MipStatus::Optimal, || {
        format!("full-year status {:?}", external.status)
    })?;
    let sol_text: String = reread
        .variables()
        .iter()
        .zip(&external.incumbent.primal)
        .map(|(v, x)| format!("{} {x:e}\n", v.name))
        .collect();
    let imported = parse_solution(&sol_text, &built.model).map_err(|e| e.to_string())?;
    ensure(imported.warnings.is_empty(), || imported.warnings.join("; "))?;
    let full_sol = built.extract(&imported.solution.primal, imported.solution.objective, &full);
    let secs_full = start.elapsed().as_secs_f64();
    check_published_row(&full_sol, &cat, &full)?;
    ensure(
        rel(short.design.smr_t_per_day, full_sol.design.smr_t_per_day) <= 1e-9,
        || {
            format!(
                "672-h SMR {} vs full-year {}",
                short.design.smr_t_per_day, full_sol.design.smr_t_per_day
            )
        },
    )?;
    let full_totals = annual_totals(&full_sol, &cat, &full);
    ensure(rel(totals.co2_t, full_totals.co2_t) <= 1e-9, || {
        format!("672-h CO2 {} vs full-year {}", totals.co2_t, full_totals.co2_t)
    })?;
    Ok(format!(
        "{short_row}; 672 h in {secs:.2} s, full year via MPS in {secs_full:.1} s, totals agree to 1e-9"
    ))
}

/// Hydrogen lost to tank leakage over a year, from a fresh solve of the run.
fn leak_loss(cell: &Cell, spec: &RunSpec) -> Result<f64, String> {
    let (catalog, built) = build_run(cell, spec).map_err(|e| format!("{e:#}"))?;
    let sol = built
        .solve(&cell.scenarios, &tight())
        .solution
        .ok_or("re-solve found no solution")?;
    let set = &cell.scenarios;
    Ok(set
        .scenarios
        .iter()
        .zip(&sol.dispatch)
        .map(|(sc, d)| sc.weight * set.annualization * catalog.tank.leak * d.get(Flow::Tank).iter().sum::<f64>())
        .sum())
}

fn criterion_2(desk: &[Outcome]) -> Check {
    let cfg = config("desk_constant.json");
    let cells = plan_cells(&cfg).map_err(|e| format!("{e:#}"))?;
    let specs = plan_runs(&cfg).map_err(|e| format!("{e:#}"))?;
    let mut checked = 0;
    let mut storing = 0;
    let mut worst: f64 = 0.0;
    for report in desk.iter().flat_map(|o| &o.reports) {
        if report.demand_kind != DemandKind::Constant {
            continue;
        }
        let cat = TechnologyCatalog::load(&repo().join(format!("data/catalog/catalog_{}.json", report.year)))
            .map_err(|e| e.to_string())?;
        let cell = cells
            .iter()
            .find(|c| c.year == report.year && c.scale_kt == report.scale_kt)
            .ok_or("cell missing from plan")?;
        for run in &report.runs {
            let Some(cost) = &run.report else { continue };
            let Some((tech, source)) = parse_combination(&run.label) else {
                continue;
            };
            // Hydrogen held in the tank leaks, so a storing run must make up the loss.
            let mut d = report.annual_demand_t;
            if run.design.as_ref().is_some_and(|x| x.tank_t > 0.0) {
                let spec = specs
                    .iter()
                    .find(|s| s.label == run.label)
                    .ok_or("run missing from plan")?;
                d += leak_loss(cell, spec)?;
                storing += 1;
            }
            let (ng_rate, co2_rate, elec) = match tech {
                ProductionTech::Pem => (0.0, 0.0, d * cat.pem.specific_energy / cat.cost_book.converter_ac),
                ProductionTech::Alkaline => (0.0, 0.0, d * cat.alkaline.specific_energy / cat.cost_book.converter_ac),
                ProductionTech::AtrCc => (cat.atr_cc.ng_rate, cat.atr_cc.co2_rate, d * cat.atr_cc.elec_rate),
                ProductionTech::SmrCc => (cat.smr_cc.ng_rate, cat.smr_cc.co2_rate, d * cat.smr_cc.elec_rate),
                ProductionTech::Smr => (cat.smr.ng_rate, cat.smr.co2_rate, d * cat.smr.elec_rate),
            };
            let (fuel, emit) = match source {
                PowerSource::Pv => (0.0, 0.0),
                PowerSource::Ngcc => (cat.ngcc.fuel_rate, cat.ngcc.co2_rate),
                PowerSource::Grid => (0.0, cat.cost_book.grid.co2_rate),
            };
            let want_ng = d * ng_rate + elec * fuel;
            let want_co2 = d * co2_rate + elec * emit;
            let scale = d * 10.0;
            for (name, got, want) in [
                ("NG", cost.totals.ng_mmbtu, want_ng),
                ("CO2", cost.totals.co2_t, want_co2),
            ] {
                let err = (got - want).abs() / want.abs().max(scale * 1e-3);
                worst = worst.max(err);
                ensure(err <= 1e-6, || {
                    format!(
                        "{} {} {}kt: {name} {got} vs {want}",
                        report.year, run.label, report.scale_kt
                    )
                })?;
            }
            checked += 1;
        }
    }
    ensure(checked == 135, || {
        format!("expected 135 solved combinations, checked {checked}")
    })?;
    Ok(format!(
        "{checked} constant-demand combinations ({storing} with tank leakage added to demand), worst relative error {worst:.1e}"
    ))
}

fn parse_combination(label: &str) -> Option<(ProductionTech, PowerSource)> {
    let (t, s) = label.split_once('+')?;
    let tech = ProductionTech::ALL.into_iter().find(|x| x.as_str() == t)?;
    let source = PowerSource::ALL.into_iter().find(|x| x.as_str() == s)?;
    Some((tech, source))
}

fn criterion_3() -> Check {
    let r = BigRational::new(BigInt::from(7), BigInt::from(100));
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for life in [1u32, 10, 25, 35] {
        let g = num::pow(BigRational::from_integer(BigInt::from(1)) + &r, life as usize);
        let exact = (&r * &g / (&g - BigRational::from_integer(BigInt::from(1))))
            .to_f64()
            .unwrap();
        let got = crf(0.07, life as f64).map_err(|e| e.to_string())?;
        let err = (got - exact).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || format!("crf(0.07, {life}) = {got}, oracle {exact}"))?;
        parts.push(format!("{life}: {got:.9}"));
    }
    Ok(format!("{} (max error {worst:.1e})", parts.join(", ")))
}

fn criterion_4() -> Check {
    let cat = TechnologyCatalog::load(&repo().join("data/catalog/catalog_2030.json")).map_err(|e| e.to_string())?;
    // Independent restatement of the published rates.
    let process = [
        (ProductionTech::Pem, 0.0, 48.0),
        (ProductionTech::Alkaline, 0.0, 50.0),
        (ProductionTech::AtrCc, 0.62, 3.6),
        (ProductionTech::SmrCc, 1.98, 4.4),
        (ProductionTech::Smr, 9.17, 0.96),
    ];
    let sources = [
        (PowerSource::Pv, 0.0),
        (PowerSource::Ngcc, 0.038),
        (PowerSource::Grid, 0.376),
    ];
    let mut worst: f64 = 0.0;
    for (tech, co2, elec) in process {
        for (source, ci) in sources {
            let want = co2 + elec * ci;
            let got = carbon_intensity(tech, source, &cat);
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 1e-12, || {
                format!("{}+{}: {got} vs {want}", tech.as_str(), source.as_str())
            })?;
        }
    }
    let ci = |t, s| carbon_intensity(t, s, &cat);
    ensure(ci(ProductionTech::Pem, PowerSource::Pv) == 0.0, || {
        "PEM+PV is not zero".into()
    })?;
    ensure(ci(ProductionTech::Alkaline, PowerSource::Pv) == 0.0, || {
        "alkaline+PV is not zero".into()
    })?;
    let smr_grid = ci(ProductionTech::Smr, PowerSource::Grid);
    let pem_grid = ci(ProductionTech::Pem, PowerSource::Grid);
    ensure((smr_grid - 9.531).abs() < 5e-4, || format!("SMR+grid {smr_grid}"))?;
    ensure((pem_grid - 18.048).abs() < 5e-4, || format!("PEM+grid {pem_grid}"))?;
    let reformers = [ProductionTech::AtrCc, ProductionTech::SmrCc, ProductionTech::Smr];
    for source in PowerSource::ALL {
        let best = reformers
            .into_iter()
            .min_by(|a, b| ci(*a, source).total_cmp(&ci(*b, source)))
            .unwrap();
        ensure(best == ProductionTech::AtrCc, || {
            format!("cleanest reformer on {} is {}", source.as_str(), best.as_str())
        })?;
        for tech in ProductionTech::ALL {
            ensure(ci(tech, PowerSource::Pv) <= ci(tech, source), || {
                format!("{} is cleaner off PV", tech.as_str())
            })?;
        }
    }
    ensure(pem_grid > smr_grid, || "grid PEM is not dirtier than grid SMR".into())?;
    Ok(format!(
        "15 values, max error {worst:.1e}; SMR+grid {smr_grid:.4}, PEM+grid {pem_grid:.4}"
    ))
}

fn strong_duality(model: &ModelInstance, s: &h2chain_milp::LpSolution) -> Result<f64, String> {
    let dual = s.dual_objective(model);
    let gap = (dual - s.objective).abs() / (1.0 + s.objective.abs());
    ensure(gap <= 1e-6, || {
        format!("{}: primal {} dual {dual}", model.name, s.objective)
    })?;
    for (row, &y) in model.rows().iter().zip(&s.dual) {
        let wrong_sign = match row.sense {
            Sense::Le => y > 1e-9,
            Sense::Ge => y < -1e-9,
            Sense::Eq => false,
        };
        ensure(!wrong_sign, || {
            format!("{}: row {} dual {y} has the wrong sign", model.name, row.name)
        })?;
    }
    Ok(gap)
}

fn criterion_5() -> Check {
    let mut worst_obj: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for seed in 0..50u64 {
        let m = 2 + (seed as usize % 4);
        let n = 3 + (seed as usize % 5);
        let model = support::random_lp(seed, m, n);
        let oracle = support::enumerate_vertices(&model).ok_or(format!("seed {seed}: oracle found no vertex"))?;
        let s = solve_lp(&model, &LpOptions::default());
        ensure(s.status == LpStatus::Optimal, || {
            format!("seed {seed}: status {:?}", s.status)
        })?;
        let err = (s.objective - oracle).abs() / (1.0 + oracle.abs());
        worst_obj = worst_obj.max(err);
        ensure(err <= 1e-6, || {
            format!("seed {seed}: simplex {} oracle {oracle}", s.objective)
        })?;
        worst_gap = worst_gap.max(strong_duality(&model, &s)?);
    }
    // Largest size, checked by certificate only; enumeration is out of reach there.
    for seed in 100..110u64 {
        let model = support::random_lp(seed, 20, 40);
        let s = solve_lp(&model, &LpOptions::default());
        ensure(s.status == LpStatus::Optimal, || {
            format!("seed {seed} 20x40: status {:?}", s.status)
        })?;
        ensure(model.max_row_violation(&s.primal) <= 1e-7, || {
            format!("seed {seed} 20x40 is infeasible")
        })?;
        worst_gap = worst_gap.max(strong_duality(&model, &s)?);
    }
    Ok(format!(
        "50 enumerated LPs, worst objective error {worst_obj:.1e}; 60 duality gaps, worst {worst_gap:.1e}"
    ))
}

fn criterion_6() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let model = support::piecewise_toy(seed);
        let oracle = support::enumerate_patterns(&model).ok_or(format!("seed {seed}: no feasible pattern"))?;
        let s = solve_mip(&model, &MipOptions::default());
        ensure(s.status == MipStatus::Optimal, || {
            format!("seed {seed}: status {:?}", s.status)
        })?;
        let err = (s.objective() - oracle).abs() / (1.0 + oracle.abs());
        worst = worst.max(err);
        ensure(err <= 1e-9, || {
            format!("seed {seed}: B&B {} enumeration {oracle}", s.objective())
        })?;
    }
    Ok(format!("20 piecewise models, worst relative difference {worst:.1e}"))
}

fn same_model(a: &ModelInstance, b: &ModelInstance) -> Result<(), String> {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= 1e-12 * x.abs().max(1.0);
    ensure(a.census() == b.census(), || {
        format!("census {:?} vs {:?}", a.census(), b.census())
    })?;
    ensure(close(a.objective_offset, b.objective_offset), || {
        "objective offset differs".into()
    })?;
    for (u, v) in a.variables().iter().zip(b.variables()) {
        let same = u.name == v.name
            && u.is_binary == v.is_binary
            && close(u.lower, v.lower)
            && close(u.upper, v.upper)
            && close(u.cost, v.cost);
        ensure(same, || format!("column {} differs", u.name))?;
    }
    for (r, s) in a.rows().iter().zip(b.rows()) {
        let mut rc = r.coeffs.clone();
        let mut sc = s.coeffs.clone();
        rc.sort_by_key(|c| c.0);
        sc.sort_by_key(|c| c.0);
        let same = r.name == s.name
            && r.sense == s.sense
            && close(r.rhs, s.rhs)
            && rc.len() == sc.len()
            && rc.iter().zip(&sc).all(|(p, q)| p.0 == q.0 && close(p.1, q.1));
        ensure(same, || format!("row {} differs", r.name))?;
    }
    Ok(())
}

const CASE_CONFIGS: [&str; 8] = [
    "desk_constant.json",
    "desk_variable.json",
    "base_2030.json",
    "no_low_c.json",
    "expensive_ng.json",
    "co2_sweep.json",
    "ideal.json",
    "full_scale_mps.json",
];

fn criterion_7() -> Check {
    let mut models = 0;
    let mut nonzeros = 0;
    for name in CASE_CONFIGS {
        let cfg = config(name);
        let cells = plan_cells(&cfg).map_err(|e| format!("{name}: {e:#}"))?;
        let specs = plan_runs(&cfg).map_err(|e| format!("{name}: {e:#}"))?;
        for cell in &cells {
            for spec in &specs {
                let (_, built) = build_run(cell, spec).map_err(|e| format!("{name}: {e:#}"))?;
                let text = to_mps_string(&built.model).map_err(|e| e.to_string())?;
                let back = parse_mps(&text).map_err(|e| e.to_string())?;
                same_model(&built.model, &back)
                    .map_err(|e| format!("{name} {} {}kt {}: {e}", cell.year, cell.scale_kt, spec.label))?;
                models += 1;
                nonzeros += built.model.census().nonzeros;
            }
        }
    }
    Ok(format!(
        "{models} instances from {} configs, {nonzeros} coefficients",
        CASE_CONFIGS.len()
    ))
}

fn criterion_8(desk: &[Outcome]) -> Check {
    let mut cells = 0;
    let mut worst = f64::INFINITY;
    for report in desk.iter().flat_map(|o| &o.reports) {
        let div = report.diversification.as_ref().ok_or_else(|| {
            format!(
                "{} {}kt {}: no diversification record",
                report.year,
                report.scale_kt,
                report.demand_kind.as_str()
            )
        })?;
        let base = report
            .runs
            .iter()
            .find(|r| r.label == "base")
            .and_then(|r| r.report.as_ref())
            .ok_or("no base run")?;
        let best = report
            .runs
            .iter()
            .filter(|r| r.label != "base")
            .filter_map(|r| r.report.as_ref().map(|c| c.lcoh_total))
            .fold(f64::INFINITY, f64::min);
        ensure(best == div.best_unique_lcoh && base.lcoh_total == div.base_lcoh, || {
            "diversification record disagrees with runs".into()
        })?;
        let margin = best - base.lcoh_total;
        worst = worst.min(margin);
        ensure(margin >= -1e-6, || {
            format!(
                "{} {}kt {}: best unique {best} below base {}",
                report.year,
                report.scale_kt,
                report.demand_kind.as_str(),
                base.lcoh_total
            )
        })?;
        cells += 1;
    }
    ensure(cells == 18, || format!("expected 18 cells, saw {cells}"))?;
    Ok(format!("{cells} cells, smallest margin {worst:.3e} $/kg"))
}

fn criterion_9(desk: &[Outcome], cases: &[Outcome]) -> Check {
    let mut solved = 0;
    let mut worst: f64 = 0.0;
    for report in desk.iter().chain(cases).flat_map(|o| &o.reports) {
        for run in &report.runs {
            if run.report.is_none() {
                continue;
            }
            let r = run
                .max_balance_residual
                .ok_or_else(|| format!("{}: no residual recorded", run.label))?;
            worst = worst.max(r);
            ensure(r <= 1e-6, || {
                format!(
                    "{} {} {}kt {}: residual {r:e}",
                    report.case.as_str(),
                    report.year,
                    report.scale_kt,
                    run.label
                )
            })?;
            solved += 1;
        }
    }
    Ok(format!("{solved} solutions, worst residual {worst:.1e}"))
}

fn criterion_10(first: &[Outcome], second: &[Outcome]) -> Check {
    let mut files = 0;
    for (a, b) in first.iter().zip(second) {
        if let Some(path) = first_difference(&a.outputs, &b.outputs) {
            return Err(format!("{} differs between runs", path.display()));
        }
        files += a.outputs.iter().map(|c| c.files.len()).sum::<usize>();
    }
    Ok(format!("{files} artifacts byte-identical across two runs"))
}

fn run_all(names: &[&str], out: &Path) -> Vec<Outcome> {
    names
        .iter()
        .map(|name| run_config(&config(name), out).unwrap_or_else(|e| panic!("{name}: {e:#}")))
        .collect()
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temp dir");
    let out = scratch.path().join("results");
    let desk_names = ["desk_constant.json", "desk_variable.json"];
    let case_names = [
        "base_2030.json",
        "no_low_c.json",
        "expensive_ng.json",
        "co2_sweep.json",
        "ideal.json",
    ];

    let start = Instant::now();
    let desk = run_all(&desk_names, &out);
    let desk_again = run_all(&desk_names, &out);
    let cases = run_all(&case_names, &out);
    for outcome in &cases {
        for report in &outcome.reports {
            for run in &report.runs {
                if run.status.is_unsolved() {
                    eprintln!(
                        "note: {} {} recorded as {:?}",
                        report.case.as_str(),
                        run.label,
                        run.status
                    );
                }
                assert_ne!(run.status, RunStatus::Exported);
            }
        }
    }
    eprintln!("suite solved in {:.1} s", start.elapsed().as_secs_f64());

    let criteria: Vec<(&str, Criterion)> = vec![
        ("closed-form design reproduction", Box::new(criterion_1)),
        ("rate arithmetic oracle", Box::new(|| criterion_2(&desk))),
        ("capital recovery factor", Box::new(criterion_3)),
        ("carbon-intensity matrix", Box::new(criterion_4)),
        ("LP solver correctness", Box::new(criterion_5)),
        ("MIP correctness", Box::new(criterion_6)),
        ("MPS round trip", Box::new(criterion_7)),
        ("diversification inequality", Box::new(|| criterion_8(&desk))),
        ("balance residuals", Box::new(|| criterion_9(&desk, &cases))),
        ("determinism", Box::new(|| criterion_10(&desk, &desk_again))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match result {
            Ok(detail) => println!("criterion {} [PRIMARY] {name}: PASS {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [PRIMARY] {name}: FAIL {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
