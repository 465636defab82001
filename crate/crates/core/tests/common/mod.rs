//! Fixtures shared by the core integration tests.
#![allow(dead_code)]

use h2chain_core::domain::TechnologyCatalog;
use h2chain_core::formulation::{build, BuildOptions, BuiltModel, Restrictions, Solution};
use h2chain_core::scenario::{
    make_demand, reduce_periods, synthetic, DemandKind, ReductionPolicy, Scenario, ScenarioSet,
};
use h2chain_milp::{MipOptions, Row};

pub fn catalog(year: u16) -> TechnologyCatalog {
    TechnologyCatalog::default_for_year(year).unwrap()
}

/// One scenario with the given hourly series; annualized to a full year.
pub fn toy_set(ghi: Vec<f64>, temp: Vec<f64>, demand: Vec<f64>) -> ScenarioSet {
    let t = demand.len();
    ScenarioSet {
        policy: ReductionPolicy::FirstHours(t),
        demand_kind: DemandKind::Constant,
        annual_total: demand.iter().sum::<f64>() * 8760.0 / t as f64,
        dt: 1.0,
        annualization: 8760.0 / t as f64,
        scenarios: vec![Scenario {
            label: "toy".into(),
            weight: 1.0,
            ghi,
            temp,
            demand,
        }],
    }
}

/// Dark, flat-demand toy of `t` hours.
pub fn flat_set(t: usize, demand_t_per_h: f64) -> ScenarioSet {
    toy_set(vec![0.0; t], vec![20.0; t], vec![demand_t_per_h; t])
}

/// Synthetic 2019 weather cut by `policy`, for the given demand.
pub fn synthetic_set(kind: DemandKind, annual_t: f64, policy: ReductionPolicy) -> ScenarioSet {
    let weather = vec![synthetic::weather_year(2019)];
    let shape = synthetic::commercial_load(2019);
    let demand = make_demand(kind, annual_t, Some(&shape)).unwrap();
    reduce_periods(&weather, &demand, policy, kind == DemandKind::Ideal).unwrap()
}

pub fn tight() -> MipOptions {
    let mut o = MipOptions::default();
    o.lp.opt_tol = 1e-9;
    o
}

pub fn solve(
    cat: &TechnologyCatalog,
    set: &ScenarioSet,
    restrictions: &Restrictions,
    options: BuildOptions,
) -> (BuiltModel, Solution) {
    let built = build(cat, set, restrictions, options).unwrap();
    let out = built.solve(set, &tight());
    let sol = out.solution.expect("solvable toy");
    (built, sol)
}

pub fn row<'a>(built: &'a BuiltModel, name: &str) -> &'a Row {
    let i = built
        .model
        .row_position(name)
        .unwrap_or_else(|| panic!("no row {name}"));
    &built.model.rows()[i]
}

pub fn rows_with_prefix(built: &BuiltModel, prefix: &str) -> usize {
    built.model.rows().iter().filter(|r| r.name.starts_with(prefix)).count()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
