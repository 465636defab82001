//! Levelized costs, carbon intensity and design summaries of solved runs.
//!
//! The LCOH buckets partition the objective: facility takes every annualized
//! capex and fixed O&M charge plus NGCC variable O&M, natural gas every fuel
//! purchase, CO2 tax every taxed tonne, electricity the grid energy price.

use std::io;

use serde::{Deserialize, Serialize};

use crate::domain::{crf, ElectrolyzerKind, ReformerKind, TechnologyCatalog};
use crate::error::MetricsError;
use crate::formulation::{pv_output_coeff, Design, Flow, PowerSource, ProductionTech, Solution};
use crate::scenario::ScenarioSet;

/// Annualized physical totals of a solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnualTotals {
    pub hydrogen_t: f64,
    pub ng_mmbtu: f64,
    pub co2_t: f64,
    pub grid_mwh: f64,
    pub ngcc_mwh: f64,
    pub pv_mwh: f64,
    pub curtailed_mwh: f64,
    /// Electricity consumed by electrolyzers and reformers.
    pub delivered_mwh: f64,
    /// Hydrogen produced by each route, t/yr, in [`ProductionTech::ALL`] order.
    pub produced_t: [f64; 5],
}

pub fn annual_totals(solution: &Solution, catalog: &TechnologyCatalog, scenarios: &ScenarioSet) -> AnnualTotals {
    let cb = &catalog.cost_book;
    let mut a = AnnualTotals::default();
    for (sc, d) in scenarios.scenarios.iter().zip(&solution.dispatch) {
        let w = sc.weight * scenarios.annualization * scenarios.dt;
        let sum = |f: Flow| d.get(f).iter().sum::<f64>() * w;
        a.hydrogen_t += sc.demand.iter().sum::<f64>() * w;
        let ngcc = sum(Flow::Ngcc);
        let grid = sum(Flow::Grid);
        a.ngcc_mwh += ngcc;
        a.grid_mwh += grid;
        a.ng_mmbtu += catalog.ngcc.fuel_rate * ngcc;
        a.co2_t += catalog.ngcc.co2_rate * ngcc + cb.grid.co2_rate * grid;
        a.curtailed_mwh += sum(Flow::Curtail);
        let pv: f64 = sc
            .ghi
            .iter()
            .zip(&sc.temp)
            .map(|(&g, &t)| pv_output_coeff(&catalog.pv, g, t, cb.converter_dc))
            .sum();
        a.pv_mwh += pv * solution.design.pv_mw * w;
        for (i, kind) in ElectrolyzerKind::ALL.into_iter().enumerate() {
            let p2h = sum(Flow::P2h(kind));
            a.delivered_mwh += p2h;
            a.produced_t[i] += p2h / catalog.electrolyzer(kind).specific_energy;
        }
        for (i, kind) in ReformerKind::ALL.into_iter().enumerate() {
            let rp = catalog.reformer(kind);
            let h = sum(Flow::Reform(kind));
            a.delivered_mwh += rp.elec_rate * h;
            a.ng_mmbtu += rp.ng_rate * h;
            a.co2_t += rp.co2_rate * h;
            a.produced_t[2 + i] += h;
        }
    }
    a
}

/// Annualized capex plus fixed O&M of each facility, $/yr.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FacilityCosts {
    pub pv: f64,
    pub battery: f64,
    pub ngcc: f64,
    pub pem: f64,
    pub alkaline: f64,
    pub atr_cc: f64,
    pub smr_cc: f64,
    pub smr: f64,
    pub tank: f64,
}

impl FacilityCosts {
    pub fn total(&self) -> f64 {
        self.pv + self.battery + self.ngcc + self.pem + self.alkaline + self.atr_cc + self.smr_cc + self.smr + self.tank
    }

    /// PV, battery and NGCC; the converters carry no separate capex.
    pub fn electricity_system(&self) -> f64 {
        self.pv + self.battery + self.ngcc
    }
}

/// Reformer installation cost: segment weights on the cost curve when the
/// design carries them, otherwise linear at the largest breakpoint's unit cost.
pub fn reformer_capex(design: &Design, catalog: &TechnologyCatalog, kind: ReformerKind) -> f64 {
    let curve = &catalog.reformer(kind).cost_curve;
    match design.segments.iter().find(|s| s.kind == kind) {
        Some(seg) => seg.x.iter().zip(curve).map(|(x, p)| x * p.cost).sum(),
        None => curve
            .last()
            .map_or(0.0, |p| design.reformer(kind) * p.cost / p.capacity_t_per_day),
    }
}

pub fn facility_costs(design: &Design, catalog: &TechnologyCatalog) -> Result<FacilityCosts, MetricsError> {
    let r = catalog.cost_book.interest;
    let ann = |omf: f64, life: f64| -> Result<f64, MetricsError> { Ok(crf(r, life)? + omf) };
    let reformer = |kind: ReformerKind| -> Result<f64, MetricsError> {
        let rp = catalog.reformer(kind);
        Ok(ann(rp.omf, rp.lifespan_yr)? * reformer_capex(design, catalog, kind))
    };
    let electrolyzer = |kind: ElectrolyzerKind| -> Result<f64, MetricsError> {
        let e = catalog.electrolyzer(kind);
        Ok(ann(e.omf, e.lifespan_yr)? * e.capex_per_kw * 1e3 * design.electrolyzer(kind))
    };
    Ok(FacilityCosts {
        pv: ann(catalog.pv.omf, catalog.pv.lifespan_yr)? * catalog.pv.capex_per_kw * 1e3 * design.pv_mw,
        battery: ann(catalog.battery.omf, catalog.battery.lifespan_yr)?
            * catalog.battery.capex_per_mwh
            * design.battery_mwh,
        ngcc: ann(catalog.ngcc.omf, catalog.ngcc.lifespan_yr)? * catalog.ngcc.capex_per_mw * design.ngcc_mw,
        pem: electrolyzer(ElectrolyzerKind::Pem)?,
        alkaline: electrolyzer(ElectrolyzerKind::Alkaline)?,
        atr_cc: reformer(ReformerKind::AtrCc)?,
        smr_cc: reformer(ReformerKind::SmrCc)?,
        smr: reformer(ReformerKind::Smr)?,
        tank: ann(catalog.tank.omf, catalog.tank.lifespan_yr)? * catalog.tank.capex_per_t * design.tank_t,
    })
}

/// Annual cost buckets, $/yr.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBuckets {
    pub co2_tax: f64,
    pub electricity: f64,
    pub natural_gas: f64,
    pub facility: f64,
}

impl CostBuckets {
    pub fn total(&self) -> f64 {
        self.co2_tax + self.electricity + self.natural_gas + self.facility
    }
}

pub fn cost_buckets(
    solution: &Solution,
    catalog: &TechnologyCatalog,
    totals: &AnnualTotals,
) -> Result<CostBuckets, MetricsError> {
    let cb = &catalog.cost_book;
    Ok(CostBuckets {
        co2_tax: totals.co2_t * cb.co2_tax,
        electricity: totals.grid_mwh * cb.grid.price,
        natural_gas: totals.ng_mmbtu * cb.ng_price,
        facility: facility_costs(&solution.design, catalog)?.total() + totals.ngcc_mwh * catalog.ngcc.variable_cost,
    })
}

/// LCOH split, $/kg H2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LcohComponents {
    pub co2_tax: f64,
    pub electricity: f64,
    pub natural_gas: f64,
    pub facility: f64,
}

/// Rounded design and emission summary in the supplement's table layout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableERow {
    pub pv_mw: f64,
    pub battery_mwh: f64,
    pub pem_mw: f64,
    pub alkaline_mw: f64,
    pub tank_t: f64,
    pub ngcc_mw: f64,
    pub atr_cc_t_per_day: f64,
    pub smr_cc_t_per_day: f64,
    pub smr_t_per_day: f64,
    pub co2_kt_per_yr: f64,
    pub ng_tbtu_per_yr: f64,
}

impl TableERow {
    pub const HEADER: [&'static str; 11] = [
        "pv_mw",
        "battery_mwh",
        "pem_mw",
        "alkaline_mw",
        "tank_t",
        "ngcc_mw",
        "atr_cc_t_per_day",
        "smr_cc_t_per_day",
        "smr_t_per_day",
        "co2_kt_per_yr",
        "ng_tbtu_per_yr",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.pv_mw,
            self.battery_mwh,
            self.pem_mw,
            self.alkaline_mw,
            self.tank_t,
            self.ngcc_mw,
            self.atr_cc_t_per_day,
            self.smr_cc_t_per_day,
            self.smr_t_per_day,
            self.co2_kt_per_yr,
            self.ng_tbtu_per_yr,
        ]
    }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    // Adding zero turns -0.0 into 0.0.
    (v * f).round() / f + 0.0
}

pub fn table_e_row(solution: &Solution, catalog: &TechnologyCatalog, scenarios: &ScenarioSet) -> TableERow {
    let d = &solution.design;
    let totals = annual_totals(solution, catalog, scenarios);
    TableERow {
        pv_mw: round_to(d.pv_mw, 2),
        battery_mwh: round_to(d.battery_mwh, 2),
        pem_mw: round_to(d.pem_mw, 2),
        alkaline_mw: round_to(d.alkaline_mw, 2),
        tank_t: round_to(d.tank_t, 2),
        ngcc_mw: round_to(d.ngcc_mw, 2),
        atr_cc_t_per_day: round_to(d.atr_cc_t_per_day, 2),
        smr_cc_t_per_day: round_to(d.smr_cc_t_per_day, 2),
        smr_t_per_day: round_to(d.smr_t_per_day, 2),
        co2_kt_per_yr: round_to(totals.co2_t / 1e3, 1),
        ng_tbtu_per_yr: round_to(totals.ng_mmbtu / 1e6, 3),
    }
}

/// Electricity-system cost over electricity delivered to hydrogen production,
/// $/MWh. Curtailed energy is paid for but not delivered.
pub fn lcoe(solution: &Solution, catalog: &TechnologyCatalog, scenarios: &ScenarioSet) -> Result<f64, MetricsError> {
    let totals = annual_totals(solution, catalog, scenarios);
    let cb = &catalog.cost_book;
    if totals.delivered_mwh <= 0.0 {
        return Err(MetricsError::ZeroDelivered);
    }
    let ngcc = &catalog.ngcc;
    let numerator = facility_costs(&solution.design, catalog)?.electricity_system()
        + totals.ngcc_mwh * (ngcc.fuel_rate * cb.ng_price + ngcc.co2_rate * cb.co2_tax + ngcc.variable_cost)
        + totals.grid_mwh * (cb.grid.price + cb.grid.co2_rate * cb.co2_tax);
    Ok(numerator / totals.delivered_mwh)
}

/// Process emissions plus those of the electricity drawn, t CO2/t H2.
pub fn carbon_intensity(tech: ProductionTech, source: PowerSource, catalog: &TechnologyCatalog) -> f64 {
    let (process, elec) = match tech {
        ProductionTech::Pem => (0.0, catalog.pem.specific_energy),
        ProductionTech::Alkaline => (0.0, catalog.alkaline.specific_energy),
        ProductionTech::AtrCc => (catalog.atr_cc.co2_rate, catalog.atr_cc.elec_rate),
        ProductionTech::SmrCc => (catalog.smr_cc.co2_rate, catalog.smr_cc.elec_rate),
        ProductionTech::Smr => (catalog.smr.co2_rate, catalog.smr.elec_rate),
    };
    let source_ci = match source {
        PowerSource::Pv => 0.0,
        PowerSource::Ngcc => catalog.ngcc.co2_rate,
        PowerSource::Grid => catalog.cost_book.grid.co2_rate,
    };
    process + elec * source_ci
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// $/kg H2.
    pub lcoh_total: f64,
    pub lcoh: LcohComponents,
    /// $/MWh; absent when no electricity reaches hydrogen production.
    pub lcoe: Option<f64>,
    /// t CO2/t H2.
    pub carbon_intensity: f64,
    pub co2_kt_per_yr: f64,
    pub ng_tbtu_per_yr: f64,
    /// $/yr, the sum of the buckets.
    pub annual_cost: f64,
    pub annual_demand_t: f64,
    pub buckets: CostBuckets,
    pub totals: AnnualTotals,
    pub table_e: TableERow,
}

pub fn lcoh_breakdown(
    solution: &Solution,
    catalog: &TechnologyCatalog,
    scenarios: &ScenarioSet,
) -> Result<CostReport, MetricsError> {
    let totals = annual_totals(solution, catalog, scenarios);
    if totals.hydrogen_t <= 0.0 {
        return Err(MetricsError::ZeroDemand);
    }
    let buckets = cost_buckets(solution, catalog, &totals)?;
    let kg = totals.hydrogen_t * 1e3;
    let lcoh = LcohComponents {
        co2_tax: buckets.co2_tax / kg,
        electricity: buckets.electricity / kg,
        natural_gas: buckets.natural_gas / kg,
        facility: buckets.facility / kg,
    };
    let lcoe = match lcoe(solution, catalog, scenarios) {
        Ok(v) => Some(v),
        Err(MetricsError::ZeroDelivered) => None,
        Err(e) => return Err(e),
    };
    Ok(CostReport {
        lcoh_total: lcoh.co2_tax + lcoh.electricity + lcoh.natural_gas + lcoh.facility,
        lcoh,
        lcoe,
        carbon_intensity: totals.co2_t / totals.hydrogen_t,
        co2_kt_per_yr: totals.co2_t / 1e3,
        ng_tbtu_per_yr: totals.ng_mmbtu / 1e6,
        annual_cost: buckets.total(),
        annual_demand_t: totals.hydrogen_t,
        buckets,
        totals,
        table_e: table_e_row(solution, catalog, scenarios),
    })
}

impl CostReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes labelled Table-E rows as CSV.
pub fn write_table_e_csv<W: io::Write>(out: W, rows: &[(String, TableERow)]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label"];
    header.extend_from_slice(&TableERow::HEADER);
    w.write_record(&header)?;
    for (label, row) in rows {
        let mut rec = vec![label.clone()];
        rec.extend(row.values().iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
