//! Techno-economic parameters, the cost book and the catalog that bundles them.
//!
//! Units follow the field names: capacities in MW, MWh, t H2/day or t H2;
//! prices in dollars; rates per hour. Every type is plain data; use
//! [`validate_catalog`] to check the invariants after loading a catalog.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Hours in a (non-leap) year; leap days are dropped everywhere.
pub const HOURS_PER_YEAR: f64 = 8760.0;

pub const KNOWN_YEARS: [u16; 3] = [2030, 2040, 2050];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryParams {
    pub capex_per_mwh: f64,
    pub omf: f64,
    pub lifespan_yr: f64,
    pub self_discharge: f64,
    pub efficiency: f64,
    /// Maximum charge or discharge power as a fraction of energy capacity per hour.
    pub power_ratio: f64,
    pub soc_min: f64,
    pub soc_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvParams {
    pub capex_per_kw: f64,
    pub omf: f64,
    pub lifespan_yr: f64,
    /// Temperature coefficient of power, 1/°C.
    pub gamma: f64,
    pub noct_c: f64,
    pub t_ref_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NgccParams {
    pub capex_per_mw: f64,
    pub variable_cost: f64,
    pub min_load: f64,
    /// MMBtu of natural gas per MWh generated.
    pub fuel_rate: f64,
    /// t CO2 per MWh generated (after capture).
    pub co2_rate: f64,
    pub omf: f64,
    pub lifespan_yr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub price: f64,
    pub co2_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectrolyzerKind {
    Pem,
    Alkaline,
}

impl ElectrolyzerKind {
    pub const ALL: [ElectrolyzerKind; 2] = [ElectrolyzerKind::Pem, ElectrolyzerKind::Alkaline];

    pub fn as_str(self) -> &'static str {
        match self {
            ElectrolyzerKind::Pem => "pem",
            ElectrolyzerKind::Alkaline => "alkaline",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrolyzerParams {
    pub kind: ElectrolyzerKind,
    pub capex_per_kw: f64,
    pub omf: f64,
    pub lifespan_yr: f64,
    pub min_load: f64,
    /// MWh of electricity per t H2.
    pub specific_energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReformerKind {
    AtrCc,
    SmrCc,
    Smr,
}

impl ReformerKind {
    pub const ALL: [ReformerKind; 3] = [ReformerKind::AtrCc, ReformerKind::SmrCc, ReformerKind::Smr];

    pub fn as_str(self) -> &'static str {
        match self {
            ReformerKind::AtrCc => "atr_cc",
            ReformerKind::SmrCc => "smr_cc",
            ReformerKind::Smr => "smr",
        }
    }
}

/// One point of a reformer installation-cost curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Breakpoint {
    pub capacity_t_per_day: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReformerParams {
    pub kind: ReformerKind,
    pub cost_curve: Vec<Breakpoint>,
    pub omf: f64,
    pub lifespan_yr: f64,
    pub min_load: f64,
    /// Largest hour-to-hour change as a fraction of capacity.
    pub ramp_fraction: f64,
    /// MMBtu per t H2.
    pub ng_rate: f64,
    /// MWh per t H2.
    pub elec_rate: f64,
    /// t CO2 per t H2.
    pub co2_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TankParams {
    pub capex_per_t: f64,
    pub omf: f64,
    pub lifespan_yr: f64,
    pub leak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostBook {
    pub year: u16,
    /// $/MMBtu.
    pub ng_price: f64,
    /// $/t CO2.
    pub co2_tax: f64,
    pub interest: f64,
    pub grid: GridParams,
    pub converter_dc: f64,
    pub converter_ac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyCatalog {
    /// Free-form notes on where each number comes from.
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
    pub cost_book: CostBook,
    pub pv: PvParams,
    pub battery: BatteryParams,
    pub ngcc: NgccParams,
    pub pem: ElectrolyzerParams,
    pub alkaline: ElectrolyzerParams,
    pub atr_cc: ReformerParams,
    pub smr_cc: ReformerParams,
    pub smr: ReformerParams,
    pub tank: TankParams,
}

/// Capital recovery factor `r (1+r)^L / ((1+r)^L - 1)`.
pub fn crf(r: f64, lifespan_yr: f64) -> Result<f64, DomainError> {
    if !r.is_finite() || !lifespan_yr.is_finite() {
        return Err(DomainError::NonFinite("crf arguments"));
    }
    if r <= 0.0 || lifespan_yr < 1.0 {
        return Err(DomainError::CrfDomain { r, lifespan_yr });
    }
    // Written as r / (1 - (1+r)^-L) so long lifespans cannot overflow.
    Ok(r / -(-lifespan_yr * r.ln_1p()).exp_m1())
}

struct Table1Row {
    pv_per_kw: f64,
    battery_per_kwh: f64,
    alkaline_per_kw: f64,
    pem_per_kw: f64,
    co2_tax: f64,
}

fn table1(year: u16) -> Result<Table1Row, DomainError> {
    let row = match year {
        2030 => Table1Row {
            pv_per_kw: 751.0,
            battery_per_kwh: 224.0,
            alkaline_per_kw: 550.0,
            pem_per_kw: 789.0,
            co2_tax: 100.0,
        },
        2040 => Table1Row {
            pv_per_kw: 685.0,
            battery_per_kwh: 196.0,
            alkaline_per_kw: 413.0,
            pem_per_kw: 562.0,
            co2_tax: 150.0,
        },
        2050 => Table1Row {
            pv_per_kw: 618.0,
            battery_per_kwh: 168.0,
            alkaline_per_kw: 330.0,
            pem_per_kw: 437.0,
            co2_tax: 200.0,
        },
        _ => return Err(DomainError::UnknownYear(year)),
    };
    Ok(row)
}

/// Capacities (t H2/day) of the placeholder reformer cost curves.
const CURVE_CAPACITIES: [f64; 6] = [10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0];

/// Placeholder cost curve `a * X^b`, rounded to the nearest thousand dollars.
fn power_law_curve(a: f64, b: f64) -> Vec<Breakpoint> {
    CURVE_CAPACITIES
        .iter()
        .map(|&x| Breakpoint {
            capacity_t_per_day: x,
            cost: ((a * x.powf(b)) / 1e3).round() * 1e3,
        })
        .collect()
}

fn reformer(kind: ReformerKind) -> ReformerParams {
    let (curve, ng_rate, elec_rate, co2_rate) = match kind {
        ReformerKind::AtrCc => (power_law_curve(12.5e6, 0.55), 142.0, 3.6, 0.62),
        ReformerKind::SmrCc => (power_law_curve(1.45 * 4.0e6, 0.75), 171.0, 4.4, 1.98),
        ReformerKind::Smr => (power_law_curve(4.0e6, 0.75), 123.0, 0.96, 9.17),
    };
    ReformerParams {
        kind,
        cost_curve: curve,
        omf: 0.04,
        lifespan_yr: 25.0,
        min_load: 0.6,
        ramp_fraction: 0.2,
        ng_rate,
        elec_rate,
        co2_rate,
    }
}

impl TechnologyCatalog {
    /// Default parameters for 2030, 2040 or 2050.
    pub fn default_for_year(year: u16) -> Result<TechnologyCatalog, DomainError> {
        let t1 = table1(year)?;
        let mut provenance = BTreeMap::new();
        for (k, v) in [
            ("cost_book", "interest 7%, NG $3.5/MMBtu, CO2 tax per year trajectory, grid $227/MWh at 0.376 t/MWh, converters 98% DC/DC and 95% AC/DC"),
            ("pv", "capex per year trajectory; 35 yr, 2% O&M, gamma -0.0037/°C, NOCT 45 °C, reference 25 °C"),
            ("battery", "capex per year trajectory; 4-hour system, 10 yr, 2.5% O&M, 0.0083%/h self-discharge, 95% efficiency, SOC 15-95%"),
            ("ngcc", "3 M$/MW, $5.6/MWh variable, 60% minimum load, 7.15 MMBtu/MWh, 0.038 t CO2/MWh, 25 yr, 3% O&M"),
            ("electrolyzers", "capex per year trajectory; 10 yr, 2% O&M; PEM 5% minimum load at 48 MWh/t, alkaline 20% at 50 MWh/t"),
            ("reformers", "NG/electricity/CO2 rates per reformer; 25 yr, 4% O&M, 60% minimum load, 20%/h ramp"),
            ("reformer_cost_curves", "PLACEHOLDER: published only as a figure; power laws calibrated so SMR is cheapest below ~60 t/day and ATR+CC above ~300 t/day"),
            ("tank", "PLACEHOLDER capex 400 $/kg; 25 yr, 1% O&M, 0.0104%/h leak"),
        ] {
            provenance.insert(k.to_string(), v.to_string());
        }
        Ok(TechnologyCatalog {
            provenance,
            cost_book: CostBook {
                year,
                ng_price: 3.5,
                co2_tax: t1.co2_tax,
                interest: 0.07,
                grid: GridParams {
                    price: 227.0,
                    co2_rate: 0.376,
                },
                converter_dc: 0.98,
                converter_ac: 0.95,
            },
            pv: PvParams {
                capex_per_kw: t1.pv_per_kw,
                omf: 0.02,
                lifespan_yr: 35.0,
                gamma: -0.0037,
                noct_c: 45.0,
                t_ref_c: 25.0,
            },
            battery: BatteryParams {
                capex_per_mwh: t1.battery_per_kwh * 1e3,
                omf: 0.025,
                lifespan_yr: 10.0,
                self_discharge: 0.000083,
                efficiency: 0.95,
                power_ratio: 0.25,
                soc_min: 0.15,
                soc_max: 0.95,
            },
            ngcc: NgccParams {
                capex_per_mw: 3e6,
                variable_cost: 5.6,
                min_load: 0.6,
                fuel_rate: 7.15,
                co2_rate: 0.038,
                omf: 0.03,
                lifespan_yr: 25.0,
            },
            pem: ElectrolyzerParams {
                kind: ElectrolyzerKind::Pem,
                capex_per_kw: t1.pem_per_kw,
                omf: 0.02,
                lifespan_yr: 10.0,
                min_load: 0.05,
                specific_energy: 48.0,
            },
            alkaline: ElectrolyzerParams {
                kind: ElectrolyzerKind::Alkaline,
                capex_per_kw: t1.alkaline_per_kw,
                omf: 0.02,
                lifespan_yr: 10.0,
                min_load: 0.20,
                specific_energy: 50.0,
            },
            atr_cc: reformer(ReformerKind::AtrCc),
            smr_cc: reformer(ReformerKind::SmrCc),
            smr: reformer(ReformerKind::Smr),
            tank: TankParams {
                capex_per_t: 400e3,
                omf: 0.01,
                lifespan_yr: 25.0,
                leak: 0.000104,
            },
        })
    }

    pub fn electrolyzer(&self, kind: ElectrolyzerKind) -> &ElectrolyzerParams {
        match kind {
            ElectrolyzerKind::Pem => &self.pem,
            ElectrolyzerKind::Alkaline => &self.alkaline,
        }
    }

    pub fn reformer(&self, kind: ReformerKind) -> &ReformerParams {
        match kind {
            ReformerKind::AtrCc => &self.atr_cc,
            ReformerKind::SmrCc => &self.smr_cc,
            ReformerKind::Smr => &self.smr,
        }
    }

    pub fn from_json(text: &str) -> Result<TechnologyCatalog, DomainError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Pretty JSON with a trailing newline; stable across round trips.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("catalog serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<TechnologyCatalog, DomainError> {
        let text = fs::read_to_string(path).map_err(|source| DomainError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

/// A breached invariant: the offending field path and what was expected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, ok: bool, field: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.out.push(Violation {
                field: field.into(),
                message: message.into(),
            });
        }
    }

    fn fraction(&mut self, field: &str, v: f64) {
        self.check((0.0..1.0).contains(&v), field, format!("must lie in [0, 1), got {v}"));
    }

    fn positive(&mut self, field: &str, v: f64) {
        self.check(v > 0.0 && v.is_finite(), field, format!("must be positive, got {v}"));
    }

    fn non_negative(&mut self, field: &str, v: f64) {
        self.check(
            v >= 0.0 && v.is_finite(),
            field,
            format!("must be non-negative, got {v}"),
        );
    }

    fn lifespan(&mut self, field: &str, v: f64) {
        self.check(
            v >= 1.0 && v.is_finite(),
            field,
            format!("must be at least 1 year, got {v}"),
        );
    }
}

/// Every invariant breach in `catalog`; empty when the catalog is usable.
pub fn validate_catalog(catalog: &TechnologyCatalog) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    let cb = &catalog.cost_book;
    c.check(
        cb.interest > 0.0 && cb.interest < 1.0,
        "cost_book.interest",
        format!("must lie in (0, 1), got {}", cb.interest),
    );
    c.non_negative("cost_book.ng_price", cb.ng_price);
    c.non_negative("cost_book.co2_tax", cb.co2_tax);
    c.non_negative("cost_book.grid.price", cb.grid.price);
    c.non_negative("cost_book.grid.co2_rate", cb.grid.co2_rate);
    for (name, v) in [
        ("cost_book.converter_dc", cb.converter_dc),
        ("cost_book.converter_ac", cb.converter_ac),
    ] {
        c.check(
            v > 0.0 && v <= 1.0,
            name,
            format!("efficiency must lie in (0, 1], got {v}"),
        );
    }

    let pv = &catalog.pv;
    c.non_negative("pv.capex_per_kw", pv.capex_per_kw);
    c.non_negative("pv.omf", pv.omf);
    c.lifespan("pv.lifespan_yr", pv.lifespan_yr);
    c.check(
        pv.gamma < 0.0,
        "pv.gamma",
        format!("must be negative, got {}", pv.gamma),
    );
    c.check(
        pv.noct_c > 20.0,
        "pv.noct_c",
        format!("must exceed 20 °C, got {}", pv.noct_c),
    );

    let b = &catalog.battery;
    c.non_negative("battery.capex_per_mwh", b.capex_per_mwh);
    c.non_negative("battery.omf", b.omf);
    c.lifespan("battery.lifespan_yr", b.lifespan_yr);
    c.fraction("battery.self_discharge", b.self_discharge);
    c.check(
        b.efficiency > 0.0 && b.efficiency <= 1.0,
        "battery.efficiency",
        format!("must lie in (0, 1], got {}", b.efficiency),
    );
    c.check(
        b.power_ratio > 0.0 && b.power_ratio <= 1.0,
        "battery.power_ratio",
        format!("must lie in (0, 1], got {}", b.power_ratio),
    );
    c.check(
        b.soc_min >= 0.0 && b.soc_min < b.soc_max && b.soc_max <= 1.0,
        "battery.soc_min",
        format!("need 0 <= soc_min < soc_max <= 1, got {} and {}", b.soc_min, b.soc_max),
    );

    let n = &catalog.ngcc;
    c.non_negative("ngcc.capex_per_mw", n.capex_per_mw);
    c.non_negative("ngcc.variable_cost", n.variable_cost);
    c.check(
        (0.0..=1.0).contains(&n.min_load),
        "ngcc.min_load",
        format!("must lie in [0, 1], got {}", n.min_load),
    );
    c.positive("ngcc.fuel_rate", n.fuel_rate);
    c.non_negative("ngcc.co2_rate", n.co2_rate);
    c.non_negative("ngcc.omf", n.omf);
    c.lifespan("ngcc.lifespan_yr", n.lifespan_yr);

    for (name, e, kind) in [
        ("pem", &catalog.pem, ElectrolyzerKind::Pem),
        ("alkaline", &catalog.alkaline, ElectrolyzerKind::Alkaline),
    ] {
        c.check(
            e.kind == kind,
            format!("{name}.kind"),
            format!("must be {}", kind.as_str()),
        );
        c.non_negative(&format!("{name}.capex_per_kw"), e.capex_per_kw);
        c.non_negative(&format!("{name}.omf"), e.omf);
        c.lifespan(&format!("{name}.lifespan_yr"), e.lifespan_yr);
        c.fraction(&format!("{name}.min_load"), e.min_load);
        c.positive(&format!("{name}.specific_energy"), e.specific_energy);
    }

    for kind in ReformerKind::ALL {
        let r = catalog.reformer(kind);
        let name = kind.as_str();
        c.check(r.kind == kind, format!("{name}.kind"), format!("must be {name}"));
        c.non_negative(&format!("{name}.omf"), r.omf);
        c.lifespan(&format!("{name}.lifespan_yr"), r.lifespan_yr);
        c.check(
            (0.0..=1.0).contains(&r.min_load),
            format!("{name}.min_load"),
            format!("must lie in [0, 1], got {}", r.min_load),
        );
        c.check(
            r.ramp_fraction > 0.0 && r.ramp_fraction <= 1.0,
            format!("{name}.ramp_fraction"),
            format!("must lie in (0, 1], got {}", r.ramp_fraction),
        );
        c.positive(&format!("{name}.ng_rate"), r.ng_rate);
        c.positive(&format!("{name}.elec_rate"), r.elec_rate);
        c.positive(&format!("{name}.co2_rate"), r.co2_rate);
        let curve = &r.cost_curve;
        let field = format!("{name}.cost_curve");
        c.check(
            curve.len() >= 2,
            &field,
            format!("needs at least 2 breakpoints, got {}", curve.len()),
        );
        c.check(
            curve
                .iter()
                .all(|p| p.capacity_t_per_day > 0.0 && p.cost > 0.0 && p.cost.is_finite()),
            &field,
            "breakpoints must have positive capacity and cost",
        );
        let increasing = curve
            .windows(2)
            .all(|w| w[1].capacity_t_per_day > w[0].capacity_t_per_day && w[1].cost > w[0].cost);
        c.check(
            increasing,
            &field,
            "breakpoints must be strictly increasing in capacity and cost (monotonicity)",
        );
        let scale = curve
            .windows(2)
            .all(|w| w[1].cost / w[1].capacity_t_per_day <= w[0].cost / w[0].capacity_t_per_day * (1.0 + 1e-12));
        c.check(
            scale,
            &field,
            "per-unit cost must be non-increasing (economies of scale)",
        );
    }

    let t = &catalog.tank;
    c.non_negative("tank.capex_per_t", t.capex_per_t);
    c.non_negative("tank.omf", t.omf);
    c.lifespan("tank.lifespan_yr", t.lifespan_yr);
    c.fraction("tank.leak", t.leak);
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crf_one_year_is_one_plus_r() {
        assert!((crf(0.07, 1.0).unwrap() - 1.07).abs() < 1e-15);
    }

    #[test]
    fn crf_rejects_bad_input() {
        assert!(crf(f64::NAN, 10.0).is_err());
        assert!(crf(0.0, 10.0).is_err());
        assert!(crf(0.07, 0.5).is_err());
    }

    #[test]
    fn default_catalogs_are_valid() {
        for year in KNOWN_YEARS {
            let cat = TechnologyCatalog::default_for_year(year).unwrap();
            assert_eq!(validate_catalog(&cat), vec![]);
        }
        assert!(TechnologyCatalog::default_for_year(2035).is_err());
    }

    #[test]
    fn placeholder_curves_have_the_documented_crossovers() {
        let cat = TechnologyCatalog::default_for_year(2030).unwrap();
        let unit = |kind: ReformerKind, i: usize| {
            let p = cat.reformer(kind).cost_curve[i];
            p.cost / p.capacity_t_per_day
        };
        // 30 t/day: SMR cheapest; 1000 t/day: ATR+CC cheapest.
        assert!(unit(ReformerKind::Smr, 1) < unit(ReformerKind::AtrCc, 1));
        assert!(unit(ReformerKind::AtrCc, 4) < unit(ReformerKind::Smr, 4));
        assert!(unit(ReformerKind::Smr, 5) < unit(ReformerKind::SmrCc, 5));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let cat = TechnologyCatalog::default_for_year(2030).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&cat.to_json()).unwrap();
        value["pv"]["colour"] = serde_json::json!("blue");
        assert!(TechnologyCatalog::from_json(&value.to_string()).is_err());
    }
}
