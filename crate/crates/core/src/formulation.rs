//! Compiles a catalog and a scenario set into a two-stage stochastic MILP.
//!
//! First-stage columns are facility capacities plus the reformer cost-curve
//! segment weights and selectors; second-stage columns are the hourly
//! dispatch of every scenario. Storage levels and reformer ramps wrap
//! cyclically within each scenario. Reformer output is modelled in t H2/h
//! while reformer capacity is in t H2/day.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use h2chain_milp::{solve_mip, Census, MipOptions, MipSolution, MipStatus, ModelInstance, Row, Sense, Stage, Variable};
use serde::{Deserialize, Serialize};

use crate::domain::{crf, validate_catalog, ElectrolyzerKind, PvParams, ReformerKind, TechnologyCatalog};
use crate::error::FormulationError;
use crate::scenario::ScenarioSet;

/// Facilities and supplies that a restriction can switch off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tech {
    Pv,
    Battery,
    Ngcc,
    Grid,
    Pem,
    Alkaline,
    AtrCc,
    SmrCc,
    Smr,
    Tank,
}

impl Tech {
    pub const ALL: [Tech; 10] = [
        Tech::Pv,
        Tech::Battery,
        Tech::Ngcc,
        Tech::Grid,
        Tech::Pem,
        Tech::Alkaline,
        Tech::AtrCc,
        Tech::SmrCc,
        Tech::Smr,
        Tech::Tank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tech::Pv => "pv",
            Tech::Battery => "battery",
            Tech::Ngcc => "ngcc",
            Tech::Grid => "grid",
            Tech::Pem => "pem",
            Tech::Alkaline => "alkaline",
            Tech::AtrCc => "atr_cc",
            Tech::SmrCc => "smr_cc",
            Tech::Smr => "smr",
            Tech::Tank => "tank",
        }
    }

    fn of_electrolyzer(kind: ElectrolyzerKind) -> Tech {
        match kind {
            ElectrolyzerKind::Pem => Tech::Pem,
            ElectrolyzerKind::Alkaline => Tech::Alkaline,
        }
    }

    fn of_reformer(kind: ReformerKind) -> Tech {
        match kind {
            ReformerKind::AtrCc => Tech::AtrCc,
            ReformerKind::SmrCc => Tech::SmrCc,
            ReformerKind::Smr => Tech::Smr,
        }
    }
}

/// Technologies excluded from a run; their capacities and flows are fixed at zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restrictions {
    pub excluded: BTreeSet<Tech>,
}

impl Restrictions {
    pub fn none() -> Restrictions {
        Restrictions::default()
    }

    /// Everything outside `allowed` is excluded.
    pub fn only(allowed: &[Tech]) -> Restrictions {
        Restrictions {
            excluded: Tech::ALL.iter().copied().filter(|t| !allowed.contains(t)).collect(),
        }
    }

    /// One production route fed by one electricity supply, plus the tank.
    pub fn unique(tech: ProductionTech, source: PowerSource) -> Restrictions {
        let mut allowed = vec![tech.tech(), Tech::Tank];
        allowed.extend_from_slice(source.techs());
        Restrictions::only(&allowed)
    }

    pub fn without(mut self, tech: Tech) -> Restrictions {
        self.excluded.insert(tech);
        self
    }

    pub fn allows(&self, tech: Tech) -> bool {
        !self.excluded.contains(&tech)
    }
}

/// Hydrogen production routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductionTech {
    Pem,
    Alkaline,
    AtrCc,
    SmrCc,
    Smr,
}

impl ProductionTech {
    pub const ALL: [ProductionTech; 5] = [
        ProductionTech::Pem,
        ProductionTech::Alkaline,
        ProductionTech::AtrCc,
        ProductionTech::SmrCc,
        ProductionTech::Smr,
    ];

    pub fn as_str(self) -> &'static str {
        self.tech().as_str()
    }

    pub fn tech(self) -> Tech {
        match self {
            ProductionTech::Pem => Tech::Pem,
            ProductionTech::Alkaline => Tech::Alkaline,
            ProductionTech::AtrCc => Tech::AtrCc,
            ProductionTech::SmrCc => Tech::SmrCc,
            ProductionTech::Smr => Tech::Smr,
        }
    }
}

/// Electricity supplies. PV comes with its battery.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSource {
    Pv,
    Ngcc,
    Grid,
}

impl PowerSource {
    pub const ALL: [PowerSource; 3] = [PowerSource::Pv, PowerSource::Ngcc, PowerSource::Grid];

    pub fn as_str(self) -> &'static str {
        match self {
            PowerSource::Pv => "pv",
            PowerSource::Ngcc => "ngcc",
            PowerSource::Grid => "grid",
        }
    }

    fn techs(self) -> &'static [Tech] {
        match self {
            PowerSource::Pv => &[Tech::Pv, Tech::Battery],
            PowerSource::Ngcc => &[Tech::Ngcc],
            PowerSource::Grid => &[Tech::Grid],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CapexMode {
    /// Concave reformer cost curves through segment weights and binaries.
    #[default]
    Piecewise,
    /// Reformer capex proportional to capacity at the unit cost of the largest
    /// breakpoint; no binaries. Makes the model homogeneous in demand.
    Linear,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    pub capex: CapexMode,
}

/// First-stage capacity columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Capacity {
    Pv,
    Battery,
    Ngcc,
    Electrolyzer(ElectrolyzerKind),
    Reformer(ReformerKind),
    Tank,
}

impl Capacity {
    pub const ALL: [Capacity; 9] = [
        Capacity::Pv,
        Capacity::Battery,
        Capacity::Ngcc,
        Capacity::Electrolyzer(ElectrolyzerKind::Pem),
        Capacity::Electrolyzer(ElectrolyzerKind::Alkaline),
        Capacity::Reformer(ReformerKind::AtrCc),
        Capacity::Reformer(ReformerKind::SmrCc),
        Capacity::Reformer(ReformerKind::Smr),
        Capacity::Tank,
    ];

    fn index(self) -> usize {
        Capacity::ALL.iter().position(|&c| c == self).expect("listed")
    }

    fn tech(self) -> Tech {
        match self {
            Capacity::Pv => Tech::Pv,
            Capacity::Battery => Tech::Battery,
            Capacity::Ngcc => Tech::Ngcc,
            Capacity::Electrolyzer(k) => Tech::of_electrolyzer(k),
            Capacity::Reformer(k) => Tech::of_reformer(k),
            Capacity::Tank => Tech::Tank,
        }
    }
}

/// Second-stage quantities, one column per scenario and step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flow {
    /// Battery charge from the DC bus, MW.
    Ch,
    /// Battery discharge to the DC bus, MW.
    Dch,
    /// Battery energy, MWh.
    Ess,
    /// NGCC output, MW.
    Ngcc,
    /// Grid purchase, MW.
    Grid,
    /// DC to AC transfer, MW (DC side).
    D2a,
    /// AC to DC transfer, MW (AC side).
    A2d,
    /// PV curtailment, MW.
    Curtail,
    /// Electrolyzer power draw, MW.
    P2h(ElectrolyzerKind),
    /// Reformer production, t H2/h.
    Reform(ReformerKind),
    /// Tank level, t H2.
    Tank,
}

impl Flow {
    pub const ALL: [Flow; 14] = [
        Flow::Ch,
        Flow::Dch,
        Flow::Ess,
        Flow::Ngcc,
        Flow::Grid,
        Flow::D2a,
        Flow::A2d,
        Flow::Curtail,
        Flow::P2h(ElectrolyzerKind::Pem),
        Flow::P2h(ElectrolyzerKind::Alkaline),
        Flow::Reform(ReformerKind::AtrCc),
        Flow::Reform(ReformerKind::SmrCc),
        Flow::Reform(ReformerKind::Smr),
        Flow::Tank,
    ];

    pub const COUNT: usize = Flow::ALL.len();

    pub fn index(self) -> usize {
        match self {
            Flow::Ch => 0,
            Flow::Dch => 1,
            Flow::Ess => 2,
            Flow::Ngcc => 3,
            Flow::Grid => 4,
            Flow::D2a => 5,
            Flow::A2d => 6,
            Flow::Curtail => 7,
            Flow::P2h(ElectrolyzerKind::Pem) => 8,
            Flow::P2h(ElectrolyzerKind::Alkaline) => 9,
            Flow::Reform(ReformerKind::AtrCc) => 10,
            Flow::Reform(ReformerKind::SmrCc) => 11,
            Flow::Reform(ReformerKind::Smr) => 12,
            Flow::Tank => 13,
        }
    }

    pub fn name(self) -> String {
        match self {
            Flow::Ch => "ch".into(),
            Flow::Dch => "dch".into(),
            Flow::Ess => "ess".into(),
            Flow::Ngcc => "ngcc".into(),
            Flow::Grid => "mg".into(),
            Flow::D2a => "d2a".into(),
            Flow::A2d => "a2d".into(),
            Flow::Curtail => "out".into(),
            Flow::P2h(k) => format!("p2h_{}", k.as_str()),
            Flow::Reform(k) => format!("h_{}", k.as_str()),
            Flow::Tank => "ht".into(),
        }
    }

    fn tech(self) -> Option<Tech> {
        match self {
            Flow::Ch | Flow::Dch | Flow::Ess => Some(Tech::Battery),
            Flow::Ngcc => Some(Tech::Ngcc),
            Flow::Grid => Some(Tech::Grid),
            Flow::Curtail => Some(Tech::Pv),
            Flow::P2h(k) => Some(Tech::of_electrolyzer(k)),
            Flow::Reform(k) => Some(Tech::of_reformer(k)),
            Flow::Tank => Some(Tech::Tank),
            Flow::D2a | Flow::A2d => None,
        }
    }
}

/// Symbolic identity of a model column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKey {
    Capacity(Capacity),
    /// Weight of breakpoint `k` (1-based) on a reformer cost curve.
    Segment {
        reformer: ReformerKind,
        k: usize,
    },
    /// Selector binary of breakpoint `k` (1-based).
    Selector {
        reformer: ReformerKind,
        k: usize,
    },
    Dispatch {
        flow: Flow,
        scenario: usize,
        t: usize,
    },
}

impl VarKey {
    /// Canonical column name. Distinct keys always render differently.
    pub fn name(&self) -> String {
        match *self {
            VarKey::Capacity(c) => match c {
                Capacity::Pv => "X_P".into(),
                Capacity::Battery => "X_B".into(),
                Capacity::Ngcc => "X_NGCC".into(),
                Capacity::Electrolyzer(k) => format!("X_W_{}", k.as_str()),
                Capacity::Reformer(k) => format!("X_NR_{}", k.as_str()),
                Capacity::Tank => "X_HT".into(),
            },
            VarKey::Segment { reformer, k } => format!("x_{}_{k}", reformer.as_str()),
            VarKey::Selector { reformer, k } => format!("y_{}_{k}", reformer.as_str()),
            VarKey::Dispatch { flow, scenario, t } => format!("{}_s{scenario}_t{t}", flow.name()),
        }
    }
}

/// PV output per MW installed: `η_dc [1 + γ (T + GHI (NOCT-20)/800 - T_ref)] GHI/1000`,
/// never negative.
pub fn pv_output_coeff(pv: &PvParams, ghi: f64, temp_c: f64, eta_dc: f64) -> f64 {
    let cell = temp_c + ghi * (pv.noct_c - 20.0) / 800.0 - pv.t_ref_c;
    (eta_dc * (1.0 + pv.gamma * cell) * ghi / 1000.0).max(0.0)
}

/// Column positions needed to read a solution back.
#[derive(Clone, Debug, Default)]
pub struct Layout {
    capacity: [usize; 9],
    /// Per reformer, `(x_k, y_k)` column pairs; empty in linear capex mode.
    segments: [Vec<(usize, usize)>; 3],
    /// `[scenario][t][flow]`.
    dispatch: Vec<Vec<[usize; Flow::COUNT]>>,
}

impl Layout {
    pub fn capacity(&self, c: Capacity) -> usize {
        self.capacity[c.index()]
    }

    pub fn dispatch(&self, flow: Flow, scenario: usize, t: usize) -> usize {
        self.dispatch[scenario][t][flow.index()]
    }

    pub fn segments(&self, kind: ReformerKind) -> &[(usize, usize)] {
        &self.segments[reformer_slot(kind)]
    }
}

fn reformer_slot(kind: ReformerKind) -> usize {
    ReformerKind::ALL.iter().position(|&k| k == kind).expect("listed")
}

/// Size figures reported next to every solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub variables: usize,
    pub rows: usize,
    pub nonzeros: usize,
    pub binaries: usize,
    pub first_stage_variables: usize,
    pub scenarios: usize,
    pub horizon: usize,
}

/// A model under construction. The `add_*` methods append one constraint
/// block each and refuse to add the same block twice.
pub struct Builder<'a> {
    pub model: ModelInstance,
    catalog: &'a TechnologyCatalog,
    scenarios: &'a ScenarioSet,
    restrictions: Restrictions,
    options: BuildOptions,
    layout: Layout,
    added: HashSet<(&'static str, usize)>,
}

impl<'a> Builder<'a> {
    /// Creates the builder and every column (first stage, then each scenario's
    /// dispatch ordered by step and flow). Excluded technologies get zero bounds.
    pub fn new(
        catalog: &'a TechnologyCatalog,
        scenarios: &'a ScenarioSet,
        restrictions: Restrictions,
        options: BuildOptions,
    ) -> Result<Builder<'a>, FormulationError> {
        let violations = validate_catalog(catalog);
        if !violations.is_empty() {
            return Err(FormulationError::InvalidCatalog(violations));
        }
        if scenarios.scenarios.is_empty() {
            return Err(FormulationError::EmptyScenarioSet);
        }
        let horizon = scenarios.horizon();
        if horizon < 2 {
            return Err(FormulationError::HorizonTooShort(horizon));
        }
        for (s, sc) in scenarios.scenarios.iter().enumerate() {
            if sc.ghi.len() != horizon || sc.temp.len() != horizon || sc.demand.len() != horizon {
                return Err(FormulationError::LengthMismatch { scenario: s });
            }
        }

        let mut model = ModelInstance::new("h2chain");
        let mut layout = Layout::default();
        for c in Capacity::ALL {
            let upper = if restrictions.allows(c.tech()) {
                f64::INFINITY
            } else {
                0.0
            };
            layout.capacity[c.index()] =
                model.add_variable(Variable::continuous(VarKey::Capacity(c).name(), 0.0, upper, 0.0))?;
        }
        if options.capex == CapexMode::Piecewise {
            for kind in ReformerKind::ALL {
                let allowed = restrictions.allows(Tech::of_reformer(kind));
                let n = catalog.reformer(kind).cost_curve.len();
                for k in 1..=n {
                    let mut x = Variable::continuous(VarKey::Segment { reformer: kind, k }.name(), 0.0, 1.0, 0.0);
                    let mut y = Variable::binary(VarKey::Selector { reformer: kind, k }.name(), 0.0);
                    if !allowed {
                        x.upper = 0.0;
                        y.upper = 0.0;
                    }
                    let xi = model.add_variable(x)?;
                    let yi = model.add_variable(y)?;
                    layout.segments[reformer_slot(kind)].push((xi, yi));
                }
            }
        }
        for s in 0..scenarios.scenarios.len() {
            let mut per_t = Vec::with_capacity(horizon);
            for t in 0..horizon {
                let mut cols = [0usize; Flow::COUNT];
                for flow in Flow::ALL {
                    let upper = match flow.tech() {
                        Some(tech) if !restrictions.allows(tech) => 0.0,
                        _ => f64::INFINITY,
                    };
                    let var = Variable::continuous(VarKey::Dispatch { flow, scenario: s, t }.name(), 0.0, upper, 0.0)
                        .with_stage(Stage::Second { scenario: s });
                    cols[flow.index()] = model.add_variable(var)?;
                }
                per_t.push(cols);
            }
            layout.dispatch.push(per_t);
        }
        Ok(Builder {
            model,
            catalog,
            scenarios,
            restrictions,
            options,
            layout,
            added: HashSet::new(),
        })
    }

    fn horizon(&self) -> usize {
        self.scenarios.horizon()
    }

    fn cap(&self, c: Capacity) -> usize {
        self.layout.capacity(c)
    }

    fn d(&self, flow: Flow, s: usize, t: usize) -> usize {
        self.layout.dispatch(flow, s, t)
    }

    fn prev(&self, t: usize) -> usize {
        (t + self.horizon() - 1) % self.horizon()
    }

    fn mark(&mut self, block: &'static str, scenario: usize) -> Result<(), FormulationError> {
        if !self.added.insert((block, scenario)) {
            return Err(FormulationError::DuplicateBlock { block, scenario });
        }
        Ok(())
    }

    fn row(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<(), FormulationError> {
        self.model.add_row(Row::new(name, coeffs, sense, rhs))?;
        Ok(())
    }

    /// Charge/discharge power limits, energy recursion and state-of-charge band.
    pub fn add_battery(&mut self, s: usize) -> Result<(), FormulationError> {
        self.mark("battery", s)?;
        let b = &self.catalog.battery;
        let (ratio, sigma, soc_min, soc_max) = (b.power_ratio, b.self_discharge, b.soc_min, b.soc_max);
        let eta = self.catalog.cost_book.converter_dc * b.efficiency;
        let dt = self.scenarios.dt;
        let xb = self.cap(Capacity::Battery);
        for t in 0..self.horizon() {
            let (ch, dch, ess) = (self.d(Flow::Ch, s, t), self.d(Flow::Dch, s, t), self.d(Flow::Ess, s, t));
            let ess_prev = self.d(Flow::Ess, s, self.prev(t));
            self.row(
                format!("bat_ch_s{s}_t{t}"),
                vec![(ch, 1.0), (xb, -ratio)],
                Sense::Le,
                0.0,
            )?;
            self.row(
                format!("bat_dch_s{s}_t{t}"),
                vec![(dch, 1.0), (xb, -ratio)],
                Sense::Le,
                0.0,
            )?;
            self.row(
                format!("bat_ess_s{s}_t{t}"),
                vec![(ess, 1.0), (ess_prev, -(1.0 - sigma)), (ch, -eta * dt), (dch, dt / eta)],
                Sense::Eq,
                0.0,
            )?;
            self.row(
                format!("bat_soc_min_s{s}_t{t}"),
                vec![(ess, 1.0), (xb, -soc_min)],
                Sense::Ge,
                0.0,
            )?;
            self.row(
                format!("bat_soc_max_s{s}_t{t}"),
                vec![(ess, 1.0), (xb, -soc_max)],
                Sense::Le,
                0.0,
            )?;
        }
        Ok(())
    }

    pub fn add_ngcc(&mut self, s: usize) -> Result<(), FormulationError> {
        self.mark("ngcc", s)?;
        let min = self.catalog.ngcc.min_load;
        let x = self.cap(Capacity::Ngcc);
        for t in 0..self.horizon() {
            let g = self.d(Flow::Ngcc, s, t);
            self.row(format!("ngcc_min_s{s}_t{t}"), vec![(g, 1.0), (x, -min)], Sense::Ge, 0.0)?;
            self.row(format!("ngcc_max_s{s}_t{t}"), vec![(g, 1.0), (x, -1.0)], Sense::Le, 0.0)?;
        }
        Ok(())
    }

    /// Load band of one electrolyzer; its hydrogen enters the tank balance.
    pub fn add_electrolyzer(&mut self, kind: ElectrolyzerKind, s: usize) -> Result<(), FormulationError> {
        self.mark(
            if kind == ElectrolyzerKind::Pem {
                "pem"
            } else {
                "alkaline"
            },
            s,
        )?;
        let min = self.catalog.electrolyzer(kind).min_load;
        let x = self.cap(Capacity::Electrolyzer(kind));
        let tag = kind.as_str();
        for t in 0..self.horizon() {
            let p = self.d(Flow::P2h(kind), s, t);
            self.row(
                format!("{tag}_min_s{s}_t{t}"),
                vec![(p, 1.0), (x, -min)],
                Sense::Ge,
                0.0,
            )?;
            self.row(
                format!("{tag}_max_s{s}_t{t}"),
                vec![(p, 1.0), (x, -1.0)],
                Sense::Le,
                0.0,
            )?;
        }
        Ok(())
    }

    /// Load band and cyclic ramp limits of one reformer (capacity in t/day).
    pub fn add_reformer(&mut self, kind: ReformerKind, s: usize) -> Result<(), FormulationError> {
        self.mark(
            match kind {
                ReformerKind::AtrCc => "atr_cc",
                ReformerKind::SmrCc => "smr_cc",
                ReformerKind::Smr => "smr",
            },
            s,
        )?;
        let r = self.catalog.reformer(kind);
        let (min, ramp) = (r.min_load / 24.0, r.ramp_fraction / 24.0);
        let x = self.cap(Capacity::Reformer(kind));
        let tag = kind.as_str();
        for t in 0..self.horizon() {
            let h = self.d(Flow::Reform(kind), s, t);
            let h_prev = self.d(Flow::Reform(kind), s, self.prev(t));
            self.row(
                format!("{tag}_min_s{s}_t{t}"),
                vec![(h, 1.0), (x, -min)],
                Sense::Ge,
                0.0,
            )?;
            self.row(
                format!("{tag}_max_s{s}_t{t}"),
                vec![(h, 1.0), (x, -1.0 / 24.0)],
                Sense::Le,
                0.0,
            )?;
            self.row(
                format!("{tag}_up_s{s}_t{t}"),
                vec![(h, 1.0), (h_prev, -1.0), (x, -ramp)],
                Sense::Le,
                0.0,
            )?;
            self.row(
                format!("{tag}_down_s{s}_t{t}"),
                vec![(h, 1.0), (h_prev, -1.0), (x, ramp)],
                Sense::Ge,
                0.0,
            )?;
        }
        Ok(())
    }

    /// Segment weights and adjacency-restricted selectors for one reformer's
    /// cost curve, tied to its capacity column.
    pub fn add_piecewise_capex(&mut self, kind: ReformerKind) -> Result<(), FormulationError> {
        self.mark("piecewise", reformer_slot(kind))?;
        let curve = self.catalog.reformer(kind).cost_curve.clone();
        let segs = self.layout.segments(kind).to_vec();
        let tag = kind.as_str();
        let x_nr = self.cap(Capacity::Reformer(kind));
        self.row(
            format!("pw_sum_x_{tag}"),
            segs.iter().map(|&(x, _)| (x, 1.0)).collect(),
            Sense::Le,
            1.0,
        )?;
        for (k, &(x, y)) in segs.iter().enumerate() {
            self.row(
                format!("pw_link_{tag}_{}", k + 1),
                vec![(x, 1.0), (y, -1.0)],
                Sense::Le,
                0.0,
            )?;
        }
        self.row(
            format!("pw_sum_y_{tag}"),
            segs.iter().map(|&(_, y)| (y, 1.0)).collect(),
            Sense::Le,
            2.0,
        )?;
        for a in 0..segs.len() {
            for b in a + 2..segs.len() {
                self.row(
                    format!("pw_adj_{tag}_{}_{}", a + 1, b + 1),
                    vec![(segs[a].1, 1.0), (segs[b].1, 1.0)],
                    Sense::Le,
                    1.0,
                )?;
            }
        }
        let mut coeffs = vec![(x_nr, 1.0)];
        coeffs.extend(segs.iter().zip(&curve).map(|(&(x, _), p)| (x, -p.capacity_t_per_day)));
        self.row(format!("pw_capacity_{tag}"), coeffs, Sense::Eq, 0.0)
    }

    /// Cyclic tank balance (production minus demand, with leakage) and capacity.
    pub fn add_tank(&mut self, s: usize) -> Result<(), FormulationError> {
        self.mark("tank", s)?;
        let leak = self.catalog.tank.leak;
        let dt = self.scenarios.dt;
        let x = self.cap(Capacity::Tank);
        for t in 0..self.horizon() {
            let ht = self.d(Flow::Tank, s, t);
            let mut coeffs = vec![(ht, 1.0), (self.d(Flow::Tank, s, self.prev(t)), -(1.0 - leak))];
            for kind in ElectrolyzerKind::ALL {
                coeffs.push((
                    self.d(Flow::P2h(kind), s, t),
                    -dt / self.catalog.electrolyzer(kind).specific_energy,
                ));
            }
            for kind in ReformerKind::ALL {
                coeffs.push((self.d(Flow::Reform(kind), s, t), -dt));
            }
            let demand = self.scenarios.scenarios[s].demand[t];
            self.row(format!("tank_bal_s{s}_t{t}"), coeffs, Sense::Eq, -demand * dt)?;
            self.row(
                format!("tank_cap_s{s}_t{t}"),
                vec![(ht, 1.0), (x, -1.0)],
                Sense::Le,
                0.0,
            )?;
        }
        Ok(())
    }

    /// DC and AC bus power balances.
    pub fn add_bus_balances(&mut self, s: usize) -> Result<(), FormulationError> {
        self.mark("bus", s)?;
        let cb = &self.catalog.cost_book;
        let (eta_dc, eta_ac) = (cb.converter_dc, cb.converter_ac);
        let xp = self.cap(Capacity::Pv);
        for t in 0..self.horizon() {
            let sc = &self.scenarios.scenarios[s];
            let pv = pv_output_coeff(&self.catalog.pv, sc.ghi[t], sc.temp[t], eta_dc);
            let mut dc = vec![
                (xp, pv),
                (self.d(Flow::Ch, s, t), -1.0),
                (self.d(Flow::Dch, s, t), 1.0),
                (self.d(Flow::D2a, s, t), -1.0),
                (self.d(Flow::A2d, s, t), eta_ac),
                (self.d(Flow::Curtail, s, t), -1.0),
            ];
            for kind in ElectrolyzerKind::ALL {
                dc.push((self.d(Flow::P2h(kind), s, t), -1.0));
            }
            self.row(format!("bus_dc_s{s}_t{t}"), dc, Sense::Eq, 0.0)?;
            let mut ac = vec![
                (self.d(Flow::Ngcc, s, t), 1.0),
                (self.d(Flow::Grid, s, t), 1.0),
                (self.d(Flow::D2a, s, t), eta_ac),
                (self.d(Flow::A2d, s, t), -1.0),
            ];
            for kind in ReformerKind::ALL {
                ac.push((self.d(Flow::Reform(kind), s, t), -self.catalog.reformer(kind).elec_rate));
            }
            self.row(format!("bus_ac_s{s}_t{t}"), ac, Sense::Eq, 0.0)?;
        }
        Ok(())
    }

    /// Annualized capex and O&M on capacities (or segment weights), plus
    /// weighted, annualized fuel, emission, variable and grid costs on dispatch.
    pub fn set_objective(&mut self) -> Result<(), FormulationError> {
        self.mark("objective", 0)?;
        let cat = self.catalog;
        let cb = &cat.cost_book;
        let r = cb.interest;
        let ann = |omf: f64, life: f64| -> Result<f64, FormulationError> { Ok(crf(r, life)? + omf) };
        let costs = [
            (
                Capacity::Pv,
                ann(cat.pv.omf, cat.pv.lifespan_yr)? * cat.pv.capex_per_kw * 1e3,
            ),
            (
                Capacity::Battery,
                ann(cat.battery.omf, cat.battery.lifespan_yr)? * cat.battery.capex_per_mwh,
            ),
            (
                Capacity::Ngcc,
                ann(cat.ngcc.omf, cat.ngcc.lifespan_yr)? * cat.ngcc.capex_per_mw,
            ),
            (
                Capacity::Tank,
                ann(cat.tank.omf, cat.tank.lifespan_yr)? * cat.tank.capex_per_t,
            ),
        ];
        for (c, cost) in costs {
            self.model.set_cost(self.cap(c), cost);
        }
        for kind in ElectrolyzerKind::ALL {
            let e = cat.electrolyzer(kind);
            self.model.set_cost(
                self.cap(Capacity::Electrolyzer(kind)),
                ann(e.omf, e.lifespan_yr)? * e.capex_per_kw * 1e3,
            );
        }
        for kind in ReformerKind::ALL {
            let rp = cat.reformer(kind);
            let a = ann(rp.omf, rp.lifespan_yr)?;
            match self.options.capex {
                CapexMode::Piecewise => {
                    for (&(x, _), p) in self.layout.segments(kind).iter().zip(&rp.cost_curve) {
                        self.model.set_cost(x, a * p.cost);
                    }
                }
                CapexMode::Linear => {
                    let last = rp.cost_curve.last().expect("validated curve");
                    self.model.set_cost(
                        self.cap(Capacity::Reformer(kind)),
                        a * last.cost / last.capacity_t_per_day,
                    );
                }
            }
        }

        let ngcc = (cat.ngcc.fuel_rate * cb.ng_price) + (cat.ngcc.co2_rate * cb.co2_tax) + cat.ngcc.variable_cost;
        let grid = cb.grid.price + cb.grid.co2_rate * cb.co2_tax;
        let reform: Vec<f64> = ReformerKind::ALL
            .iter()
            .map(|&k| {
                let rp = cat.reformer(k);
                rp.ng_rate * cb.ng_price + rp.co2_rate * cb.co2_tax
            })
            .collect();
        for (s, sc) in self.scenarios.scenarios.iter().enumerate() {
            let w = sc.weight * self.scenarios.annualization * self.scenarios.dt;
            for t in 0..self.horizon() {
                self.model.set_cost(self.d(Flow::Ngcc, s, t), w * ngcc);
                self.model.set_cost(self.d(Flow::Grid, s, t), w * grid);
                for (i, &k) in ReformerKind::ALL.iter().enumerate() {
                    self.model.set_cost(self.d(Flow::Reform(k), s, t), w * reform[i]);
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> BuiltModel {
        BuiltModel {
            model: self.model,
            layout: self.layout,
            restrictions: self.restrictions,
            options: self.options,
            scenarios: self.scenarios.scenarios.len(),
            horizon: self.scenarios.horizon(),
        }
    }
}

/// The assembled model plus what is needed to interpret its solutions.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub model: ModelInstance,
    pub layout: Layout,
    pub restrictions: Restrictions,
    pub options: BuildOptions,
    pub scenarios: usize,
    pub horizon: usize,
}

/// Builds the full model with every block, in a fixed order.
pub fn build(
    catalog: &TechnologyCatalog,
    scenarios: &ScenarioSet,
    restrictions: &Restrictions,
    options: BuildOptions,
) -> Result<BuiltModel, FormulationError> {
    let mut b = Builder::new(catalog, scenarios, restrictions.clone(), options)?;
    if options.capex == CapexMode::Piecewise {
        for kind in ReformerKind::ALL {
            b.add_piecewise_capex(kind)?;
        }
    }
    for s in 0..scenarios.scenarios.len() {
        b.add_battery(s)?;
        b.add_ngcc(s)?;
        for kind in ElectrolyzerKind::ALL {
            b.add_electrolyzer(kind, s)?;
        }
        for kind in ReformerKind::ALL {
            b.add_reformer(kind, s)?;
        }
        b.add_tank(s)?;
        b.add_bus_balances(s)?;
    }
    b.set_objective()?;
    Ok(b.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReformerSegments {
    pub kind: ReformerKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// First-stage decisions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub pv_mw: f64,
    pub battery_mwh: f64,
    pub ngcc_mw: f64,
    pub pem_mw: f64,
    pub alkaline_mw: f64,
    pub atr_cc_t_per_day: f64,
    pub smr_cc_t_per_day: f64,
    pub smr_t_per_day: f64,
    pub tank_t: f64,
    pub segments: Vec<ReformerSegments>,
}

impl Design {
    pub fn reformer(&self, kind: ReformerKind) -> f64 {
        match kind {
            ReformerKind::AtrCc => self.atr_cc_t_per_day,
            ReformerKind::SmrCc => self.smr_cc_t_per_day,
            ReformerKind::Smr => self.smr_t_per_day,
        }
    }

    pub fn electrolyzer(&self, kind: ElectrolyzerKind) -> f64 {
        match kind {
            ElectrolyzerKind::Pem => self.pem_mw,
            ElectrolyzerKind::Alkaline => self.alkaline_mw,
        }
    }
}

/// Hourly trajectories of one scenario, indexed by [`Flow::index`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub label: String,
    pub flows: Vec<Vec<f64>>,
}

impl Dispatch {
    pub fn get(&self, flow: Flow) -> &[f64] {
        &self.flows[flow.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// $/yr.
    pub objective: f64,
    pub design: Design,
    pub dispatch: Vec<Dispatch>,
}

impl BuiltModel {
    pub fn stats(&self) -> ModelStats {
        let Census {
            variables,
            rows,
            nonzeros,
            binaries,
        } = self.model.census();
        ModelStats {
            variables,
            rows,
            nonzeros,
            binaries,
            first_stage_variables: self
                .model
                .variables()
                .iter()
                .filter(|v| v.stage == Stage::First)
                .count(),
            scenarios: self.scenarios,
            horizon: self.horizon,
        }
    }

    /// Reads a solution out of `primal`, snapping values to their bounds to
    /// drop round-off such as `-1e-15` capacities.
    pub fn extract(&self, primal: &[f64], objective: f64, scenarios: &ScenarioSet) -> Solution {
        let primal: Vec<f64> = primal
            .iter()
            .zip(self.model.variables())
            .map(|(&v, var)| v.clamp(var.lower, var.upper) + 0.0)
            .collect();
        let cap = |c: Capacity| primal[self.layout.capacity(c)];
        let segments = ReformerKind::ALL
            .iter()
            .filter(|&&k| !self.layout.segments(k).is_empty())
            .map(|&kind| ReformerSegments {
                kind,
                x: self.layout.segments(kind).iter().map(|&(x, _)| primal[x]).collect(),
                y: self.layout.segments(kind).iter().map(|&(_, y)| primal[y]).collect(),
            })
            .collect();
        let design = Design {
            pv_mw: cap(Capacity::Pv),
            battery_mwh: cap(Capacity::Battery),
            ngcc_mw: cap(Capacity::Ngcc),
            pem_mw: cap(Capacity::Electrolyzer(ElectrolyzerKind::Pem)),
            alkaline_mw: cap(Capacity::Electrolyzer(ElectrolyzerKind::Alkaline)),
            atr_cc_t_per_day: cap(Capacity::Reformer(ReformerKind::AtrCc)),
            smr_cc_t_per_day: cap(Capacity::Reformer(ReformerKind::SmrCc)),
            smr_t_per_day: cap(Capacity::Reformer(ReformerKind::Smr)),
            tank_t: cap(Capacity::Tank),
            segments,
        };
        let dispatch = (0..self.scenarios)
            .map(|s| Dispatch {
                label: scenarios.scenarios[s].label.clone(),
                flows: Flow::ALL
                    .iter()
                    .map(|&f| {
                        (0..self.horizon)
                            .map(|t| primal[self.layout.dispatch(f, s, t)])
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Solution {
            objective,
            design,
            dispatch,
        }
    }

    /// Solves with the embedded branch-and-bound; `solution` is present when
    /// an incumbent exists.
    pub fn solve(&self, scenarios: &ScenarioSet, opts: &MipOptions) -> SolveOutcome {
        let mip = solve_mip(&self.model, opts);
        let solution = mip
            .has_incumbent()
            .then(|| self.extract(&mip.incumbent.primal, mip.incumbent.objective, scenarios));
        SolveOutcome { mip, solution }
    }

    /// Human-readable row listing for debugging.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        self.model.write_listing(&mut out).expect("writing to a String");
        let _ = writeln!(out, "# {} scenarios x {} steps", self.scenarios, self.horizon);
        out
    }
}

pub struct SolveOutcome {
    pub mip: MipSolution,
    pub solution: Option<Solution>,
}

impl SolveOutcome {
    pub fn status(&self) -> MipStatus {
        self.mip.status
    }
}

/// Largest absolute residual of each balance family, recomputed from a
/// solution without looking at the model rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BalanceResiduals {
    pub dc_bus: f64,
    pub ac_bus: f64,
    pub battery: f64,
    pub tank: f64,
}

impl BalanceResiduals {
    pub fn max(&self) -> f64 {
        self.dc_bus.max(self.ac_bus).max(self.battery).max(self.tank)
    }
}

pub fn balance_residuals(
    catalog: &TechnologyCatalog,
    scenarios: &ScenarioSet,
    solution: &Solution,
) -> BalanceResiduals {
    let cb = &catalog.cost_book;
    let eta_b = cb.converter_dc * catalog.battery.efficiency;
    let dt = scenarios.dt;
    let mut r = BalanceResiduals::default();
    for (sc, d) in scenarios.scenarios.iter().zip(&solution.dispatch) {
        let n = sc.demand.len();
        for t in 0..n {
            let p = (t + n - 1) % n;
            let f = |flow: Flow| d.get(flow)[t];
            let pv = pv_output_coeff(&catalog.pv, sc.ghi[t], sc.temp[t], cb.converter_dc) * solution.design.pv_mw;
            let p2h: f64 = ElectrolyzerKind::ALL.iter().map(|&k| f(Flow::P2h(k))).sum();
            let dc = pv - f(Flow::Ch) + f(Flow::Dch) - f(Flow::D2a) + cb.converter_ac * f(Flow::A2d)
                - f(Flow::Curtail)
                - p2h;
            let reform_elec: f64 = ReformerKind::ALL
                .iter()
                .map(|&k| catalog.reformer(k).elec_rate * f(Flow::Reform(k)))
                .sum();
            let ac = f(Flow::Ngcc) + f(Flow::Grid) + cb.converter_ac * f(Flow::D2a) - f(Flow::A2d) - reform_elec;
            let ess = d.get(Flow::Ess);
            let bat = ess[t]
                - (1.0 - catalog.battery.self_discharge) * ess[p]
                - (eta_b * f(Flow::Ch) - f(Flow::Dch) / eta_b) * dt;
            let ht = d.get(Flow::Tank);
            let made: f64 = ElectrolyzerKind::ALL
                .iter()
                .map(|&k| f(Flow::P2h(k)) / catalog.electrolyzer(k).specific_energy)
                .sum::<f64>()
                + ReformerKind::ALL.iter().map(|&k| f(Flow::Reform(k))).sum::<f64>();
            let tank = ht[t] - (1.0 - catalog.tank.leak) * ht[p] - made * dt + sc.demand[t] * dt;
            r.dc_bus = r.dc_bus.max(dc.abs());
            r.ac_bus = r.ac_bus.max(ac.abs());
            r.battery = r.battery.max(bat.abs());
            r.tank = r.tank.max(tank.abs());
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pv_coefficient_at_standard_conditions() {
        let cat = TechnologyCatalog::default_for_year(2030).unwrap();
        assert_eq!(pv_output_coeff(&cat.pv, 0.0, 25.0, 0.98), 0.0);
        let v = pv_output_coeff(&cat.pv, 1000.0, 25.0, 0.98);
        assert!((v - 0.98 * (1.0 - 0.0037 * 31.25)).abs() < 1e-12);
        assert!(pv_output_coeff(&cat.pv, 800.0, 45.0, 0.98) < pv_output_coeff(&cat.pv, 800.0, 5.0, 0.98));
    }

    #[test]
    fn names_are_distinct_across_keys() {
        let mut seen = HashSet::new();
        for c in Capacity::ALL {
            assert!(seen.insert(VarKey::Capacity(c).name()));
        }
        for reformer in ReformerKind::ALL {
            for k in 1..=12 {
                assert!(seen.insert(VarKey::Segment { reformer, k }.name()));
                assert!(seen.insert(VarKey::Selector { reformer, k }.name()));
            }
        }
        for flow in Flow::ALL {
            for scenario in 0..12 {
                for t in 0..12 {
                    assert!(seen.insert(VarKey::Dispatch { flow, scenario, t }.name()));
                }
            }
        }
    }

    #[test]
    fn flow_indices_follow_listing_order() {
        for (i, f) in Flow::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
        }
    }
}
