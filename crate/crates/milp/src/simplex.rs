//! Bounded-variable revised simplex on `A x - s = 0`, `l <= (x, s) <= u`.
//!
//! Every row carries a logical column `-e_i` whose bounds are the row bounds,
//! so the all-logical basis is always available as a starting point.
//!
//! When the starting basis is dual feasible (always the case for the slack
//! basis when costs are non-negative on lower-bounded columns, and for warm
//! starts after bound changes) a dual simplex with steepest-edge pricing runs
//! first on slightly perturbed costs. The primal simplex then finishes with the
//! true costs; it also serves as the fallback, with a composite phase 1 that
//! minimises the sum of basic bound violations and perturbed bounds against
//! degeneracy.

use crate::lu::LuFactors;

const NONE: usize = usize::MAX;
const REFACTOR_EVERY: usize = 30;
const HARRIS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_AFTER: usize = 1000;
const PERTURB: f64 = 1e-6;
const COST_PERTURB: f64 = 1e-7;
/// Cleanup after the dual stops once this many primal iterations pass
/// without a relative objective gain above `STALL_GAIN`.
const STALL_WINDOW: usize = 1000;
const STALL_GAIN: f64 = 1e-11;

/// Problem in computational form. Columns `0..n` are structural, `n..n+m`
/// are the row logicals.
#[derive(Clone, Debug, Default)]
pub(crate) struct StdLp {
    pub n: usize,
    pub m: usize,
    pub col_start: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub col_val: Vec<f64>,
    pub row_start: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub row_val: Vec<f64>,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl StdLp {
    pub(crate) fn from_columns(
        cols: &[Vec<(usize, f64)>],
        m: usize,
        cost: Vec<f64>,
        col_lo: &[f64],
        col_hi: &[f64],
        row_lo: &[f64],
        row_hi: &[f64],
    ) -> StdLp {
        let n = cols.len();
        let mut col_start = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut col_val = Vec::new();
        col_start.push(0);
        for col in cols {
            for &(i, a) in col {
                col_idx.push(i);
                col_val.push(a);
            }
            col_start.push(col_idx.len());
        }
        let mut row_start = vec![0usize; m + 1];
        for &i in &col_idx {
            row_start[i + 1] += 1;
        }
        for i in 0..m {
            row_start[i + 1] += row_start[i];
        }
        let mut fill = row_start.clone();
        let mut row_idx = vec![0usize; col_idx.len()];
        let mut row_val = vec![0.0; col_idx.len()];
        for j in 0..n {
            for e in col_start[j]..col_start[j + 1] {
                let slot = &mut fill[col_idx[e]];
                row_idx[*slot] = j;
                row_val[*slot] = col_val[e];
                *slot += 1;
            }
        }
        let mut lower = col_lo.to_vec();
        lower.extend_from_slice(row_lo);
        let mut upper = col_hi.to_vec();
        upper.extend_from_slice(row_hi);
        StdLp {
            n,
            m,
            col_start,
            col_idx,
            col_val,
            row_start,
            row_idx,
            row_val,
            cost,
            lower,
            upper,
        }
    }

    fn column(&self, j: usize, buf: &mut Vec<(usize, f64)>) {
        if j < self.n {
            for e in self.col_start[j]..self.col_start[j + 1] {
                buf.push((self.col_idx[e], self.col_val[e]));
            }
        } else {
            buf.push((j - self.n, -1.0));
        }
    }

    #[inline]
    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let mut s = 0.0;
            for e in self.col_start[j]..self.col_start[j + 1] {
                s += self.col_val[e] * y[self.col_idx[e]];
            }
            s
        } else {
            -y[j - self.n]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// Basis description reusable as a warm start.
#[derive(Clone, Debug)]
pub(crate) struct Basis {
    pub status: Vec<VarStatus>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct SimplexResult {
    pub outcome: Outcome,
    /// Values of all `n + m` columns.
    pub x: Vec<f64>,
    /// Row duals.
    pub y: Vec<f64>,
    pub iterations: usize,
    pub basis: Basis,
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

struct Solver<'a> {
    lp: &'a StdLp,
    lower: Vec<f64>,
    upper: Vec<f64>,
    opts: SimplexOptions,
    /// Costs of all `n + m` columns in use (possibly perturbed).
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<VarStatus>,
    basic: Vec<usize>,
    lu: LuFactors,
    etas: Vec<Eta>,
    iterations: usize,
    // scratch
    work_row: Vec<f64>,
    work_pos: Vec<f64>,
    cb: Vec<f64>,
    y: Vec<f64>,
    col_buf: Vec<(usize, f64)>,
}

/// Solves `lp`, optionally under replacement column bounds `(lower, upper)`.
pub(crate) fn solve(
    lp: &StdLp,
    bounds: Option<(&[f64], &[f64])>,
    opts: SimplexOptions,
    warm: Option<&Basis>,
) -> SimplexResult {
    let total = lp.n + lp.m;
    let (lower, upper) = bounds.unwrap_or((&lp.lower, &lp.upper));
    let mut status = match warm {
        Some(b) if b.status.len() == total => b.status.clone(),
        _ => {
            let mut s = vec![VarStatus::AtLower; total];
            for v in s.iter_mut().skip(lp.n) {
                *v = VarStatus::Basic;
            }
            s
        }
    };
    // Nonbasic statuses must point at finite bounds.
    for j in 0..total {
        status[j] = match status[j] {
            VarStatus::Basic => VarStatus::Basic,
            s => nonbasic_status(lower[j], upper[j], s),
        };
    }
    let mut basic: Vec<usize> = (0..total).filter(|&j| status[j] == VarStatus::Basic).collect();
    if basic.len() != lp.m {
        // Inconsistent warm start: fall back to the logical basis.
        for j in 0..total {
            status[j] = if j >= lp.n {
                VarStatus::Basic
            } else {
                nonbasic_status(lower[j], upper[j], VarStatus::AtLower)
            };
        }
        basic = (lp.n..total).collect();
    }
    let true_cost: Vec<f64> = (0..total).map(|j| if j < lp.n { lp.cost[j] } else { 0.0 }).collect();
    let mut solver = Solver {
        lp,
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        opts,
        cost: perturbed_costs(&true_cost, &status),
        x: vec![0.0; total],
        status,
        basic,
        lu: LuFactors::default(),
        etas: Vec::new(),
        iterations: 0,
        work_row: vec![0.0; lp.m],
        work_pos: vec![0.0; lp.m],
        cb: vec![0.0; lp.m],
        y: vec![0.0; lp.m],
        col_buf: Vec::new(),
    };
    for j in 0..total {
        if solver.status[j] != VarStatus::Basic {
            solver.x[j] = solver.nonbasic_value(j);
        }
    }
    let dual = solver.run_dual();
    solver.cost = true_cost;
    let outcome = match dual {
        Some(Outcome::Optimal) => solver.run(true),
        Some(other) => other,
        None => {
            // Primal from the current basis on widened bounds, then clean up.
            let (plo, phi) = perturbed(lower, upper);
            solver.lower = plo;
            solver.upper = phi;
            solver.reset_nonbasic_values();
            let first = solver.run(false);
            solver.lower = lower.to_vec();
            solver.upper = upper.to_vec();
            solver.reset_nonbasic_values();
            if first == Outcome::IterationLimit {
                first
            } else {
                solver.run(false)
            }
        }
    };
    let y = solver.duals();
    SimplexResult {
        outcome,
        x: solver.x,
        y,
        iterations: solver.iterations,
        basis: Basis { status: solver.status },
    }
}

/// Nudges costs away from ties: up for columns resting at a lower bound (or
/// basic), down for those at an upper bound. Free columns are left alone.
fn perturbed_costs(cost: &[f64], status: &[VarStatus]) -> Vec<f64> {
    let scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
    cost.iter()
        .zip(status)
        .enumerate()
        .map(|(j, (&c, &st))| {
            let d = COST_PERTURB * (1.0 + pseudo_random(j)) * (c.abs() + 1e-3 * scale);
            match st {
                VarStatus::AtUpper => c - d,
                VarStatus::Zero => c,
                _ => c + d,
            }
        })
        .collect()
}

fn pseudo_random(j: usize) -> f64 {
    let h = (j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Widens every non-fixed finite bound by a small pseudo-random amount so
/// that degenerate vertices split apart.
fn perturbed(lower: &[f64], upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    for j in 0..lo.len() {
        if lo[j] == hi[j] {
            continue;
        }
        let d = PERTURB * (1.0 + pseudo_random(j));
        if lo[j].is_finite() {
            lo[j] -= d * (1.0 + lo[j].abs());
        }
        if hi[j].is_finite() {
            hi[j] += d * (1.0 + hi[j].abs());
        }
    }
    (lo, hi)
}

fn nonbasic_status(lo: f64, hi: f64, preferred: VarStatus) -> VarStatus {
    match preferred {
        VarStatus::AtUpper if hi.is_finite() => VarStatus::AtUpper,
        _ if lo.is_finite() => VarStatus::AtLower,
        _ if hi.is_finite() => VarStatus::AtUpper,
        _ => VarStatus::Zero,
    }
}

impl<'a> Solver<'a> {
    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            VarStatus::Zero => 0.0,
            VarStatus::Basic => self.x[j],
        }
    }

    fn refactor(&mut self) {
        let lp = self.lp;
        let basic = &self.basic;
        let (lu, replacements) = LuFactors::factorize(lp.m, |pos, buf| lp.column(basic[pos], buf));
        for (pos, row) in replacements {
            let old = self.basic[pos];
            let logical = lp.n + row;
            self.status[old] = nonbasic_status(
                self.lower[old],
                self.upper[old],
                nearest_bound(self.lower[old], self.upper[old], self.x[old]),
            );
            self.x[old] = self.nonbasic_value(old);
            self.basic[pos] = logical;
            self.status[logical] = VarStatus::Basic;
        }
        self.lu = lu;
        self.etas.clear();
        self.recompute_basic_values();
    }

    fn recompute_basic_values(&mut self) {
        let lp = self.lp;
        let rhs = &mut self.work_row;
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..lp.n {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                for e in lp.col_start[j]..lp.col_start[j + 1] {
                    rhs[lp.col_idx[e]] -= lp.col_val[e] * xj;
                }
            }
        }
        for i in 0..lp.m {
            let j = lp.n + i;
            if self.status[j] != VarStatus::Basic {
                rhs[i] += self.x[j];
            }
        }
        let mut out = std::mem::take(&mut self.work_pos);
        self.ftran_into(&mut out);
        for (pos, &j) in self.basic.iter().enumerate() {
            self.x[j] = out[pos];
        }
        self.work_pos = out;
    }

    /// FTRAN of the vector currently held in `work_row`; result by position.
    fn ftran_into(&mut self, out: &mut [f64]) {
        self.lu.ftran(&mut self.work_row, out);
        for eta in &self.etas {
            let v = out[eta.pos] / eta.pivot;
            out[eta.pos] = v;
            if v != 0.0 {
                for &(p, a) in &eta.entries {
                    out[p] -= a * v;
                }
            }
        }
    }

    /// BTRAN of `cb` (by position) into `y` (by row). Clobbers `cb`.
    fn btran(&mut self) {
        for eta in self.etas.iter().rev() {
            let mut s = self.cb[eta.pos];
            for &(p, a) in &eta.entries {
                s -= a * self.cb[p];
            }
            self.cb[eta.pos] = s / eta.pivot;
        }
        self.y.iter_mut().for_each(|v| *v = 0.0);
        self.lu.btran(&self.cb, &mut self.y);
    }

    fn duals(&mut self) -> Vec<f64> {
        if self.lp.m == 0 {
            return Vec::new();
        }
        for p in 0..self.lp.m {
            self.cb[p] = self.cost[self.basic[p]];
        }
        self.btran();
        self.y.clone()
    }

    /// Fills `cb` with phase costs; returns true when phase 1 is needed.
    fn load_costs(&mut self) -> bool {
        let tol = self.opts.feas_tol;
        let mut infeasible = false;
        for p in 0..self.lp.m {
            let j = self.basic[p];
            let v = self.x[j];
            let c = if v < self.lower[j] - tol {
                -1.0
            } else if v > self.upper[j] + tol {
                1.0
            } else {
                0.0
            };
            if c != 0.0 {
                infeasible = true;
            }
            self.cb[p] = c;
        }
        if !infeasible {
            for p in 0..self.lp.m {
                self.cb[p] = self.cost[self.basic[p]];
            }
        }
        infeasible
    }

    fn reset_nonbasic_values(&mut self) {
        for j in 0..self.x.len() {
            if self.status[j] != VarStatus::Basic {
                self.status[j] = nonbasic_status(self.lower[j], self.upper[j], self.status[j]);
                self.x[j] = self.nonbasic_value(j);
            }
        }
    }

    /// Reduced costs of all columns under the current basis and `self.cost`.
    fn reduced_costs(&mut self, d: &mut [f64]) {
        for p in 0..self.lp.m {
            self.cb[p] = self.cost[self.basic[p]];
        }
        self.btran();
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = if self.status[j] == VarStatus::Basic {
                0.0
            } else {
                self.cost[j] - self.lp.dot(j, &self.y)
            };
        }
    }

    /// Moves boxed nonbasic columns to the bound their reduced cost favours;
    /// columns that cannot move get their cost shifted so the reduced cost is
    /// zero.
    fn restore_dual_feasibility(&mut self, d: &mut [f64]) {
        let tol = self.opts.opt_tol;
        let mut flipped = false;
        for j in 0..d.len() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let dj = d[j];
            if lo == hi {
                continue;
            }
            let wanted = match self.status[j] {
                VarStatus::Basic => continue,
                VarStatus::AtLower if dj < -tol => VarStatus::AtUpper,
                VarStatus::AtUpper if dj > tol => VarStatus::AtLower,
                VarStatus::Zero if dj.abs() > tol => VarStatus::Zero,
                _ => continue,
            };
            let target = match wanted {
                VarStatus::AtUpper => hi,
                VarStatus::AtLower => lo,
                _ => f64::NAN,
            };
            if target.is_finite() {
                self.status[j] = wanted;
                self.x[j] = target;
                flipped = true;
            } else {
                self.cost[j] -= dj;
                d[j] = 0.0;
            }
        }
        if flipped {
            self.recompute_basic_values();
        }
    }

    /// Dual simplex with dual steepest-edge pricing. `None` means the basis
    /// is (or became) dual infeasible and the primal method should take over.
    fn run_dual(&mut self) -> Option<Outcome> {
        let m = self.lp.m;
        let n = self.lp.n;
        let total = n + m;
        if m == 0 {
            return None;
        }
        self.refactor();
        let mut d = vec![0.0; total];
        self.reduced_costs(&mut d);
        self.restore_dual_feasibility(&mut d);
        let tol_p = self.opts.feas_tol;
        let tol_d = self.opts.opt_tol;
        let mut weights = vec![1.0; m];
        let mut row = vec![0.0; total];
        let mut in_row = vec![false; total];
        let mut touched: Vec<usize> = Vec::new();
        let mut rho = vec![0.0; m];
        let mut tau = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            if self.iterations >= self.opts.max_iter {
                return Some(Outcome::IterationLimit);
            }
            // Leaving row: largest squared infeasibility relative to its weight.
            let mut r = NONE;
            let mut best = 0.0;
            for p in 0..m {
                let j = self.basic[p];
                let v = self.x[j];
                let infeas = if v < self.lower[j] - tol_p {
                    self.lower[j] - v
                } else if v > self.upper[j] + tol_p {
                    v - self.upper[j]
                } else {
                    continue;
                };
                let score = infeas * infeas / weights[p];
                if score > best {
                    best = score;
                    r = p;
                }
            }
            if r == NONE {
                return Some(Outcome::Optimal);
            }
            let leaving = self.basic[r];
            let to_lower = self.x[leaving] < self.lower[leaving];
            let delta = if to_lower {
                self.x[leaving] - self.lower[leaving]
            } else {
                self.x[leaving] - self.upper[leaving]
            };

            // Row r of the inverse, then of the tableau.
            self.cb.iter_mut().for_each(|v| *v = 0.0);
            self.cb[r] = 1.0;
            self.btran();
            rho.copy_from_slice(&self.y);
            for &j in &touched {
                row[j] = 0.0;
                in_row[j] = false;
            }
            touched.clear();
            for i in 0..m {
                let ri = rho[i];
                if ri == 0.0 {
                    continue;
                }
                for e in self.lp.row_start[i]..self.lp.row_start[i + 1] {
                    let j = self.lp.row_idx[e];
                    row[j] += ri * self.lp.row_val[e];
                    if !in_row[j] {
                        in_row[j] = true;
                        touched.push(j);
                    }
                }
                row[n + i] = -ri;
                in_row[n + i] = true;
                touched.push(n + i);
            }

            // Ratio test (two-pass, Harris).
            let sign = if to_lower { -1.0 } else { 1.0 };
            let slack_of = |st: VarStatus, dj: f64| match st {
                VarStatus::AtLower => dj,
                VarStatus::AtUpper => -dj,
                _ => dj.abs(),
            };
            let mut theta_max = f64::INFINITY;
            for &j in &touched {
                let st = self.status[j];
                let a = sign * row[j];
                if st == VarStatus::Basic || a.abs() < PIVOT_TOL || self.lower[j] == self.upper[j] {
                    continue;
                }
                let eligible = match st {
                    VarStatus::AtLower => a > 0.0,
                    VarStatus::AtUpper => a < 0.0,
                    _ => true,
                };
                if eligible {
                    let t = (slack_of(st, d[j]).max(0.0) + tol_d) / a.abs();
                    theta_max = theta_max.min(t);
                }
            }
            if theta_max.is_infinite() {
                return Some(Outcome::Infeasible);
            }
            let mut enter = NONE;
            let mut best_a = 0.0;
            for &j in &touched {
                let st = self.status[j];
                let a = sign * row[j];
                if st == VarStatus::Basic || a.abs() < PIVOT_TOL || self.lower[j] == self.upper[j] {
                    continue;
                }
                let eligible = match st {
                    VarStatus::AtLower => a > 0.0,
                    VarStatus::AtUpper => a < 0.0,
                    _ => true,
                };
                if eligible && slack_of(st, d[j]).max(0.0) / a.abs() <= theta_max && a.abs() > best_a {
                    best_a = a.abs();
                    enter = j;
                }
            }
            let theta_d = if slack_of(self.status[enter], d[enter]) <= 0.0 {
                0.0
            } else {
                d[enter] / row[enter]
            };

            // Entering column and the inverse applied to rho.
            self.work_row.iter_mut().for_each(|v| *v = 0.0);
            self.col_buf.clear();
            self.lp.column(enter, &mut self.col_buf);
            for &(i, a) in &self.col_buf {
                self.work_row[i] = a;
            }
            self.ftran_into(&mut alpha);
            let pivot = alpha[r];
            if (pivot - row[enter]).abs() > 1e-6 * (1.0 + pivot.abs()) || pivot.abs() < PIVOT_TOL {
                // Factors have drifted; rebuild and start the iteration over.
                if self.etas.is_empty() {
                    return None;
                }
                self.refactor();
                self.reduced_costs(&mut d);
                self.restore_dual_feasibility(&mut d);
                continue;
            }
            self.work_row.copy_from_slice(&rho);
            self.ftran_into(&mut tau);

            // Dual update.
            if theta_d != 0.0 {
                for &j in &touched {
                    if self.status[j] != VarStatus::Basic && row[j] != 0.0 {
                        d[j] -= theta_d * row[j];
                    }
                }
            }
            d[leaving] = -theta_d;
            d[enter] = 0.0;

            // Primal update.
            let theta_p = delta / pivot;
            for p in 0..m {
                let a = alpha[p];
                if a != 0.0 {
                    self.x[self.basic[p]] -= theta_p * a;
                }
            }
            self.x[enter] += theta_p;

            // Steepest-edge weights.
            let w_r = rho.iter().map(|v| v * v).sum::<f64>();
            for p in 0..m {
                let a = alpha[p];
                if p != r && a != 0.0 {
                    let k = a / pivot;
                    weights[p] = (weights[p] - 2.0 * k * tau[p] + k * k * w_r).max(1e-8);
                }
            }
            weights[r] = (w_r / (pivot * pivot)).max(1e-8);

            // Basis change.
            self.status[leaving] = if to_lower || self.lower[leaving] == self.upper[leaving] {
                VarStatus::AtLower
            } else {
                VarStatus::AtUpper
            };
            self.x[leaving] = self.nonbasic_value(leaving);
            self.status[enter] = VarStatus::Basic;
            self.basic[r] = enter;
            let entries: Vec<(usize, f64)> = alpha
                .iter()
                .enumerate()
                .filter(|&(p, &a)| p != r && a != 0.0)
                .map(|(p, &a)| (p, a))
                .collect();
            self.etas.push(Eta { pos: r, pivot, entries });
            self.iterations += 1;
            if self.etas.len() >= REFACTOR_EVERY {
                let before = self.basic.clone();
                self.refactor();
                for p in 0..m {
                    if self.basic[p] != before[p] {
                        weights[p] = 1.0;
                    }
                }
                self.reduced_costs(&mut d);
                self.restore_dual_feasibility(&mut d);
            }
        }
    }

    /// Primal simplex. With `cleanup` the start is taken to be near optimal
    /// and the run ends once the objective stalls.
    fn run(&mut self, cleanup: bool) -> Outcome {
        let total = self.lp.n + self.lp.m;
        if self.lp.m == 0 {
            return self.run_without_rows();
        }
        self.refactor();
        let mut stall_ref = f64::INFINITY;
        let mut stall_since = self.iterations;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut rejected: Vec<usize> = Vec::new();
        loop {
            if self.iterations >= self.opts.max_iter {
                return Outcome::IterationLimit;
            }
            let phase1 = self.load_costs();
            self.btran();
            if cleanup && !phase1 && self.iterations >= stall_since + STALL_WINDOW {
                let obj: f64 = (0..total).map(|j| self.cost[j] * self.x[j]).sum();
                if obj > stall_ref - STALL_GAIN * stall_ref.abs().max(1.0) {
                    return Outcome::Optimal;
                }
                stall_ref = obj;
                stall_since = self.iterations;
            }

            // Pricing.
            let tol = self.opts.opt_tol;
            let mut enter = NONE;
            let mut enter_dir = 0.0;
            let mut best = 0.0;
            for j in 0..total {
                let st = self.status[j];
                if st == VarStatus::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let c = if phase1 { 0.0 } else { self.cost[j] };
                let d = c - self.lp.dot(j, &self.y);
                let dir = match st {
                    VarStatus::AtLower if d < -tol => 1.0,
                    VarStatus::AtUpper if d > tol => -1.0,
                    VarStatus::Zero if d.abs() > tol => -d.signum(),
                    _ => continue,
                };
                if !rejected.is_empty() && rejected.contains(&j) {
                    continue;
                }
                if bland {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    enter = j;
                    enter_dir = dir;
                }
            }

            if enter == NONE {
                if !self.etas.is_empty() || !rejected.is_empty() {
                    rejected.clear();
                    self.refactor();
                    continue;
                }
                return if phase1 { Outcome::Infeasible } else { Outcome::Optimal };
            }

            // Column of the entering variable in the current basis.
            self.work_row.iter_mut().for_each(|v| *v = 0.0);
            self.col_buf.clear();
            self.lp.column(enter, &mut self.col_buf);
            for &(i, a) in &self.col_buf {
                self.work_row[i] = a;
            }
            let mut alpha = std::mem::take(&mut self.work_pos);
            self.ftran_into(&mut alpha);

            // Ratio test (two-pass, Harris).
            let mut theta_max = f64::INFINITY;
            for p in 0..self.lp.m {
                let a = alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.basic[p];
                let rate = -enter_dir * a;
                if let Some(dist) = self.distance_to_bound(j, rate, phase1) {
                    let t = (dist + HARRIS_TOL) / rate.abs();
                    if t < theta_max {
                        theta_max = t;
                    }
                }
            }
            let range = self.upper[enter] - self.lower[enter];
            let mut leave = NONE;
            let mut theta;
            if range.is_finite() && range <= theta_max {
                theta = range;
            } else if theta_max.is_infinite() {
                if phase1 {
                    rejected.push(enter);
                    self.work_pos = alpha;
                    continue;
                }
                self.work_pos = alpha;
                return Outcome::Unbounded;
            } else {
                let mut best_alpha = 0.0;
                theta = 0.0;
                for p in 0..self.lp.m {
                    let a = alpha[p];
                    if a.abs() < PIVOT_TOL {
                        continue;
                    }
                    let j = self.basic[p];
                    let rate = -enter_dir * a;
                    if let Some(dist) = self.distance_to_bound(j, rate, phase1) {
                        let t = dist / rate.abs();
                        if t <= theta_max {
                            let better = if bland {
                                leave == NONE || j < self.basic[leave]
                            } else {
                                a.abs() > best_alpha
                            };
                            if better {
                                best_alpha = a.abs();
                                leave = p;
                                theta = t;
                            }
                        }
                    }
                }
                theta = theta.max(0.0);
            }

            let leave_status = (leave != NONE).then(|| {
                let out = self.basic[leave];
                let st = self.leaving_status(out, -enter_dir * alpha[leave], phase1);
                nonbasic_status(self.lower[out], self.upper[out], st)
            });

            // Update primal values.
            if theta != 0.0 {
                self.x[enter] += enter_dir * theta;
                for p in 0..self.lp.m {
                    let a = alpha[p];
                    if a != 0.0 {
                        let j = self.basic[p];
                        self.x[j] -= enter_dir * theta * a;
                    }
                }
            }
            self.iterations += 1;
            rejected.clear();
            if theta <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run > BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }

            if leave == NONE {
                // Bound flip.
                self.status[enter] = if enter_dir > 0.0 {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                self.x[enter] = self.nonbasic_value(enter);
                self.work_pos = alpha;
                continue;
            }

            let out = self.basic[leave];
            self.status[out] = leave_status.unwrap_or(VarStatus::AtLower);
            self.x[out] = self.nonbasic_value(out);
            self.status[enter] = VarStatus::Basic;
            self.basic[leave] = enter;
            let entries: Vec<(usize, f64)> = alpha
                .iter()
                .enumerate()
                .filter(|&(p, &a)| p != leave && a != 0.0)
                .map(|(p, &a)| (p, a))
                .collect();
            self.etas.push(Eta {
                pos: leave,
                pivot: alpha[leave],
                entries,
            });
            self.work_pos = alpha;
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactor();
            }
        }
    }

    /// Distance a basic variable may travel at `rate` (its change per unit
    /// step) before reaching its limiting bound; `None` when unlimited.
    fn distance_to_bound(&self, j: usize, rate: f64, phase1: bool) -> Option<f64> {
        let v = self.x[j];
        let lo = self.lower[j];
        let hi = self.upper[j];
        let tol = self.opts.feas_tol;
        if rate > 0.0 {
            if phase1 && v < lo - tol {
                Some(lo - v)
            } else if phase1 && v > hi + tol {
                None
            } else if hi.is_finite() {
                Some((hi - v).max(0.0))
            } else {
                None
            }
        } else if phase1 && v > hi + tol {
            Some(v - hi)
        } else if phase1 && v < lo - tol {
            None
        } else if lo.is_finite() {
            Some((v - lo).max(0.0))
        } else {
            None
        }
    }

    fn leaving_status(&self, j: usize, rate: f64, phase1: bool) -> VarStatus {
        let v = self.x[j];
        let lo = self.lower[j];
        let hi = self.upper[j];
        let tol = self.opts.feas_tol;
        let hits_upper = if rate > 0.0 {
            !(phase1 && v < lo - tol)
        } else {
            phase1 && v > hi + tol
        };
        if lo == hi {
            VarStatus::AtLower
        } else if hits_upper {
            VarStatus::AtUpper
        } else {
            VarStatus::AtLower
        }
    }

    fn run_without_rows(&mut self) -> Outcome {
        let lp = self.lp;
        for j in 0..lp.n {
            let c = lp.cost[j];
            if c > 0.0 {
                if self.lower[j].is_finite() {
                    self.status[j] = VarStatus::AtLower;
                } else {
                    return Outcome::Unbounded;
                }
            } else if c < 0.0 {
                if self.upper[j].is_finite() {
                    self.status[j] = VarStatus::AtUpper;
                } else {
                    return Outcome::Unbounded;
                }
            }
            self.x[j] = self.nonbasic_value(j);
        }
        Outcome::Optimal
    }
}

fn nearest_bound(lo: f64, hi: f64, v: f64) -> VarStatus {
    if hi.is_finite() && (!lo.is_finite() || (hi - v).abs() < (v - lo).abs()) {
        VarStatus::AtUpper
    } else {
        VarStatus::AtLower
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SimplexOptions {
        SimplexOptions {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            max_iter: 10_000,
        }
    }

    #[test]
    fn single_lower_bound_row() {
        // min x  s.t.  x >= 3
        let lp = StdLp::from_columns(
            &[vec![(0, 1.0)]],
            1,
            vec![1.0],
            &[0.0],
            &[f64::INFINITY],
            &[3.0],
            &[f64::INFINITY],
        );
        let r = solve(&lp, None, opts(), None);
        assert_eq!(r.outcome, Outcome::Optimal);
        assert!((r.x[0] - 3.0).abs() < 1e-12);
        assert!((r.y[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // x + y <= 1, x + y >= 2
        let lp = StdLp::from_columns(
            &[vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]],
            2,
            vec![0.0, 0.0],
            &[0.0, 0.0],
            &[f64::INFINITY; 2],
            &[f64::NEG_INFINITY, 2.0],
            &[1.0, f64::INFINITY],
        );
        assert_eq!(solve(&lp, None, opts(), None).outcome, Outcome::Infeasible);
        // min -x s.t. x - y <= 1
        let lp = StdLp::from_columns(
            &[vec![(0, 1.0)], vec![(0, -1.0)]],
            1,
            vec![-1.0, 0.0],
            &[0.0, 0.0],
            &[f64::INFINITY; 2],
            &[f64::NEG_INFINITY],
            &[1.0],
        );
        assert_eq!(solve(&lp, None, opts(), None).outcome, Outcome::Unbounded);
    }

    #[test]
    fn bound_flips_without_basis_change() {
        // min -x - y  s.t. x + y <= 5, 0 <= x, y <= 1
        let lp = StdLp::from_columns(
            &[vec![(0, 1.0)], vec![(0, 1.0)]],
            1,
            vec![-1.0, -1.0],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &[f64::NEG_INFINITY],
            &[5.0],
        );
        let r = solve(&lp, None, opts(), None);
        assert_eq!(r.outcome, Outcome::Optimal);
        assert_eq!(r.x[..2], [1.0, 1.0]);
    }
}
