//! LP entry point: presolve, scaling, simplex, unscaling and postsolve.

use crate::model::{ModelInstance, Sense};
use crate::presolve::{presolve, LpData, PresolveStatus, Presolved};
use crate::scaling::Scaling;
use crate::simplex::{self, Basis, Outcome, SimplexOptions, StdLp};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpOptions {
    /// Primal feasibility tolerance (rows and bounds).
    pub feas_tol: f64,
    /// Reduced-cost optimality tolerance.
    pub opt_tol: f64,
    pub max_iter: usize,
    pub presolve: bool,
    pub scaling: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            max_iter: 2_000_000,
            presolve: true,
            scaling: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// One value per model variable.
    pub primal: Vec<f64>,
    /// One value per model row (sign convention: `min`, `<=` rows have `dual <= 0`).
    pub dual: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn empty(status: LpStatus, model: &ModelInstance) -> LpSolution {
        LpSolution {
            status,
            objective: f64::NAN,
            primal: vec![0.0; model.num_variables()],
            dual: vec![0.0; model.num_rows()],
            iterations: 0,
        }
    }

    /// `c_j - a_j' y` for every column.
    pub fn reduced_costs(&self, model: &ModelInstance) -> Vec<f64> {
        let mut d: Vec<f64> = model.variables().iter().map(|v| v.cost).collect();
        for (row, &y) in model.rows().iter().zip(&self.dual) {
            for &(j, a) in &row.coeffs {
                d[j] -= a * y;
            }
        }
        d
    }

    /// Objective of the bounded dual at the reported duals. Infinite bounds
    /// paired with a nonzero reduced cost give `-inf`.
    pub fn dual_objective(&self, model: &ModelInstance) -> f64 {
        let d = self.reduced_costs(model);
        let mut obj = model.objective_offset;
        for (v, &dj) in model.variables().iter().zip(&d) {
            obj += bound_term(dj, v.lower, v.upper);
        }
        for (row, &y) in model.rows().iter().zip(&self.dual) {
            let (lo, hi) = row_bounds(row.sense, row.rhs);
            obj += bound_term(y, lo, hi);
        }
        obj
    }
}

fn bound_term(d: f64, lo: f64, hi: f64) -> f64 {
    if d > 0.0 {
        d * lo
    } else if d < 0.0 {
        d * hi
    } else {
        0.0
    }
}

pub(crate) fn row_bounds(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

/// Solves the LP relaxation of `model` (binary markers are ignored).
pub fn solve_lp(model: &ModelInstance, opts: &LpOptions) -> LpSolution {
    let engine = LpEngine::new(model, opts, &vec![false; model.num_variables()]);
    engine.solve(&[], None).0
}

/// Presolved and scaled LP that can be re-solved under changed column bounds.
pub(crate) struct LpEngine {
    data: LpData,
    pre: Presolved,
    scaling: Scaling,
    std: StdLp,
    opts: LpOptions,
}

impl LpEngine {
    pub(crate) fn new(model: &ModelInstance, opts: &LpOptions, protect: &[bool]) -> LpEngine {
        let mut row_lo = Vec::with_capacity(model.num_rows());
        let mut row_hi = Vec::with_capacity(model.num_rows());
        for row in model.rows() {
            let (lo, hi) = row_bounds(row.sense, row.rhs);
            row_lo.push(lo);
            row_hi.push(hi);
        }
        let data = LpData {
            cols: model.columns(),
            m: model.num_rows(),
            cost: model.variables().iter().map(|v| v.cost).collect(),
            col_lo: model.variables().iter().map(|v| v.lower).collect(),
            col_hi: model.variables().iter().map(|v| v.upper).collect(),
            row_lo,
            row_hi,
            offset: model.objective_offset,
        };
        let pre = presolve(&data, protect, opts.presolve);
        let red = &pre.reduced;
        let scaling = if opts.scaling {
            Scaling::compute(red)
        } else {
            Scaling::identity(red.n(), red.m)
        };
        let cols: Vec<Vec<(usize, f64)>> = red
            .cols
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c.iter()
                    .map(|&(i, a)| (i, a * scaling.row[i] * scaling.col[j]))
                    .collect()
            })
            .collect();
        let cost = red
            .cost
            .iter()
            .enumerate()
            .map(|(j, &c)| c * scaling.col[j] * scaling.obj)
            .collect();
        let col_lo: Vec<f64> = (0..red.n()).map(|j| red.col_lo[j] / scaling.col[j]).collect();
        let col_hi: Vec<f64> = (0..red.n()).map(|j| red.col_hi[j] / scaling.col[j]).collect();
        let row_lo: Vec<f64> = (0..red.m).map(|i| red.row_lo[i] * scaling.row[i]).collect();
        let row_hi: Vec<f64> = (0..red.m).map(|i| red.row_hi[i] * scaling.row[i]).collect();
        let std = StdLp::from_columns(&cols, red.m, cost, &col_lo, &col_hi, &row_lo, &row_hi);
        LpEngine {
            data,
            pre,
            scaling,
            std,
            opts: *opts,
        }
    }

    /// Solves with `overrides` = (original column, lower, upper) intersected
    /// with the presolved bounds.
    pub(crate) fn solve(&self, overrides: &[(usize, f64, f64)], warm: Option<&Basis>) -> (LpSolution, Option<Basis>) {
        let n = self.data.n();
        let m = self.data.m;
        let fail = |status| {
            (
                LpSolution {
                    status,
                    objective: f64::NAN,
                    primal: vec![0.0; n],
                    dual: vec![0.0; m],
                    iterations: 0,
                },
                None,
            )
        };
        match self.pre.status {
            PresolveStatus::Infeasible => return fail(LpStatus::Infeasible),
            PresolveStatus::Unbounded => return fail(LpStatus::Unbounded),
            PresolveStatus::Reduced => {}
        }
        let mut std_bounds: Option<(Vec<f64>, Vec<f64>)> = None;
        for &(j, lo, hi) in overrides {
            if self.pre.is_removed(j) {
                let v = self.pre.fixed_value(j);
                if v < lo - self.opts.feas_tol || v > hi + self.opts.feas_tol {
                    return fail(LpStatus::Infeasible);
                }
                continue;
            }
            let k = self.pre.col_new[j];
            let new_lo = lo.max(self.pre.col_lo[j]);
            let new_hi = hi.min(self.pre.col_hi[j]);
            if new_lo > new_hi + self.opts.feas_tol {
                return fail(LpStatus::Infeasible);
            }
            let (l, u) = std_bounds.get_or_insert_with(|| (self.std.lower.clone(), self.std.upper.clone()));
            let s = self.scaling.col[k];
            l[k] = new_lo.min(new_hi) / s;
            u[k] = new_hi / s;
        }
        let res = simplex::solve(
            &self.std,
            std_bounds.as_ref().map(|(l, u)| (l.as_slice(), u.as_slice())),
            SimplexOptions {
                feas_tol: self.opts.feas_tol,
                opt_tol: self.opts.opt_tol,
                max_iter: self.opts.max_iter,
            },
            warm,
        );
        let status = match res.outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => LpStatus::IterationLimit,
        };
        let nr = self.std.n;
        let x_red: Vec<f64> = (0..nr).map(|k| res.x[k] * self.scaling.col[k]).collect();
        let y_red: Vec<f64> = (0..self.std.m)
            .map(|i| res.y[i] * self.scaling.row[i] / self.scaling.obj)
            .collect();
        let (mut primal, dual) = self.pre.postsolve(&self.data, &x_red, &y_red);
        for &(j, lo, hi) in overrides {
            if self.pre.is_removed(j) {
                primal[j] = primal[j].clamp(lo, hi);
            }
        }
        let objective = self.data.offset + primal.iter().zip(&self.data.cost).map(|(x, c)| x * c).sum::<f64>();
        (
            LpSolution {
                status,
                objective: if status == LpStatus::Infeasible {
                    f64::NAN
                } else {
                    objective
                },
                primal,
                dual,
                iterations: res.iterations,
            },
            Some(res.basis),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Row, Variable};

    #[test]
    fn min_x_with_lower_row() {
        let mut m = ModelInstance::new("t");
        let x = m
            .add_variable(Variable::continuous("x", 0.0, f64::INFINITY, 1.0))
            .unwrap();
        m.add_row(Row::new("r", vec![(x, 1.0)], Sense::Ge, 3.0)).unwrap();
        for presolve in [true, false] {
            let s = solve_lp(
                &m,
                &LpOptions {
                    presolve,
                    ..Default::default()
                },
            );
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.primal[0] - 3.0).abs() < 1e-12);
            assert!((s.objective - 3.0).abs() < 1e-12);
            assert!((s.dual_objective(&m) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn facet_optimum() {
        let mut m = ModelInstance::new("t");
        let x = m.add_variable(Variable::continuous("x", 0.0, 1.0, -1.0)).unwrap();
        let y = m.add_variable(Variable::continuous("y", 0.0, 1.0, -1.0)).unwrap();
        m.add_row(Row::new("r", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0))
            .unwrap();
        let s = solve_lp(&m, &LpOptions::default());
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!((s.primal[0] + s.primal[1] - 1.0).abs() < 1e-12);
        assert!((s.dual_objective(&m) - s.objective).abs() < 1e-12);
    }
}
