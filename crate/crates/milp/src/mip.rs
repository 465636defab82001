//! Branch-and-bound over binary columns.
//!
//! Nodes are explored depth-first (diving into the child on the side the LP
//! value leans to) and, when a dive ends, the open node with the best bound is
//! resumed. Branching picks the most fractional binary, ties by lowest index.
//! Children are warm-started from their parent's final basis.

use crate::lp::{LpEngine, LpOptions, LpSolution, LpStatus};
use crate::model::ModelInstance;
use crate::simplex::Basis;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MipOptions {
    pub int_tol: f64,
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which to stop.
    pub gap_tol: f64,
    pub node_limit: usize,
    pub lp: LpOptions,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions {
            int_tol: 1e-6,
            gap_tol: 1e-6,
            node_limit: 100_000,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node limit reached; the incumbent (if any) carries the reported gap.
    NodeLimit,
}

impl MipStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MipStatus::Optimal => "optimal",
            MipStatus::Infeasible => "infeasible",
            MipStatus::Unbounded => "unbounded",
            MipStatus::NodeLimit => "node_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Best integral solution found; `status` of the inner LP solution is
    /// `Optimal` when one exists.
    pub incumbent: LpSolution,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl MipSolution {
    pub fn has_incumbent(&self) -> bool {
        self.incumbent.status == LpStatus::Optimal
    }

    pub fn objective(&self) -> f64 {
        self.incumbent.objective
    }
}

struct Node {
    fixings: Vec<(usize, f64, f64)>,
    bound: f64,
    depth: usize,
    basis: Option<Basis>,
}

pub fn solve_mip(model: &ModelInstance, opts: &MipOptions) -> MipSolution {
    let binaries = model.binaries();
    let mut protect = vec![false; model.num_variables()];
    for &j in &binaries {
        protect[j] = true;
    }
    let engine = LpEngine::new(model, &opts.lp, &protect);

    let mut incumbent: Option<LpSolution> = None;
    let mut open: Vec<Node> = Vec::new();
    let mut dive: Option<Node> = Some(Node {
        fixings: Vec::new(),
        bound: f64::NEG_INFINITY,
        depth: 0,
        basis: None,
    });
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut root_status = None;
    let mut incomplete = false;

    loop {
        let cutoff = incumbent.as_ref().map_or(f64::INFINITY, |s| {
            s.objective - opts.gap_tol * s.objective.abs().max(1.0)
        });
        let node = match dive.take() {
            Some(n) => n,
            None => {
                open.retain(|n| n.bound < cutoff);
                let Some(best) = (0..open.len()).min_by(|&a, &b| {
                    open[a]
                        .bound
                        .total_cmp(&open[b].bound)
                        .then(open[b].depth.cmp(&open[a].depth))
                        .then(a.cmp(&b))
                }) else {
                    break;
                };
                open.swap_remove(best)
            }
        };
        if node.bound >= cutoff {
            continue;
        }
        if nodes >= opts.node_limit {
            open.push(node);
            incomplete = true;
            break;
        }
        nodes += 1;
        let (sol, basis) = engine.solve(&node.fixings, node.basis.as_ref());
        lp_iterations += sol.iterations;
        if root_status.is_none() {
            root_status = Some(sol.status);
            if sol.status == LpStatus::Unbounded {
                break;
            }
        }
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => continue,
            LpStatus::IterationLimit => {
                incomplete = true;
                continue;
            }
        }
        if sol.objective >= cutoff {
            continue;
        }
        let mut branch = None;
        let mut best_frac = opts.int_tol;
        for &j in &binaries {
            let v = sol.primal[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best_frac {
                best_frac = frac;
                branch = Some(j);
            }
        }
        match branch {
            None => {
                incumbent = Some(sol);
            }
            Some(j) => {
                let up_first = sol.primal[j] >= 0.5;
                let child = |v: f64| {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v, v));
                    Node {
                        fixings,
                        bound: sol.objective,
                        depth: node.depth + 1,
                        basis: basis.clone(),
                    }
                };
                let (first, second) = if up_first {
                    (child(1.0), child(0.0))
                } else {
                    (child(0.0), child(1.0))
                };
                open.push(second);
                dive = Some(first);
            }
        }
    }

    if root_status == Some(LpStatus::Unbounded) {
        return MipSolution {
            status: MipStatus::Unbounded,
            incumbent: LpSolution::empty(LpStatus::Unbounded, model),
            best_bound: f64::NEG_INFINITY,
            gap: f64::INFINITY,
            nodes,
            lp_iterations,
        };
    }
    match incumbent {
        Some(inc) => {
            let bound = open
                .iter()
                .map(|n| n.bound)
                .fold(inc.objective, f64::min)
                .min(inc.objective);
            let gap = ((inc.objective - bound) / inc.objective.abs().max(1.0)).max(0.0);
            MipSolution {
                status: if incomplete {
                    MipStatus::NodeLimit
                } else {
                    MipStatus::Optimal
                },
                incumbent: inc,
                best_bound: bound,
                gap,
                nodes,
                lp_iterations,
            }
        }
        None => MipSolution {
            status: if incomplete {
                MipStatus::NodeLimit
            } else {
                MipStatus::Infeasible
            },
            incumbent: LpSolution::empty(LpStatus::Infeasible, model),
            best_bound: if incomplete { f64::NEG_INFINITY } else { f64::INFINITY },
            gap: f64::INFINITY,
            nodes,
            lp_iterations,
        },
    }
}
