//! Sparse MILP models and an in-process solver.
//!
//! [`ModelInstance`] holds a minimisation problem with continuous and binary
//! columns. [`solve_lp`] runs a bounded-variable revised simplex on the LP
//! relaxation; [`solve_mip`] adds branch-and-bound over the binaries. Models
//! can be exchanged with other solvers through free-format MPS.

mod error;
mod lp;
mod lu;
mod mip;
mod model;
mod mps;
mod presolve;
mod scaling;
mod simplex;
mod solution_file;

pub use error::{ModelError, MpsError, SolutionFileError};
pub use lp::{solve_lp, LpOptions, LpSolution, LpStatus};
pub use mip::{solve_mip, MipOptions, MipSolution, MipStatus};
pub use model::{Census, ModelInstance, Row, Sense, Stage, Variable};
pub use mps::{parse_mps, read_mps, to_mps_string, write_mps};
pub use solution_file::{parse_solution, read_solution, ImportedSolution};
