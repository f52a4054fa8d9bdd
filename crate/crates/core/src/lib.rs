//! Posynomial geometric programs whose coefficients, exponents and
//! right-hand sides are `{low, mid, high}` triplets.
//!
//! The pipeline for one scenario is
//! [`scenario::standard_scenario`] → [`dual::build_dual`] →
//! [`solver::maximize_dual`] → [`recovery::recover_primal`] →
//! [`recovery::certify`]. [`pipeline::solve_standard`] runs all of it.
//! The [`oracle`] module holds an independent primal solver, a random
//! instance generator and the exhaustive parameter sweep.

// `!(a < b)` is used on purpose so that NaN falls into the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dual;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod recovery;
pub mod scenario;
pub mod solver;

pub use dual::{build_dual, DualProgram};
pub use error::ModelError;
pub use model::{MultiGpProblem, Triplet};
pub use pipeline::{solve_scenario, solve_standard, ScenarioOutcome};
pub use recovery::{Certificate, PrimalSolution, Verdict};
pub use scenario::{Scenario, StandardGp};
pub use solver::{DualSolution, SolveError, SolverOptions};
