//! One-call solve of a scenario: dual, recovery and certificate.

use crate::dual::build_dual;
use crate::model::MultiGpProblem;
use crate::recovery::{certify, recover_primal, Certificate, PrimalSolution, RecoveryError};
use crate::scenario::{standard_scenario, Scenario, StandardGp};
use crate::solver::{maximize_dual, DualSolution, SolveError, SolverOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub gp: StandardGp,
    pub dual: DualSolution,
    /// `Err` when no primal point could be recovered from the weights.
    pub primal: Result<PrimalSolution, RecoveryError>,
    pub certificate: Option<Certificate>,
}

impl ScenarioOutcome {
    pub fn is_certified(&self) -> bool {
        self.certificate.as_ref().is_some_and(|c| c.verdict == crate::recovery::Verdict::Certified)
    }
}

pub fn solve_standard(g: &StandardGp, opts: &SolverOptions) -> Result<ScenarioOutcome, SolveError> {
    let dual = maximize_dual(&build_dual(g), opts)?;
    let primal = recover_primal(g, &dual);
    let certificate = primal.as_ref().ok().map(|p| certify(g, &dual, p));
    Ok(ScenarioOutcome { gp: g.clone(), dual, primal, certificate })
}

pub fn solve_scenario(p: &MultiGpProblem, s: Scenario, opts: &SolverOptions) -> Result<ScenarioOutcome, SolveError> {
    solve_standard(&standard_scenario(p, s), opts)
}
