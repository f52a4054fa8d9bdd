//! Primal recovery from optimal dual weights, and the primal/dual certificate.
//!
//! At an optimum every weighted objective term carries its share of the
//! optimal value, `c_0t x^{a_0t} = w_0t Z`, and every weighted term of an
//! active constraint carries its share of that constraint,
//! `d_it x^{a_it} = w_it / l_i`. Taking logs gives a linear system in
//! `y = ln x`, solved here in the least-squares sense.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{lstsq_min_norm, null_space, reduce_lse_violation, LseGroup};
use crate::model::evaluate_posynomial;
use crate::scenario::StandardGp;
use crate::solver::DualSolution;

pub const GAP_TOL: f64 = 1e-5;
pub const VIOLATION_TOL: f64 = 1e-6;
pub const COMPLEMENTARITY_TOL: f64 = 1e-4;
/// Weights at or below this carry no equation.
pub const DEFAULT_WEIGHT_THRESHOLD: f64 = 1e-9;

/// `l_i` above this marks constraint `i` as active.
pub fn active_threshold(lambda: &[f64]) -> f64 {
    1e-7 * lambda.iter().copied().fold(1.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalSolution {
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// `g_i(x) - 1` for the normalized constraints.
    pub constraint_residuals: Vec<f64>,
    /// Largest mismatch in the log-linear recovery equations.
    pub recovery_residual: f64,
    /// False when the recovery system left some direction of `ln x` free.
    pub unique: bool,
    /// Constraints that took part in recovery.
    pub active: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecoveryError {
    #[error("every recovery equation was filtered out")]
    DegenerateWeights,
    #[error("dual value must be positive and finite")]
    NonPositiveDual,
}

pub fn recover_primal(g: &StandardGp, ds: &DualSolution) -> Result<PrimalSolution, RecoveryError> {
    recover_primal_with(g, ds, DEFAULT_WEIGHT_THRESHOLD)
}

/// As [`recover_primal`], dropping equations for weights `<= weight_threshold`.
pub fn recover_primal_with(
    g: &StandardGp,
    ds: &DualSolution,
    weight_threshold: f64,
) -> Result<PrimalSolution, RecoveryError> {
    let z = ds.dual_value;
    if !(z > 0.0 && z.is_finite()) {
        return Err(RecoveryError::NonPositiveDual);
    }
    let n = g.num_variables();
    let thr = active_threshold(&ds.lambda);
    let active: Vec<bool> = ds.lambda.iter().map(|&l| l > thr).collect();

    let mut rows: Vec<&[f64]> = Vec::new();
    let mut rhs = Vec::new();
    let mut k = 0;
    for term in &g.objective.terms {
        let w = ds.w[k];
        if w > weight_threshold {
            rows.push(&term.exponents);
            rhs.push((w * z / term.coefficient).ln());
        }
        k += 1;
    }
    for (i, con) in g.constraints.iter().enumerate() {
        for term in &con.terms {
            let w = ds.w[k];
            if active[i] && w > weight_threshold {
                rows.push(&term.exponents);
                rhs.push((w / (ds.lambda[i] * term.coefficient)).ln());
            }
            k += 1;
        }
    }
    if rows.is_empty() {
        return Err(RecoveryError::DegenerateWeights);
    }

    let a = DMatrix::from_fn(rows.len(), n, |r, j| rows[r][j]);
    let b = DVector::from_vec(rhs);
    let (mut y, rank) = lstsq_min_norm(&a, &b);
    let unique = rank == n;

    let groups: Vec<LseGroup> = g
        .constraints
        .iter()
        .map(|con| LseGroup {
            offsets: con.terms.iter().map(|t| t.coefficient.ln()).collect(),
            rows: DMatrix::from_fn(con.len(), n, |t, j| con.terms[t].exponents[j]),
        })
        .collect();
    let worst = groups.iter().map(|gr| gr.value(&y)).fold(f64::NEG_INFINITY, f64::max);
    if !unique && worst > 0.0 {
        // Non-unique recovery: move along the free directions of ln x
        // until the constraints without equations are satisfied.
        y = reduce_lse_violation(&groups, &y, &null_space(&a), 0.0);
    }
    let recovery_residual = if b.is_empty() { 0.0 } else { (&a * &y - &b).amax() };

    let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    Ok(build_primal(g, x, recovery_residual, unique, active))
}

pub(crate) fn build_primal(
    g: &StandardGp,
    x: Vec<f64>,
    recovery_residual: f64,
    unique: bool,
    active: Vec<bool>,
) -> PrimalSolution {
    let objective_value = evaluate_posynomial(&g.objective, &x).unwrap_or(f64::NAN);
    let constraint_residuals =
        g.constraints.iter().map(|c| evaluate_posynomial(c, &x).map_or(f64::NAN, |v| v - 1.0)).collect();
    PrimalSolution { x, objective_value, constraint_residuals, recovery_residual, unique, active }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    GapTooLarge,
    InfeasiblePrimal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "CERTIFIED",
            Verdict::GapTooLarge => "GAP_TOO_LARGE",
            Verdict::InfeasiblePrimal => "INFEASIBLE_PRIMAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub dual_value: f64,
    pub primal_value: f64,
    /// `|primal - dual| / max(1, |dual|)`.
    pub relative_gap: f64,
    pub max_constraint_violation: f64,
    /// `max_i min(l_i, |1 - g_i(x)|)`.
    pub complementarity_slack: f64,
    /// Every active constraint is tight within [`COMPLEMENTARITY_TOL`].
    pub complementarity_ok: bool,
    pub verdict: Verdict,
}

pub fn certify(g: &StandardGp, ds: &DualSolution, ps: &PrimalSolution) -> Certificate {
    let dual_value = ds.dual_value;
    let primal_value = ps.objective_value;
    let relative_gap = (primal_value - dual_value).abs() / dual_value.abs().max(1.0);
    let max_constraint_violation =
        ps.constraint_residuals.iter().fold(0.0f64, |m, &r| if r.is_nan() { f64::INFINITY } else { m.max(r) });
    let thr = active_threshold(&ds.lambda);
    let mut complementarity_slack = 0.0f64;
    let mut complementarity_ok = true;
    for (i, &lambda) in ds.lambda.iter().enumerate().take(g.constraints.len()) {
        let gap = ps.constraint_residuals[i].abs();
        complementarity_slack = complementarity_slack.max(lambda.min(gap));
        if lambda > thr && !(gap <= COMPLEMENTARITY_TOL) {
            complementarity_ok = false;
        }
    }
    let verdict = if !(max_constraint_violation <= VIOLATION_TOL) {
        Verdict::InfeasiblePrimal
    } else if !(relative_gap <= GAP_TOL) {
        Verdict::GapTooLarge
    } else {
        Verdict::Certified
    };
    Certificate {
        dual_value,
        primal_value,
        relative_gap,
        max_constraint_violation,
        complementarity_slack,
        complementarity_ok,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::build_dual;
    use crate::fixtures::{example1, example2};
    use crate::model::{ConcretePosynomial, Monomial};
    use crate::scenario::{standard_scenario, Scenario};
    use crate::solver::{maximize_dual, SolveMethod, SolverOptions};

    fn dual_from(weights: &[f64], dp: &crate::dual::DualProgram) -> DualSolution {
        let v = crate::dual::dual_log_objective(dp, weights).unwrap();
        DualSolution {
            w: weights.to_vec(),
            lambda: dp.lambdas(weights),
            dual_value: v.exp(),
            log_dual_value: v,
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
            method: SolveMethod::Barrier,
            forced_zero: vec![false; weights.len()],
            trace: vec![],
        }
    }

    fn x_plus_inverse() -> StandardGp {
        StandardGp::new(
            vec!["x".into()],
            ConcretePosynomial::new(vec![Monomial::new(1.0, vec![1.0]), Monomial::new(1.0, vec![-1.0])]),
            vec![],
        )
    }

    #[test]
    fn am_gm_recovers_unit_point() {
        let g = x_plus_inverse();
        let dp = build_dual(&g);
        let ds = dual_from(&[0.5, 0.5], &dp);
        let ps = recover_primal(&g, &ds).unwrap();
        assert!((ps.x[0] - 1.0).abs() < 1e-15);
        assert!(ps.unique);
        let cert = certify(&g, &ds, &ps);
        assert_eq!(cert.verdict, Verdict::Certified);
        assert!(cert.relative_gap < 1e-15);
    }

    #[test]
    fn reference_example1_weights_recover_reference_point() {
        let g = standard_scenario(&example1(), Scenario::Low);
        let dp = build_dual(&g);
        let ds = dual_from(&[0.1410885, 0.5767344, 0.2821770, 0.2178230, 0.1410885], &dp);
        let ps = recover_primal(&g, &ds).unwrap();
        for (a, b) in ps.x.iter().zip([1.305470, 1.390561, 0.4892672]) {
            assert!((a / b - 1.0).abs() < 2e-3, "{:?}", ps.x);
        }
        let cert = certify(&g, &ds, &ps);
        assert!((cert.primal_value / 125.9045 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn solved_example1_certifies() {
        let g = standard_scenario(&example1(), Scenario::Low);
        let ds = maximize_dual(&build_dual(&g), &SolverOptions::default()).unwrap();
        let ps = recover_primal(&g, &ds).unwrap();
        let cert = certify(&g, &ds, &ps);
        assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
        assert!(cert.relative_gap <= 1e-5);
        assert!(cert.complementarity_ok);
    }

    #[test]
    fn inactive_constraint_is_left_out_and_stays_satisfied() {
        let g = standard_scenario(&example2(), Scenario::Low);
        let ds = maximize_dual(&build_dual(&g), &SolverOptions::default()).unwrap();
        let ps = recover_primal(&g, &ds).unwrap();
        assert_eq!(ps.active, vec![false, true]);
        assert!(!ps.unique);
        let cert = certify(&g, &ds, &ps);
        assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
    }

    #[test]
    fn violated_constraint_is_reported() {
        let g = standard_scenario(&example1(), Scenario::Low);
        let ds = maximize_dual(&build_dual(&g), &SolverOptions::default()).unwrap();
        let mut ps = recover_primal(&g, &ds).unwrap();
        ps.constraint_residuals[0] = 0.1;
        assert_eq!(certify(&g, &ds, &ps).verdict, Verdict::InfeasiblePrimal);
        let mut ps2 = recover_primal(&g, &ds).unwrap();
        ps2.objective_value *= 1.01;
        assert_eq!(certify(&g, &ds, &ps2).verdict, Verdict::GapTooLarge);
    }

    #[test]
    fn tiny_lambda_is_below_active_threshold() {
        // lambda_1 = 9.2e-8 sits below 1e-7 * max(1, 2.33).
        let thr = active_threshold(&[9.236831e-8, 2.333333]);
        assert!(9.236831e-8 < thr);
    }
}
