//! Independent checks on the dual route.
//!
//! [`oracle_solve`] never touches dual weights: it substitutes `y = ln x`
//! and runs a primal log-barrier method, in which every posynomial becomes
//! a convex log-sum-exp. The objective is minimized as `ln f_0(y)`, which
//! has the same minimizers as `f_0` and better scaling.

mod generator;
mod sweep;

pub use generator::{generate_random_gp, generate_with_point, GENERATOR_ATTEMPTS};
pub use sweep::{
    combination, sweep_scenarios, Attainment, ComboResult, ComboStatus, Extreme, SweepError, SweepOptions, SweepReport,
    DEFAULT_SITE_CAP,
};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::recovery::{build_primal, PrimalSolution};
use crate::scenario::StandardGp;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Newton steps across both phases.
    pub max_iter: usize,
    /// Target for the barrier's `m / t` bound on `ln f_0` suboptimality.
    pub gap_tol: f64,
    /// Growth factor of `t` between centerings.
    pub barrier_growth: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { max_iter: 2000, gap_tol: 1e-11, barrier_growth: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle did not converge within its iteration budget")]
    NonConverged,
    /// Every objective term strictly decreases, and no constraint term
    /// increases, along `direction` in `ln x` space.
    #[error("objective is unbounded below along a certified ray")]
    UnboundedBelow { direction: Vec<f64> },
    #[error("no strictly feasible point exists (phase-1 bound {bound:.3e})")]
    Infeasible { bound: f64 },
}

/// `ln sum_t exp(offset_t + A_t . y)` with gradient and Hessian.
struct Lse {
    offsets: DVector<f64>,
    a: DMatrix<f64>,
}

impl Lse {
    fn from_posynomial(p: &crate::model::ConcretePosynomial, n: usize) -> Self {
        Self {
            offsets: DVector::from_iterator(p.len(), p.terms.iter().map(|t| t.coefficient.ln())),
            a: DMatrix::from_fn(p.len(), n, |t, j| p.terms[t].exponents[j]),
        }
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        let z = &self.offsets + &self.a * y;
        let mx = z.max();
        mx + z.map(|v| (v - mx).exp()).sum().ln()
    }

    fn eval(&self, y: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let z = &self.offsets + &self.a * y;
        let mx = z.max();
        let e = z.map(|v| (v - mx).exp());
        let s = e.sum();
        let p = e / s;
        let grad = self.a.transpose() * &p;
        let weighted = DMatrix::from_fn(self.a.nrows(), self.a.ncols(), |t, j| self.a[(t, j)] * p[t]);
        let hess = self.a.transpose() * weighted - &grad * grad.transpose();
        (mx + s.ln(), grad, hess)
    }
}

type Eval = (f64, DVector<f64>, DMatrix<f64>);

const MAX_STEP: f64 = 10.0;
/// Squared Newton decrement at which a centering is accepted.
const CENTERING_TOL: f64 = 1e-10;

enum Centering {
    Done,
    /// The caller's early-exit test fired.
    Stopped,
    Budget,
}

/// Damped Newton on `f` from `z`, in place. `f` returns `None` outside its
/// domain. `stop` is checked after every accepted step.
fn newton_minimize(
    f: &dyn Fn(&DVector<f64>) -> Option<Eval>,
    z: &mut DVector<f64>,
    budget: &mut usize,
    stop: &mut dyn FnMut(&DVector<f64>) -> bool,
) -> Centering {
    loop {
        let Some((val, g, mut h)) = f(z) else { return Centering::Done };
        let reg = 1e-14 * h.diagonal().amax().max(1.0);
        for d in 0..h.nrows() {
            h[(d, d)] += reg;
        }
        let mut step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => crate::linalg::lstsq_min_norm(&h, &(-&g)).0,
        };
        let decrement = -g.dot(&step);
        if !(decrement > CENTERING_TOL) {
            return Centering::Done;
        }
        // Flat directions of a log-sum-exp give near-singular Hessians;
        // cap the step in ln x space.
        let scale = (MAX_STEP / step.amax()).min(1.0);
        step *= scale;
        let slope = decrement * scale;
        if *budget == 0 {
            return Centering::Budget;
        }
        *budget -= 1;
        let mut alpha = 1.0;
        let mut moved = false;
        while alpha > 1e-16 {
            let trial = &*z + &step * alpha;
            if let Some((v, _, _)) = f(&trial) {
                if v < val && v <= val - 0.25 * alpha * slope {
                    *z = trial;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            return Centering::Done;
        }
        if stop(z) {
            return Centering::Stopped;
        }
    }
}

/// Minimizes the primal in `ln x` space with a log barrier.
pub fn oracle_solve(g: &StandardGp, opts: &OracleOptions) -> Result<PrimalSolution, OracleError> {
    let n = g.num_variables();
    let obj = Lse::from_posynomial(&g.objective, n);
    let cons: Vec<Lse> = g.constraints.iter().map(|c| Lse::from_posynomial(c, n)).collect();
    let m = cons.len();
    let mut budget = opts.max_iter;

    let y = phase_one(&cons, n, opts, &mut budget)?;
    let start = y.clone();

    // Phase 2: t ln f_0(y) - sum ln(-f_i(y)).
    let mut y = y;
    let mut t = 1.0;
    let mut unbounded: Option<Vec<f64>> = None;
    loop {
        let barrier = |y: &DVector<f64>| -> Option<Eval> {
            let (v0, g0, h0) = obj.eval(y);
            let mut val = t * v0;
            let mut grad = g0 * t;
            let mut hess = h0 * t;
            for c in &cons {
                let (fi, gi, hi) = c.eval(y);
                if !(fi < 0.0) {
                    return None;
                }
                val -= (-fi).ln();
                grad += &gi / -fi;
                hess += hi / -fi + &gi * gi.transpose() / (fi * fi);
            }
            Some((val, grad, hess))
        };
        let mut watch = |y: &DVector<f64>| -> bool {
            if y.amax() > 40.0 {
                unbounded = certify_ray(&obj, &cons, &(y - &start));
            }
            unbounded.is_some() || y.amax() > 700.0
        };
        match newton_minimize(&barrier, &mut y, &mut budget, &mut watch) {
            Centering::Done => {}
            Centering::Stopped => {
                return Err(match unbounded {
                    Some(direction) => OracleError::UnboundedBelow { direction },
                    None => OracleError::NonConverged,
                });
            }
            Centering::Budget => return Err(OracleError::NonConverged),
        }
        if m as f64 / t <= opts.gap_tol {
            break;
        }
        t *= opts.barrier_growth;
    }

    let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let mut ps = build_primal(g, x, 0.0, true, vec![]);
    ps.active = ps.constraint_residuals.iter().map(|r| r.abs() <= 1e-6).collect();
    Ok(ps)
}

/// A strictly feasible `y`, from `min s s.t. f_i(y) <= s`.
fn phase_one(cons: &[Lse], n: usize, opts: &OracleOptions, budget: &mut usize) -> Result<DVector<f64>, OracleError> {
    let y0 = DVector::zeros(n);
    let worst = |y: &DVector<f64>| cons.iter().map(|c| c.value(y)).fold(f64::NEG_INFINITY, f64::max);
    if worst(&y0) < 0.0 {
        return Ok(y0);
    }
    let m = cons.len() as f64;
    let mut z = DVector::zeros(n + 1);
    z[n] = worst(&y0) + 1.0;
    let mut t = 1.0;
    for _ in 0..60 {
        let barrier = |z: &DVector<f64>| -> Option<Eval> {
            let y = z.rows(0, n).into_owned();
            let s = z[n];
            let mut val = t * s;
            let mut grad = DVector::zeros(n + 1);
            grad[n] = t;
            let mut hess = DMatrix::zeros(n + 1, n + 1);
            for c in cons {
                let (fi, gi, hi) = c.eval(&y);
                let slack = s - fi;
                if !(slack > 0.0) {
                    return None;
                }
                val -= slack.ln();
                // d slack = (-gi, 1).
                let mut ds = DVector::zeros(n + 1);
                ds.rows_mut(0, n).copy_from(&(-&gi));
                ds[n] = 1.0;
                grad -= &ds / slack;
                let mut yy = hess.view_mut((0, 0), (n, n));
                yy += hi / slack;
                hess += &ds * ds.transpose() / (slack * slack);
            }
            Some((val, grad, hess))
        };
        let mut found = |z: &DVector<f64>| worst(&z.rows(0, n).into_owned()) < 0.0;
        match newton_minimize(&barrier, &mut z, budget, &mut found) {
            Centering::Stopped => return Ok(z.rows(0, n).into_owned()),
            Centering::Budget => return Err(OracleError::NonConverged),
            Centering::Done => {}
        }
        // At a center, s - m/t bounds the optimal s from below.
        let bound = z[n] - m / t;
        if bound > 0.0 {
            return Err(OracleError::Infeasible { bound });
        }
        if m / t <= opts.gap_tol {
            break;
        }
        t *= opts.barrier_growth;
    }
    Err(OracleError::NonConverged)
}

/// Normalized `d` if every objective term strictly decreases along it and
/// no constraint term increases.
fn certify_ray(obj: &Lse, cons: &[Lse], d: &DVector<f64>) -> Option<Vec<f64>> {
    let norm = d.amax();
    if !(norm > 0.0) {
        return None;
    }
    let d = d / norm;
    let slopes = &obj.a * &d;
    if !(slopes.max() < -1e-6) {
        return None;
    }
    if cons.iter().any(|c| c.a.nrows() > 0 && (&c.a * &d).max() > 1e-9) {
        return None;
    }
    Some(d.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example1, example2};
    use crate::model::{ConcretePosynomial, Monomial};
    use crate::scenario::{standard_scenario, Scenario};

    fn gp(objective: &[(f64, Vec<f64>)], constraints: &[Vec<(f64, Vec<f64>)>]) -> StandardGp {
        let posy = |terms: &[(f64, Vec<f64>)]| {
            ConcretePosynomial::new(terms.iter().map(|(c, a)| Monomial::new(*c, a.clone())).collect())
        };
        let n = objective[0].1.len();
        StandardGp::new(
            (0..n).map(|j| format!("x{j}")).collect(),
            posy(objective),
            constraints.iter().map(|c| posy(c)).collect(),
        )
    }

    #[test]
    fn x_plus_inverse() {
        let g = gp(&[(1.0, vec![1.0]), (1.0, vec![-1.0])], &[]);
        let ps = oracle_solve(&g, &OracleOptions::default()).unwrap();
        assert!((ps.x[0] - 1.0).abs() < 1e-8);
        assert!((ps.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn example_scenarios_match_reference_values() {
        let cases = [
            (example1(), Scenario::Low, 125.9045),
            (example1(), Scenario::High, 296.2627),
            (example2(), Scenario::Low, 47.47193),
            (example2(), Scenario::High, 23.22874),
        ];
        for (p, s, want) in cases {
            let ps = oracle_solve(&standard_scenario(&p, s), &OracleOptions::default()).unwrap();
            assert!((ps.objective_value / want - 1.0).abs() < 1e-3, "{s}: {}", ps.objective_value);
            assert!(ps.constraint_residuals.iter().all(|r| *r <= 1e-9));
        }
    }

    #[test]
    fn phase_one_starts_from_an_infeasible_origin() {
        // min x^-1 s.t. 4 x <= 1: origin violates, optimum x = 1/4, value 4.
        let g = gp(&[(1.0, vec![-1.0])], &[vec![(4.0, vec![1.0])]]);
        let ps = oracle_solve(&g, &OracleOptions::default()).unwrap();
        assert!((ps.objective_value - 4.0).abs() < 1e-8, "{}", ps.objective_value);
    }

    #[test]
    fn unbounded_ray_is_certified() {
        // min x y^-1 s.t. y <= 1: x -> 0 drives the objective to 0.
        let g = gp(&[(1.0, vec![1.0, -1.0])], &[vec![(1.0, vec![0.0, 1.0])]]);
        match oracle_solve(&g, &OracleOptions::default()) {
            Err(OracleError::UnboundedBelow { direction }) => assert!(direction[0] < 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_constraints_are_reported() {
        // x <= 1/2 and 1/x <= 1/2 cannot both hold.
        let g = gp(&[(1.0, vec![1.0]), (1.0, vec![-1.0])], &[vec![(2.0, vec![1.0])], vec![(2.0, vec![-1.0])]]);
        assert!(matches!(oracle_solve(&g, &OracleOptions::default()), Err(OracleError::Infeasible { .. })));
    }
}
