//! Maximization of the log-dual over `{w >= 0, A_eq w = b_eq}`.
//!
//! 1. Phase 1 finds a point in the relative interior of the dual feasible
//!    set by nonnegative least squares. Coordinates that are zero at every
//!    feasible point are fixed at zero from then on.
//! 2. A log-barrier method maximizes `v(w) + mu sum ln w` with Newton steps
//!    restricted to the null space of `A_eq`, shrinking `mu` geometrically.
//! 3. Weights that the barrier drives to the boundary are fixed at zero and
//!    plain Newton on `v` polishes the remaining face.
//!
//! Programs whose dual system is square and nonsingular skip all of this.

use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dual::{dual_gradient, dual_log_objective, DualProgram};
use crate::linalg::{lstsq_min_norm, nnls, null_space, reduce_lse_violation, LseGroup};

/// Phase-1 residual above which the dual is declared infeasible.
pub const PHASE_ONE_TOL: f64 = 1e-8;

const ARMIJO: f64 = 1e-4;
const FRACTION_TO_BOUNDARY: f64 = 0.99;
const ASCENT_SLACK: f64 = 1e-12;
const CENTERING_TOL: f64 = 1e-12;
/// Reduced-gradient target for the unbarriered polish.
const POLISH_GRAD_TOL: f64 = 1e-12;
/// Below this decrement the objective change is at rounding level and the
/// line search cannot judge a step, so full Newton steps are taken.
const RESOLVABLE_DECREMENT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// KKT residual target.
    pub tol: f64,
    /// Newton step budget across the whole run.
    pub max_iter: usize,
    pub barrier_init: f64,
    pub barrier_shrink: f64,
    pub barrier_min: f64,
    /// Weights at or below this are reported as exact zeros.
    pub zero_weight_threshold: f64,
    /// Seeds the perturbed restart taken when the first barrier run stalls.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            barrier_init: 1e-1,
            barrier_shrink: 0.1,
            barrier_min: 1e-10,
            zero_weight_threshold: 1e-9,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |msg: &str| Err(SolveError::InvalidOptions(msg.to_string()));
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.barrier_shrink > 0.0 && self.barrier_shrink < 1.0) {
            return bad("barrier_shrink must lie in (0, 1)");
        }
        if !(self.barrier_min > 0.0 && self.barrier_min < self.barrier_init) {
            return bad("barrier_min must be positive and below barrier_init");
        }
        if !(self.zero_weight_threshold >= 0.0) {
            return bad("zero_weight_threshold must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Square nonsingular dual system, solved directly.
    ZeroDegrees,
    /// The feasible set is a single point.
    UniquePoint,
    Barrier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub w: Vec<f64>,
    /// `l_i = sum_t w_it` for each constraint.
    pub lambda: Vec<f64>,
    pub dual_value: f64,
    pub log_dual_value: f64,
    pub kkt_residual: f64,
    /// Newton steps taken.
    pub iterations: usize,
    pub converged: bool,
    pub method: SolveMethod,
    /// Weights that are zero at every dual-feasible point.
    pub forced_zero: Vec<bool>,
    /// Log-dual value of every accepted iterate, in order.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    /// No `w >= 0` satisfies normality and orthogonality: the primal
    /// infimum is not attained.
    #[error("dual program is infeasible (phase-1 residual {residual:.3e})")]
    InfeasibleDual { residual: f64 },
    #[error("solver did not converge within its iteration budget")]
    NonConverged { best: Option<Box<DualSolution>> },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}

/// A dual-feasible point, strictly positive off the forced-zero coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint {
    pub w: Vec<f64>,
    pub forced_zero: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(FeasiblePoint),
    Infeasible { residual: f64 },
}

fn phase_one_limit() -> SolveError {
    SolveError::NonConverged { best: None }
}

/// Phase 1: a relative-interior point of `{w >= 0, A_eq w = b_eq}`.
///
/// For each coordinate `k` a homogenized NNLS asks whether some feasible
/// point or recession direction has `w_k > 0`; averaging those witnesses
/// gives a point positive on every coordinate that can be positive.
pub fn find_feasible_weights(dp: &DualProgram) -> Result<Feasibility, SolveError> {
    let a = &dp.a_eq;
    let b = &dp.b_eq;
    let n = dp.num_weights();
    let base = nnls(a, b).map_err(|_| phase_one_limit())?;
    if base.residual > PHASE_ONE_TOL {
        return Ok(Feasibility::Infeasible { residual: base.residual });
    }

    // [A  -b] [w; tau] = 0 together with w_k = 1.
    let rows = a.nrows();
    let mut homog = DMatrix::zeros(rows + 1, n + 1);
    homog.view_mut((0, 0), (rows, n)).copy_from(a);
    for r in 0..rows {
        homog[(r, n)] = -b[r];
    }
    let mut rhs = DVector::zeros(rows + 1);
    rhs[rows] = 1.0;

    let mut points = vec![base.x.clone()];
    let mut directions = Vec::new();
    let mut forced_zero = vec![false; n];
    for k in 0..n {
        if base.x[k] > 0.0 {
            continue;
        }
        homog.row_mut(rows).fill(0.0);
        homog[(rows, k)] = 1.0;
        let sol = nnls(&homog, &rhs).map_err(|_| phase_one_limit())?;
        if sol.residual > PHASE_ONE_TOL {
            forced_zero[k] = true;
            continue;
        }
        let w = sol.x.rows(0, n).into_owned();
        let tau = sol.x[n];
        if tau > 1e-12 * w.amax().max(1.0) {
            points.push(w / tau);
        } else {
            directions.push(w);
        }
    }

    let mut w = points.iter().fold(DVector::zeros(n), |acc, p| acc + p) / points.len() as f64;
    for d in &directions {
        w += d / directions.len() as f64;
    }
    for k in 0..n {
        if forced_zero[k] {
            w[k] = 0.0;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&k| !forced_zero[k]).collect();
    let w = project_onto_equalities(dp, &free, w.as_slice()).unwrap_or_else(|| w.as_slice().to_vec());
    if free.iter().any(|&k| !(w[k] > 0.0)) {
        return Err(phase_one_limit());
    }
    Ok(Feasibility::Feasible(FeasiblePoint { w, forced_zero }))
}

/// Min-norm correction of the `free` coordinates so that `A_eq w = b_eq`.
/// `None` if the correction would leave the positive orthant.
fn project_onto_equalities(dp: &DualProgram, free: &[usize], w: &[f64]) -> Option<Vec<f64>> {
    let a_free = dp.a_eq.select_columns(free.iter());
    let r = dp.equality_residual(w);
    let (corr, _) = lstsq_min_norm(&a_free, &r);
    let mut out = w.to_vec();
    for (c, &k) in free.iter().enumerate() {
        out[k] -= corr[c];
    }
    free.iter().all(|&k| out[k] > 0.0).then_some(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZeroDegreesOutcome {
    Solved(DualSolution),
    NotApplicable,
}

/// When `N = n + 1` and the dual system is nonsingular, its unique solution
/// is the optimum.
pub fn solve_zero_dod(dp: &DualProgram) -> Result<ZeroDegreesOutcome, SolveError> {
    let n = dp.num_weights();
    if n != dp.num_variables() + 1 {
        return Ok(ZeroDegreesOutcome::NotApplicable);
    }
    let (w, rank) = lstsq_min_norm(&dp.a_eq, &dp.b_eq);
    if rank < n {
        return Ok(ZeroDegreesOutcome::NotApplicable);
    }
    let scale = w.amax().max(1.0);
    if w.iter().any(|&v| v < -1e-12 * scale) {
        let residual = w.iter().filter(|v| **v < 0.0).map(|v| v * v).sum::<f64>().sqrt();
        return Err(SolveError::InfeasibleDual { residual });
    }
    let w: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();
    let forced_zero = w.iter().map(|&v| v == 0.0).collect();
    let mut sol = finish(dp, w, forced_zero, 0, SolveMethod::ZeroDegrees, Vec::new(), 0.0);
    sol.kkt_residual = dp.equality_residual(&sol.w).amax();
    sol.converged = true;
    Ok(ZeroDegreesOutcome::Solved(sol))
}

/// Rounds tiny weights and fills in the derived fields.
fn finish(
    dp: &DualProgram,
    mut w: Vec<f64>,
    forced_zero: Vec<bool>,
    iterations: usize,
    method: SolveMethod,
    trace: Vec<f64>,
    zero_threshold: f64,
) -> DualSolution {
    for v in w.iter_mut() {
        if *v <= zero_threshold {
            *v = 0.0;
        }
    }
    let log_dual_value = dual_log_objective(dp, &w).expect("weights are nonnegative");
    DualSolution {
        lambda: dp.lambdas(&w),
        dual_value: log_dual_value.exp(),
        log_dual_value,
        kkt_residual: f64::INFINITY,
        iterations,
        converged: false,
        method,
        forced_zero,
        trace,
        w,
    }
}

/// Stationarity and feasibility violation of `w` for the dual.
///
/// On positive coordinates the gradient of `v` must lie in the row space of
/// `A_eq`. A constraint block that is entirely zero is optimal iff
/// `ln sum_t d_t exp(-(A_eq^T nu)_t) <= 0` for some admissible multiplier
/// `nu`; the multiplier is chosen within the set that satisfies the
/// positive-coordinate equations. An unforced zero inside a block with
/// positive mass has an infinite partial derivative and is a violation.
/// Forced-zero coordinates are ignored.
pub fn kkt_residual(dp: &DualProgram, w: &[f64], forced_zero: &[bool]) -> f64 {
    let n = dp.num_weights();
    let primal = dp.equality_residual(w).amax();
    let negativity = w.iter().fold(0.0f64, |m, &v| m.max(-v));
    let lambdas = dp.lambdas(w);
    let block_mass = |i: usize| if i == 0 { 1.0 } else { lambdas[i - 1] };

    let positive: Vec<usize> = (0..n).filter(|&k| w[k] > 0.0).collect();
    let mut stranded = false;
    for k in 0..n {
        if w[k] <= 0.0 && !forced_zero[k] && block_mass(dp.block_of(k)) > 0.0 {
            stranded = true;
        }
    }
    if stranded {
        return f64::INFINITY;
    }

    // Gradient on positive coordinates.
    let mut grad = vec![0.0; positive.len()];
    for (c, &k) in positive.iter().enumerate() {
        let i = dp.block_of(k);
        grad[c] = if i == 0 {
            dp.coefficients[k].ln() - w[k].ln() - 1.0
        } else {
            dp.coefficients[k].ln() + (lambdas[i - 1] / w[k]).ln()
        };
    }
    let a_pos_t = dp.a_eq.select_columns(positive.iter()).transpose();
    let g = DVector::from_vec(grad);
    let (nu0, _) = lstsq_min_norm(&a_pos_t, &g);
    let stationarity = if positive.is_empty() { 0.0 } else { (&a_pos_t * &nu0 - &g).amax() };

    let groups: Vec<LseGroup> = (1..dp.block_sizes.len())
        .filter(|&i| lambdas[i - 1] == 0.0)
        .filter_map(|i| {
            let ks: Vec<usize> = dp.block(i).filter(|&k| !forced_zero[k]).collect();
            if ks.is_empty() {
                return None;
            }
            let offsets = ks.iter().map(|&k| dp.coefficients[k].ln()).collect();
            let rows = -dp.a_eq.select_columns(ks.iter()).transpose();
            Some(LseGroup { offsets, rows })
        })
        .collect();
    let inactive = if groups.is_empty() {
        0.0
    } else {
        let basis = null_space(&a_pos_t);
        let nu = reduce_lse_violation(&groups, &nu0, &basis, 0.0);
        groups.iter().map(|gr| gr.value(&nu).max(0.0)).fold(0.0, f64::max)
    };

    primal.max(negativity).max(stationarity).max(inactive)
}

/// State of one barrier-Newton run on a fixed set of free coordinates.
struct Ascent<'a> {
    dp: &'a DualProgram,
    free: Vec<usize>,
    basis: DMatrix<f64>,
    w: Vec<f64>,
    v: f64,
    iterations: usize,
    max_iter: usize,
    trace: Vec<f64>,
}

enum StepResult {
    Converged,
    Stalled,
    Budget,
}

impl<'a> Ascent<'a> {
    fn new(dp: &'a DualProgram, free: Vec<usize>, w: Vec<f64>, max_iter: usize) -> Self {
        let basis = null_space(&dp.a_eq.select_columns(free.iter()));
        let v = dual_log_objective(dp, &w).expect("nonnegative start");
        Self { dp, free, basis, w, v, iterations: 0, max_iter, trace: Vec::new() }
    }

    fn barrier_value(&self, w: &[f64], mu: f64) -> Option<(f64, f64)> {
        if self.free.iter().any(|&k| !(w[k] > 0.0)) {
            return None;
        }
        let v = dual_log_objective(self.dp, w).ok()?;
        let b: f64 = self.free.iter().map(|&k| w[k].ln()).sum();
        Some((v, v + mu * b))
    }

    /// Newton direction for `v + mu sum ln w` on the free coordinates, and
    /// the squared Newton decrement and the largest reduced-gradient entry.
    fn direction(&self, mu: f64) -> Option<(Vec<f64>, f64, f64)> {
        let dim = self.basis.ncols();
        if dim == 0 {
            return None;
        }
        let grad_full = dual_gradient_on(self.dp, &self.w);
        let hess_full = self.dp.hessian_on(&self.w);
        let f = self.free.len();
        let mut g = DVector::zeros(f);
        let mut h = DMatrix::zeros(f, f);
        for (a, &ka) in self.free.iter().enumerate() {
            g[a] = grad_full[ka] + mu / self.w[ka];
            for (b, &kb) in self.free.iter().enumerate() {
                h[(a, b)] = hess_full[(ka, kb)];
            }
            h[(a, a)] -= mu / (self.w[ka] * self.w[ka]);
        }
        let gr = self.basis.transpose() * &g;
        let neg_hr = -(self.basis.transpose() * &h * &self.basis);
        let z = match neg_hr.clone().cholesky() {
            Some(ch) => ch.solve(&gr),
            None => lstsq_min_norm(&neg_hr, &gr).0,
        };
        let decrement = gr.dot(&z);
        let step = &self.basis * z;
        let mut d = vec![0.0; self.dp.num_weights()];
        for (a, &k) in self.free.iter().enumerate() {
            d[k] = step[a];
        }
        Some((d, decrement, gr.amax()))
    }

    /// Newton iterations at fixed `mu` until centered.
    fn center(&mut self, mu: f64) -> StepResult {
        loop {
            if self.iterations >= self.max_iter {
                return StepResult::Budget;
            }
            let Some((d, decrement, grad_norm)) = self.direction(mu) else {
                return StepResult::Converged;
            };
            if !(decrement.is_finite()) {
                return StepResult::Stalled;
            }
            let centered = if mu > 0.0 {
                decrement / 2.0 <= CENTERING_TOL * f64::max(1.0, mu)
            } else {
                grad_norm <= POLISH_GRAD_TOL
            };
            if centered {
                return StepResult::Converged;
            }
            let alpha_max = self
                .free
                .iter()
                .filter(|&&k| d[k] < 0.0)
                .map(|&k| -FRACTION_TO_BOUNDARY * self.w[k] / d[k])
                .fold(1.0, f64::min);
            let floor = self.v - ASCENT_SLACK * self.v.abs().max(1.0);
            let step = |alpha: f64| -> Vec<f64> { self.w.iter().zip(&d).map(|(w, d)| w + alpha * d).collect() };
            let mut accepted = None;
            if decrement <= RESOLVABLE_DECREMENT {
                let trial = step(alpha_max);
                match self.barrier_value(&trial, mu) {
                    Some((v, _)) if v >= floor && trial != self.w => accepted = Some((trial, v)),
                    _ => return StepResult::Converged,
                }
            } else {
                let (_, f0) = self.barrier_value(&self.w, mu).expect("iterate is interior");
                let mut alpha = alpha_max;
                while alpha > 1e-14 {
                    let trial = step(alpha);
                    if let Some((v, f)) = self.barrier_value(&trial, mu) {
                        if f >= f0 + ARMIJO * alpha * decrement {
                            // Recentering would give back dual value; leave
                            // this mu as it is and let the caller shrink it.
                            if v < floor {
                                return StepResult::Stalled;
                            }
                            accepted = Some((trial, v));
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }
            let Some((trial, v)) = accepted else {
                return StepResult::Stalled;
            };
            self.w = trial;
            self.v = v;
            self.iterations += 1;
            self.trace.push(v);
        }
    }
}

fn dual_gradient_on(dp: &DualProgram, w: &[f64]) -> Vec<f64> {
    // Zero (fixed) coordinates get a placeholder gradient; callers only read
    // the free ones.
    let probe: Vec<f64> = w.iter().map(|&v| if v > 0.0 { v } else { 1.0 }).collect();
    let mut g = dual_gradient(dp, &probe).expect("probe is positive");
    let lambdas = dp.lambdas(w);
    for i in 1..dp.block_sizes.len() {
        for k in dp.block(i) {
            if w[k] > 0.0 {
                g[k] = dp.coefficients[k].ln() + (lambdas[i - 1] / w[k]).ln();
            }
        }
    }
    g
}

impl DualProgram {
    /// Hessian of `v` where zero coordinates are treated as absent.
    pub(crate) fn hessian_on(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.num_weights();
        let mut h = DMatrix::zeros(n, n);
        let lambdas = self.lambdas(w);
        for k in 0..n {
            if w[k] > 0.0 {
                h[(k, k)] = -1.0 / w[k];
            }
        }
        for i in 1..self.block_sizes.len() {
            if lambdas[i - 1] <= 0.0 {
                continue;
            }
            for a in self.block(i).filter(|&k| w[k] > 0.0) {
                for b in self.block(i).filter(|&k| w[k] > 0.0) {
                    h[(a, b)] += 1.0 / lambdas[i - 1];
                }
            }
        }
        h
    }
}

struct BarrierRun {
    w: Vec<f64>,
    v: f64,
    mu: f64,
    iterations: usize,
    trace: Vec<f64>,
    completed: bool,
}

fn run_barrier(dp: &DualProgram, free: &[usize], start: Vec<f64>, opts: &SolverOptions) -> BarrierRun {
    let mut ascent = Ascent::new(dp, free.to_vec(), start, opts.max_iter);
    ascent.trace.push(ascent.v);
    let mut mu = opts.barrier_init;
    let mut completed = true;
    loop {
        match ascent.center(mu) {
            StepResult::Converged | StepResult::Stalled => {}
            StepResult::Budget => {
                completed = false;
                break;
            }
        }
        if mu <= opts.barrier_min {
            break;
        }
        mu = (mu * opts.barrier_shrink).max(opts.barrier_min);
    }
    BarrierRun { w: ascent.w, v: ascent.v, mu, iterations: ascent.iterations, trace: ascent.trace, completed }
}

/// Candidate sets of boundary weights. At an attained optimum every
/// objective weight and every weight of an active constraint is positive, so
/// the first candidate zeroes whole blocks whose mass is below the barrier
/// scale. The second applies the complementarity estimate (multiplier
/// `mu / w` above `w`) per coordinate, which also catches boundary optima.
fn zero_candidates(dp: &DualProgram, run: &BarrierRun, forced_zero: &[bool]) -> Vec<Vec<bool>> {
    let lambdas = dp.lambdas(&run.w);
    let by_block: Vec<bool> = (0..run.w.len())
        .map(|k| {
            let i = dp.block_of(k);
            forced_zero[k] || (i > 0 && lambdas[i - 1] * lambdas[i - 1] < run.mu)
        })
        .collect();
    let by_weight: Vec<bool> = (0..run.w.len()).map(|k| forced_zero[k] || run.w[k] * run.w[k] < run.mu).collect();
    if by_block == by_weight {
        vec![by_block]
    } else {
        vec![by_block, by_weight]
    }
}

/// Fixes boundary weights at zero and runs plain Newton on the remaining face.
fn polish(dp: &DualProgram, run: &BarrierRun, zero: &[bool], budget: usize) -> Option<(Vec<f64>, usize)> {
    let n = dp.num_weights();
    let free: Vec<usize> = (0..n).filter(|&k| !zero[k]).collect();
    let mut start = run.w.clone();
    for k in 0..n {
        if zero[k] {
            start[k] = 0.0;
        }
    }
    let start = project_onto_equalities(dp, &free, &start)?;
    let mut ascent = Ascent::new(dp, free, start, budget);
    match ascent.center(0.0) {
        StepResult::Converged | StepResult::Stalled => Some((ascent.w, ascent.iterations)),
        StepResult::Budget => None,
    }
}

/// Maximizes the log-dual. See the module docs for the method.
pub fn maximize_dual(dp: &DualProgram, opts: &SolverOptions) -> Result<DualSolution, SolveError> {
    opts.validate()?;
    if let ZeroDegreesOutcome::Solved(sol) = solve_zero_dod(dp)? {
        return Ok(sol);
    }
    let point = match find_feasible_weights(dp)? {
        Feasibility::Feasible(p) => p,
        Feasibility::Infeasible { residual } => return Err(SolveError::InfeasibleDual { residual }),
    };
    let n = dp.num_weights();
    let free: Vec<usize> = (0..n).filter(|&k| !point.forced_zero[k]).collect();
    if null_space(&dp.a_eq.select_columns(free.iter())).ncols() == 0 {
        let mut sol = finish(
            dp,
            point.w,
            point.forced_zero.clone(),
            0,
            SolveMethod::UniquePoint,
            Vec::new(),
            opts.zero_weight_threshold,
        );
        sol.kkt_residual = kkt_residual(dp, &sol.w, &point.forced_zero);
        sol.converged = sol.kkt_residual <= opts.tol;
        return Ok(sol);
    }

    let first = attempt(dp, &free, point.w.clone(), &point.forced_zero, opts);
    if first.converged {
        return Ok(first);
    }
    // One restart from a seeded perturbation inside the feasible set.
    let restart = perturbed_start(dp, &free, &point.w, opts.seed);
    let mut remaining = opts.clone();
    remaining.max_iter = opts.max_iter.saturating_sub(first.iterations);
    let second = match restart {
        Some(start) if remaining.max_iter > 0 => Some(attempt(dp, &free, start, &point.forced_zero, &remaining)),
        _ => None,
    };
    let best = match second {
        Some(mut s) => {
            s.iterations += first.iterations;
            if s.converged {
                return Ok(s);
            }
            if s.kkt_residual < first.kkt_residual {
                s
            } else {
                first
            }
        }
        None => first,
    };
    Err(SolveError::NonConverged { best: Some(Box::new(best)) })
}

fn attempt(
    dp: &DualProgram,
    free: &[usize],
    start: Vec<f64>,
    forced_zero: &[bool],
    opts: &SolverOptions,
) -> DualSolution {
    let run = run_barrier(dp, free, start, opts);
    let barrier_kkt = kkt_residual(dp, &run.w, forced_zero);
    let mut best = (run.w.clone(), forced_zero.to_vec(), barrier_kkt, run.iterations);
    let mut trace = run.trace.clone();

    if run.completed {
        let mut spent = 0;
        let mut polished_v = None;
        for zero in zero_candidates(dp, &run, forced_zero) {
            let budget = opts.max_iter.saturating_sub(run.iterations + spent);
            let Some((w, steps)) = polish(dp, &run, &zero, budget) else { continue };
            spent += steps;
            let v = dual_log_objective(dp, &w).expect("nonnegative");
            let kkt = kkt_residual(dp, &w, forced_zero);
            if v >= run.v - ASCENT_SLACK * run.v.abs().max(1.0) && kkt <= best.2 {
                polished_v = Some(v);
                best = (w, forced_zero.to_vec(), kkt, run.iterations + spent);
            }
            if best.2 <= opts.tol {
                break;
            }
        }
        if let Some(v) = polished_v {
            trace.push(v);
        }
    }

    let (w, forced, kkt, iterations) = best;
    let unrounded = w.clone();
    let mut sol = finish(dp, w, forced, iterations, SolveMethod::Barrier, trace, opts.zero_weight_threshold);
    let rounding = dp.equality_residual(&sol.w).amax();
    sol.kkt_residual = kkt.max(rounding);
    sol.converged = run.completed && sol.kkt_residual <= opts.tol;
    debug_assert_eq!(unrounded.len(), sol.w.len());
    sol
}

fn perturbed_start(dp: &DualProgram, free: &[usize], w: &[f64], seed: u64) -> Option<Vec<f64>> {
    let basis = null_space(&dp.a_eq.select_columns(free.iter()));
    if basis.ncols() == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DVector::from_fn(basis.ncols(), |_, _| rng.random_range(-1.0..1.0));
    let d = &basis * z;
    // Keep every free weight above half its current value.
    let scale =
        free.iter().enumerate().filter(|(c, _)| d[*c] < 0.0).map(|(c, &k)| -0.5 * w[k] / d[c]).fold(1.0, f64::min);
    let mut out = w.to_vec();
    for (c, &k) in free.iter().enumerate() {
        out[k] += scale * d[c];
    }
    Some(out)
}
