//! Checks shared by the property tests and the acceptance harness.
#![allow(dead_code)]

use nalgebra::DVector;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use posygp::dual::{dual_gradient, dual_log_objective};
use posygp::linalg::null_space;
use posygp::model::{evaluate_posynomial, ConcretePosynomial};
use posygp::oracle::generate_with_point;
use posygp::solver::{find_feasible_weights, Feasibility};
use posygp::{build_dual, solve_standard, DualProgram, SolverOptions, StandardGp};

pub const POINTS: usize = 100;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Generated instances with a positive dual null space, cycling through seeds.
pub fn instance(k: u64) -> (StandardGp, Vec<f64>) {
    generate_with_point(3, 2, 3, 1000 + k)
}

/// Strictly positive dual-feasible point and a null-space basis of the equality rows.
pub fn dual_interior(dp: &DualProgram) -> Option<(Vec<f64>, nalgebra::DMatrix<f64>)> {
    match find_feasible_weights(dp) {
        Ok(Feasibility::Feasible(p)) if p.w.iter().all(|&v| v > 0.0) => Some((p.w, null_space(&dp.a_eq))),
        _ => None,
    }
}

/// Random feasible point that keeps every weight above a tenth of the centre's.
pub fn feasible_near(centre: &[f64], basis: &nalgebra::DMatrix<f64>, rng: &mut impl Rng) -> Vec<f64> {
    let z = DVector::from_fn(basis.ncols(), |_, _| rng.random_range(-1.0..1.0));
    let d = basis * z;
    let t_max = centre
        .iter()
        .zip(d.iter())
        .filter(|(_, &dk)| dk < 0.0)
        .map(|(&c, &dk)| 0.9 * c / -dk)
        .fold(f64::INFINITY, f64::min);
    let t = rng.random_range(0.0..1.0) * t_max.min(1e6);
    centre.iter().zip(d.iter()).map(|(&c, &dk)| c + t * dk).collect()
}

/// Central differences against the analytic gradient.
pub fn gradient_check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for k in 0..POINTS as u64 {
        let dp = build_dual(&instance(k % 10).0);
        let w: Vec<f64> = (0..dp.num_weights()).map(|_| rng.random_range(0.05..1.5)).collect();
        let g = dual_gradient(&dp, &w).map_err(|e| e.to_string())?;
        for j in 0..w.len() {
            let h = 1e-6 * w[j];
            let mut up = w.clone();
            let mut down = w.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (dual_log_objective(&dp, &up).unwrap() - dual_log_objective(&dp, &down).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs() / g[j].abs().max(1.0));
        }
    }
    if worst <= 1e-6 {
        Ok(format!("{POINTS} points, worst relative error {worst:.2e}"))
    } else {
        Err(format!("worst relative error {worst:.2e} exceeds 1e-6"))
    }
}

/// `v(θa + (1-θ)b) >= θ v(a) + (1-θ) v(b)` on feasible pairs.
pub fn concavity_check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = f64::INFINITY;
    let mut pairs = 0;
    for k in 0..POINTS as u64 {
        let dp = build_dual(&instance(k % 10).0);
        let (centre, basis) = dual_interior(&dp).ok_or("no interior dual point")?;
        let a = feasible_near(&centre, &basis, &mut rng);
        let b = feasible_near(&centre, &basis, &mut rng);
        let theta = rng.random_range(0.0..1.0);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| theta * x + (1.0 - theta) * y).collect();
        let v = |w: &[f64]| dual_log_objective(&dp, w).unwrap();
        let margin = v(&mix) - (theta * v(&a) + (1.0 - theta) * v(&b));
        worst = worst.min(margin);
        pairs += 1;
    }
    if worst >= -1e-12 {
        Ok(format!("{pairs} pairs, smallest margin {worst:.2e}"))
    } else {
        Err(format!("concavity violated by {:.2e}", -worst))
    }
}

fn feasible_x(g: &StandardGp, x0: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = x0.iter().map(|v| v * rng.random_range(-0.5f64..0.5).exp()).collect();
        if g.constraints.iter().all(|c| evaluate_posynomial(c, &x).unwrap() <= 1.0) {
            return x;
        }
    }
}

/// Every feasible dual value bounds every feasible primal value from below.
pub fn weak_duality_check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = f64::INFINITY;
    for k in 0..POINTS as u64 {
        let (g, x0) = instance(k % 10);
        let dp = build_dual(&g);
        let (centre, basis) = dual_interior(&dp).ok_or("no interior dual point")?;
        let w = feasible_near(&centre, &basis, &mut rng);
        let x = feasible_x(&g, &x0, &mut rng);
        let dual = dual_log_objective(&dp, &w).unwrap();
        let primal = evaluate_posynomial(&g.objective, &x).unwrap().ln();
        worst = worst.min(primal - dual);
    }
    if worst >= -1e-12 {
        Ok(format!("{POINTS} pairs, smallest ln f0(x) - v(w) = {worst:.3e}"))
    } else {
        Err(format!("weak duality violated by {:.2e}", -worst))
    }
}

/// Scaling the objective by `k` adds `ln k` to the log-dual and leaves the maximizer alone.
pub fn scaling_check() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let opts = SolverOptions::default();
    let mut shift_err: f64 = 0.0;
    let mut weight_err: f64 = 0.0;
    for k in 0..POINTS as u64 {
        let (g, _) = instance(k % 10);
        let factor = 10f64.powf(rng.random_range(-3.0..3.0));
        let mut scaled = g.clone();
        scaled.objective = ConcretePosynomial::scaled(&g.objective, factor);
        let (dp, dps) = (build_dual(&g), build_dual(&scaled));
        let (centre, basis) = dual_interior(&dp).ok_or("no interior dual point")?;
        let w = feasible_near(&centre, &basis, &mut rng);
        let shift = dual_log_objective(&dps, &w).unwrap() - dual_log_objective(&dp, &w).unwrap();
        shift_err = shift_err.max((shift - factor.ln()).abs());
        if k < 10 {
            let a = solve_standard(&g, &opts).map_err(|e| e.to_string())?;
            let b = solve_standard(&scaled, &opts).map_err(|e| e.to_string())?;
            shift_err = shift_err.max((b.dual.log_dual_value - a.dual.log_dual_value - factor.ln()).abs());
            for (x, y) in a.dual.w.iter().zip(&b.dual.w) {
                weight_err = weight_err.max((x - y).abs());
            }
        }
    }
    if shift_err <= 1e-9 && weight_err <= 1e-6 {
        Ok(format!("{POINTS} factors, shift error {shift_err:.2e}, argmax weight drift {weight_err:.2e}"))
    } else {
        Err(format!("shift error {shift_err:.2e}, weight drift {weight_err:.2e}"))
    }
}
