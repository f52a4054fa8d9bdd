use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual::build_dual;
use crate::model::{ConcretePosynomial, Monomial};
use crate::scenario::{Provenance, StandardGp};
use crate::solver::{find_feasible_weights, Feasibility};

/// Draws made before the last draw is returned as is.
pub const GENERATOR_ATTEMPTS: usize = 1000;

fn coefficient(rng: &mut impl Rng) -> f64 {
    // Log-uniform on [0.1, 10].
    10f64.powf(rng.random_range(-1.0..=1.0))
}

fn exponents(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-3i32..=3) as f64).collect();
        if a.iter().any(|&v| v != 0.0) {
            return a;
        }
    }
}

fn posynomial(rng: &mut impl Rng, n: usize, terms: usize) -> ConcretePosynomial {
    ConcretePosynomial::new((0..terms).map(|_| Monomial::new(coefficient(rng), exponents(rng, n))).collect())
}

fn draw(rng: &mut impl Rng, n: usize, m: usize, terms: usize, seed: u64) -> (StandardGp, Vec<f64>) {
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0f64).exp()).collect();
    let objective = posynomial(rng, n, terms);
    let constraints = (0..m)
        .map(|_| {
            let p = posynomial(rng, n, terms);
            let at_x0 = crate::model::evaluate_posynomial(&p, &x0).expect("x0 is positive");
            p.scaled(0.5 / at_x0)
        })
        .collect();
    let g = StandardGp {
        variables: (1..=n).map(|j| format!("x{j}")).collect(),
        objective,
        constraints,
        provenance: Provenance::Generated { seed },
    };
    (g, x0)
}

/// A random standard-form program with `n` variables, `m` constraints and
/// `terms` terms in every posynomial.
///
/// Coefficients are log-uniform on [0.1, 10] and exponents integers in
/// [-3, 3] with at least one nonzero per term. A point `x0` is drawn first
/// and each constraint is scaled so that `g_i(x0) = 0.5`.
///
/// Draws whose dual has no strictly positive feasible point are rejected, so
/// the primal minimum is attained. Each attempt reseeds from `seed` and the
/// attempt number; after [`GENERATOR_ATTEMPTS`] the last draw is returned
/// unchecked (this only happens when there are too few terms for a bounded
/// problem).
pub fn generate_random_gp(n: usize, m: usize, terms: usize, seed: u64) -> StandardGp {
    generate_with_point(n, m, terms, seed).0
}

/// [`generate_random_gp`] together with its interior point `x0`.
pub fn generate_with_point(n: usize, m: usize, terms: usize, seed: u64) -> (StandardGp, Vec<f64>) {
    assert!(n >= 1 && m >= 1 && terms >= 1, "generator needs n, m, terms >= 1");
    let mut last = None;
    for attempt in 0..GENERATOR_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let drawn = draw(&mut rng, n, m, terms, seed);
        if attained(&drawn.0) {
            return drawn;
        }
        last = Some(drawn);
    }
    last.expect("at least one attempt")
}

fn attained(g: &StandardGp) -> bool {
    match find_feasible_weights(&build_dual(g)) {
        Ok(Feasibility::Feasible(p)) => p.forced_zero.iter().all(|z| !z),
        _ => false,
    }
}
