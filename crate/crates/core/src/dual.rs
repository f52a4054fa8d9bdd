//! The dual of a standard-form GP.
//!
//! One weight per primal term, grouped in blocks: block 0 is the objective,
//! block `i >= 1` is constraint `i`. The dual maximizes the concave
//!
//! ```text
//! v(w) = sum_t w_0t ln(c_0t / w_0t) + sum_{i>=1} [ sum_t w_it ln(d_it / w_it) + l_i ln l_i ]
//! ```
//!
//! with `l_i = sum_t w_it`, subject to normality (`sum_t w_0t = 1`),
//! orthogonality (`sum_it a_itj w_it = 0` for every variable `j`) and `w >= 0`.
//! `0 ln 0` is taken as 0 everywhere, so `v` is continuous on the closed orthant.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::ModelError;
use crate::scenario::StandardGp;

#[derive(Debug, Clone, PartialEq)]
pub struct DualProgram {
    pub variables: Vec<String>,
    /// `[T_0, T_1, ..., T_m]`.
    pub block_sizes: Vec<usize>,
    block_starts: Vec<usize>,
    /// `c_0t` for the objective block, `d_it` for constraint blocks.
    pub coefficients: Vec<f64>,
    /// `N x n`, row per flattened term.
    pub exponents: DMatrix<f64>,
    /// Normality row followed by one orthogonality row per variable.
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

impl DualProgram {
    pub fn num_weights(&self) -> usize {
        self.coefficients.len()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Number of constraint blocks, `m`.
    pub fn num_constraints(&self) -> usize {
        self.block_sizes.len() - 1
    }

    /// Index range of block `i` in the flattened weight vector.
    pub fn block(&self, i: usize) -> Range<usize> {
        self.block_starts[i]..self.block_starts[i] + self.block_sizes[i]
    }

    /// Block index of flattened weight `k`.
    pub fn block_of(&self, k: usize) -> usize {
        self.block_starts.partition_point(|&s| s <= k) - 1
    }

    /// Report label for weight `k`, e.g. `w01` or `w12`.
    pub fn weight_label(&self, k: usize) -> String {
        let i = self.block_of(k);
        let t = k - self.block_starts[i] + 1;
        if i < 10 && t < 10 {
            format!("w{i}{t}")
        } else {
            format!("w{i}_{t}")
        }
    }

    /// `l_i = sum_t w_it` for `i = 1..m`.
    pub fn lambdas(&self, w: &[f64]) -> Vec<f64> {
        (1..self.block_sizes.len()).map(|i| w[self.block(i)].iter().sum()).collect()
    }

    /// `A_eq w - b_eq`.
    pub fn equality_residual(&self, w: &[f64]) -> DVector<f64> {
        &self.a_eq * DVector::from_column_slice(w) - &self.b_eq
    }

    fn check_len(&self, w: &[f64]) -> Result<(), ModelError> {
        if w.len() != self.num_weights() {
            return Err(ModelError::DimensionMismatch { expected: self.num_weights(), actual: w.len() });
        }
        Ok(())
    }

    /// Hessian of `v` at a strictly positive `w`. Block diagonal:
    /// `-diag(1/w)` on the objective block and `-diag(1/w) + (1/l_i) 11^T`
    /// on constraint block `i`.
    pub fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.num_weights();
        let mut h = DMatrix::zeros(n, n);
        for k in 0..n {
            h[(k, k)] = -1.0 / w[k];
        }
        for i in 1..self.block_sizes.len() {
            let r = self.block(i);
            let lambda: f64 = w[r.clone()].iter().sum();
            for a in r.clone() {
                for b in r.clone() {
                    h[(a, b)] += 1.0 / lambda;
                }
            }
        }
        h
    }
}

/// Assembles the dual of `g`.
pub fn build_dual(g: &StandardGp) -> DualProgram {
    let n = g.num_variables();
    let blocks: Vec<_> = std::iter::once(&g.objective).chain(&g.constraints).collect();
    let block_sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    let mut block_starts = Vec::with_capacity(block_sizes.len());
    let mut acc = 0;
    for s in &block_sizes {
        block_starts.push(acc);
        acc += s;
    }
    let total = acc;

    let terms: Vec<_> = blocks.iter().flat_map(|b| b.terms.iter()).collect();
    let coefficients = terms.iter().map(|t| t.coefficient).collect();
    let exponents = DMatrix::from_fn(total, n, |k, j| terms[k].exponents[j]);

    let mut a_eq = DMatrix::zeros(n + 1, total);
    for k in 0..block_sizes[0] {
        a_eq[(0, k)] = 1.0;
    }
    for j in 0..n {
        for k in 0..total {
            a_eq[(j + 1, k)] = exponents[(k, j)];
        }
    }
    let mut b_eq = DVector::zeros(n + 1);
    b_eq[0] = 1.0;

    DualProgram { variables: g.variables.clone(), block_sizes, block_starts, coefficients, exponents, a_eq, b_eq }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `v(w)` for any `w >= 0`; feasibility is not required.
pub fn dual_log_objective(dp: &DualProgram, w: &[f64]) -> Result<f64, ModelError> {
    dp.check_len(w)?;
    if let Some((index, value)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(ModelError::NegativeWeight { index, value: *value });
    }
    let terms: f64 =
        w.iter().zip(&dp.coefficients).map(|(&wk, &ck)| if wk == 0.0 { 0.0 } else { wk * ck.ln() - xlogx(wk) }).sum();
    let lambdas: f64 = dp.lambdas(w).into_iter().map(xlogx).sum();
    Ok(terms + lambdas)
}

/// Gradient of `v` at a strictly positive `w`.
pub fn dual_gradient(dp: &DualProgram, w: &[f64]) -> Result<Vec<f64>, ModelError> {
    dp.check_len(w)?;
    if let Some((index, value)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(ModelError::ZeroWeight { index, value: *value });
    }
    let mut grad = vec![0.0; w.len()];
    for k in dp.block(0) {
        grad[k] = dp.coefficients[k].ln() - w[k].ln() - 1.0;
    }
    for (i, lambda) in (1..dp.block_sizes.len()).zip(dp.lambdas(w)) {
        for k in dp.block(i) {
            grad[k] = dp.coefficients[k].ln() + (lambda / w[k]).ln();
        }
    }
    Ok(grad)
}

/// `N - (n + 1)`; negative when the dual system is over-determined.
pub fn degrees_of_difficulty(g: &StandardGp) -> i64 {
    g.num_terms() as i64 - (g.num_variables() as i64 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example1, example2};
    use crate::model::{ConcretePosynomial, Monomial};
    use crate::scenario::{standard_scenario, Scenario};

    pub(crate) fn x_plus_inverse() -> StandardGp {
        StandardGp::new(
            vec!["x".into()],
            ConcretePosynomial::new(vec![Monomial::new(1.0, vec![1.0]), Monomial::new(1.0, vec![-1.0])]),
            vec![],
        )
    }

    #[test]
    fn example1_low_dual_shape() {
        let dp = build_dual(&standard_scenario(&example1(), Scenario::Low));
        assert_eq!(dp.num_weights(), 5);
        assert_eq!(dp.a_eq.nrows(), 4);
        let row: Vec<f64> = dp.a_eq.row(1).iter().copied().collect();
        assert_eq!(row, vec![-3.0, 1.0, 1.0, -2.0, 0.0]);
        // Built from the primal exponent +2 on t2.
        let row: Vec<f64> = dp.a_eq.row(2).iter().copied().collect();
        assert_eq!(row, vec![2.0, 1.0, 1.0, -2.0, -5.0]);
        assert_eq!(dp.b_eq.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn example2_low_dual_shape() {
        let dp = build_dual(&standard_scenario(&example2(), Scenario::Low));
        assert_eq!(dp.num_weights(), 6);
        assert_eq!(dp.a_eq.nrows(), 5);
        let row: Vec<f64> = dp.a_eq.row(4).iter().copied().collect();
        assert_eq!(row, vec![-1.0, 0.0, 0.0, 0.0, -2.0, 1.0]);
        assert_eq!(dp.coefficients[2], 2.0 / 3.0);
        assert_eq!(dp.weight_label(4), "w21");
        assert_eq!(dp.block_of(4), 2);
        assert_eq!(dp.block_of(0), 0);
    }

    #[test]
    fn two_term_dual_is_square() {
        let dp = build_dual(&x_plus_inverse());
        assert_eq!(dp.a_eq, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]));
        assert_eq!(dp.b_eq.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn log_objective_at_reference_example1_weights() {
        let dp = build_dual(&standard_scenario(&example1(), Scenario::Low));
        let w = [0.1410885, 0.5767344, 0.2821770, 0.2178230, 0.1410885];
        let v = dual_log_objective(&dp, &w).unwrap();
        assert!((v - 125.9045f64.ln()).abs() < 1e-3, "v = {v}");
    }

    #[test]
    fn am_gm_value_and_gradient() {
        let dp = build_dual(&x_plus_inverse());
        let v = dual_log_objective(&dp, &[0.5, 0.5]).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let g = dual_gradient(&dp, &[0.5, 0.5]).unwrap();
        let want = 2f64.ln() - 1.0;
        assert!((g[0] - want).abs() < 1e-15 && (g[1] - want).abs() < 1e-15);
    }

    #[test]
    fn empty_block_contributes_nothing() {
        let dp = build_dual(&standard_scenario(&example2(), Scenario::Low));
        let w = [0.5, 0.5, 0.0, 0.0, 0.3, 0.2];
        let full = dual_log_objective(&dp, &w).unwrap();
        let manual = 0.5 * (1.0f64 / 0.5).ln()
            + 0.5 * (3.0f64 / 0.5).ln()
            + 0.3 * (1.0f64 / 0.3).ln()
            + 0.2 * (3.0f64 / 0.2).ln()
            + 0.5 * 0.5f64.ln();
        assert!((full - manual).abs() < 1e-14);
    }

    #[test]
    fn gradient_vanishes_when_weights_match_coefficient_shares() {
        // Constraint block with d = w / l gives zero partials.
        let dp = build_dual(&standard_scenario(&example2(), Scenario::Low));
        let mut w = vec![0.5, 0.5, 0.2, 0.6, 0.3, 0.2];
        let lambda = w[2] + w[3];
        let mut dp2 = dp.clone();
        dp2.coefficients[2] = w[2] / lambda;
        dp2.coefficients[3] = w[3] / lambda;
        let g = dual_gradient(&dp2, &w).unwrap();
        assert!(g[2].abs() < 1e-15 && g[3].abs() < 1e-15);
        w[0] = 0.0;
        assert!(dual_gradient(&dp, &w).is_err());
    }

    #[test]
    fn negative_weight_is_a_domain_error() {
        let dp = build_dual(&x_plus_inverse());
        assert_eq!(dual_log_objective(&dp, &[1.5, -0.5]), Err(ModelError::NegativeWeight { index: 1, value: -0.5 }));
    }

    #[test]
    fn degrees_of_difficulty_counts() {
        assert_eq!(degrees_of_difficulty(&standard_scenario(&example1(), Scenario::Low)), 1);
        assert_eq!(degrees_of_difficulty(&standard_scenario(&example2(), Scenario::Mid)), 1);
        assert_eq!(degrees_of_difficulty(&x_plus_inverse()), 0);
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let dp = build_dual(&standard_scenario(&example2(), Scenario::High));
        let w = [0.3, 0.7, 0.2, 0.4, 0.9, 0.5];
        let h = dp.hessian(&w);
        let eps = 1e-6;
        for k in 0..w.len() {
            let mut wp = w;
            let mut wm = w;
            wp[k] += eps;
            wm[k] -= eps;
            let gp = dual_gradient(&dp, &wp).unwrap();
            let gm = dual_gradient(&dp, &wm).unwrap();
            for r in 0..w.len() {
                let fd = (gp[r] - gm[r]) / (2.0 * eps);
                assert!((fd - h[(r, k)]).abs() < 1e-6 * f64::max(1.0, h[(r, k)].abs()));
            }
        }
    }
}
