//! Dense linear algebra used by the solvers.
//!
//! Everything here is sized for desk-scale programs (a few hundred rows at
//! most), so plain dense SVDs are used wherever rank matters.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

fn svd_cutoff(sv: &DVector<f64>, rows: usize, cols: usize) -> f64 {
    let smax = sv.iter().copied().fold(0.0, f64::max);
    RANK_TOL * smax * rows.max(cols).max(1) as f64
}

/// Minimum-norm least-squares solution of `a x = b` and the numerical rank of `a`.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, usize) {
    if a.ncols() == 0 {
        return (DVector::zeros(0), 0);
    }
    if a.nrows() == 0 {
        return (DVector::zeros(a.ncols()), 0);
    }
    let svd = a.clone().svd(true, true);
    let cut = svd_cutoff(&svd.singular_values, a.nrows(), a.ncols());
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let x = svd.solve(b, cut.max(f64::MIN_POSITIVE)).expect("U and V were computed");
    (x, rank)
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least n rows so the SVD returns a full V.
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("V was computed");
    let cut = svd_cutoff(&svd.singular_values, a.nrows(), n);
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cut)
        .map(|k| v_t.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `||a x - b||_2`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NnlsIterationLimit;

/// Lawson-Hanson active-set solution of `min ||a x - b||` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<NnlsSolution, NnlsIterationLimit> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.norm().max(1.0) * b.norm().max(1.0);
    let tol = 1e-13 * scale;
    let max_outer = 3 * n + 10;

    let sub_solve = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(idx.iter());
        let (z, _) = lstsq_min_norm(&sub, b);
        let mut s = DVector::zeros(n);
        for (k, &j) in idx.iter().enumerate() {
            s[j] = z[k];
        }
        s
    };

    for _ in 0..max_outer {
        let grad = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        let Some(t) = candidate.filter(|&t| grad[t] > tol) else {
            let residual = (a * &x - b).norm();
            return Ok(NnlsSolution { x, residual });
        };
        passive[t] = true;

        let mut inner = 0;
        loop {
            inner += 1;
            if inner > 3 * n + 10 {
                return Err(NnlsIterationLimit);
            }
            let s = sub_solve(&passive);
            if (0..n).filter(|&j| passive[j]).all(|j| s[j] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..n)
                .filter(|&j| passive[j] && s[j] <= 0.0)
                .map(|j| x[j] / (x[j] - s[j]))
                .fold(f64::INFINITY, f64::min);
            x += (s - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= tol.min(1e-14) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    Err(NnlsIterationLimit)
}

/// `phi(z) = ln sum_t exp(offset_t + rows_t . z)`.
#[derive(Debug, Clone)]
pub struct LseGroup {
    pub offsets: Vec<f64>,
    pub rows: DMatrix<f64>,
}

impl LseGroup {
    /// Value, gradient and softmax weights at `z`.
    fn eval(&self, z: &DVector<f64>) -> (f64, DVector<f64>, DVector<f64>) {
        let logits: Vec<f64> =
            (0..self.rows.nrows()).map(|t| self.offsets[t] + self.rows.row(t).dot(&z.transpose())).collect();
        let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
        let sum: f64 = e.iter().sum();
        let p = DVector::from_iterator(e.len(), e.iter().map(|v| v / sum));
        let grad = self.rows.transpose() * &p;
        (mx + sum.ln(), grad, p)
    }

    pub fn value(&self, z: &DVector<f64>) -> f64 {
        self.eval(z).0
    }
}

/// Moves `z` inside the affine set `z0 + basis s` to push every group value
/// to `<= -margin`, by damped Newton on `1/2 sum_i max(0, phi_i + margin)^2`
/// (convex in `s`). Returns the best point found.
pub fn reduce_lse_violation(groups: &[LseGroup], z0: &DVector<f64>, basis: &DMatrix<f64>, margin: f64) -> DVector<f64> {
    let dim = basis.ncols();
    let objective =
        |z: &DVector<f64>| -> f64 { groups.iter().map(|g| (g.value(z) + margin).max(0.0).powi(2)).sum::<f64>() * 0.5 };
    let mut s = DVector::zeros(dim);
    let mut z = z0.clone();
    let mut f = objective(&z);
    if dim == 0 || groups.is_empty() {
        return z;
    }
    for _ in 0..100 {
        if f == 0.0 {
            break;
        }
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for g in groups {
            let (phi, gz, p) = g.eval(&z);
            let r = phi + margin;
            if r <= 0.0 {
                continue;
            }
            let gs = basis.transpose() * &gz;
            grad += &gs * r;
            hess += &gs * gs.transpose();
            let rb = &g.rows * basis;
            let weighted = DMatrix::from_fn(rb.nrows(), dim, |t, c| rb[(t, c)] * p[t]);
            let curv = rb.transpose() * &weighted - (rb.transpose() * &p) * (rb.transpose() * &p).transpose();
            hess += curv * r;
        }
        if grad.norm() < 1e-15 {
            break;
        }
        let reg = 1e-12 * hess.diagonal().amax().max(1.0);
        for d in 0..dim {
            hess[(d, d)] += reg;
        }
        let (step, _) = lstsq_min_norm(&hess, &(-&grad));
        let slope = grad.dot(&step);
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha > 1e-12 {
            let s_try = &s + &step * alpha;
            let z_try = z0 + basis * &s_try;
            let f_try = objective(&z_try);
            if f_try <= f + 1e-4 * alpha * slope {
                s = s_try;
                z = z_try;
                f = f_try;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over every support set: the NNLS optimum is the best
    /// nonnegative unconstrained least-squares solution on some support.
    fn nnls_brute_force(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
        let n = a.ncols();
        let mut best = b.norm();
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let sub = a.select_columns(idx.iter());
            let (z, _) = lstsq_min_norm(&sub, b);
            if z.iter().all(|&v| v >= -1e-12) {
                best = best.min((&sub * z - b).norm());
            }
        }
        best
    }

    #[test]
    fn nnls_matches_unconstrained_when_positive() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let s = nnls(&a, &b).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-14 && (s.x[1] - 0.5).abs() < 1e-14);
        assert!(s.residual < 1e-14);
    }

    #[test]
    fn nnls_detects_inconsistent_nonnegative_system() {
        // w = 1 and w = 0 at once.
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let s = nnls(&a, &b).unwrap();
        assert!((s.residual - 0.5f64.sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn nnls_agrees_with_support_enumeration(
            vals in proptest::collection::vec(-3.0f64..3.0, 20),
            rhs in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let a = DMatrix::from_row_slice(4, 5, &vals[..20]);
            let b = DVector::from_vec(rhs);
            let s = nnls(&a, &b).unwrap();
            prop_assert!(s.x.iter().all(|&v| v >= 0.0));
            let brute = nnls_brute_force(&a, &b);
            prop_assert!((s.residual - brute).abs() <= 1e-8 * (1.0 + brute), "{} vs {}", s.residual, brute);
        }
    }

    #[test]
    fn null_space_is_orthogonal_complement_of_rows() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 2.0, 0.0]);
        let ns = null_space(&a);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).amax() < 1e-12);
        assert!((ns.transpose() * &ns - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn null_space_of_redundant_rows() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 2.0, 0.0, 2.0, 0.0, 1.0, 0.0]);
        assert_eq!(null_space(&a).ncols(), 1);
    }

    #[test]
    fn min_norm_on_rank_deficient_system() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let (x, rank) = lstsq_min_norm(&a, &b);
        assert_eq!(rank, 1);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violation_repair_moves_along_free_direction() {
        // phi(z) = ln(exp(z0) + exp(z1)); start at (1, 1), only z1 free.
        let g = LseGroup { offsets: vec![0.0, 0.0], rows: DMatrix::identity(2, 2) };
        let z0 = DVector::from_vec(vec![-1.0, 1.0]);
        let basis = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let z = reduce_lse_violation(std::slice::from_ref(&g), &z0, &basis, 1e-9);
        assert_eq!(z[0], -1.0);
        assert!(g.value(&z) <= 0.0);
    }
}
