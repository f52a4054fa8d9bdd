//! Built-in reference problems.
//!
//! `example1` has triplets on objective and constraint coefficients and
//! exponents; `example2` additionally carries a triplet right-hand side.
//! The JSON forms live in `fixtures/` and are embedded here verbatim.

use crate::model::{ConstraintSpec, MultiGpProblem, Posynomial, Term, Triplet};

pub const EXAMPLE1_JSON: &str = include_str!("../fixtures/example1.gp.json");
pub const EXAMPLE2_JSON: &str = include_str!("../fixtures/example2.gp.json");

fn tri(low: f64, mid: f64, high: f64) -> Triplet {
    Triplet::new(low, mid, high).expect("fixture triplets are ordered")
}

/// `min (10,20,30) t1^(-3,-2,-1) t2^(2,3,4) t3^-1 + 40 t1 t2 + 40 t1 t2 t3`
/// subject to `(2,4,6) t1^-2 t2^-2 + t2^(-5,-4,-3) t3^-1 <= 1`.
pub fn example1() -> MultiGpProblem {
    MultiGpProblem {
        name: "example1".into(),
        variables: vec!["t1".into(), "t2".into(), "t3".into()],
        objective: Posynomial::new(vec![
            Term::new(tri(10.0, 20.0, 30.0))
                .with("t1", tri(-3.0, -2.0, -1.0))
                .with("t2", tri(2.0, 3.0, 4.0))
                .with("t3", -1.0),
            Term::new(40.0).with("t1", 1.0).with("t2", 1.0),
            Term::new(40.0).with("t1", 1.0).with("t2", 1.0).with("t3", 1.0),
        ]),
        constraints: vec![ConstraintSpec {
            body: Posynomial::new(vec![
                Term::new(tri(2.0, 4.0, 6.0)).with("t1", -2.0).with("t2", -2.0),
                Term::new(1.0).with("t2", tri(-5.0, -4.0, -3.0)).with("t3", -1.0),
            ]),
            rhs: 1.0.into(),
        }],
    }
}

/// `min (1,2,3) x1^(-4,-3,-2) x2^-1 x3 x4^-1 + (3,5,7) x1^-2 x2^(-3,-2,-1) x3^-2`
/// subject to `(2,2.5,3) x1^3 x3 + x1^-1 x3^-1 <= (3,4,5)` and
/// `x2^-1 x3^(-1,-2,-3) x4^-2 + (3,3.5,4) x1^2 x2 x4 <= 1`.
pub fn example2() -> MultiGpProblem {
    MultiGpProblem {
        name: "example2".into(),
        variables: vec!["x1".into(), "x2".into(), "x3".into(), "x4".into()],
        objective: Posynomial::new(vec![
            Term::new(tri(1.0, 2.0, 3.0))
                .with("x1", tri(-4.0, -3.0, -2.0))
                .with("x2", -1.0)
                .with("x3", 1.0)
                .with("x4", -1.0),
            Term::new(tri(3.0, 5.0, 7.0)).with("x1", -2.0).with("x2", tri(-3.0, -2.0, -1.0)).with("x3", -2.0),
        ]),
        constraints: vec![
            ConstraintSpec {
                body: Posynomial::new(vec![
                    Term::new(tri(2.0, 2.5, 3.0)).with("x1", 3.0).with("x3", 1.0),
                    Term::new(1.0).with("x1", -1.0).with("x3", -1.0),
                ]),
                rhs: tri(3.0, 4.0, 5.0),
            },
            ConstraintSpec {
                body: Posynomial::new(vec![
                    Term::new(1.0).with("x2", -1.0).with("x3", tri(-1.0, -2.0, -3.0)).with("x4", -2.0),
                    Term::new(tri(3.0, 3.5, 4.0)).with("x1", 2.0).with("x2", 1.0).with("x4", 1.0),
                ]),
                rhs: 1.0.into(),
            },
        ],
    }
}
