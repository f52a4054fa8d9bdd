//! Posynomials, triplet-valued parameters and the multi-parameter GP problem.
//!
//! A [`MultiGpProblem`] carries every coefficient, exponent and right-hand
//! side as a [`Triplet`]. Selecting one component per triplet produces a
//! [`ConcreteGp`], which is what evaluation and the solvers work with.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;

use crate::error::ModelError;

/// A `{low, mid, high}` parameter value.
///
/// `mid` always lies between `low` and `high`. Coefficients and right-hand
/// sides must also be ascending; exponent triplets may run downward, so that
/// the low scenario can carry the larger exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub low: f64,
    pub mid: f64,
    pub high: f64,
}

impl Triplet {
    pub fn new(low: f64, mid: f64, high: f64) -> Result<Self, ModelError> {
        if !(low.is_finite() && mid.is_finite() && high.is_finite()) {
            return Err(ModelError::NonFinite { low, mid, high });
        }
        let t = Self { low, mid, high };
        if !t.is_monotone() {
            return Err(ModelError::TripletOrder { low, mid, high });
        }
        Ok(t)
    }

    /// Promotes a plain value to `{v, v, v}`.
    pub const fn scalar(v: f64) -> Self {
        Self { low: v, mid: v, high: v }
    }

    pub fn is_degenerate(&self) -> bool {
        self.low == self.high
    }

    /// `low <= mid <= high`.
    pub fn is_ascending(&self) -> bool {
        self.low <= self.mid && self.mid <= self.high
    }

    /// `mid` lies between `low` and `high`, in either direction.
    pub fn is_monotone(&self) -> bool {
        self.is_ascending() || (self.low >= self.mid && self.mid >= self.high)
    }

    pub fn is_finite(&self) -> bool {
        self.low.is_finite() && self.mid.is_finite() && self.high.is_finite()
    }

    /// Distance of `mid` from the average of the outer components.
    pub fn midpoint_deviation(&self) -> f64 {
        (self.mid - 0.5 * (self.low + self.high)).abs()
    }

    pub fn component(&self, choice: Component) -> f64 {
        match choice {
            Component::Low => self.low,
            Component::Mid => self.mid,
            Component::High => self.high,
        }
    }
}

impl From<f64> for Triplet {
    fn from(v: f64) -> Self {
        Self::scalar(v)
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() && self.mid == self.low {
            write!(f, "{}", self.low)
        } else {
            write!(f, "({}, {}, {})", self.low, self.mid, self.high)
        }
    }
}

/// Which component of a triplet to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Low,
    Mid,
    High,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Low, Component::Mid, Component::High];
}

/// One term `c * prod_j x_j^{a_j}` with triplet-valued parameters.
///
/// Variables missing from `exponents` have exponent zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: Triplet,
    pub exponents: IndexMap<String, Triplet>,
}

impl Term {
    pub fn new(coefficient: impl Into<Triplet>) -> Self {
        Self { coefficient: coefficient.into(), exponents: IndexMap::new() }
    }

    pub fn with(mut self, variable: &str, exponent: impl Into<Triplet>) -> Self {
        self.exponents.insert(variable.to_string(), exponent.into());
        self
    }

    pub fn exponent(&self, variable: &str) -> Triplet {
        self.exponents.get(variable).copied().unwrap_or(Triplet::scalar(0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posynomial {
    pub terms: Vec<Term>,
}

impl Posynomial {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }
}

/// A constraint `body <= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub body: Posynomial,
    pub rhs: Triplet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiGpProblem {
    pub name: String,
    pub variables: Vec<String>,
    pub objective: Posynomial,
    pub constraints: Vec<ConstraintSpec>,
}

impl MultiGpProblem {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}

/// A term with scalar parameters and a dense exponent row.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<f64>,
}

impl Monomial {
    pub fn new(coefficient: f64, exponents: Vec<f64>) -> Self {
        Self { coefficient, exponents }
    }

    /// `ln c + a . y` with `y = ln x`.
    pub fn log_value(&self, log_x: &[f64]) -> f64 {
        self.coefficient.ln() + dot(&self.exponents, log_x)
    }

    fn value_unchecked(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .filter(|(a, _)| **a != 0.0)
            .fold(self.coefficient, |acc, (a, xj)| acc * xj.powf(*a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcretePosynomial {
    pub terms: Vec<Monomial>,
}

impl ConcretePosynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Divides every coefficient by `b`.
    pub fn divided(&self, b: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| Monomial::new(t.coefficient / b, t.exponents.clone())).collect() }
    }

    /// Multiplies every coefficient by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| Monomial::new(t.coefficient * k, t.exponents.clone())).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteConstraint {
    pub body: ConcretePosynomial,
    pub rhs: f64,
}

/// One scenario of a [`MultiGpProblem`]: every parameter is a plain number.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteGp {
    pub variables: Vec<String>,
    pub objective: ConcretePosynomial,
    pub constraints: Vec<ConcreteConstraint>,
}

impl ConcreteGp {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    /// Where the finding applies, e.g. `objective.terms[0].coef`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.location, self.message)
    }
}

/// Outcome of [`validate_problem`]. Valid iff it holds no errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding { severity: Severity::Error, location: location.into(), message: message.into() });
    }

    fn warning(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding { severity: Severity::Warning, location: location.into(), message: message.into() });
    }
}

const MIDPOINT_TOL: f64 = 1e-9;

/// `positive` names a coefficient-like slot: strictly positive and ascending.
/// Exponent slots (`None`) only need to be monotone.
fn check_triplet(report: &mut ValidationReport, loc: &str, t: &Triplet, positive: Option<&str>) {
    if !t.is_finite() {
        report.error(loc, "triplet components must be finite");
        return;
    }
    match positive {
        Some(what) => {
            if !t.is_ascending() {
                report.error(loc, format!("triplet order violated: expected low <= mid <= high, got {t}"));
            }
            if !(t.low > 0.0 && t.mid > 0.0 && t.high > 0.0) {
                report.error(loc, format!("{what} must be positive"));
            }
        }
        None if !t.is_monotone() => {
            report.error(loc, format!("triplet order violated: mid must lie between low and high, got {t}"));
        }
        None => {}
    }
    if t.midpoint_deviation() > MIDPOINT_TOL * f64::max(1.0, (t.high - t.low).abs()) {
        report.warning(loc, format!("mid component of {t} is not the average of low and high"));
    }
}

fn check_posynomial(report: &mut ValidationReport, loc: &str, p: &Posynomial, known: &HashSet<&str>) {
    if p.terms.is_empty() {
        report.error(loc, "posynomial must have at least one term");
    }
    for (t, term) in p.terms.iter().enumerate() {
        let tloc = format!("{loc}.terms[{t}]");
        check_triplet(report, &format!("{tloc}.coef"), &term.coefficient, Some("coefficient"));
        for (var, e) in &term.exponents {
            let eloc = format!("{tloc}.exponents.{var}");
            if !known.contains(var.as_str()) {
                report.error(&eloc, format!("unknown variable `{var}`"));
            }
            check_triplet(report, &eloc, e, None);
        }
    }
}

/// Lists every structural violation, plus midpoint warnings.
pub fn validate_problem(p: &MultiGpProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    if p.variables.is_empty() {
        report.error("variables", "at least one variable is required");
    }
    let mut known = HashSet::new();
    for (j, v) in p.variables.iter().enumerate() {
        if v.is_empty() {
            report.error(format!("variables[{j}]"), "variable name must not be empty");
        }
        if !known.insert(v.as_str()) {
            report.error(format!("variables[{j}]"), format!("duplicate variable `{v}`"));
        }
    }
    check_posynomial(&mut report, "objective", &p.objective, &known);
    for (i, c) in p.constraints.iter().enumerate() {
        let loc = format!("constraints[{i}]");
        check_posynomial(&mut report, &loc, &c.body, &known);
        check_triplet(&mut report, &format!("{loc}.rhs"), &c.rhs, Some("right-hand side"));
    }
    report
}

fn check_positive(x: &[f64]) -> Result<(), ModelError> {
    match x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        Some((index, value)) => Err(ModelError::NonPositiveVariable { index, value: *value }),
        None => Ok(()),
    }
}

/// `sum_t c_t prod_j x_j^{a_tj}` for `x > 0`.
pub fn evaluate_posynomial(g: &ConcretePosynomial, x: &[f64]) -> Result<f64, ModelError> {
    check_positive(x)?;
    for term in &g.terms {
        if term.exponents.len() != x.len() {
            return Err(ModelError::DimensionMismatch { expected: term.exponents.len(), actual: x.len() });
        }
    }
    Ok(g.terms.iter().map(|t| t.value_unchecked(x)).sum())
}

/// `g_i(x) / b_i - 1` per constraint; nonpositive entries are satisfied.
pub fn constraint_residuals(p: &ConcreteGp, x: &[f64]) -> Result<Vec<f64>, ModelError> {
    check_positive(x)?;
    p.constraints.iter().map(|c| Ok(evaluate_posynomial(&c.body, x)? / c.rhs - 1.0)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example1, example2};

    #[test]
    fn example1_is_valid_without_warnings() {
        let report = validate_problem(&example1());
        assert!(report.findings.is_empty(), "{:?}", report.findings);
    }

    #[test]
    fn example2_with_descending_exponent_is_valid() {
        assert!(validate_problem(&example2()).findings.is_empty());
    }

    #[test]
    fn zero_low_coefficient_is_rejected() {
        let mut p = example1();
        p.objective.terms[0].coefficient = Triplet::new(0.0, 1.0, 2.0).unwrap();
        let report = validate_problem(&p);
        assert!(!report.is_valid());
        let err = report.errors().next().unwrap();
        assert_eq!(err.location, "objective.terms[0].coef");
        assert!(err.message.contains("coefficient must be positive"));
    }

    #[test]
    fn off_center_mid_is_only_a_warning() {
        let mut p = example1();
        p.objective.terms[1].coefficient = Triplet::new(1.0, 3.0, 4.0).unwrap();
        let report = validate_problem(&p);
        assert!(report.is_valid());
        assert_eq!(report.warnings().count(), 1);
    }

    #[test]
    fn structural_errors_are_all_listed() {
        let mut p = example1();
        p.variables.push("t1".into());
        p.objective.terms[1].exponents.insert("z".into(), 1.0.into());
        p.constraints[0].rhs = Triplet::scalar(-1.0);
        p.constraints[0].body.terms.clear();
        let report = validate_problem(&p);
        let msgs: Vec<_> = report.errors().map(|f| f.message.clone()).collect();
        assert_eq!(msgs.len(), 4, "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("duplicate")));
        assert!(msgs.iter().any(|m| m.contains("unknown variable `z`")));
        assert!(msgs.iter().any(|m| m.contains("right-hand side must be positive")));
        assert!(msgs.iter().any(|m| m.contains("at least one term")));
    }

    #[test]
    fn descending_triplets_only_allowed_for_exponents() {
        let mut p = example1();
        p.objective.terms[0].exponents.insert("t3".into(), Triplet::new(-1.0, -2.0, -3.0).unwrap());
        assert!(validate_problem(&p).is_valid());
        p.objective.terms[1].coefficient = Triplet::new(3.0, 2.0, 1.0).unwrap();
        let report = validate_problem(&p);
        let err = report.errors().next().unwrap();
        assert_eq!(err.location, "objective.terms[1].coef");
        assert!(err.message.contains("triplet order violated"));
    }

    #[test]
    fn triplet_constructor_checks_order() {
        assert!(Triplet::new(2.0, 1.0, 3.0).is_err());
        assert!(Triplet::new(-1.0, -2.0, -3.0).is_ok());
        assert!(Triplet::new(1.0, f64::NAN, 3.0).is_err());
        assert!(Triplet::scalar(4.0).is_degenerate());
    }

    #[test]
    fn constant_monomial_evaluates_to_coefficient() {
        let g = ConcretePosynomial::new(vec![Monomial::new(5.0, vec![0.0, 0.0])]);
        assert_eq!(evaluate_posynomial(&g, &[0.3, 7.0]).unwrap(), 5.0);
    }

    #[test]
    fn x_plus_inverse_at_one() {
        let g = ConcretePosynomial::new(vec![Monomial::new(1.0, vec![1.0]), Monomial::new(1.0, vec![-1.0])]);
        assert_eq!(evaluate_posynomial(&g, &[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn nonpositive_point_is_a_domain_error() {
        let g = ConcretePosynomial::new(vec![Monomial::new(1.0, vec![1.0])]);
        assert_eq!(evaluate_posynomial(&g, &[0.0]), Err(ModelError::NonPositiveVariable { index: 0, value: 0.0 }));
    }

    #[test]
    fn residual_of_simple_bound() {
        let gp = ConcreteGp {
            variables: vec!["x".into()],
            objective: ConcretePosynomial::new(vec![Monomial::new(1.0, vec![-1.0])]),
            constraints: vec![ConcreteConstraint {
                body: ConcretePosynomial::new(vec![Monomial::new(1.0, vec![1.0])]),
                rhs: 2.0,
            }],
        };
        assert_eq!(constraint_residuals(&gp, &[1.0]).unwrap(), vec![-0.5]);
        let free = ConcreteGp { constraints: vec![], ..gp };
        assert!(constraint_residuals(&free, &[1.0]).unwrap().is_empty());
    }
}
