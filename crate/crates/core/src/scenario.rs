//! Scenario instantiation and normalization to standard form.
//!
//! The L, M and U programs read the same component (low, mid or high) at
//! every triplet site. [`instantiate_with`] generalizes this to an arbitrary
//! per-site choice, which the parameter sweep uses to walk all of `S`.

use std::fmt;
use std::str::FromStr;

use crate::model::{
    Component, ConcreteConstraint, ConcreteGp, ConcretePosynomial, Monomial, MultiGpProblem, Posynomial, Triplet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    Low,
    Mid,
    High,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Low, Scenario::Mid, Scenario::High];

    pub fn component(self) -> Component {
        match self {
            Scenario::Low => Component::Low,
            Scenario::Mid => Component::Mid,
            Scenario::High => Component::High,
        }
    }

    /// Short label: `L`, `M` or `U`.
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Low => "L",
            Scenario::Mid => "M",
            Scenario::High => "U",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L" | "LOW" => Ok(Scenario::Low),
            "M" | "MID" => Ok(Scenario::Mid),
            "U" | "H" | "HIGH" => Ok(Scenario::High),
            other => Err(format!("unknown scenario `{other}` (expected L, M or U)")),
        }
    }
}

/// Where a standard-form program came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Scenario(Scenario),
    /// One component choice per non-degenerate site, in [`ParameterSpace`] order.
    Combination(Vec<Component>),
    Generated {
        seed: u64,
    },
    Direct,
}

/// A concrete program with every constraint normalized to `... <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardGp {
    pub variables: Vec<String>,
    pub objective: ConcretePosynomial,
    pub constraints: Vec<ConcretePosynomial>,
    pub provenance: Provenance,
}

impl StandardGp {
    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_terms(&self) -> usize {
        self.objective.len() + self.constraints.iter().map(|c| c.len()).sum::<usize>()
    }

    /// Builds a standard program directly from scalar data.
    pub fn new(variables: Vec<String>, objective: ConcretePosynomial, constraints: Vec<ConcretePosynomial>) -> Self {
        Self { variables, objective, constraints, provenance: Provenance::Direct }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteKind {
    Coefficient,
    Exponent,
    Rhs,
}

/// A non-degenerate triplet inside a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub kind: SiteKind,
    pub location: String,
    pub triplet: Triplet,
}

/// The non-degenerate triplet sites of a problem; each offers three choices.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    pub sites: Vec<Site>,
}

impl ParameterSpace {
    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    /// `3^K`, or `None` if it overflows `u64`.
    pub fn num_combinations(&self) -> Option<u64> {
        3u64.checked_pow(u32::try_from(self.sites.len()).ok()?)
    }
}

/// Visits every triplet in a fixed order: objective terms (coefficient, then
/// exponents in variable order), then each constraint's terms, then its rhs.
fn visit_triplets(p: &MultiGpProblem, mut f: impl FnMut(SiteKind, String, &Triplet)) {
    let visit_posy = |loc: &str, posy: &Posynomial, f: &mut dyn FnMut(SiteKind, String, &Triplet)| {
        for (t, term) in posy.terms.iter().enumerate() {
            f(SiteKind::Coefficient, format!("{loc}.terms[{t}].coef"), &term.coefficient);
            for var in &p.variables {
                if let Some(e) = term.exponents.get(var) {
                    f(SiteKind::Exponent, format!("{loc}.terms[{t}].exponents.{var}"), e);
                }
            }
        }
    };
    visit_posy("objective", &p.objective, &mut f);
    for (i, c) in p.constraints.iter().enumerate() {
        let loc = format!("constraints[{i}]");
        visit_posy(&loc, &c.body, &mut f);
        f(SiteKind::Rhs, format!("{loc}.rhs"), &c.rhs);
    }
}

pub fn parameter_space(p: &MultiGpProblem) -> ParameterSpace {
    let mut sites = Vec::new();
    visit_triplets(p, |kind, location, t| {
        if !t.is_degenerate() {
            sites.push(Site { kind, location, triplet: *t });
        }
    });
    ParameterSpace { sites }
}

/// Replaces every non-degenerate triplet by the component `choose(k)`, where
/// `k` is the site's index in [`parameter_space`] order. Degenerate triplets
/// read their single value.
pub fn instantiate_with(p: &MultiGpProblem, choose: impl Fn(usize) -> Component) -> ConcreteGp {
    let mut site = 0usize;
    let mut pick = |t: &Triplet| {
        if t.is_degenerate() {
            t.low
        } else {
            let v = t.component(choose(site));
            site += 1;
            v
        }
    };
    // Order must match visit_triplets.
    let concrete_posy = |posy: &Posynomial, pick: &mut dyn FnMut(&Triplet) -> f64| {
        ConcretePosynomial::new(
            posy.terms
                .iter()
                .map(|term| {
                    let c = pick(&term.coefficient);
                    let exps = p.variables.iter().map(|v| term.exponents.get(v).map_or(0.0, &mut *pick)).collect();
                    Monomial::new(c, exps)
                })
                .collect(),
        )
    };
    let objective = concrete_posy(&p.objective, &mut pick);
    let constraints = p
        .constraints
        .iter()
        .map(|c| {
            let body = concrete_posy(&c.body, &mut pick);
            ConcreteConstraint { body, rhs: pick(&c.rhs) }
        })
        .collect();
    ConcreteGp { variables: p.variables.clone(), objective, constraints }
}

/// The L, M or U program: the same component at every site.
pub fn instantiate(p: &MultiGpProblem, s: Scenario) -> ConcreteGp {
    instantiate_with(p, |_| s.component())
}

/// Divides each constraint's coefficients by its right-hand side.
pub fn normalize(c: &ConcreteGp) -> StandardGp {
    StandardGp {
        variables: c.variables.clone(),
        objective: c.objective.clone(),
        constraints: c.constraints.iter().map(|k| k.body.divided(k.rhs)).collect(),
        provenance: Provenance::Direct,
    }
}

/// `normalize(instantiate(p, s))` tagged with its scenario.
pub fn standard_scenario(p: &MultiGpProblem, s: Scenario) -> StandardGp {
    StandardGp { provenance: Provenance::Scenario(s), ..normalize(&instantiate(p, s)) }
}
