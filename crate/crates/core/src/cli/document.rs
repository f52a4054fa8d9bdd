//! The JSON problem file.
//!
//! ```json
//! { "name": "demo",
//!   "variables": ["x", "y"],
//!   "objective": { "terms": [ { "coef": [1, 2, 3], "exponents": { "x": -1 } } ] },
//!   "constraints": [ { "terms": [ { "coef": 1, "exponents": { "x": 1, "y": [-2, -1, 0] } } ], "rhs": 4 } ] }
//! ```
//!
//! Every numeric slot is a scalar or a `[low, mid, high]` array.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_problem, ConstraintSpec, MultiGpProblem, Posynomial, Term, Triplet, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Slot {
    Scalar(f64),
    Triplet([f64; 3]),
}

impl From<Slot> for Triplet {
    fn from(s: Slot) -> Self {
        // Order is checked by validation, which reports every site at once.
        match s {
            Slot::Scalar(v) => Triplet { low: v, mid: v, high: v },
            Slot::Triplet([low, mid, high]) => Triplet { low, mid, high },
        }
    }
}

impl From<Triplet> for Slot {
    fn from(t: Triplet) -> Self {
        if t.low == t.mid && t.mid == t.high {
            Slot::Scalar(t.low)
        } else {
            Slot::Triplet([t.low, t.mid, t.high])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub coef: Slot,
    #[serde(default)]
    pub exponents: IndexMap<String, Slot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosynomialDocument {
    pub terms: Vec<TermDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDocument {
    pub terms: Vec<TermDocument>,
    pub rhs: Slot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub name: String,
    pub variables: Vec<String>,
    pub objective: PosynomialDocument,
    #[serde(default)]
    pub constraints: Vec<ConstraintDocument>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{path}: {message} at line {line} column {column}")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("invalid problem:\n  {}", .findings.join("\n  "))]
    Invalid { findings: Vec<String> },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn terms_to_model(terms: &[TermDocument]) -> Posynomial {
    Posynomial::new(
        terms
            .iter()
            .map(|t| Term {
                coefficient: t.coef.into(),
                exponents: t.exponents.iter().map(|(k, v)| (k.clone(), (*v).into())).collect(),
            })
            .collect(),
    )
}

fn terms_to_document(p: &Posynomial) -> Vec<TermDocument> {
    p.terms
        .iter()
        .map(|t| TermDocument {
            coef: t.coefficient.into(),
            exponents: t.exponents.iter().map(|(k, v)| (k.clone(), (*v).into())).collect(),
        })
        .collect()
}

impl ProblemDocument {
    pub fn to_model(&self) -> MultiGpProblem {
        MultiGpProblem {
            name: self.name.clone(),
            variables: self.variables.clone(),
            objective: terms_to_model(&self.objective.terms),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintSpec { body: terms_to_model(&c.terms), rhs: c.rhs.into() })
                .collect(),
        }
    }

    pub fn from_model(p: &MultiGpProblem) -> Self {
        Self {
            name: p.name.clone(),
            variables: p.variables.clone(),
            objective: PosynomialDocument { terms: terms_to_document(&p.objective) },
            constraints: p
                .constraints
                .iter()
                .map(|c| ConstraintDocument { terms: terms_to_document(&c.body), rhs: c.rhs.into() })
                .collect(),
        }
    }
}

/// Parses and validates a problem file, keeping validation warnings.
pub fn parse_document(text: &str) -> Result<(MultiGpProblem, ValidationReport), ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ProblemDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ParseError::Syntax {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        }
    })?;
    let problem = doc.to_model();
    let report = validate_problem(&problem);
    if !report.is_valid() {
        return Err(ParseError::Invalid { findings: report.errors().map(|f| f.to_string()).collect() });
    }
    Ok((problem, report))
}

pub fn parse_problem(text: &str) -> Result<MultiGpProblem, ParseError> {
    parse_document(text).map(|(p, _)| p)
}

/// Pretty JSON in the problem-file format; degenerate triplets print as scalars.
pub fn serialize_problem(p: &MultiGpProblem) -> String {
    serde_json::to_string_pretty(&ProblemDocument::from_model(p)).expect("documents always serialize")
}
