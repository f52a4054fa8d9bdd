//! Run reports and their text and JSON renderings.

use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEcho {
    pub name: String,
    pub variables: Vec<String>,
    pub objective_terms: usize,
    pub constraints: usize,
    pub parameter_sites: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub dual_value: f64,
    pub primal_value: f64,
    pub relative_gap: f64,
    pub max_constraint_violation: f64,
    pub complementarity_slack: f64,
    pub complementarity_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    /// `L`, `M` or `U`.
    pub scenario: String,
    /// `CERTIFIED`, `GAP_TOO_LARGE`, `INFEASIBLE_PRIMAL`,
    /// `DEGENERATE_WEIGHTS`, `INFEASIBLE_DUAL` or `NONCONVERGED`.
    pub status: String,
    pub dual_value: Option<f64>,
    pub degrees_of_difficulty: i64,
    pub method: Option<String>,
    pub iterations: Option<usize>,
    /// `None` when not finite.
    pub kkt_residual: Option<f64>,
    pub weights: IndexMap<String, f64>,
    pub lambda: IndexMap<String, f64>,
    pub x: IndexMap<String, f64>,
    pub unique_primal: Option<bool>,
    pub certificate: Option<CertificateReport>,
    pub message: Option<String>,
    /// Only filled in on request, so that reports stay reproducible.
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub scenario: String,
    pub oracle_value: Option<f64>,
    /// `|dual - oracle| / dual`.
    pub relative_difference: Option<f64>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepExtreme {
    pub value: f64,
    pub index: usize,
    /// One letter per site, e.g. `LMU`.
    pub combo: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub index: usize,
    pub combo: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub sites: usize,
    pub combinations: usize,
    pub min: Option<SweepExtreme>,
    pub max: Option<SweepExtreme>,
    pub all_low: Option<f64>,
    pub all_mid: Option<f64>,
    pub all_high: Option<f64>,
    pub low_attains_min: Option<bool>,
    pub low_attains_max: Option<bool>,
    pub high_attains_min: Option<bool>,
    pub high_attains_max: Option<bool>,
    pub failures: Vec<SweepFailure>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub problem: ProblemEcho,
    pub scenarios: Vec<ScenarioReport>,
    pub oracle: Option<Vec<OracleComparison>>,
    pub sweep: Option<SweepSummary>,
}

/// Seven significant digits; scientific outside `[1e-5, 1e7)`.
pub fn sig7(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    // Exponent after rounding to seven digits, so 9.9999999 counts as 10.
    let sci = format!("{v:.6e}");
    let exp: i32 = sci[sci.find('e').expect("scientific format") + 1..].parse().expect("integer exponent");
    if (-5..7).contains(&exp) {
        let decimals = (6 - exp) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), sig7)
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

fn table(out: &mut String, title: &str, rows: &IndexMap<String, f64>) {
    if rows.is_empty() {
        return;
    }
    let width = rows.keys().map(|k| k.len()).max().unwrap_or(0);
    let _ = writeln!(out, "  {title}");
    for (k, v) in rows {
        let _ = writeln!(out, "    {k:<width$}  {:>14}", sig7(*v));
    }
}

pub fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let p = &r.problem;
    let _ = writeln!(out, "{} {}", r.tool, r.version);
    let _ = writeln!(
        out,
        "problem {}: {} variables, {} objective terms, {} constraints, {} parameter sites",
        p.name,
        p.variables.len(),
        p.objective_terms,
        p.constraints,
        p.parameter_sites
    );
    for w in &p.warnings {
        let _ = writeln!(out, "{w}");
    }
    for s in &r.scenarios {
        let _ = writeln!(out);
        let _ = writeln!(out, "scenario {}  {}", s.scenario, s.status);
        let _ = writeln!(out, "  Z^{} = {}", s.scenario, opt(s.dual_value));
        let _ = writeln!(
            out,
            "  degrees of difficulty {}  method {}  iterations {}  kkt {}",
            s.degrees_of_difficulty,
            s.method.as_deref().unwrap_or("-"),
            s.iterations.map_or_else(|| "-".into(), |i| i.to_string()),
            opt(s.kkt_residual)
        );
        if let Some(t) = s.wall_time_ms {
            let _ = writeln!(out, "  wall time {} ms", sig7(t));
        }
        table(&mut out, "weights", &s.weights);
        table(&mut out, "lambda", &s.lambda);
        table(&mut out, "x", &s.x);
        if let Some(u) = s.unique_primal {
            let _ = writeln!(out, "  primal unique {}", flag(Some(u)));
        }
        if let Some(c) = &s.certificate {
            let _ = writeln!(
                out,
                "  certificate: dual {}  primal {}  gap {}  violation {}  slack {}  complementarity {}",
                sig7(c.dual_value),
                sig7(c.primal_value),
                sig7(c.relative_gap),
                sig7(c.max_constraint_violation),
                sig7(c.complementarity_slack),
                if c.complementarity_ok { "ok" } else { "violated" }
            );
        }
        if let Some(m) = &s.message {
            let _ = writeln!(out, "  note: {m}");
        }
    }
    if let Some(cmp) = &r.oracle {
        let _ = writeln!(out);
        let _ = writeln!(out, "oracle check");
        for c in cmp {
            let _ = writeln!(
                out,
                "  {}  oracle {}  relative difference {}{}",
                c.scenario,
                opt(c.oracle_value),
                opt(c.relative_difference),
                c.message.as_ref().map_or_else(String::new, |m| format!("  ({m})"))
            );
        }
    }
    if let Some(sw) = &r.sweep {
        let _ = writeln!(out);
        let _ = writeln!(out, "sweep: {} sites, {} combinations", sw.sites, sw.combinations);
        if let Some(e) = &sw.error {
            let _ = writeln!(out, "  error: {e}");
        }
        for (label, ex) in [("min", &sw.min), ("max", &sw.max)] {
            if let Some(ex) = ex {
                let _ = writeln!(out, "  {label} {} at combo {} ({})", sig7(ex.value), ex.index, ex.combo);
            }
        }
        let _ =
            writeln!(out, "  all-LOW {}  all-MID {}  all-HIGH {}", opt(sw.all_low), opt(sw.all_mid), opt(sw.all_high));
        let _ = writeln!(
            out,
            "  all-LOW attains min {}  max {};  all-HIGH attains min {}  max {}",
            flag(sw.low_attains_min),
            flag(sw.low_attains_max),
            flag(sw.high_attains_min),
            flag(sw.high_attains_max)
        );
        for f in &sw.failures {
            let _ = writeln!(out, "  failed combo {} ({}): {}", f.index, f.combo, f.status);
        }
    }
    out
}

pub fn render_json(r: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("reports always serialize");
    s.push('\n');
    s
}

pub fn render_report(r: &RunReport, format: Format) -> String {
    match format {
        Format::Text => render_text(r),
        Format::Json => render_json(r),
    }
}
