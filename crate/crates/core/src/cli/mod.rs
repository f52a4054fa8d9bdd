//! Command-line front end: `posygp solve FILE [flags]`.

pub mod document;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use rayon::prelude::*;

pub use document::{parse_document, parse_problem, serialize_problem, ParseError, ProblemDocument};
pub use report::{render_report, Format, RunReport};

use crate::dual::{build_dual, degrees_of_difficulty};
use crate::model::{Component, MultiGpProblem};
use crate::oracle::{oracle_solve, sweep_scenarios, OracleOptions, SweepOptions};
use crate::pipeline::solve_standard;
use crate::recovery::Verdict;
use crate::scenario::{parameter_space, standard_scenario, Scenario};
use crate::solver::{SolveError, SolveMethod, SolverOptions};
use report::{
    CertificateReport, OracleComparison, ProblemEcho, ScenarioReport, SweepExtreme, SweepFailure, SweepSummary,
};

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNRESOLVED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "posygp", version, about = "Solve posynomial geometric programs with low/mid/high parameters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the L, M and/or U scenarios of a problem file.
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioChoice {
    #[value(name = "L", alias = "l")]
    L,
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "U", alias = "u")]
    U,
    #[value(name = "all")]
    All,
}

impl ScenarioChoice {
    fn scenarios(self) -> Vec<Scenario> {
        match self {
            ScenarioChoice::L => vec![Scenario::Low],
            ScenarioChoice::M => vec![Scenario::Mid],
            ScenarioChoice::U => vec![Scenario::High],
            ScenarioChoice::All => Scenario::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatChoice {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Problem file (JSON).
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub scenario: ScenarioChoice,
    /// KKT residual target.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Newton step budget per scenario.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatChoice,
    /// Also solve each scenario with the primal oracle and compare.
    #[arg(long)]
    pub oracle_check: bool,
    /// Solve every combination of the parameter space.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include wall-clock times (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
}

impl SolveArgs {
    pub fn new(file: impl Into<PathBuf>) -> Self {
        Self {
            file: file.into(),
            scenario: ScenarioChoice::All,
            tol: 1e-8,
            max_iter: 200,
            format: FormatChoice::Text,
            oracle_check: false,
            sweep: false,
            seed: 0,
            timings: false,
        }
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iter: self.max_iter, seed: self.seed, ..SolverOptions::default() }
    }

    pub fn config(&self) -> RunConfig {
        RunConfig {
            scenarios: self.scenario.scenarios(),
            solver: self.solver_options(),
            oracle_check: self.oracle_check,
            sweep: self.sweep,
            timings: self.timings,
        }
    }
}

/// Everything [`run`] needs besides the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenarios: Vec<Scenario>,
    pub solver: SolverOptions,
    pub oracle_check: bool,
    pub sweep: bool,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenarios: Scenario::ALL.to_vec(),
            solver: SolverOptions::default(),
            oracle_check: false,
            sweep: false,
            timings: false,
        }
    }
}

/// What a command printed and how it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<RunReport>,
}

impl CommandOutput {
    fn failure(code: i32, message: String) -> Self {
        Self { exit_code: code, stdout: String::new(), stderr: message + "\n", report: None }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn method_name(m: SolveMethod) -> &'static str {
    match m {
        SolveMethod::ZeroDegrees => "zero-degrees",
        SolveMethod::UniquePoint => "unique-point",
        SolveMethod::Barrier => "barrier",
    }
}

fn combo_label(c: &[Component]) -> String {
    c.iter()
        .map(|k| match k {
            Component::Low => 'L',
            Component::Mid => 'M',
            Component::High => 'U',
        })
        .collect()
}

fn solve_one(p: &MultiGpProblem, s: Scenario, opts: &SolverOptions, timings: bool) -> ScenarioReport {
    let started = Instant::now();
    let g = standard_scenario(p, s);
    let dp = build_dual(&g);
    let result = solve_standard(&g, opts);
    let elapsed = started.elapsed().as_secs_f64() * 1e3;
    let mut rep = ScenarioReport {
        scenario: s.label().into(),
        status: String::new(),
        dual_value: None,
        degrees_of_difficulty: degrees_of_difficulty(&g),
        method: None,
        iterations: None,
        kkt_residual: None,
        weights: IndexMap::new(),
        lambda: IndexMap::new(),
        x: IndexMap::new(),
        unique_primal: None,
        certificate: None,
        message: None,
        wall_time_ms: timings.then_some(elapsed),
    };
    let fill_dual = |rep: &mut ScenarioReport, d: &crate::solver::DualSolution| {
        rep.dual_value = finite(d.dual_value);
        rep.method = Some(method_name(d.method).into());
        rep.iterations = Some(d.iterations);
        rep.kkt_residual = finite(d.kkt_residual);
        rep.weights = d.w.iter().enumerate().map(|(k, &w)| (dp.weight_label(k), w)).collect();
        rep.lambda = d.lambda.iter().enumerate().map(|(i, &l)| (format!("lambda{}", i + 1), l)).collect();
    };
    match result {
        Ok(out) => {
            fill_dual(&mut rep, &out.dual);
            match (&out.primal, &out.certificate) {
                (Ok(ps), Some(c)) => {
                    rep.x = g.variables.iter().cloned().zip(ps.x.iter().copied()).collect();
                    rep.unique_primal = Some(ps.unique);
                    rep.certificate = Some(CertificateReport {
                        dual_value: c.dual_value,
                        primal_value: c.primal_value,
                        relative_gap: c.relative_gap,
                        max_constraint_violation: c.max_constraint_violation,
                        complementarity_slack: c.complementarity_slack,
                        complementarity_ok: c.complementarity_ok,
                    });
                    rep.status = c.verdict.to_string();
                }
                (Err(e), _) => {
                    rep.status = "DEGENERATE_WEIGHTS".into();
                    rep.message = Some(e.to_string());
                }
                (Ok(_), None) => unreachable!("a recovered primal is always certified"),
            }
        }
        Err(SolveError::InfeasibleDual { residual }) => {
            rep.status = "INFEASIBLE_DUAL".into();
            rep.message = Some(format!(
                "no dual-feasible weights (phase-1 residual {}); the primal infimum is not attained",
                report::sig7(residual)
            ));
        }
        Err(SolveError::NonConverged { best }) => {
            rep.status = "NONCONVERGED".into();
            if let Some(b) = best {
                fill_dual(&mut rep, &b);
            }
            rep.message = Some("iteration budget exhausted; best iterate shown".into());
        }
        Err(e @ SolveError::InvalidOptions(_)) => {
            rep.status = "INVALID_OPTIONS".into();
            rep.message = Some(e.to_string());
        }
    }
    rep
}

fn oracle_comparison(p: &MultiGpProblem, s: &ScenarioReport, scenario: Scenario) -> OracleComparison {
    match oracle_solve(&standard_scenario(p, scenario), &OracleOptions::default()) {
        Ok(ps) => OracleComparison {
            scenario: s.scenario.clone(),
            oracle_value: finite(ps.objective_value),
            relative_difference: s.dual_value.map(|z| (z - ps.objective_value).abs() / z),
            message: None,
        },
        Err(e) => OracleComparison {
            scenario: s.scenario.clone(),
            oracle_value: None,
            relative_difference: None,
            message: Some(e.to_string()),
        },
    }
}

fn sweep_summary(p: &MultiGpProblem, opts: &SolverOptions) -> SweepSummary {
    let sites = parameter_space(p).num_sites();
    let sweep_opts = SweepOptions { solver: opts.clone(), ..SweepOptions::default() };
    match sweep_scenarios(p, &sweep_opts) {
        Ok(r) => {
            let ext = |e: &Option<crate::oracle::Extreme>| {
                e.as_ref().map(|e| SweepExtreme { value: e.value, index: e.index, combo: combo_label(&e.combo) })
            };
            SweepSummary {
                sites: r.num_sites,
                combinations: r.num_combinations,
                min: ext(&r.min),
                max: ext(&r.max),
                all_low: r.all_low,
                all_mid: r.all_mid,
                all_high: r.all_high,
                low_attains_min: r.attainment.low_attains_min,
                low_attains_max: r.attainment.low_attains_max,
                high_attains_min: r.attainment.high_attains_min,
                high_attains_max: r.attainment.high_attains_max,
                failures: r
                    .results
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.value.is_none())
                    .map(|(i, c)| SweepFailure {
                        index: i,
                        combo: combo_label(&crate::oracle::combination(i, r.num_sites)),
                        status: c.status.tag().into(),
                    })
                    .collect(),
                error: None,
            }
        }
        Err(e) => SweepSummary {
            sites,
            combinations: 0,
            min: None,
            max: None,
            all_low: None,
            all_mid: None,
            all_high: None,
            low_attains_min: None,
            low_attains_max: None,
            high_attains_min: None,
            high_attains_max: None,
            failures: vec![],
            error: Some(e.to_string()),
        },
    }
}

fn exit_code(scenarios: &[ScenarioReport]) -> i32 {
    if scenarios.iter().any(|s| s.status == "INFEASIBLE_DUAL") {
        EXIT_INFEASIBLE
    } else if scenarios.iter().all(|s| s.status == Verdict::Certified.to_string()) {
        EXIT_CERTIFIED
    } else {
        EXIT_UNRESOLVED
    }
}

/// Solves from already-parsed input and builds the report.
pub fn run(p: &MultiGpProblem, warnings: Vec<String>, config: &RunConfig) -> (i32, RunReport) {
    let opts = &config.solver;
    let scenarios = &config.scenarios;
    // Solved concurrently; `collect` keeps L, M, U order.
    let reports: Vec<ScenarioReport> = scenarios.par_iter().map(|&s| solve_one(p, s, opts, config.timings)).collect();
    let oracle =
        config.oracle_check.then(|| reports.iter().zip(scenarios).map(|(r, &s)| oracle_comparison(p, r, s)).collect());
    let sweep = config.sweep.then(|| sweep_summary(p, opts));
    let mut code = exit_code(&reports);
    if sweep.as_ref().is_some_and(|s| s.error.is_some()) {
        code = EXIT_INPUT;
    }
    let report = RunReport {
        tool: "posygp".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        problem: ProblemEcho {
            name: p.name.clone(),
            variables: p.variables.clone(),
            objective_terms: p.objective.terms.len(),
            constraints: p.constraints.len(),
            parameter_sites: parameter_space(p).num_sites(),
            warnings,
        },
        scenarios: reports,
        oracle,
        sweep,
    };
    (code, report)
}

/// Reads, solves and renders. Never panics on bad input; see the `EXIT_*`
/// constants for the exit codes.
pub fn solve_command(args: &SolveArgs) -> CommandOutput {
    if let Err(e) = args.solver_options().validate() {
        return CommandOutput::failure(EXIT_INPUT, format!("error: {e}"));
    }
    let text = match std::fs::read_to_string(&args.file) {
        Ok(t) => t,
        Err(e) => {
            let err = ParseError::Io { path: args.file.display().to_string(), message: e.to_string() };
            return CommandOutput::failure(EXIT_INPUT, format!("error: {err}"));
        }
    };
    let (problem, validation) = match parse_document(&text) {
        Ok(v) => v,
        Err(e) => return CommandOutput::failure(EXIT_INPUT, format!("error: {e}")),
    };
    let warnings: Vec<String> = validation.warnings().map(|f| f.to_string()).collect();
    let (code, report) = run(&problem, warnings, &args.config());
    let format = match args.format {
        FormatChoice::Text => Format::Text,
        FormatChoice::Json => Format::Json,
    };
    let mut stderr = String::new();
    for s in report.scenarios.iter().filter(|s| s.status != "CERTIFIED") {
        stderr.push_str(&format!("scenario {}: {}\n", s.scenario, s.status));
    }
    if let Some(e) = report.sweep.as_ref().and_then(|s| s.error.as_ref()) {
        stderr.push_str(&format!("sweep: {e}\n"));
    }
    CommandOutput { exit_code: code, stdout: render_report(&report, format), stderr, report: Some(report) }
}
