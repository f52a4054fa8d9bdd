use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Component, MultiGpProblem};
use crate::pipeline::solve_standard;
use crate::recovery::Verdict;
use crate::scenario::{instantiate_with, normalize, parameter_space, Provenance, StandardGp};
use crate::solver::{SolveError, SolverOptions};

/// Largest site count the sweep accepts by default (3^12 = 531441 solves).
pub const DEFAULT_SITE_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub max_sites: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), max_sites: DEFAULT_SITE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("parameter space has {sites} sites; the sweep is capped at {cap}")]
    CapExceeded { sites: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComboStatus {
    Certified,
    GapTooLarge,
    InfeasiblePrimal,
    RecoveryFailed,
    InfeasibleDual,
    NonConverged,
}

impl ComboStatus {
    pub fn tag(self) -> &'static str {
        match self {
            ComboStatus::Certified => "CERTIFIED",
            ComboStatus::GapTooLarge => "GAP_TOO_LARGE",
            ComboStatus::InfeasiblePrimal => "INFEASIBLE_PRIMAL",
            ComboStatus::RecoveryFailed => "DEGENERATE_WEIGHTS",
            ComboStatus::InfeasibleDual => "INFEASIBLE_DUAL",
            ComboStatus::NonConverged => "NONCONVERGED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComboResult {
    /// Optimal dual value; `None` when the solver failed.
    pub value: Option<f64>,
    pub status: ComboStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extreme {
    pub value: f64,
    pub index: usize,
    pub combo: Vec<Component>,
}

/// Whether the same-component instantiations hit the extremes of the sweep.
/// `None` when the relevant value is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Attainment {
    pub low_attains_min: Option<bool>,
    pub low_attains_max: Option<bool>,
    pub high_attains_min: Option<bool>,
    pub high_attains_max: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub num_sites: usize,
    pub num_combinations: usize,
    /// One entry per combination, in index order (see [`combination`]).
    pub results: Vec<ComboResult>,
    pub min: Option<Extreme>,
    pub max: Option<Extreme>,
    pub all_low: Option<f64>,
    pub all_mid: Option<f64>,
    pub all_high: Option<f64>,
    pub attainment: Attainment,
}

impl SweepReport {
    pub fn num_failures(&self) -> usize {
        self.results.iter().filter(|r| r.value.is_none()).count()
    }
}

/// The component choice of combination `index` over `sites` sites. Site 0 is
/// the most significant base-3 digit, so index 0 is all-LOW, the last index
/// all-HIGH and the middle index all-MID.
pub fn combination(index: usize, sites: usize) -> Vec<Component> {
    let mut digits = vec![Component::Low; sites];
    let mut rest = index;
    for d in (0..sites).rev() {
        digits[d] = Component::ALL[rest % 3];
        rest /= 3;
    }
    digits
}

/// Values equal within this relative margin count as attaining an extreme.
const ATTAIN_RTOL: f64 = 1e-7;

fn attains(value: Option<f64>, extreme: &Option<Extreme>) -> Option<bool> {
    let (v, e) = (value?, extreme.as_ref()?);
    Some((v - e.value).abs() <= ATTAIN_RTOL * e.value.abs().max(1.0))
}

fn solve_combo(p: &MultiGpProblem, combo: Vec<Component>, opts: &SolverOptions) -> ComboResult {
    let g = StandardGp {
        provenance: Provenance::Combination(combo.clone()),
        ..normalize(&instantiate_with(p, |k| combo[k]))
    };
    match solve_standard(&g, opts) {
        Ok(out) => {
            let status = match &out.certificate {
                None => ComboStatus::RecoveryFailed,
                Some(c) => match c.verdict {
                    Verdict::Certified => ComboStatus::Certified,
                    Verdict::GapTooLarge => ComboStatus::GapTooLarge,
                    Verdict::InfeasiblePrimal => ComboStatus::InfeasiblePrimal,
                },
            };
            ComboResult { value: Some(out.dual.dual_value), status }
        }
        Err(SolveError::InfeasibleDual { .. }) => ComboResult { value: None, status: ComboStatus::InfeasibleDual },
        Err(_) => ComboResult { value: None, status: ComboStatus::NonConverged },
    }
}

/// Solves every combination of the parameter space through the dual route.
/// Combinations run in parallel; results are ordered by index.
pub fn sweep_scenarios(p: &MultiGpProblem, opts: &SweepOptions) -> Result<SweepReport, SweepError> {
    let sites = parameter_space(p).num_sites();
    if sites > opts.max_sites {
        return Err(SweepError::CapExceeded { sites, cap: opts.max_sites });
    }
    let count = 3usize.pow(sites as u32);
    let results: Vec<ComboResult> =
        (0..count).into_par_iter().map(|i| solve_combo(p, combination(i, sites), &opts.solver)).collect();

    let mut min: Option<Extreme> = None;
    let mut max: Option<Extreme> = None;
    for (i, r) in results.iter().enumerate() {
        let Some(v) = r.value else { continue };
        if min.as_ref().is_none_or(|e| v < e.value) {
            min = Some(Extreme { value: v, index: i, combo: combination(i, sites) });
        }
        if max.as_ref().is_none_or(|e| v > e.value) {
            max = Some(Extreme { value: v, index: i, combo: combination(i, sites) });
        }
    }
    let all_low = results[0].value;
    let all_mid = results[count / 2].value;
    let all_high = results[count - 1].value;
    let attainment = Attainment {
        low_attains_min: attains(all_low, &min),
        low_attains_max: attains(all_low, &max),
        high_attains_min: attains(all_high, &min),
        high_attains_max: attains(all_high, &max),
    };
    Ok(SweepReport {
        num_sites: sites,
        num_combinations: count,
        results,
        min,
        max,
        all_low,
        all_mid,
        all_high,
        attainment,
    })
}
