//! C ABI for posygp.
//!
//! Problems and results are opaque handles created and freed by this
//! library. Every fallible call returns a [`PgpStatus`]; on failure
//! [`pgp_last_error_message`] describes what went wrong on the calling
//! thread. Panics never cross the boundary.
//!
//! ```c
//! PgpProblem *p = NULL;
//! if (pgp_problem_from_json(text, &p) != PGP_STATUS_OK) { puts(pgp_last_error_message()); }
//! PgpResult *r = NULL;
//! pgp_solve(p, PGP_SCENARIO_LOW, NULL, &r);
//! double z = pgp_result_dual_value(r);
//! pgp_result_free(r);
//! pgp_problem_free(p);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use posygp::cli::{parse_document, render_report, run, Format, RunConfig};
use posygp::pipeline::solve_scenario;
use posygp::recovery::{Certificate, PrimalSolution, Verdict};
use posygp::{DualSolution, MultiGpProblem, Scenario, SolveError, SolverOptions};

pub const PGP_SCENARIO_LOW: u32 = 0;
pub const PGP_SCENARIO_MID: u32 = 1;
pub const PGP_SCENARIO_HIGH: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgpStatus {
    Ok = 0,
    NullPointer = 1,
    ParseError = 2,
    InfeasibleDual = 3,
    /// A result is still produced, holding the best iterate.
    NonConverged = 4,
    InvalidArgument = 5,
    InvalidUtf8 = 6,
    BufferTooSmall = 7,
    NoPrimal = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgpVerdict {
    Certified = 0,
    GapTooLarge = 1,
    InfeasiblePrimal = 2,
    /// No primal point was recovered, so nothing was certified.
    NotCertified = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub barrier_init: f64,
    pub barrier_shrink: f64,
    pub barrier_min: f64,
    pub zero_weight_threshold: f64,
    pub seed: u64,
}

impl From<&PgpOptions> for SolverOptions {
    fn from(o: &PgpOptions) -> Self {
        SolverOptions {
            tol: o.tol,
            max_iter: o.max_iter,
            barrier_init: o.barrier_init,
            barrier_shrink: o.barrier_shrink,
            barrier_min: o.barrier_min,
            zero_weight_threshold: o.zero_weight_threshold,
            seed: o.seed,
        }
    }
}

/// A parsed and validated problem.
pub struct PgpProblem {
    problem: MultiGpProblem,
    warnings: Vec<String>,
}

/// The outcome of one scenario solve.
pub struct PgpResult {
    dual: DualSolution,
    primal: Option<PrimalSolution>,
    certificate: Option<Certificate>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Failure = (PgpStatus, String);

fn guard(f: impl FnOnce() -> Result<PgpStatus, Failure>) -> PgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == PgpStatus::Ok {
                clear_error();
            }
            status
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic in posygp");
            PgpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (PgpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|e| (PgpStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn scenario_from(code: u32) -> Result<Scenario, Failure> {
    match code {
        PGP_SCENARIO_LOW => Ok(Scenario::Low),
        PGP_SCENARIO_MID => Ok(Scenario::Mid),
        PGP_SCENARIO_HIGH => Ok(Scenario::High),
        _ => Err((PgpStatus::InvalidArgument, format!("unknown scenario code {code}"))),
    }
}

unsafe fn options_from(options: *const PgpOptions) -> SolverOptions {
    if options.is_null() {
        SolverOptions::default()
    } else {
        (&*options).into()
    }
}

/// The library's default solver options.
#[no_mangle]
pub extern "C" fn pgp_default_options() -> PgpOptions {
    let d = SolverOptions::default();
    PgpOptions {
        tol: d.tol,
        max_iter: d.max_iter,
        barrier_init: d.barrier_init,
        barrier_shrink: d.barrier_shrink,
        barrier_min: d.barrier_min,
        zero_weight_threshold: d.zero_weight_threshold,
        seed: d.seed,
    }
}

/// Version string; static, never freed.
#[no_mangle]
pub extern "C" fn pgp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pgp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON problem document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pgp_problem_from_json(json: *const c_char, out: *mut *mut PgpProblem) -> PgpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let (problem, report) = parse_document(text).map_err(|e| (PgpStatus::ParseError, e.to_string()))?;
        let warnings = report.warnings().map(|f| f.to_string()).collect();
        *out = Box::into_raw(Box::new(PgpProblem { problem, warnings }));
        Ok(PgpStatus::Ok)
    })
}

/// # Safety
/// `problem` must be null or a live handle from [`pgp_problem_from_json`].
#[no_mangle]
pub unsafe extern "C" fn pgp_problem_num_variables(problem: *const PgpProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.variables.len())
}

/// # Safety
/// `problem` must be null or a handle from [`pgp_problem_from_json`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn pgp_problem_free(problem: *mut PgpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves one scenario (`PGP_SCENARIO_*`). `options` may be null for the
/// defaults. On `PGP_STATUS_OK` and `PGP_STATUS_NON_CONVERGED` a result is
/// stored in `out` and must be freed with [`pgp_result_free`].
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer; `options` must
/// be null or point to a valid `PgpOptions`.
#[no_mangle]
pub unsafe extern "C" fn pgp_solve(
    problem: *const PgpProblem,
    scenario: u32,
    options: *const PgpOptions,
    out: *mut *mut PgpResult,
) -> PgpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let s = scenario_from(scenario)?;
        let opts = options_from(options);
        match solve_scenario(&p.problem, s, &opts) {
            Ok(outcome) => {
                *out = Box::into_raw(Box::new(PgpResult {
                    dual: outcome.dual,
                    primal: outcome.primal.ok(),
                    certificate: outcome.certificate,
                }));
                Ok(PgpStatus::Ok)
            }
            Err(SolveError::NonConverged { best: Some(best) }) => {
                set_error("solver did not converge; result holds the best iterate");
                *out = Box::into_raw(Box::new(PgpResult { dual: *best, primal: None, certificate: None }));
                Ok(PgpStatus::NonConverged)
            }
            Err(e @ SolveError::NonConverged { best: None }) => Err((PgpStatus::NonConverged, e.to_string())),
            Err(e @ SolveError::InfeasibleDual { .. }) => Err((PgpStatus::InfeasibleDual, e.to_string())),
            Err(e @ SolveError::InvalidOptions(_)) => Err((PgpStatus::InvalidArgument, e.to_string())),
        }
    })
}

/// Optimal dual value `Z`, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_dual_value(result: *const PgpResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.dual.dual_value)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_num_weights(result: *const PgpResult) -> usize {
    result.as_ref().map_or(0, |r| r.dual.w.len())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_iterations(result: *const PgpResult) -> usize {
    result.as_ref().map_or(0, |r| r.dual.iterations)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_kkt_residual(result: *const PgpResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.dual.kkt_residual)
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<PgpStatus, Failure> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err((PgpStatus::BufferTooSmall, format!("buffer holds {len} values, {} needed", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(PgpStatus::Ok)
}

/// Copies the dual weights, objective terms first, into `buf`.
///
/// # Safety
/// `result` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_weights(result: *const PgpResult, buf: *mut f64, len: usize) -> PgpStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        copy_out(&r.dual.w, buf, len)
    })
}

/// Copies the recovered primal point into `buf`, which must hold
/// [`pgp_problem_num_variables`] values.
///
/// # Safety
/// `result` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_primal(result: *const PgpResult, buf: *mut f64, len: usize) -> PgpStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let p = r.primal.as_ref().ok_or((PgpStatus::NoPrimal, "no primal point was recovered".to_string()))?;
        copy_out(&p.x, buf, len)
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_verdict(result: *const PgpResult) -> PgpVerdict {
    match result.as_ref().and_then(|r| r.certificate.as_ref()).map(|c| c.verdict) {
        Some(Verdict::Certified) => PgpVerdict::Certified,
        Some(Verdict::GapTooLarge) => PgpVerdict::GapTooLarge,
        Some(Verdict::InfeasiblePrimal) => PgpVerdict::InfeasiblePrimal,
        None => PgpVerdict::NotCertified,
    }
}

/// Relative primal/dual gap, or NaN when nothing was certified.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_relative_gap(result: *const PgpResult) -> f64 {
    result.as_ref().and_then(|r| r.certificate.as_ref()).map_or(f64::NAN, |c| c.relative_gap)
}

/// # Safety
/// `result` must be null or a handle from [`pgp_solve`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn pgp_result_free(result: *mut PgpResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Solves all three scenarios and writes the JSON run report to `out`; free
/// it with [`pgp_string_free`]. `exit_code` (nullable) receives the code the
/// command-line tool would exit with.
///
/// # Safety
/// `problem` must be a live handle, `out` a valid pointer, `options` null or
/// valid, and `exit_code` null or valid.
#[no_mangle]
pub unsafe extern "C" fn pgp_report_json(
    problem: *const PgpProblem,
    options: *const PgpOptions,
    out: *mut *mut c_char,
    exit_code: *mut i32,
) -> PgpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        let solver = options_from(options);
        solver.validate().map_err(|e| (PgpStatus::InvalidArgument, e.to_string()))?;
        let config = RunConfig { solver, ..RunConfig::default() };
        let (code, report) = run(&p.problem, p.warnings.clone(), &config);
        let json = render_report(&report, Format::Json);
        *out = CString::new(json).expect("JSON has no nul bytes").into_raw();
        if !exit_code.is_null() {
            *exit_code = code;
        }
        Ok(PgpStatus::Ok)
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pgp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
