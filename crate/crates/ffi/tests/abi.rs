use std::ffi::{CStr, CString};
use std::ptr;

use posygp_ffi::*;

const EXAMPLE1: &str = include_str!("../../core/fixtures/example1.gp.json");
const EXAMPLE2: &str = include_str!("../../core/fixtures/example2.gp.json");

fn load(text: &str) -> *mut PgpProblem {
    let c = CString::new(text).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pgp_problem_from_json(c.as_ptr(), &mut p) }, PgpStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let m = pgp_last_error_message();
    assert!(!m.is_null());
    unsafe { CStr::from_ptr(m) }.to_string_lossy().into_owned()
}

#[test]
fn example1_low_through_the_abi() {
    let p = load(EXAMPLE1);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(pgp_solve(p, PGP_SCENARIO_LOW, ptr::null(), &mut r), PgpStatus::Ok);
        assert!((pgp_result_dual_value(r) / 125.9045 - 1.0).abs() < 1e-3);
        assert_eq!(pgp_result_verdict(r), PgpVerdict::Certified);
        assert!(pgp_result_relative_gap(r) <= 1e-5);
        let n = pgp_result_num_weights(r);
        assert_eq!(n, 5);
        let mut w = vec![0.0; n];
        assert_eq!(pgp_result_weights(r, w.as_mut_ptr(), n), PgpStatus::Ok);
        assert!((w[0] - 0.1410885).abs() < 5e-4);
        let mut x = vec![0.0; pgp_problem_num_variables(p)];
        assert_eq!(pgp_result_primal(r, x.as_mut_ptr(), x.len()), PgpStatus::Ok);
        assert!((x[0] / 1.305470 - 1.0).abs() < 2e-3);
        pgp_result_free(r);
        pgp_problem_free(p);
    }
}

#[test]
fn small_buffer_is_rejected() {
    let p = load(EXAMPLE2);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(pgp_solve(p, PGP_SCENARIO_HIGH, ptr::null(), &mut r), PgpStatus::Ok);
        let mut w = [0.0; 2];
        assert_eq!(pgp_result_weights(r, w.as_mut_ptr(), 2), PgpStatus::BufferTooSmall);
        assert!(last_error().contains("6 needed"));
        pgp_result_free(r);
        pgp_problem_free(p);
    }
}

#[test]
fn parse_errors_carry_a_message() {
    let c = CString::new(r#"{"name":"s","variables":["x"],"objective":{"terms":[{"coef":[2,1,3]}]}}"#).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pgp_problem_from_json(c.as_ptr(), &mut p) }, PgpStatus::ParseError);
    assert!(p.is_null());
    assert!(last_error().contains("triplet order violated"));
}

#[test]
fn null_arguments_are_reported() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { pgp_problem_from_json(ptr::null(), &mut p) }, PgpStatus::NullPointer);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { pgp_solve(ptr::null(), 0, ptr::null(), &mut r) }, PgpStatus::NullPointer);
    assert!(unsafe { pgp_result_dual_value(ptr::null()) }.is_nan());
    assert_eq!(unsafe { pgp_result_verdict(ptr::null()) }, PgpVerdict::NotCertified);
    unsafe {
        pgp_problem_free(ptr::null_mut());
        pgp_result_free(ptr::null_mut());
        pgp_string_free(ptr::null_mut());
    }
}

#[test]
fn bad_scenario_and_options() {
    let p = load(EXAMPLE1);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(pgp_solve(p, 7, ptr::null(), &mut r), PgpStatus::InvalidArgument);
        let mut o = pgp_default_options();
        o.barrier_shrink = 2.0;
        assert_eq!(pgp_solve(p, PGP_SCENARIO_MID, &o, &mut r), PgpStatus::InvalidArgument);
        assert!(r.is_null());
        pgp_problem_free(p);
    }
}

#[test]
fn infeasible_dual_status() {
    let p = load(r#"{"name":"lin","variables":["x"],"objective":{"terms":[{"coef":1,"exponents":{"x":1}}]}}"#);
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(pgp_solve(p, PGP_SCENARIO_LOW, ptr::null(), &mut r), PgpStatus::InfeasibleDual);
        assert!(r.is_null());
        pgp_problem_free(p);
    }
}

#[test]
fn nonconverged_keeps_best_iterate() {
    let p = load(EXAMPLE1);
    let mut r = ptr::null_mut();
    unsafe {
        let mut o = pgp_default_options();
        o.max_iter = 1;
        assert_eq!(pgp_solve(p, PGP_SCENARIO_LOW, &o, &mut r), PgpStatus::NonConverged);
        assert!(!r.is_null());
        assert!(pgp_result_dual_value(r) > 0.0);
        assert_eq!(pgp_result_verdict(r), PgpVerdict::NotCertified);
        let mut x = [0.0; 3];
        assert_eq!(pgp_result_primal(r, x.as_mut_ptr(), 3), PgpStatus::NoPrimal);
        pgp_result_free(r);
        pgp_problem_free(p);
    }
}

#[test]
fn report_json_matches_scenarios() {
    let p = load(EXAMPLE2);
    let mut s = ptr::null_mut();
    let mut code = -1;
    unsafe {
        assert_eq!(pgp_report_json(p, ptr::null(), &mut s, &mut code), PgpStatus::Ok);
        let json = CStr::from_ptr(s).to_str().unwrap().to_owned();
        pgp_string_free(s);
        pgp_problem_free(p);
        assert_eq!(code, 0);
        let v: Vec<&str> = json.matches("\"scenario\": ").collect();
        assert_eq!(v.len(), 3);
        assert!(json.contains("\"status\": \"CERTIFIED\""));
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(pgp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
