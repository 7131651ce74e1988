use std::ffi::{CStr, CString};
use std::ptr;

use fraclab_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn ramp_gagliardo_on_unit_ball() {
    unsafe {
        let mut f = ptr::null_mut();
        let spec = cstr(r#"{"family": "smooth_bump", "d": 1}"#);
        assert_eq!(fraclab_function_from_json(spec.as_ptr(), &mut f), FraclabStatus::Ok);
        let p = fraclab_params_new(1);
        assert_eq!(fraclab_params_set(p, cstr("p").as_ptr(), 2.0), FraclabStatus::Ok);
        assert_eq!(fraclab_params_set(p, cstr("beta").as_ptr(), 1.5), FraclabStatus::Ok);
        let (mut v, mut e) = (0.0, 0.0);
        assert_eq!(fraclab_gagliardo_seminorm(f, p, f64::INFINITY, &mut v, &mut e), FraclabStatus::Ok);
        assert!(v > 0.0 && e < 1e-6 * v);
        let x = [0.0];
        let mut y = 0.0;
        assert_eq!(fraclab_function_eval(f, x.as_ptr(), 1, &mut y), FraclabStatus::Ok);
        assert!((y - (-1.0f64).exp()).abs() < 1e-15);
        fraclab_params_free(p);
        fraclab_function_free(f);
    }
}

#[test]
fn constant_target_norm_and_balance() {
    unsafe {
        let mut f = ptr::null_mut();
        let spec = cstr(r#"{"family": "constant", "d": 1, "value": 1.0}"#);
        assert_eq!(fraclab_function_from_json(spec.as_ptr(), &mut f), FraclabStatus::Ok);
        let p = fraclab_params_new(1);
        fraclab_params_set(p, cstr("q").as_ptr(), 2.0);
        let (mut v, mut e) = (0.0, 0.0);
        assert_eq!(fraclab_target_norm(f, p, 1.0, &mut v, &mut e), FraclabStatus::Ok);
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        fraclab_params_set(p, cstr("p").as_ptr(), 2.0);
        fraclab_params_set(p, cstr("beta").as_ptr(), 1.5);
        fraclab_params_set(p, cstr("mu").as_ptr(), 0.5);
        let (mut l, mut r) = (0.0, 0.0);
        assert_eq!(fraclab_balance(p, cstr("ordinary").as_ptr(), 0, &mut l, &mut r), FraclabStatus::Ok);
        assert_eq!(l, r);
        fraclab_params_free(p);
        fraclab_function_free(f);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut f = ptr::null_mut();
        let bad = cstr(r#"{"family": "smooth_bump", "d": 1, "radius": -1}"#);
        assert_eq!(fraclab_function_from_json(bad.as_ptr(), &mut f), FraclabStatus::Validation);
        assert!(f.is_null());
        let msg = CStr::from_ptr(fraclab_last_error()).to_str().unwrap();
        assert!(msg.contains("radius"));
        assert_eq!(fraclab_function_from_json(ptr::null(), &mut f), FraclabStatus::NullPointer);
        let p = fraclab_params_new(1);
        assert_eq!(fraclab_params_set(p, cstr("zeta").as_ptr(), 1.0), FraclabStatus::Validation);
        let (mut l, mut r) = (0.0, 0.0);
        assert_eq!(fraclab_balance(p, cstr("ordinary").as_ptr(), 0, &mut l, &mut r), FraclabStatus::Validation);
        assert!(CStr::from_ptr(fraclab_last_error()).to_str().unwrap().contains("`p`"));
        fraclab_params_free(p);
        fraclab_function_free(ptr::null_mut());
    }
}

#[test]
fn run_returns_report_json() {
    unsafe {
        let cfg = cstr(r#"{"command": "check-balance", "params": {"d": 1, "p": 2.0, "q": 2.0, "beta": 1.5, "mu": 0.5}}"#);
        let mut out = ptr::null_mut();
        assert_eq!(fraclab_run(cfg.as_ptr(), &mut out), FraclabStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        fraclab_string_free(out);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["results"]["condition"]["holds"], serde_json::json!(true));
        let bad = cstr(r#"{"command": "check-balance", "nope": 1}"#);
        assert_eq!(fraclab_run(bad.as_ptr(), &mut out), FraclabStatus::Validation);
    }
}
