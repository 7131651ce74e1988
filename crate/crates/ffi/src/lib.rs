//! C ABI for fraclab.
//!
//! Every call returns a [`FraclabStatus`]; outputs go through pointer
//! arguments. Handles are opaque and must be released with their `_free`
//! function. The message of the last failure on the calling thread is
//! available from [`fraclab_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fraclab::cli::{run, RunConfig};
use fraclab::model::{balance_sides, Domain, InequalityKind, InequalityParams};
use fraclab::norms::{gagliardo_seminorm, target_norm, NormSpec, Numerics};
use fraclab::trialfuncs::{FunctionSpec, TrialFunction};
use fraclab::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FraclabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Parameters or config rejected.
    Validation = 3,
    Divergent = 4,
    Numerical = 5,
    Unsupported = 6,
    Io = 7,
    Panic = 8,
}

/// Trial function handle.
pub struct FraclabFunction(TrialFunction);

/// Parameter set handle.
pub struct FraclabParams(InequalityParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FraclabStatus {
    match e {
        _ if e.is_validation() => FraclabStatus::Validation,
        Error::Divergent(_) => FraclabStatus::Divergent,
        Error::Unsupported(_) => FraclabStatus::Unsupported,
        Error::Io(_) => FraclabStatus::Io,
        _ => FraclabStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), FraclabStatus>>(f: F) -> FraclabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FraclabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            FraclabStatus::Panic
        }
    }
}

fn fail(e: Error) -> FraclabStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, FraclabStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(FraclabStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        FraclabStatus::InvalidUtf8
    })
}

unsafe fn out_arg<'a, T>(p: *mut T) -> Result<&'a mut T, FraclabStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output pointer".into());
        FraclabStatus::NullPointer
    })
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, FraclabStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        FraclabStatus::NullPointer
    })
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn fraclab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a trial function from its JSON description, e.g.
/// `{"family": "smooth_bump", "d": 1}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fraclab_function_from_json(json: *const c_char, out: *mut *mut FraclabFunction) -> FraclabStatus {
    guard(|| {
        let text = str_arg(json)?;
        let out = out_arg(out)?;
        let spec: FunctionSpec = serde_json::from_str(text).map_err(|e| fail(Error::Config(e.to_string())))?;
        let f = spec.build().map_err(fail)?;
        *out = Box::into_raw(Box::new(FraclabFunction(f)));
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn fraclab_function_free(f: *mut FraclabFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Evaluates `f` at the point `x` of length `len`.
///
/// # Safety
/// `x` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fraclab_function_eval(
    f: *const FraclabFunction,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> FraclabStatus {
    guard(|| {
        let f = ref_arg(f)?;
        let out = out_arg(out)?;
        if x.is_null() {
            set_error("null point".into());
            return Err(FraclabStatus::NullPointer);
        }
        let pt = std::slice::from_raw_parts(x, len);
        *out = f.0.evaluate(pt).map_err(fail)?;
        Ok(())
    })
}

/// New parameter set in dimension `d` with all exponents unset.
#[no_mangle]
pub extern "C" fn fraclab_params_new(d: usize) -> *mut FraclabParams {
    Box::into_raw(Box::new(FraclabParams(InequalityParams::new(d))))
}

/// # Safety
/// `p` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn fraclab_params_free(p: *mut FraclabParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Sets one of `p, q, r, s, alpha1, alpha2, beta, mu, lambda`.
///
/// # Safety
/// `params` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fraclab_params_set(params: *mut FraclabParams, name: *const c_char, value: f64) -> FraclabStatus {
    guard(|| {
        let p = &mut out_arg(params)?.0;
        match str_arg(name)? {
            "p" => p.p = Some(value),
            "q" => p.q = Some(value),
            "r" => p.r = Some(value),
            "s" => p.s = Some(value),
            "alpha1" => p.alpha1 = value,
            "alpha2" => p.alpha2 = value,
            "beta" => p.beta = value,
            "mu" => p.mu = value,
            "lambda" => p.lambda = Some(value),
            other => return Err(fail(Error::InvalidParameter(format!("unknown parameter `{other}`")))),
        }
        Ok(())
    })
}

/// Both sides of the balance condition for `kind` (`ordinary`, `mixed`,
/// `derivative` or `surface`; `m` is used by `surface` only).
///
/// # Safety
/// Pointers must be valid; `kind` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fraclab_balance(
    params: *const FraclabParams,
    kind: *const c_char,
    m: usize,
    lhs: *mut f64,
    rhs: *mut f64,
) -> FraclabStatus {
    guard(|| {
        let p = &ref_arg(params)?.0;
        let kind = InequalityKind::parse(str_arg(kind)?, Some(m)).map_err(fail)?;
        let (l, r) = balance_sides(p, kind).map_err(fail)?;
        *out_arg(lhs)? = l;
        *out_arg(rhs)? = r;
        Ok(())
    })
}

fn domain_of(radius: f64) -> Domain {
    if radius.is_finite() && radius > 0.0 {
        Domain::ball(radius)
    } else {
        Domain::WholeSpace
    }
}

/// Weighted target norm over the ball of `radius` (whole space when
/// `radius` is not a positive finite number).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fraclab_target_norm(
    f: *const FraclabFunction,
    params: *const FraclabParams,
    radius: f64,
    value: *mut f64,
    error: *mut f64,
) -> FraclabStatus {
    guard(|| {
        let f = ref_arg(f)?;
        let p = ref_arg(params)?;
        let r = target_norm(&f.0, &NormSpec::target(p.0.clone()), &domain_of(radius), &Numerics::default()).map_err(fail)?;
        *out_arg(value)? = r.value;
        *out_arg(error)? = r.error_estimate;
        Ok(())
    })
}

/// Gagliardo seminorm over the ball of `radius` (whole space as above).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fraclab_gagliardo_seminorm(
    f: *const FraclabFunction,
    params: *const FraclabParams,
    radius: f64,
    value: *mut f64,
    error: *mut f64,
) -> FraclabStatus {
    guard(|| {
        let f = ref_arg(f)?;
        let p = ref_arg(params)?;
        let r = gagliardo_seminorm(&f.0, &NormSpec::gagliardo(p.0.clone()), &domain_of(radius), &Numerics::default())
            .map_err(fail)?;
        *out_arg(value)? = r.value;
        *out_arg(error)? = r.error_estimate;
        Ok(())
    })
}

/// Runs a JSON or TOML run configuration and returns the report as JSON.
/// Release the string with [`fraclab_string_free`].
///
/// # Safety
/// `config` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fraclab_run(config: *const c_char, out: *mut *mut c_char) -> FraclabStatus {
    guard(|| {
        let text = str_arg(config)?;
        let out = out_arg(out)?;
        let cfg = RunConfig::parse(text).map_err(fail)?;
        let report = run(&cfg).map_err(fail)?;
        let json = serde_json::to_string(&report).map_err(|e| fail(e.into()))?;
        *out = CString::new(json).map_err(|e| fail(Error::Numerical(e.to_string())))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn fraclab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
