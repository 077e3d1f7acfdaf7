//! C ABI over `fermi_klein`.
//!
//! Algebras and states are opaque heap handles released with their `_free`
//! function. Functions return an [`FkStatus`]; on failure a message is
//! available from [`fk_last_error`] until the next call on the same thread.
//! Reports come back as JSON strings owned by the caller and released with
//! [`fk_string_free`]. Complex matrices cross the boundary as `2·d·d`
//! doubles, row-major, real and imaginary parts interleaved.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use fermi_klein::io::{self, Tolerance};
use fermi_klein::klein::klein_battery;
use fermi_klein::linalg::{c, CMatrix};
use fermi_klein::states::StateFunctional;
use fermi_klein::structure::{run_counterexample, CounterexampleFixture};
use fermi_klein::{Error, GradedAlgebra, Report, DEFAULT_TOLERANCE};

/// Result codes. `FK_VERIFICATION_FAILED` means the call completed and wrote
/// its report, but at least one check failed.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FkStatus {
    FkOk = 0,
    FkVerificationFailed = 1,
    FkInvalidInput = 2,
    FkNullPointer = 3,
    FkGradingNotInner = 4,
    FkNotEven = 5,
    FkRankDeficient = 6,
    FkInternal = 7,
}

/// A graded algebra.
pub struct FkAlgebra(Arc<GradedAlgebra>);

/// A state on an [`FkAlgebra`].
pub struct FkState(StateFunctional);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn status_of(err: &Error) -> FkStatus {
    match err {
        Error::GradingNotInner { .. } => FkStatus::FkGradingNotInner,
        Error::NotEven { .. } => FkStatus::FkNotEven,
        Error::RankDeficient(_) => FkStatus::FkRankDeficient,
        Error::Verification(_) | Error::ClosureDiverged { .. } | Error::GradingNotImplemented(_) => {
            FkStatus::FkVerificationFailed
        }
        _ => FkStatus::FkInvalidInput,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<FkStatus, Fail>) -> FkStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            FkStatus::FkNullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            FkStatus::FkInternal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidInput(format!("{what} is not UTF-8"))))
}

unsafe fn matrix_arg(data: *const f64, d: usize, what: &'static str) -> Result<CMatrix, Fail> {
    if data.is_null() {
        return Err(Fail::Null(what));
    }
    let len = d
        .checked_mul(d)
        .and_then(|x| x.checked_mul(2))
        .ok_or_else(|| Fail::Lib(Error::InvalidInput("matrix dimension overflows".into())))?;
    let raw = std::slice::from_raw_parts(data, len);
    Ok(CMatrix::from_shape_fn((d, d), |(i, j)| c(raw[2 * (i * d + j)], raw[2 * (i * d + j) + 1])))
}

fn tolerance(t: f64) -> Tolerance {
    // a negative value means "use the file or the default"
    Tolerance { explicit: (t >= 0.0).then_some(t), fallback: DEFAULT_TOLERANCE }
}

unsafe fn write_report(report: &Report, out: *mut *mut c_char) -> Result<FkStatus, Fail> {
    if out.is_null() {
        return Err(Fail::Null("report output"));
    }
    let text = io::to_json(report)?;
    *out = CString::new(text).expect("JSON has no nul bytes").into_raw();
    Ok(if report.passed() { FkStatus::FkOk } else { FkStatus::FkVerificationFailed })
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<FkStatus, Fail> {
    if out.is_null() {
        return Err(Fail::Null("handle output"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(FkStatus::FkOk)
}

/// The message of the last failed call on this thread, or an empty string.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn fk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an algebra JSON document. A negative `tolerance_override` keeps the
/// tolerance stored in the document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fk_algebra_from_json(json: *const c_char, tolerance_override: f64, out: *mut *mut FkAlgebra) -> FkStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let alg = io::parse_algebra(text, tolerance(tolerance_override))?;
        store(out, FkAlgebra(Arc::new(alg)))
    })
}

/// One of the built-in algebras (`m2`, `m2+m2`, `m3`, `car2`, ...).
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn fk_algebra_builtin(name: *const c_char, out: *mut *mut FkAlgebra) -> FkStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let alg = io::builtin(name, tolerance(-1.0))?;
        store(out, FkAlgebra(Arc::new(alg)))
    })
}

/// # Safety
/// `alg` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fk_algebra_free(alg: *mut FkAlgebra) {
    if !alg.is_null() {
        drop(Box::from_raw(alg));
    }
}

/// Writes the algebra dimension and the size of its ambient matrices.
///
/// # Safety
/// `alg` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fk_algebra_dim(alg: *const FkAlgebra, dim: *mut usize, ambient_dim: *mut usize) -> FkStatus {
    guard(|| {
        let alg = &deref(alg, "algebra")?.0;
        if dim.is_null() || ambient_dim.is_null() {
            return Err(Fail::Null("dimension output"));
        }
        *dim = alg.dim();
        *ambient_dim = alg.ambient_dim();
        Ok(FkStatus::FkOk)
    })
}

/// Runs the structural validation and writes its JSON report.
///
/// # Safety
/// `alg` must be a live handle and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn fk_algebra_validate(alg: *const FkAlgebra, report: *mut *mut c_char) -> FkStatus {
    guard(|| write_report(&deref(alg, "algebra")?.0.validate(), report))
}

/// A state given by its density matrix on the ambient space (`2·d·d` doubles).
///
/// # Safety
/// `alg` must be a live handle, `density` must hold `2·d·d` doubles where
/// `d` is the ambient dimension, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fk_state_new(alg: *const FkAlgebra, density: *const f64, out: *mut *mut FkState) -> FkStatus {
    guard(|| {
        let alg = deref(alg, "algebra")?.0.clone();
        let rho = matrix_arg(density, alg.ambient_dim(), "density")?;
        store(out, FkState(StateFunctional::new(alg, rho)?))
    })
}

/// The normalized trace on the algebra.
///
/// # Safety
/// `alg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fk_state_trace(alg: *const FkAlgebra, out: *mut *mut FkState) -> FkStatus {
    guard(|| {
        let alg = deref(alg, "algebra")?.0.clone();
        store(out, FkState(StateFunctional::normalized_trace(alg)?))
    })
}

/// # Safety
/// `state` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn fk_state_free(state: *mut FkState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Evaluates the state on an algebra element (`2·d·d` doubles).
///
/// # Safety
/// `state` must be a live handle, `x` must hold `2·d·d` doubles and the
/// outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn fk_state_evaluate(state: *const FkState, x: *const f64, re: *mut f64, im: *mut f64) -> FkStatus {
    guard(|| {
        let state = &deref(state, "state")?.0;
        let x = matrix_arg(x, state.algebra().ambient_dim(), "element")?;
        state.algebra().ensure_member(&x)?;
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("value output"));
        }
        let v = state.evaluate(&x);
        *re = v.re;
        *im = v.im;
        Ok(FkStatus::FkOk)
    })
}

/// Builds the GNS representation and writes its validation report; the GNS
/// dimension and the central-support flag are written when the pointers are
/// non-null.
///
/// # Safety
/// `state` must be a live handle and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn fk_state_gns(
    state: *const FkState,
    gns_dim: *mut usize,
    central_support: *mut bool,
    report: *mut *mut c_char,
) -> FkStatus {
    guard(|| {
        let gns = deref(state, "state")?.0.gns()?;
        if let Some(d) = gns_dim.as_mut() {
            *d = gns.gns_dim;
        }
        if let Some(cs) = central_support.as_mut() {
            *cs = gns.has_central_support();
        }
        write_report(&gns.validate(), report)
    })
}

/// Builds the Klein map for `n` copies of `alg` and writes the verification
/// report. Fails with `FK_GRADING_NOT_INNER` for outer gradings.
///
/// # Safety
/// `alg` must be a live handle and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn fk_klein_verify(alg: *const FkAlgebra, n: usize, seed: u64, report: *mut *mut c_char) -> FkStatus {
    guard(|| {
        let alg = deref(alg, "algebra")?.0.clone();
        let (_, r) = klein_battery(alg, n, seed)?;
        write_report(&r, report)
    })
}

/// The CAR(2) counterexample battery. A positive `noise` perturbs the
/// annihilators with seeded Gaussian noise of that norm.
///
/// # Safety
/// `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fk_counterexample(noise: f64, seed: u64, report: *mut *mut c_char) -> FkStatus {
    guard(|| {
        let fixture = if noise > 0.0 {
            CounterexampleFixture::Perturbed { noise, seed }
        } else {
            CounterexampleFixture::JordanWigner
        };
        write_report(&run_counterexample(fixture)?, report)
    })
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn fk_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
