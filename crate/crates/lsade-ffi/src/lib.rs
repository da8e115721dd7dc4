//! C interface to the `lsade` optimizer.
//!
//! The surface is a conventional handle-and-status API: build an opaque
//! [`LsadeConfigHandle`] from box bounds, adjust it through setters, then hand
//! [`lsade_optimize`] a callback that evaluates the objective. Every function
//! reports failure through an [`LsadeStatus`] code (or a null pointer for
//! constructors) and leaves a human-readable message retrievable with
//! [`lsade_last_error`]. Panics are caught at the boundary and surfaced as
//! [`LsadeStatus::Panic`] rather than unwinding into C.
//!
//! The generated header lives in `include/lsade.h` and is refreshed on every
//! build.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use lsade::bounds::BoxBounds;
use lsade::problems::{BenchmarkProblem, ProblemKind};
use lsade::rbf::{KernelKind, RbfKernel};
use lsade::schedule::SchedulePolicy;
use lsade::{run_lsade, Error, LsadeConfig};

/// Result code returned by every fallible function in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsadeStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument failed validation; see `lsade_last_error`.
    InvalidArgument = 2,
    /// The objective callback returned a nonzero code.
    ObjectiveFailure = 3,
    /// The objective produced a NaN or infinite value.
    NonFiniteValue = 4,
    /// A surrogate model could not be fitted.
    SurrogateFailure = 5,
    /// An unexpected internal error; see `lsade_last_error`.
    Internal = 6,
    /// A panic was caught at the boundary; the handle remains usable.
    Panic = 7,
}

/// Objective callback. Receives the candidate point `x` of length `dim` and
/// the opaque `user_data` pointer passed to `lsade_optimize`; writes the
/// objective value through `out` and returns zero, or returns nonzero to
/// abort the run (the nonzero code is echoed in the error message).
pub type LsadeObjective =
    Option<unsafe extern "C" fn(x: *const f64, dim: usize, user_data: *mut c_void, out: *mut f64) -> i32>;

/// Opaque optimizer configuration. Create with [`lsade_config_new`], release
/// with [`lsade_config_free`].
pub struct LsadeConfigHandle {
    inner: LsadeConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    // Interior NULs cannot round-trip through a C string; replace them.
    let sanitized = msg.replace('\0', "?");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NULs removed above");
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn fail(status: LsadeStatus, msg: &str) -> LsadeStatus {
    set_last_error(msg);
    status
}

fn status_for(err: &Error) -> LsadeStatus {
    match err {
        Error::DimensionMismatch { .. } | Error::InvalidArgument(_) => LsadeStatus::InvalidArgument,
        Error::NonFiniteObjective { .. } => LsadeStatus::NonFiniteValue,
        Error::SurrogateFit(_) => LsadeStatus::SurrogateFailure,
        Error::Evaluator(_) => LsadeStatus::ObjectiveFailure,
        Error::Io(_) => LsadeStatus::Internal,
    }
}

fn report(err: &Error) -> LsadeStatus {
    fail(status_for(err), &err.to_string())
}

/// Runs `body` with panics converted to [`LsadeStatus::Panic`].
fn guarded(body: impl FnOnce() -> LsadeStatus) -> LsadeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".into());
            fail(LsadeStatus::Panic, &format!("caught panic: {msg}"))
        }
    }
}

/// Returns the message for the most recent failure on this thread, or an
/// empty string if the last call succeeded. The pointer stays valid until the
/// next interface call on the same thread; copy it if you need to keep it.
#[no_mangle]
pub extern "C" fn lsade_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Returns the library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn lsade_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string contains a NUL"),
    };
    VERSION.as_ptr()
}

/// Creates a configuration for the box `[lower[i], upper[i]]`, `i < dim`,
/// with conventional defaults (budget 1000, 100 initial points, multiquadric
/// kernel, every component firing each iteration). Returns null and sets the
/// error message if the bounds are invalid.
///
/// # Safety
/// `lower` and `upper` must point to `dim` readable doubles each.
#[no_mangle]
pub unsafe extern "C" fn lsade_config_new(
    dim: usize,
    lower: *const f64,
    upper: *const f64,
    seed: u64,
) -> *mut LsadeConfigHandle {
    clear_last_error();
    if lower.is_null() || upper.is_null() {
        set_last_error("lsade_config_new: lower and upper must be non-null");
        return std::ptr::null_mut();
    }
    if dim == 0 {
        set_last_error("lsade_config_new: dim must be at least 1");
        return std::ptr::null_mut();
    }
    let lo = std::slice::from_raw_parts(lower, dim).to_vec();
    let hi = std::slice::from_raw_parts(upper, dim).to_vec();
    match BoxBounds::new(lo, hi) {
        Ok(bounds) => Box::into_raw(Box::new(LsadeConfigHandle {
            inner: LsadeConfig::for_bounds(bounds, seed),
        })),
        Err(e) => {
            set_last_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Releases a configuration. Null is accepted and ignored.
///
/// # Safety
/// `cfg` must be null or a pointer returned by [`lsade_config_new`] that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn lsade_config_free(cfg: *mut LsadeConfigHandle) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn config_mut<'a>(cfg: *mut LsadeConfigHandle) -> Option<&'a mut LsadeConfig> {
    cfg.as_mut().map(|h| &mut h.inner)
}

/// Sets the total objective-call budget, initial design included.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`].
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_budget(
    cfg: *mut LsadeConfigHandle,
    nfe_max: usize,
) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_budget: null config");
    };
    inner.nfe_max = nfe_max;
    LsadeStatus::Ok
}

/// Sets the size of the Latin hypercube initial design.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`].
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_initial_points(
    cfg: *mut LsadeConfigHandle,
    initial_points: usize,
) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(
            LsadeStatus::NullArgument,
            "lsade_config_set_initial_points: null config",
        );
    };
    inner.initial_points = initial_points;
    LsadeStatus::Ok
}

/// Sets the RNG seed; equal seeds reproduce runs exactly.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`].
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_seed(cfg: *mut LsadeConfigHandle, seed: u64) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_seed: null config");
    };
    inner.seed = seed;
    LsadeStatus::Ok
}

/// Selects the surrogate kernel by name (`multiquadric`/`mq`, `cubic`,
/// `thin_plate_spline`/`tps`, `linear`, `gaussian`) with shape parameter `c`
/// (ignored by kernels that take none; pass 1.0).
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`]; `name` must be a
/// nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_kernel(
    cfg: *mut LsadeConfigHandle,
    name: *const c_char,
    c: f64,
) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_kernel: null config");
    };
    if name.is_null() {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_kernel: null name");
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return fail(
            LsadeStatus::InvalidArgument,
            "lsade_config_set_kernel: name is not valid UTF-8",
        );
    };
    let kind = match KernelKind::from_str(name) {
        Ok(k) => k,
        Err(e) => return report(&e),
    };
    match RbfKernel::new(kind, c) {
        Ok(kernel) => {
            inner.kernel = kernel;
            LsadeStatus::Ok
        }
        Err(e) => report(&e),
    }
}

/// Sets the component schedule from its textual form, e.g. `static:1,2,4` or
/// `dynamic:1-4|8-1`.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`]; `rule` must be a
/// nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_schedule(
    cfg: *mut LsadeConfigHandle,
    rule: *const c_char,
) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_schedule: null config");
    };
    if rule.is_null() {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_schedule: null rule");
    }
    let Ok(rule) = CStr::from_ptr(rule).to_str() else {
        return fail(
            LsadeStatus::InvalidArgument,
            "lsade_config_set_schedule: rule is not valid UTF-8",
        );
    };
    match SchedulePolicy::parse(rule) {
        Ok(policy) => {
            inner.policy = policy;
            LsadeStatus::Ok
        }
        Err(e) => report(&e),
    }
}

/// Sets the differential-evolution scale factor `F` and crossover rate `Cr`.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`].
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_de(
    cfg: *mut LsadeConfigHandle,
    f_weight: f64,
    cr: f64,
) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_de: null config");
    };
    let mut de = inner.de.clone();
    de.f_weight = f_weight;
    de.cr = cr;
    match de.validate() {
        Ok(()) => {
            inner.de = de;
            LsadeStatus::Ok
        }
        Err(e) => report(&e),
    }
}

/// Sets the growth factor of the Lipschitz-constant estimation grid.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`].
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_alpha(cfg: *mut LsadeConfigHandle, alpha: f64) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(LsadeStatus::NullArgument, "lsade_config_set_alpha: null config");
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return fail(
            LsadeStatus::InvalidArgument,
            "lsade_config_set_alpha: alpha must be positive and finite",
        );
    }
    inner.alpha = alpha;
    LsadeStatus::Ok
}

/// When `strict` is nonzero, proposals that duplicate an archived point are
/// still evaluated and spend budget; by default they are skipped for free.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`].
#[no_mangle]
pub unsafe extern "C" fn lsade_config_set_strict_budget(
    cfg: *mut LsadeConfigHandle,
    strict: i32,
) -> LsadeStatus {
    clear_last_error();
    let Some(inner) = config_mut(cfg) else {
        return fail(
            LsadeStatus::NullArgument,
            "lsade_config_set_strict_budget: null config",
        );
    };
    inner.strict_budget = strict != 0;
    LsadeStatus::Ok
}

/// Runs the optimizer. On success writes the best point found into `best_x`
/// (a caller-owned buffer of the configured dimension), its objective value
/// into `best_f`, and the number of objective calls into `nfe`; each of the
/// three may be null to skip that output. The callback is invoked on the
/// calling thread.
///
/// # Safety
/// `cfg` must be a live pointer from [`lsade_config_new`]; `best_x`, if
/// non-null, must point to `dim` writable doubles; `best_f` and `nfe`, if
/// non-null, must be writable. The callback must either write a double
/// through `out` and return zero, or return nonzero.
#[no_mangle]
pub unsafe extern "C" fn lsade_optimize(
    cfg: *const LsadeConfigHandle,
    objective: LsadeObjective,
    user_data: *mut c_void,
    best_x: *mut f64,
    best_f: *mut f64,
    nfe: *mut usize,
) -> LsadeStatus {
    clear_last_error();
    let Some(handle) = cfg.as_ref() else {
        return fail(LsadeStatus::NullArgument, "lsade_optimize: null config");
    };
    let Some(callback) = objective else {
        return fail(LsadeStatus::NullArgument, "lsade_optimize: null objective");
    };
    let config = handle.inner.clone();
    let dim = config.bounds.dim();

    guarded(|| {
        let wrapped = |x: &[f64]| -> lsade::Result<f64> {
            let mut value = 0.0f64;
            let code = unsafe { callback(x.as_ptr(), x.len(), user_data, &mut value) };
            if code != 0 {
                return Err(Error::Evaluator(format!(
                    "objective callback returned status {code}"
                )));
            }
            Ok(value)
        };
        match run_lsade(wrapped, &config) {
            Ok(trace) => {
                if !best_x.is_null() {
                    let out = unsafe { std::slice::from_raw_parts_mut(best_x, dim) };
                    out.copy_from_slice(&trace.final_best.x);
                }
                if !best_f.is_null() {
                    unsafe { *best_f = trace.final_best.f };
                }
                if !nfe.is_null() {
                    unsafe { *nfe = trace.nfe };
                }
                LsadeStatus::Ok
            }
            Err(e) => report(&e),
        }
    })
}

/// Evaluates a built-in benchmark problem (`ellipsoid`, `rosenbrock`,
/// `ackley`, `griewank`) at `x` and writes the value through `out`.
///
/// # Safety
/// `name` must be a nul-terminated string, `x` must point to `dim` readable
/// doubles, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lsade_benchmark_eval(
    name: *const c_char,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> LsadeStatus {
    clear_last_error();
    if name.is_null() || x.is_null() || out.is_null() {
        return fail(
            LsadeStatus::NullArgument,
            "lsade_benchmark_eval: name, x, and out must be non-null",
        );
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        return fail(
            LsadeStatus::InvalidArgument,
            "lsade_benchmark_eval: name is not valid UTF-8",
        );
    };
    let kind = match ProblemKind::from_str(name) {
        Ok(k) => k,
        Err(e) => return report(&e),
    };
    let problem = match BenchmarkProblem::new(kind, dim) {
        Ok(p) => p,
        Err(e) => return report(&e),
    };
    let point = std::slice::from_raw_parts(x, dim);
    guarded(|| {
        unsafe { *out = problem.value(point) };
        LsadeStatus::Ok
    })
}
