//! C interface to the policy-optimization library.
//!
//! Handles are opaque pointers created and destroyed by this library; every
//! fallible call returns a status code (0 success, 1 starting policy not
//! mean-square stabilizing, 2 invalid input, 3 numerical failure) and leaves
//! a human-readable message for [`mjlqr_last_error_message`] on failure.
//! Gain and value buffers are row-major per mode, modes in order.
//!
//! All functions are panic-safe: internal panics surface as status 3, never
//! as unwinding across the boundary. Handles are not synchronized; do not
//! share one handle between threads without external locking.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mjlqr::bench::problem_from_json;
use mjlqr::error::Error;
use mjlqr::ops::is_mss;
use mjlqr::opt::{gradient, optimize, MethodKind, OptTrace, StepSize};
use mjlqr::riccati::{solve_care, CareSolution};
use mjlqr::tuple::MatTuple;
use mjlqr::value::cost;
use mjlqr::{MjlsProblem, Policy};

/// Success.
pub const MJLQR_OK: c_int = 0;
/// The policy (or the zero policy a run started from) is not mean-square
/// stabilizing.
pub const MJLQR_ERR_STABILITY: c_int = 1;
/// Malformed input: unparsable JSON, shape mismatches, null pointers.
pub const MJLQR_ERR_INVALID: c_int = 2;
/// Numerical failure: lost convergence, rejected steps, singular curvature.
pub const MJLQR_ERR_NUMERICAL: c_int = 3;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).expect("NUL bytes removed"));
    });
}

fn code_of(err: &Error) -> c_int {
    match err {
        Error::Stability { .. } => MJLQR_ERR_STABILITY,
        Error::InvalidInput { .. }
        | Error::DimensionMismatch { .. }
        | Error::Parse(_)
        | Error::Io { .. } => MJLQR_ERR_INVALID,
        _ => MJLQR_ERR_NUMERICAL,
    }
}

fn fail(err: Error) -> c_int {
    let code = code_of(&err);
    set_error(err.to_string());
    code
}

fn fail_invalid(message: &str) -> c_int {
    set_error(message.to_string());
    MJLQR_ERR_INVALID
}

/// Runs `body` with panics converted to status 3.
fn guarded(body: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic".to_string());
            MJLQR_ERR_NUMERICAL
        }
    }
}

/// Opaque problem instance.
pub struct MjlqrProblem {
    inner: MjlsProblem,
}

/// Opaque solution of the coupled Riccati equations.
pub struct MjlqrCareSolution {
    inner: CareSolution,
    modes: usize,
    state_dim: usize,
    input_dim: usize,
}

/// Opaque optimizer trace.
pub struct MjlqrTrace {
    inner: OptTrace,
    modes: usize,
    state_dim: usize,
    input_dim: usize,
}

/// Reconstructs a policy from a row-major gain buffer of length
/// `modes * input_dim * state_dim`.
///
/// # Safety
/// `gains` must point to at least that many readable doubles.
unsafe fn policy_from_buffer(problem: &MjlsProblem, gains: *const f64) -> Option<Policy> {
    if gains.is_null() {
        return None;
    }
    let n = problem.num_modes();
    let rows = problem.input_dim();
    let cols = problem.state_dim();
    let per = rows * cols;
    let flat = std::slice::from_raw_parts(gains, n * per);
    Some(Policy::new(MatTuple::from_row_major(n, rows, cols, flat).ok()?))
}

/// Copies a tuple into a row-major buffer of length
/// `tuple.len() * nrows * ncols`.
///
/// # Safety
/// `out` must point to at least that many writable doubles.
unsafe fn tuple_to_buffer(tuple: &MatTuple, out: *mut f64) {
    let rows = tuple.nrows();
    let cols = tuple.ncols();
    let per = rows * cols;
    let dest = std::slice::from_raw_parts_mut(out, tuple.len() * per);
    for (m, block) in tuple.blocks().iter().enumerate() {
        for i in 0..rows {
            for j in 0..cols {
                dest[m * per + i * cols + j] = block[(i, j)];
            }
        }
    }
}

/// Message of the most recent failure on this thread, or null if none has
/// occurred. The pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn mjlqr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

/// Parses a problem from a JSON document; on success stores a new handle in
/// `*out`, to be released with [`mjlqr_problem_free`].
#[no_mangle]
pub extern "C" fn mjlqr_problem_from_json(
    json: *const c_char,
    out: *mut *mut MjlqrProblem,
) -> c_int {
    guarded(|| {
        if json.is_null() || out.is_null() {
            return fail_invalid("null argument");
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(text) => text,
            Err(_) => return fail_invalid("problem JSON is not valid UTF-8"),
        };
        match problem_from_json(text) {
            Ok(problem) => {
                let handle = Box::new(MjlqrProblem { inner: problem });
                unsafe { *out = Box::into_raw(handle) };
                MJLQR_OK
            }
            Err(err) => fail(err),
        }
    })
}

/// Releases a problem handle; a null pointer is ignored.
#[no_mangle]
pub extern "C" fn mjlqr_problem_free(problem: *mut MjlqrProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Writes the mode count, state dimension and input dimension of a problem.
#[no_mangle]
pub extern "C" fn mjlqr_problem_dims(
    problem: *const MjlqrProblem,
    modes: *mut usize,
    state_dim: *mut usize,
    input_dim: *mut usize,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { problem.as_ref() }) else {
            return fail_invalid("null problem handle");
        };
        if modes.is_null() || state_dim.is_null() || input_dim.is_null() {
            return fail_invalid("null output pointer");
        }
        unsafe {
            *modes = handle.inner.num_modes();
            *state_dim = handle.inner.state_dim();
            *input_dim = handle.inner.input_dim();
        }
        MJLQR_OK
    })
}

/// Computes the expected infinite-horizon cost of the policy in `gains`
/// (row-major, `modes * input_dim * state_dim` doubles).
#[no_mangle]
pub extern "C" fn mjlqr_cost(
    problem: *const MjlqrProblem,
    gains: *const f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { problem.as_ref() }) else {
            return fail_invalid("null problem handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        let Some(policy) = (unsafe { policy_from_buffer(&handle.inner, gains) }) else {
            return fail_invalid("null gain buffer");
        };
        match cost(&handle.inner, &policy) {
            Ok(value) => {
                unsafe { *out = value };
                MJLQR_OK
            }
            Err(err) => fail(err),
        }
    })
}

/// Computes the cost gradient at the policy in `gains`; the output buffer
/// uses the same layout and length as the input.
#[no_mangle]
pub extern "C" fn mjlqr_gradient(
    problem: *const MjlqrProblem,
    gains: *const f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { problem.as_ref() }) else {
            return fail_invalid("null problem handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        let Some(policy) = (unsafe { policy_from_buffer(&handle.inner, gains) }) else {
            return fail_invalid("null gain buffer");
        };
        match gradient(&handle.inner, &policy) {
            Ok(grad) => {
                unsafe { tuple_to_buffer(&grad, out) };
                MJLQR_OK
            }
            Err(err) => fail(err),
        }
    })
}

/// Computes the lifted closed-loop spectral radius of the policy in `gains`;
/// values below one (with margin) mean mean-square stability.
#[no_mangle]
pub extern "C" fn mjlqr_spectral_radius(
    problem: *const MjlqrProblem,
    gains: *const f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { problem.as_ref() }) else {
            return fail_invalid("null problem handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        let Some(policy) = (unsafe { policy_from_buffer(&handle.inner, gains) }) else {
            return fail_invalid("null gain buffer");
        };
        match is_mss(&handle.inner, &policy) {
            Ok((_, rho)) => {
                unsafe { *out = rho };
                MJLQR_OK
            }
            Err(err) => fail(err),
        }
    })
}

/// Solves the coupled Riccati equations to relative tolerance `tol` within
/// `max_iter` fixed-point iterations; on success stores a new handle in
/// `*out`, to be released with [`mjlqr_care_free`].
#[no_mangle]
pub extern "C" fn mjlqr_care_solve(
    problem: *const MjlqrProblem,
    tol: f64,
    max_iter: usize,
    out: *mut *mut MjlqrCareSolution,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { problem.as_ref() }) else {
            return fail_invalid("null problem handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        match solve_care(&handle.inner, tol, max_iter) {
            Ok(solution) => {
                let boxed = Box::new(MjlqrCareSolution {
                    inner: solution,
                    modes: handle.inner.num_modes(),
                    state_dim: handle.inner.state_dim(),
                    input_dim: handle.inner.input_dim(),
                });
                unsafe { *out = Box::into_raw(boxed) };
                MJLQR_OK
            }
            Err(err) => fail(err),
        }
    })
}

/// Releases a Riccati solution handle; a null pointer is ignored.
#[no_mangle]
pub extern "C" fn mjlqr_care_free(solution: *mut MjlqrCareSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Writes the optimal cost of a solved problem.
#[no_mangle]
pub extern "C" fn mjlqr_care_cost(solution: *const MjlqrCareSolution, out: *mut f64) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail_invalid("null solution handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        unsafe { *out = handle.inner.cost };
        MJLQR_OK
    })
}

/// Copies the optimal gains into `out` (row-major,
/// `modes * input_dim * state_dim` doubles).
#[no_mangle]
pub extern "C" fn mjlqr_care_gain(solution: *const MjlqrCareSolution, out: *mut f64) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail_invalid("null solution handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        debug_assert_eq!(handle.input_dim, handle.inner.k_star.k.nrows());
        unsafe { tuple_to_buffer(&handle.inner.k_star.k, out) };
        MJLQR_OK
    })
}

/// Copies the optimal value matrices into `out` (row-major,
/// `modes * state_dim * state_dim` doubles).
#[no_mangle]
pub extern "C" fn mjlqr_care_value(solution: *const MjlqrCareSolution, out: *mut f64) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail_invalid("null solution handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        debug_assert_eq!(handle.state_dim, handle.inner.p_star.nrows());
        debug_assert_eq!(handle.modes, handle.inner.p_star.len());
        unsafe { tuple_to_buffer(&handle.inner.p_star, out) };
        MJLQR_OK
    })
}

/// Runs an optimizer from the zero policy. `method` selects the update rule
/// (0 gradient descent, 1 Gauss-Newton, 2 natural gradient); `eta <= 0`
/// selects the certified step-size bound; the run stops when the gradient
/// norm falls below `tol * (1 + cost)` or after `max_iter` iterations. On
/// success stores a new handle in `*out`, to be released with
/// [`mjlqr_trace_free`].
#[no_mangle]
pub extern "C" fn mjlqr_optimize(
    problem: *const MjlqrProblem,
    method: c_int,
    eta: f64,
    tol: f64,
    max_iter: usize,
    out: *mut *mut MjlqrTrace,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { problem.as_ref() }) else {
            return fail_invalid("null problem handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        let kind = match method {
            0 => MethodKind::GradientDescent,
            1 => MethodKind::GaussNewton,
            2 => MethodKind::NaturalPG,
            other => return fail_invalid(&format!("unknown method code {other}")),
        };
        if eta.is_nan() {
            return fail_invalid("step size must not be NaN");
        }
        let step = if eta > 0.0 {
            StepSize::Fixed(eta)
        } else {
            StepSize::Auto
        };
        let k0 = Policy::zeros(&handle.inner);
        match optimize(&handle.inner, &k0, kind, step, tol, max_iter, None) {
            Ok(trace) => {
                let boxed = Box::new(MjlqrTrace {
                    inner: trace,
                    modes: handle.inner.num_modes(),
                    state_dim: handle.inner.state_dim(),
                    input_dim: handle.inner.input_dim(),
                });
                unsafe { *out = Box::into_raw(boxed) };
                MJLQR_OK
            }
            Err(err) => fail(err),
        }
    })
}

/// Releases a trace handle; a null pointer is ignored.
#[no_mangle]
pub extern "C" fn mjlqr_trace_free(trace: *mut MjlqrTrace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// Number of recorded iterates (the starting policy included). Returns 0 for
/// a null handle.
#[no_mangle]
pub extern "C" fn mjlqr_trace_len(trace: *const MjlqrTrace) -> usize {
    unsafe { trace.as_ref() }.map_or(0, |t| t.inner.records.len())
}

/// Copies row `index` of a trace. Outputs without a value (no ground truth,
/// no certified bound) are written as NaN; null output pointers are skipped.
#[no_mangle]
pub extern "C" fn mjlqr_trace_row(
    trace: *const MjlqrTrace,
    index: usize,
    cost: *mut f64,
    rel_err: *mut f64,
    grad_norm2: *mut f64,
    eta: *mut f64,
    rate_bound: *mut f64,
    rho_lifted: *mut f64,
) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { trace.as_ref() }) else {
            return fail_invalid("null trace handle");
        };
        let Some(rec) = handle.inner.records.get(index) else {
            return fail_invalid(&format!(
                "row {index} out of range for a trace of {} rows",
                handle.inner.records.len()
            ));
        };
        unsafe {
            if !cost.is_null() {
                *cost = rec.cost;
            }
            if !rel_err.is_null() {
                *rel_err = rec.rel_err.unwrap_or(f64::NAN);
            }
            if !grad_norm2.is_null() {
                *grad_norm2 = rec.grad_norm2;
            }
            if !eta.is_null() {
                *eta = rec.eta;
            }
            if !rate_bound.is_null() {
                *rate_bound = rec.rate_bound.unwrap_or(f64::NAN);
            }
            if !rho_lifted.is_null() {
                *rho_lifted = rec.rho_lifted;
            }
        }
        MJLQR_OK
    })
}

/// Copies the final iterate's gains into `out` (row-major,
/// `modes * input_dim * state_dim` doubles).
#[no_mangle]
pub extern "C" fn mjlqr_trace_final_gain(trace: *const MjlqrTrace, out: *mut f64) -> c_int {
    guarded(|| {
        let Some(handle) = (unsafe { trace.as_ref() }) else {
            return fail_invalid("null trace handle");
        };
        if out.is_null() {
            return fail_invalid("null output pointer");
        }
        debug_assert_eq!(handle.modes, handle.inner.final_policy.k.len());
        debug_assert_eq!(handle.state_dim, handle.inner.final_policy.k.ncols());
        debug_assert_eq!(handle.input_dim, handle.inner.final_policy.k.nrows());
        unsafe { tuple_to_buffer(&handle.inner.final_policy.k, out) };
        MJLQR_OK
    })
}
