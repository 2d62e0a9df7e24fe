//! C-callable incremental interface in the IPAMIR style.
//!
//! Every function takes the opaque pointer returned by [`ipamir_init`].
//! Literals are DIMACS integers. A clause is built one literal at a time and
//! finalized with `0`; finalizing through [`ipamir_add_hard_xor`] with
//! `is_xor` set turns the buffered literals into an XOR constraint whose
//! right-hand side is true. Plain [`ipamir_add_hard`] keeps its two-argument
//! signature so existing clients link unchanged; the C++ header adds the
//! three-argument overload with `is_xor = false` as default.
//!
//! Soft literals follow the file format's soft unit clauses: weight is paid
//! when the literal is false.
//!
//! Calls with a null solver pointer are ignored.

use std::ffi::{c_char, c_int, c_void};
use std::panic::{catch_unwind, AssertUnwindSafe};

use xorhs::maxsat::MaxSatSolver;
use xorhs::model::{Lit, Verdict};

pub const IPAMIR_INTERRUPTED: c_int = 0;
pub const IPAMIR_SAT: c_int = 10;
pub const IPAMIR_UNSAT: c_int = 20;
pub const IPAMIR_OPTIMAL: c_int = 30;
pub const IPAMIR_ERROR: c_int = 40;

struct Handle {
    solver: MaxSatSolver,
    /// Set by rejected input (zero weight, weight overflow) or a failed
    /// solve; every later solve reports an error.
    error: bool,
}

struct Callback {
    state: *mut c_void,
    f: extern "C" fn(*mut c_void) -> c_int,
}

// The callback only ever runs on the thread that called ipamir_solve.
unsafe impl Send for Callback {}

impl Callback {
    fn call(&self) -> bool {
        (self.f)(self.state) != 0
    }
}

fn with<R>(solver: *mut c_void, default: R, f: impl FnOnce(&mut Handle) -> R) -> R {
    if solver.is_null() {
        return default;
    }
    // SAFETY: non-null pointers come from ipamir_init and stay valid until
    // ipamir_release, as the interface requires of its callers.
    let h = unsafe { &mut *(solver as *mut Handle) };
    match catch_unwind(AssertUnwindSafe(|| f(h))) {
        Ok(r) => r,
        Err(_) => {
            h.error = true;
            default
        }
    }
}

fn lit(l: i32) -> Option<Lit> {
    (l != 0).then(|| Lit::from_dimacs(l))
}

#[no_mangle]
pub extern "C" fn ipamir_signature() -> *const c_char {
    concat!("xorhs ", env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub extern "C" fn ipamir_init() -> *mut c_void {
    let h = Box::new(Handle {
        solver: MaxSatSolver::default(),
        error: false,
    });
    Box::into_raw(h) as *mut c_void
}

/// # Safety
/// `solver` must come from [`ipamir_init`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ipamir_release(solver: *mut c_void) {
    if !solver.is_null() {
        drop(Box::from_raw(solver as *mut Handle));
    }
}

#[no_mangle]
pub extern "C" fn ipamir_add_hard(solver: *mut c_void, lit_or_zero: i32) {
    ipamir_add_hard_xor(solver, lit_or_zero, false)
}

/// Like [`ipamir_add_hard`]; `is_xor` only matters on the finalizing `0`.
#[no_mangle]
pub extern "C" fn ipamir_add_hard_xor(solver: *mut c_void, lit_or_zero: i32, is_xor: bool) {
    with(solver, (), |h| h.solver.add_hard_lit(lit_or_zero, is_xor))
}

/// Registering the same literal again adds to its weight.
#[no_mangle]
pub extern "C" fn ipamir_add_soft_lit(solver: *mut c_void, lit_: i32, weight: u64) {
    with(solver, (), |h| match lit(lit_) {
        Some(l) => {
            if h.solver.add_soft_lit(l, weight).is_err() {
                h.error = true;
            }
        }
        None => h.error = true,
    })
}

/// Assumes `lit` for the next [`ipamir_solve`] only.
#[no_mangle]
pub extern "C" fn ipamir_assume(solver: *mut c_void, lit_: i32) {
    with(solver, (), |h| match lit(lit_) {
        Some(l) => h.solver.assume(l),
        None => h.error = true,
    })
}

/// 30 optimum, 20 unsatisfiable (under the assumptions), 10 interrupted with
/// a model, 0 interrupted without one, 40 error.
#[no_mangle]
pub extern "C" fn ipamir_solve(solver: *mut c_void) -> c_int {
    with(solver, IPAMIR_ERROR, |h| {
        if h.error {
            return IPAMIR_ERROR;
        }
        match h.solver.solve() {
            Ok(r) => match r.verdict {
                Verdict::OptimumFound => IPAMIR_OPTIMAL,
                Verdict::Unsatisfiable => IPAMIR_UNSAT,
                Verdict::Unknown if r.model.is_some() => IPAMIR_SAT,
                Verdict::Unknown => IPAMIR_INTERRUPTED,
            },
            Err(_) => {
                h.error = true;
                IPAMIR_ERROR
            }
        }
    })
}

/// Cost of the last model; 0 when there is none.
#[no_mangle]
pub extern "C" fn ipamir_val_obj(solver: *mut c_void) -> u64 {
    with(solver, 0, |h| h.solver.val_obj().unwrap_or(0))
}

/// `lit` if it is true in the last model, `-lit` if false, 0 without a model.
#[no_mangle]
pub extern "C" fn ipamir_val_lit(solver: *mut c_void, lit_: i32) -> i32 {
    with(solver, 0, |h| match lit(lit_).map(|l| h.solver.val_lit(l)) {
        Some(Ok(true)) => lit_,
        Some(Ok(false)) => -lit_,
        _ => 0,
    })
}

/// Installs a callback polled between SAT calls; a nonzero return stops the
/// search. A null `terminate` removes it.
#[no_mangle]
pub extern "C" fn ipamir_set_terminate(
    solver: *mut c_void,
    state: *mut c_void,
    terminate: Option<extern "C" fn(*mut c_void) -> c_int>,
) {
    with(solver, (), |h| {
        let cb = terminate.map(|f| Callback { state, f });
        h.solver
            .set_terminate(cb.map(|cb| Box::new(move || cb.call()) as Box<dyn FnMut() -> bool + Send>));
    })
}
