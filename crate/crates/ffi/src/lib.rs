//! C interface to the `wavemix` solvers.
//!
//! Every fallible call returns a [`WmStatus`]. On failure a description is
//! kept per thread and can be fetched with [`wm_last_error_message`].
//! Steady states are handed out as opaque [`WmState`] handles that must be
//! released with [`wm_state_free`].

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavemix::darkstates::{dark_decay_rate, dark_populations};
use wavemix::solvers::steady_state_auto;
use wavemix::strongdrive::steady_amplitudes;
use wavemix::{liouvillian, steady_state, DensityMatrix, Error, ObservableSet, SystemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateSteadyState = 3,
    TruncationNotConverged = 4,
    SolverFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// System parameters in units of κ.
///
/// `delta_auto != 0` selects Δ = Δ₁₂ + Δ₂₃ and ignores `delta`;
/// `n_max == 0` selects automatic Fock truncation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmParams {
    pub g: f64,
    pub omega12: f64,
    pub omega23: f64,
    pub delta12: f64,
    pub delta23: f64,
    pub delta: f64,
    pub delta_auto: i32,
    pub kappa: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub n_max: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WmComplex {
    pub re: f64,
    pub im: f64,
}

/// Steady-state observables. `g2_zero` and `ratio` are only meaningful when
/// the matching `has_` flag is nonzero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WmObservables {
    pub n_photon: f64,
    pub p33: f64,
    pub g2_zero: f64,
    pub has_g2_zero: i32,
    pub ratio: f64,
    pub has_ratio: i32,
    pub concurrence: f64,
    pub projected_trace: f64,
}

/// Opaque steady state together with the parameters it was solved for.
pub struct WmState {
    params: SystemParams,
    rho: DensityMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(err: &Error) -> WmStatus {
    match err {
        Error::DegenerateSteadyState { .. } => WmStatus::DegenerateSteadyState,
        Error::TruncationCapExceeded { .. } => WmStatus::TruncationNotConverged,
        Error::InvalidParams(_)
        | Error::InvalidSpec(_)
        | Error::IndexOutOfRange { .. }
        | Error::CouplingsVanish
        | Error::DriveVanishes
        | Error::Singular(_)
        | Error::TruncationTail { .. } => WmStatus::InvalidArgument,
        Error::SpecMismatch { .. }
        | Error::NotDensityMatrix(_)
        | Error::SteadyStateResidual { .. }
        | Error::StepSizeUnderflow { .. }
        | Error::StateDrift { .. } => WmStatus::SolverFailure,
    }
}

/// Runs `f`, recording errors and turning panics into [`WmStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (WmStatus, String)>) -> WmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            WmStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (WmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (WmStatus, String) {
    (WmStatus::NullPointer, format!("{what} is null"))
}

impl WmParams {
    fn to_system(self) -> SystemParams {
        SystemParams {
            g: self.g,
            omega12: self.omega12,
            omega23: self.omega23,
            delta12: self.delta12,
            delta23: self.delta23,
            delta: if self.delta_auto != 0 { None } else { Some(self.delta) },
            kappa: self.kappa,
            gamma31: self.gamma31,
            gamma32: self.gamma32,
            n_max: self.n_max as usize,
        }
    }
}

/// Library defaults: g = 10, Ω₁₂ = 0.1, Ω₂₃ = 3, zero detunings with
/// automatic Δ, κ = 1, Γ₃₁ = Γ₃₂ = 0.5 and automatic truncation.
#[no_mangle]
pub extern "C" fn wm_params_default() -> WmParams {
    let p = SystemParams::default();
    WmParams {
        g: p.g,
        omega12: p.omega12,
        omega23: p.omega23,
        delta12: p.delta12,
        delta23: p.delta23,
        delta: 0.0,
        delta_auto: 1,
        kappa: p.kappa,
        gamma31: p.gamma31,
        gamma32: p.gamma32,
        n_max: 0,
    }
}

/// Solves for the steady state. On success `*out` owns a new handle.
///
/// # Safety
/// `params` must be null or point to a valid `WmParams`; `out` must be null
/// or point to writable storage for a pointer.
#[no_mangle]
pub unsafe extern "C" fn wm_steady_state(params: *const WmParams, out: *mut *mut WmState) -> WmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let p = params.as_ref().ok_or_else(|| null("params"))?.to_system();
        let (params, rho) = if p.n_max == 0 {
            steady_state_auto(&p).map_err(lib_err)?
        } else {
            let rho = steady_state(&liouvillian(&p).map_err(lib_err)?).map_err(lib_err)?;
            (p, rho)
        };
        *out = Box::into_raw(Box::new(WmState { params, rho }));
        Ok(())
    })
}

/// Releases a handle from [`wm_steady_state`]. Null is ignored.
///
/// # Safety
/// `state` must be null or a handle that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn wm_state_free(state: *mut WmState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Fock truncation the state was solved at.
///
/// # Safety
/// `state` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn wm_state_n_max(state: *const WmState, out: *mut u32) -> WmStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.params.n_max as u32;
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn wm_state_observables(state: *const WmState, out: *mut WmObservables) -> WmStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let o = ObservableSet::evaluate(&s.rho);
        *out = WmObservables {
            n_photon: o.n_photon,
            p33: o.p33,
            g2_zero: o.g2_zero.unwrap_or(0.0),
            has_g2_zero: o.g2_zero.is_some() as i32,
            ratio: o.ratio.unwrap_or(0.0),
            has_ratio: o.ratio.is_some() as i32,
            concurrence: o.concurrence,
            projected_trace: o.projected_trace,
        };
        Ok(())
    })
}

/// Writes the dark-state populations P₀⁰ … P_{len−1}⁰ into `out`.
///
/// `len` may not exceed `n_max + 1` of the state.
///
/// # Safety
/// `state` must be null or a live handle; `out` null or valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn wm_state_dark_populations(state: *const WmState, out: *mut f64, len: usize) -> WmStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len == 0 {
            return Ok(());
        }
        if len > s.params.n_max + 1 {
            return Err((
                WmStatus::BufferTooSmall,
                format!("{len} populations requested but the state holds {}", s.params.n_max + 1),
            ));
        }
        let pops = dark_populations(&s.rho, &s.params, len - 1).map_err(lib_err)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&pops);
        Ok(())
    })
}

/// Cavity-induced decay rate Γₙ⁰ of dark state `n ≥ 1`.
///
/// # Safety
/// `params` must be null or valid; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn wm_dark_decay_rate(params: *const WmParams, n: usize, out: *mut f64) -> WmStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?.to_system();
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = dark_decay_rate(n, &p).map_err(lib_err)?;
        Ok(())
    })
}

/// Strong-drive steady coherent amplitudes β₊ and β₋.
///
/// # Safety
/// `params` must be null or valid; `plus` and `minus` null or writable.
#[no_mangle]
pub unsafe extern "C" fn wm_steady_amplitudes(
    params: *const WmParams,
    plus: *mut WmComplex,
    minus: *mut WmComplex,
) -> WmStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?.to_system();
        let plus = plus.as_mut().ok_or_else(|| null("plus"))?;
        let minus = minus.as_mut().ok_or_else(|| null("minus"))?;
        let b = steady_amplitudes(&p).map_err(lib_err)?;
        *plus = WmComplex {
            re: b.beta_plus.re,
            im: b.beta_plus.im,
        };
        *minus = WmComplex {
            re: b.beta_minus.re,
            im: b.beta_minus.im,
        };
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes without the terminator, so a caller can size a buffer
/// by passing `len = 0`.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn wm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}
