//! C ABI over `malaria-focp`.
//!
//! Scenarios and solutions are opaque heap handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`MfStatus`]; on failure [`mf_last_error`] holds a message for the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use malaria_focp::scenario::{parse_config, solve_cell};
use malaria_focp::{CostateVariant, Error, FracOrder, ScenarioConfig, StateVec, StrategyMask, SweepSolution};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Input outside a function's mathematical domain.
    Domain = 3,
    /// The sweep hit its iteration cap; the partial solution is still returned.
    NotConverged = 4,
    NumericalBlowup = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Trajectory columns addressable through [`mf_solution_channel`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfChannel {
    Time = 0,
    SH = 1,
    IH = 2,
    RH = 3,
    SV = 4,
    IV = 5,
    U1 = 6,
    U2 = 7,
    U3 = 8,
    Lambda1 = 9,
    Lambda2 = 10,
    Lambda3 = 11,
    Lambda4 = 12,
    Lambda5 = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfCostateVariant {
    MechanicalAdjoint = 0,
    Literature = 1,
}

/// Model parameters, initial state, grid and sweep settings.
pub struct MfScenario {
    config: ScenarioConfig,
}

/// States, costates and controls of one solved cell.
pub struct MfSolution {
    solution: SweepSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> MfStatus {
    match err {
        Error::Domain(_) | Error::SeriesNonConvergence { .. } => MfStatus::Domain,
        Error::NumericalBlowup { .. } | Error::NegativeState { .. } => MfStatus::NumericalBlowup,
        Error::NotConverged(_) => MfStatus::NotConverged,
        Error::Io(_) | Error::Csv(_) => MfStatus::Io,
        _ => MfStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> MfStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn guard<F: FnOnce() -> MfStatus>(f: F) -> MfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("internal panic");
        MfStatus::Panic
    })
}

fn null(what: &str) -> MfStatus {
    set_error(format!("{what} is null"));
    MfStatus::NullPointer
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Scenario with the default parameter set, initial state, grid and sweep
/// settings. Never NULL.
#[no_mangle]
pub extern "C" fn mf_scenario_new_default() -> *mut MfScenario {
    Box::into_raw(Box::new(MfScenario {
        config: ScenarioConfig::default(),
    }))
}

/// Loads a TOML scenario file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_from_config(path: *const c_char, out: *mut *mut MfScenario) -> MfStatus {
    guard(|| {
        if path.is_null() {
            return null("path");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8");
            return MfStatus::InvalidArgument;
        };
        match parse_config(Path::new(path)) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(MfScenario { config }));
                MfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed twice. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_free(scenario: *mut MfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

unsafe fn with_scenario<F>(scenario: *mut MfScenario, f: F) -> MfStatus
where
    F: FnOnce(&mut ScenarioConfig) -> malaria_focp::Result<()>,
{
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return null("scenario");
        };
        let mut next = s.config.clone();
        match f(&mut next).and_then(|_| next.validate()) {
            Ok(()) => {
                s.config = next;
                MfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Sets one model parameter by its config key (`lambda_h`, `eta`, `A`, ...).
/// The scenario is left unchanged on error.
///
/// # Safety
/// `scenario` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_set_param(scenario: *mut MfScenario, name: *const c_char, value: f64) -> MfStatus {
    if name.is_null() {
        return null("name");
    }
    let Ok(name) = CStr::from_ptr(name).to_str() else {
        set_error("name is not valid UTF-8");
        return MfStatus::InvalidArgument;
    };
    with_scenario(scenario, |c| c.params.set(name, value))
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_set_initial_state(
    scenario: *mut MfScenario,
    s_h: f64,
    i_h: f64,
    r_h: f64,
    s_v: f64,
    i_v: f64,
) -> MfStatus {
    with_scenario(scenario, |c| {
        c.initial_state = StateVec::new(s_h, i_h, r_h, s_v, i_v);
        Ok(())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_set_grid(scenario: *mut MfScenario, horizon: f64, n_steps: usize) -> MfStatus {
    with_scenario(scenario, |c| {
        c.horizon = horizon;
        c.n_steps = n_steps;
        c.grid().map(|_| ())
    })
}

/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_set_sweep(
    scenario: *mut MfScenario,
    tolerance: f64,
    max_iterations: usize,
    relaxation: f64,
) -> MfStatus {
    with_scenario(scenario, |c| {
        c.sweep.tolerance = tolerance;
        c.sweep.max_iterations = max_iterations;
        c.sweep.relaxation = relaxation;
        c.sweep.validate()
    })
}

/// `variant` is an [`MfCostateVariant`] value.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_scenario_set_costate_variant(scenario: *mut MfScenario, variant: u32) -> MfStatus {
    with_scenario(scenario, |c| {
        c.costate_variant = match variant {
            v if v == MfCostateVariant::MechanicalAdjoint as u32 => CostateVariant::MechanicalAdjoint,
            v if v == MfCostateVariant::Literature as u32 => CostateVariant::Literature,
            v => return Err(Error::Config(format!("unknown costate variant {v}"))),
        };
        Ok(())
    })
}

/// Solves one strategy at order `alpha`. Bit 0 of `mask_bits` enables bednets,
/// bit 1 treatment, bit 2 spraying.
///
/// On `MF_STATUS_OK` and on `MF_STATUS_NOT_CONVERGED` a solution handle is
/// written to `*out`; otherwise `*out` is set to NULL.
///
/// # Safety
/// `scenario` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mf_solve(
    scenario: *const MfScenario,
    alpha: f64,
    mask_bits: u32,
    out: *mut *mut MfSolution,
) -> MfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let Some(s) = scenario.as_ref() else {
            return null("scenario");
        };
        let alpha = match FracOrder::new(alpha) {
            Ok(a) => a,
            Err(e) => return fail(e),
        };
        let Some(mask) = StrategyMask::from_bits(mask_bits) else {
            set_error(format!("mask_bits {mask_bits} out of range 0..=7"));
            return MfStatus::InvalidArgument;
        };
        match solve_cell(&s.config, mask, alpha) {
            Ok(solution) => {
                *out = Box::into_raw(Box::new(MfSolution { solution }));
                MfStatus::Ok
            }
            Err(Error::NotConverged(partial)) => {
                set_error(format!("sweep did not converge after {} iterations", partial.iterations));
                *out = Box::into_raw(Box::new(MfSolution { solution: *partial }));
                MfStatus::NotConverged
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `solution` must come from [`mf_solve`] and not be freed twice. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn mf_solution_free(solution: *mut MfSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Number of grid nodes, or 0 for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_solution_len(solution: *const MfSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solution.grid.n_nodes())
}

/// Objective value `J`, or NaN for NULL.
///
/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_solution_objective(solution: *const MfSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.solution.objective)
}

/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_solution_iterations(solution: *const MfSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.solution.iterations)
}

/// # Safety
/// `solution` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_solution_converged(solution: *const MfSolution) -> bool {
    solution.as_ref().is_some_and(|s| s.solution.converged)
}

/// Copies one channel (an [`MfChannel`] value) into `buf`, which must hold
/// [`mf_solution_len`] values.
///
/// # Safety
/// `solution` must be a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mf_solution_channel(
    solution: *const MfSolution,
    channel: u32,
    buf: *mut f64,
    len: usize,
) -> MfStatus {
    guard(|| {
        let Some(s) = solution.as_ref() else {
            return null("solution");
        };
        if buf.is_null() {
            return null("buf");
        }
        let sol = &s.solution;
        let n = sol.grid.n_nodes();
        if len < n {
            set_error(format!("buffer holds {len} values, need {n}"));
            return MfStatus::BufferTooSmall;
        }
        let c = channel as usize;
        let values = match c {
            0 => sol.grid.nodes().collect(),
            1..=5 => sol.states.channel(c - 1),
            6..=8 => sol.controls.channel(c - 6),
            9..=13 => sol.costates.channel(c - 9),
            _ => {
                set_error(format!("unknown channel {channel}"));
                return MfStatus::InvalidArgument;
            }
        };
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&values);
        MfStatus::Ok
    })
}

/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mf_gamma(x: f64, out: *mut f64) -> MfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match malaria_focp::gamma(x) {
            Ok(v) => {
                *out = v;
                MfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// One-parameter Mittag-Leffler function `E_alpha(z)` for `0 < alpha <= 1`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn mf_mittag_leffler(alpha: f64, z: f64, out: *mut f64) -> MfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match FracOrder::new(alpha).and_then(|a| malaria_focp::mittag_leffler(a, z)) {
            Ok(v) => {
                *out = v;
                MfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
