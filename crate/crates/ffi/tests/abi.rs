use std::ffi::{CStr, CString};
use std::ptr;

use malaria_focp_ffi::*;

fn last_error() -> String {
    let p = mf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Scenario(*mut MfScenario);

impl Scenario {
    fn new() -> Self {
        Self(mf_scenario_new_default())
    }
}

impl Drop for Scenario {
    fn drop(&mut self) {
        unsafe { mf_scenario_free(self.0) }
    }
}

fn solve(s: &Scenario, alpha: f64, bits: u32) -> (MfStatus, *mut MfSolution) {
    let mut out = ptr::null_mut();
    let st = unsafe { mf_solve(s.0, alpha, bits, &mut out) };
    (st, out)
}

fn channel(sol: *const MfSolution, c: MfChannel) -> Vec<f64> {
    let n = unsafe { mf_solution_len(sol) };
    let mut buf = vec![0.0; n];
    let st = unsafe { mf_solution_channel(sol, c as u32, buf.as_mut_ptr(), n) };
    assert_eq!(st, MfStatus::Ok);
    buf
}

#[test]
fn special_functions() {
    let mut v = 0.0;
    assert_eq!(unsafe { mf_gamma(0.5, &mut v) }, MfStatus::Ok);
    assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    assert_eq!(unsafe { mf_gamma(-2.0, &mut v) }, MfStatus::Domain);
    assert!(last_error().contains("domain"));

    assert_eq!(unsafe { mf_mittag_leffler(0.9, -1.0, &mut v) }, MfStatus::Ok);
    assert!((v - 0.376_066_021_424_641_9).abs() < 1e-10);
    assert_eq!(unsafe { mf_mittag_leffler(0.0, -1.0, &mut v) }, MfStatus::InvalidArgument);
    assert!(last_error().contains("0 < alpha <= 1"));
    assert_eq!(unsafe { mf_gamma(1.0, ptr::null_mut()) }, MfStatus::NullPointer);
}

#[test]
fn solve_and_read_channels() {
    let s = Scenario::new();
    assert_eq!(unsafe { mf_scenario_set_grid(s.0, 30.0, 300) }, MfStatus::Ok);
    let (st, sol) = solve(&s, 1.0, 7);
    assert_eq!(st, MfStatus::Ok);
    assert_eq!(unsafe { mf_solution_len(sol) }, 301);
    assert!(unsafe { mf_solution_converged(sol) });
    assert!(unsafe { mf_solution_iterations(sol) } > 0);
    let t = channel(sol, MfChannel::Time);
    assert_eq!((t[0], t[300]), (0.0, 30.0));
    assert_eq!(channel(sol, MfChannel::SH)[0], 800.0);
    assert_eq!(channel(sol, MfChannel::IV)[0], 500.0);
    assert_eq!(*channel(sol, MfChannel::Lambda5).last().unwrap(), 0.0);
    assert!(channel(sol, MfChannel::U3).iter().all(|u| (0.0..=1.0).contains(u)));

    let (_, base) = solve(&s, 1.0, 0);
    assert!(channel(base, MfChannel::U1).iter().all(|&u| u == 0.0));
    assert!(unsafe { mf_solution_objective(sol) < mf_solution_objective(base) });

    let mut small = [0.0; 3];
    let st = unsafe { mf_solution_channel(sol, MfChannel::IH as u32, small.as_mut_ptr(), 3) };
    assert_eq!(st, MfStatus::BufferTooSmall);
    let mut buf = vec![0.0; 301];
    let st = unsafe { mf_solution_channel(sol, 99, buf.as_mut_ptr(), 301) };
    assert_eq!(st, MfStatus::InvalidArgument);
    unsafe {
        mf_solution_free(sol);
        mf_solution_free(base);
    }
}

#[test]
fn bad_arguments_leave_the_scenario_untouched() {
    let s = Scenario::new();
    let name = CString::new("eta").unwrap();
    assert_eq!(unsafe { mf_scenario_set_param(s.0, name.as_ptr(), -1.0) }, MfStatus::InvalidArgument);
    let bogus = CString::new("zeta").unwrap();
    assert_eq!(unsafe { mf_scenario_set_param(s.0, bogus.as_ptr(), 1.0) }, MfStatus::InvalidArgument);
    assert_eq!(unsafe { mf_scenario_set_grid(s.0, 10.0, 0) }, MfStatus::InvalidArgument);
    assert_eq!(unsafe { mf_scenario_set_sweep(s.0, 1e-3, 100, 1.5) }, MfStatus::InvalidArgument);
    assert_eq!(unsafe { mf_scenario_set_costate_variant(s.0, 7) }, MfStatus::InvalidArgument);
    assert_eq!(
        unsafe { mf_scenario_set_initial_state(s.0, -1.0, 0.0, 0.0, 1.0, 1.0) },
        MfStatus::InvalidArgument
    );

    let (st, sol) = solve(&s, 1.5, 7);
    assert_eq!((st, sol), (MfStatus::InvalidArgument, ptr::null_mut()));
    let (st, sol) = solve(&s, 1.0, 8);
    assert_eq!((st, sol), (MfStatus::InvalidArgument, ptr::null_mut()));

    // the scenario still carries the defaults (horizon 100, 1000 steps)
    assert_eq!(unsafe { mf_scenario_set_grid(s.0, 10.0, 100) }, MfStatus::Ok);
    let (st, sol) = solve(&s, 1.0, 0);
    assert_eq!(st, MfStatus::Ok);
    assert_eq!(channel(sol, MfChannel::IH)[0], 200.0);
    unsafe { mf_solution_free(sol) };
}

#[test]
fn iteration_cap_returns_partial_solution() {
    let s = Scenario::new();
    assert_eq!(unsafe { mf_scenario_set_grid(s.0, 20.0, 200) }, MfStatus::Ok);
    assert_eq!(unsafe { mf_scenario_set_sweep(s.0, 1e-3, 1, 0.5) }, MfStatus::Ok);
    let (st, sol) = solve(&s, 1.0, 7);
    assert_eq!(st, MfStatus::NotConverged);
    assert!(!sol.is_null());
    assert!(!unsafe { mf_solution_converged(sol) });
    assert_eq!(unsafe { mf_solution_iterations(sol) }, 1);
    unsafe { mf_solution_free(sol) };
}

#[test]
fn costate_variants_differ() {
    let s = Scenario::new();
    assert_eq!(unsafe { mf_scenario_set_grid(s.0, 20.0, 200) }, MfStatus::Ok);
    let (_, mech) = solve(&s, 1.0, 7);
    let lit = MfCostateVariant::Literature as u32;
    assert_eq!(unsafe { mf_scenario_set_costate_variant(s.0, lit) }, MfStatus::Ok);
    let (st, other) = solve(&s, 1.0, 7);
    assert_eq!(st, MfStatus::Ok);
    assert_ne!(channel(mech, MfChannel::Lambda1), channel(other, MfChannel::Lambda1));
    unsafe {
        mf_solution_free(mech);
        mf_solution_free(other);
    }
}

#[test]
fn config_files_and_null_handles() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "[grid]\nhorizon = 5.0\nn_steps = 50\n").unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mf_scenario_from_config(cpath.as_ptr(), &mut s) }, MfStatus::Ok);
    let s = Scenario(s);
    let (_, sol) = solve(&s, 0.9, 1);
    assert_eq!(unsafe { mf_solution_len(sol) }, 51);
    unsafe { mf_solution_free(sol) };

    let missing = CString::new("/nonexistent/s.toml").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { mf_scenario_from_config(missing.as_ptr(), &mut out) }, MfStatus::InvalidArgument);
    assert!(last_error().contains("cannot read"));
    assert!(out.is_null());

    assert_eq!(unsafe { mf_scenario_set_grid(ptr::null_mut(), 1.0, 10) }, MfStatus::NullPointer);
    let (st, _) = solve(&Scenario(ptr::null_mut()), 1.0, 0);
    assert_eq!(st, MfStatus::NullPointer);
    assert_eq!(unsafe { mf_solution_len(ptr::null()) }, 0);
    assert!(unsafe { mf_solution_objective(ptr::null()) }.is_nan());
    unsafe {
        mf_scenario_free(ptr::null_mut());
        mf_solution_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(mf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
