//! Reference implementations used only by the test suites. Nothing here
//! calls into the production steppers or the analytic adjoint.
#![allow(dead_code, clippy::excessive_precision)]

use std::path::PathBuf;

use malaria_focp::model::{integrand_w, state_rhs, ControlVec, CostateVec, ModelParams, StateVec};

/// `E_α(z)` reference values from a 1500-digit power series.
pub const MITTAG_LEFFLER_TABLE: [(f64, f64, f64); 13] = [
    (0.9, -1.0, 0.376_066_021_424_641_879_02),
    (0.95, -1.0, 0.371_573_620_030_678_813_98),
    (0.99, -1.0, 0.368_548_318_060_339_616_9),
    (0.5, -1.0, 0.427_583_576_155_807_004_41),
    (0.5, -50.0, 0.011_281_536_265_323_772_5),
    (0.9, -20.0, 0.005_749_507_816_109_112_583_6),
    (0.99, -30.0, 0.000_359_756_051_682_172_397_54),
    (0.3, -5.0, 0.137_080_869_020_270_638_89),
    (0.75, -10.0, 0.030_643_250_976_059_637_773),
    (0.5, 2.0, 108.940_904_389_977_972_41),
    (0.9, 3.0, 32.921_897_176_850_824_779),
    (0.6, -50.0, 0.009_083_744_773_103_454_637_1),
    (0.95, -50.0, 0.001_067_234_039_220_842_969_9),
];

pub fn ml_reference(alpha: f64, z: f64) -> f64 {
    MITTAG_LEFFLER_TABLE
        .iter()
        .find(|&&(a, x, _)| a == alpha && x == z)
        .map(|&(_, _, v)| v)
        .expect("value not tabulated")
}

/// Classical fourth-order Runge-Kutta on a uniform grid of `n` steps over `[t0, tf]`.
pub fn rk4_reference<F>(rhs: F, x0: &[f64], t0: f64, tf: f64, n: usize) -> Vec<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let h = (tf - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0.to_vec();
    out.push(x.clone());
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + 0.5 * h, &axpy(&x, &k1, 0.5 * h));
        let k3 = rhs(t + 0.5 * h, &axpy(&x, &k2, 0.5 * h));
        let k4 = rhs(t + h, &axpy(&x, &k3, h));
        for j in 0..x.len() {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        assert!(x.iter().all(|v| v.is_finite()), "rk4 blowup at step {i}");
        out.push(x.clone());
    }
    out
}

/// Classical (α = 1) controlled host-vector model, written out from scratch.
pub fn classical_rhs(x: &[f64], u: &[f64], p: &ModelParams) -> Vec<f64> {
    let (sh, ih, rh, sv, iv) = (x[0], x[1], x[2], x[3], x[4]);
    let nh = sh + ih + rh;
    let nv = sv + iv;
    let force_h = (1.0 - u[0]) * p.a * p.b_prob * iv / nh;
    let force_v = (1.0 - u[0]) * p.a * p.c_prob * ih / nh;
    vec![
        p.lambda_h * nh - force_h * sh + p.nu * ih + p.gamma * rh - p.mu_h * sh,
        force_h * sh - (p.nu + p.r + p.rho * u[1] + p.delta + p.mu_h) * ih,
        (p.r + p.rho * u[1]) * ih - (p.gamma + p.mu_h) * rh,
        (1.0 - u[2]) * p.lambda_v * nv - force_v * sv - (p.mu_v + p.eta * u[2]) * sv,
        force_v * sv - (p.mu_v + p.eta * u[2]) * iv,
    ]
}

pub const FD_EPSILON: f64 = 1e-6;

/// `∂W/∂X + λᵀ∂M/∂X` by central differences of the running cost and the
/// state right-hand side, each coordinate stepped by `eps·max(|X_i|, 1)`.
pub fn adjoint_fd_oracle(
    x: &StateVec,
    l: &CostateVec,
    u: &ControlVec,
    p: &ModelParams,
    eps: f64,
) -> [f64; 5] {
    assert!((1e-7..=1e-4).contains(&eps));
    let base = x.to_array();
    let mut out = [0.0; 5];
    for i in 0..5 {
        let h = eps * base[i].abs().max(1.0);
        let mut plus = base;
        let mut minus = base;
        plus[i] += h;
        minus[i] -= h;
        let (xp, xm) = (StateVec::from_slice(&plus), StateVec::from_slice(&minus));
        let mp = state_rhs(0.0, &xp, u, p).unwrap().to_array();
        let mm = state_rhs(0.0, &xm, u, p).unwrap().to_array();
        let dw = (integrand_w(&xp, u, p) - integrand_w(&xm, u, p)) / (2.0 * h);
        let contracted: f64 = (0..5).map(|j| l.0[j] * (mp[j] - mm[j]) / (2.0 * h)).sum();
        out[i] = dw + contracted;
    }
    out
}

/// Composite midpoint rule on node values, using the average of adjacent
/// nodes as the midpoint estimate.
pub fn midpoint_from_nodes(values: &[f64], h: f64) -> f64 {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum::<f64>() * h
}

/// Midpoint rule with exact midpoints from a callable.
pub fn midpoint<F: Fn(f64) -> f64>(f: F, t0: f64, tf: f64, n: usize) -> f64 {
    let h = (tf - t0) / n as f64;
    (0..n).map(|k| f(t0 + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub case: String,
    pub production: Vec<f64>,
    pub oracle: Vec<f64>,
    pub max_abs: f64,
    pub max_rel: f64,
    pub pass: bool,
}

impl OracleReport {
    /// Component-wise comparison with `|a - b| <= rel_tol·max(|b|, floor)`.
    pub fn compare(case: &str, production: &[f64], oracle: &[f64], rel_tol: f64, floor: f64) -> Self {
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for (a, b) in production.iter().zip(oracle) {
            let d = (a - b).abs();
            max_abs = max_abs.max(d);
            max_rel = max_rel.max(d / b.abs().max(floor));
        }
        assert!(max_abs.is_finite() && max_rel.is_finite(), "{case}: non-finite deviation");
        Self {
            case: case.to_string(),
            production: production.to_vec(),
            oracle: oracle.to_vec(),
            max_abs,
            max_rel,
            pass: max_rel <= rel_tol,
        }
    }
}

/// Directory for test artifacts (`target/tmp` under cargo).
pub fn artifact_dir() -> PathBuf {
    let dir = option_env!("CARGO_TARGET_TMPDIR")
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir)
        .join("malaria-focp");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
