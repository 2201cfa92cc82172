//! Special functions and explicit time stepping for Caputo-type systems.
//!
//! The stepper is the explicit fractional Euler (product-rectangle) rule
//!
//! ```text
//! x_{n+1} = x_0 + h^α / Γ(α+1) · Σ_{j=0..n} [(n+1-j)^α - (n-j)^α] · f(t_j, x_j)
//! ```
//!
//! which carries the full power-law memory of the left Caputo derivative and
//! collapses to classical explicit Euler, `x_{n+1} = x_n + h·f(t_n, x_n)`, at
//! α = 1. Right-sided (terminal value) problems are mapped onto the same
//! stepper through the reflection `s = t_f - t`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform grid `t_k = t0 + k·h`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    n_steps: usize,
    h: f64,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, n_steps: usize) -> Result<Self> {
        if !t0.is_finite() || !tf.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{t0}, {tf}]")));
        }
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        let h = (tf - t0) / n_steps as f64;
        if h.is_nan() || h <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "step h = {h} must be positive (t0 = {t0}, tf = {tf})"
            )));
        }
        Ok(Self { t0, tf, n_steps, h })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tf(&self) -> f64 {
        self.tf
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node `k`. The last node is pinned to `tf` exactly.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.tf
        } else {
            self.t0 + k as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|k| self.node(k))
    }
}

/// Differentiation order, restricted to `0 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub const ONE: FracOrder = FracOrder(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 == 1.0
    }
}

impl Default for FracOrder {
    fn default() -> Self {
        FracOrder::ONE
    }
}

impl std::fmt::Display for FracOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Row-major sequence of `n_nodes` vectors, each of length `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn zeros(n_nodes: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; n_nodes * dim],
        }
    }

    /// Every node set to `value`.
    pub fn constant(n_nodes: usize, value: &[f64]) -> Self {
        let mut data = Vec::with_capacity(n_nodes * value.len());
        for _ in 0..n_nodes {
            data.extend_from_slice(value);
        }
        Self {
            dim: value.len(),
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (k, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {k} has length {}, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.len() - 1)
    }

    /// Values of one component across all nodes.
    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.rows().map(|r| r[i]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Same rows in reverse node order.
    pub fn reversed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for k in (0..self.len()).rev() {
            data.extend_from_slice(self.row(k));
        }
        Self {
            dim: self.dim,
            data,
        }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x here is the shifted argument (Γ(x+1) form)
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Γ(x) for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires a finite x > 0, got {x}")));
    }
    if x.fract() == 0.0 && x <= 30.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * lanczos_sum(x)
    }
}

/// ln Γ(x) for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("ln_gamma requires a finite x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + lanczos_sum(x).ln())
}

/// Neumaier compensated accumulator.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const ML_MAX_TERMS: usize = 20_000;
/// Largest series term tolerated before cancellation would cost the 1e-10 target.
const ML_CANCELLATION_LIMIT: f64 = 1.0e4;

/// One-parameter Mittag-Leffler function `E_α(z) = Σ z^k / Γ(αk + 1)`.
///
/// Uses the compensated power series when its terms stay small enough for
/// cancellation to be harmless. For negative arguments with strong
/// cancellation (α < 1), switches to the Laplace-type integral
/// representation, which is free of cancellation. Accurate to about 1e-10
/// absolute on `|z| <= 50`.
pub fn mittag_leffler(alpha: FracOrder, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("mittag_leffler requires finite z, got {z}")));
    }
    let a = alpha.value();
    if z == 0.0 {
        return Ok(1.0);
    }
    if alpha.is_integer() {
        return Ok(z.exp());
    }
    if z < 0.0 && peak_series_term(a, z.abs())? > ML_CANCELLATION_LIMIT {
        return Ok(mittag_leffler_negative_integral(a, -z));
    }
    mittag_leffler_series(a, z)
}

/// Peak of `|z|^k / Γ(αk+1)` over k, scanning until the terms start shrinking.
fn peak_series_term(a: f64, x: f64) -> Result<f64> {
    let ln_x = x.ln();
    let mut best = 0.0_f64;
    for k in 0..ML_MAX_TERMS {
        let ln_term = k as f64 * ln_x - ln_gamma(a * k as f64 + 1.0)?;
        if ln_term >= best {
            best = ln_term;
        } else if k > 2 {
            break;
        }
    }
    Ok(best.exp())
}

fn mittag_leffler_series(a: f64, z: f64) -> Result<f64> {
    let ln_x = z.abs().ln();
    let mut acc = CompensatedSum::default();
    let mut prev_mag = f64::INFINITY;
    for k in 0..ML_MAX_TERMS {
        let kf = k as f64;
        let mag = (kf * ln_x - ln_gamma(a * kf + 1.0)?).exp();
        let term = if z < 0.0 && k % 2 == 1 { -mag } else { mag };
        acc.add(term);
        let s = acc.value();
        if !s.is_finite() {
            break;
        }
        if k > 2 && mag < prev_mag && mag <= 1e-17 * s.abs().max(1e-300) {
            return Ok(s);
        }
        if k > 2 && mag < prev_mag && mag < 1e-300 {
            return Ok(s);
        }
        prev_mag = mag;
    }
    Err(Error::SeriesNonConvergence {
        alpha: a,
        z,
        terms: ML_MAX_TERMS,
    })
}

/// `E_α(-x)`, `x > 0`, `0 < α < 1`, from
/// `E_α(-x) = sin(απ)/(απ) ∫_0^1 [e^{-t u^{1/α}} + e^{-t u^{-1/α}}] / (u² + 2u cos(απ) + 1) du`
/// with `t = x^{1/α}`.
fn mittag_leffler_negative_integral(a: f64, x: f64) -> f64 {
    let t = x.powf(1.0 / a);
    // u² + 2u cos(απ) + 1 rewritten so it does not cancel near u = 1 as α → 1
    let half_gap = (0.5 * (1.0 - a) * PI).sin();
    let gap = 4.0 * half_gap * half_gap;
    let inv_a = 1.0 / a;
    let f = |u: f64| {
        let denom = (u - 1.0) * (u - 1.0) + gap * u;
        let near = (-t * u.powf(inv_a)).exp();
        let far = if u > 0.0 {
            (-t * u.powf(-inv_a)).exp()
        } else {
            0.0
        };
        (near + far) / denom
    };
    let integral = adaptive_simpson(&f, 0.0, 1.0, 1e-14, 60);
    ((1.0 - a) * PI).sin() / (a * PI) * integral
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    // Seed on a uniform partition so narrow features are not stepped over.
    const PIECES: usize = 64;
    let w = (b - a) / PIECES as f64;
    (0..PIECES)
        .map(|i| {
            let lo = a + i as f64 * w;
            let hi = if i + 1 == PIECES { b } else { lo + w };
            let (flo, fhi, fmid) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
            simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / PIECES as f64, depth)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below the rounding floor further halving only chases noise
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Memory weights `(m+1)^α - m^α` for `m = 0..n`, pre-scaled by `h^α / Γ(α+1)`.
fn memory_weights(alpha: FracOrder, h: f64, n: usize) -> Result<Vec<f64>> {
    let a = alpha.value();
    let scale = h.powf(a) / gamma(a + 1.0)?;
    Ok((0..n)
        .map(|m| {
            let m = m as f64;
            scale * ((m + 1.0).powf(a) - m.powf(a))
        })
        .collect())
}

fn check_finite(x: &[f64], node: usize, t: f64) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(component) => Err(Error::NumericalBlowup { node, t, component }),
        None => Ok(()),
    }
}

/// Integrates the left-Caputo initial value problem `D^α x = f(t, x)`, `x(t0) = x0`.
///
/// `rhs(k, t_k, x_k, out)` receives the node index so callers can look up
/// grid-aligned inputs (e.g. control values). Returns all `n_steps + 1` nodes;
/// node 0 is `x0` verbatim.
pub fn gen_euler_forward<F>(
    mut rhs: F,
    x0: &[f64],
    grid: &TimeGrid,
    alpha: FracOrder,
) -> Result<Trajectory>
where
    F: FnMut(usize, f64, &[f64], &mut [f64]) -> Result<()>,
{
    let dim = x0.len();
    let n = grid.n_steps();
    let mut traj = Trajectory::zeros(n + 1, dim);
    traj.row_mut(0).copy_from_slice(x0);
    check_finite(x0, 0, grid.node(0))?;

    if alpha.is_integer() {
        let h = grid.h();
        let mut dx = vec![0.0; dim];
        for k in 0..n {
            let t = grid.node(k);
            rhs(k, t, traj.row(k), &mut dx)?;
            check_finite(&dx, k, t)?;
            let (done, rest) = traj.data.split_at_mut((k + 1) * dim);
            let cur = &done[k * dim..];
            for ((next, &x), &d) in rest[..dim].iter_mut().zip(cur).zip(&dx) {
                *next = x + h * d;
            }
            check_finite(traj.row(k + 1), k + 1, grid.node(k + 1))?;
        }
        return Ok(traj);
    }

    let weights = memory_weights(alpha, grid.h(), n)?;
    let mut history = Trajectory::zeros(n, dim);
    for k in 0..n {
        let t = grid.node(k);
        rhs(k, t, traj.row(k), history.row_mut(k))?;
        check_finite(history.row(k), k, t)?;

        let next = traj.row_mut(k + 1);
        next.copy_from_slice(x0);
        for j in 0..=k {
            let w = weights[k - j];
            for (x, &f) in next.iter_mut().zip(history.row(j)) {
                *x += w * f;
            }
        }
        check_finite(traj.row(k + 1), k + 1, grid.node(k + 1))?;
    }
    Ok(traj)
}

/// Integrates the right-Caputo terminal value problem `ₜD^α_{tf} λ = g(t, λ)`,
/// `λ(tf) = terminal`.
///
/// With `μ(s) = λ(tf - s)` the right derivative becomes a left derivative in
/// `s`, so this runs [`gen_euler_forward`] on the reflected grid and flips the
/// result. At α = 1 this is `λ_k = λ_{k+1} + h·g(t_{k+1}, λ_{k+1})`;
/// `rhs(k, t_k, λ_k, out)` is always called with indices of the original grid.
pub fn gen_euler_backward<G>(
    mut rhs: G,
    terminal: &[f64],
    grid: &TimeGrid,
    alpha: FracOrder,
) -> Result<Trajectory>
where
    G: FnMut(usize, f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = grid.n_steps();
    let reflected = TimeGrid::new(0.0, grid.tf() - grid.t0(), n)?;
    let reversed = gen_euler_forward(
        |m, _s, mu, out| {
            let k = n - m;
            rhs(k, grid.node(k), mu, out)
        },
        terminal,
        &reflected,
        alpha,
    )
    .map_err(|e| match e {
        Error::NumericalBlowup { node, component, .. } => Error::NumericalBlowup {
            node: n - node,
            t: grid.node(n - node),
            component,
        },
        other => other,
    })?;
    Ok(reversed.reversed())
}
