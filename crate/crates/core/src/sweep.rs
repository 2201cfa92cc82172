//! Forward-backward sweep for fractional optimal control problems.
//!
//! Each iteration solves the state system forward with the current controls,
//! solves the costate system backward from `λ(tf) = 0` along that state, then
//! moves the controls toward the pointwise characterization. Iteration stops
//! once every control channel passes the relative test
//! `tol·Σ|u_new| - Σ|u_new - u_old| >= 0`.

use crate::error::{Error, Result};
use crate::fractional::{gen_euler_backward, gen_euler_forward, FracOrder, TimeGrid, Trajectory};

/// The optimality system of a control problem: dynamics, adjoint, control
/// law and running cost.
pub trait OptimalitySystem: Sync {
    fn state_dim(&self) -> usize;

    fn control_dim(&self) -> usize;

    fn state_rhs(&self, t: f64, x: &[f64], u: &[f64], dx: &mut [f64]) -> Result<()>;

    /// Right-hand side of the right-Caputo costate equation, `∂W/∂x + λᵀ∂M/∂x`.
    fn costate_rhs(&self, t: f64, x: &[f64], lambda: &[f64], u: &[f64], dl: &mut [f64])
        -> Result<()>;

    /// Admissible (already projected) control at a single node.
    fn control(&self, t: f64, x: &[f64], lambda: &[f64], u: &mut [f64]) -> Result<()>;

    /// Running cost `W(t, x, u)`.
    fn integrand(&self, t: f64, x: &[f64], u: &[f64]) -> f64;
}

pub struct FocpProblem<'a> {
    pub system: &'a dyn OptimalitySystem,
    pub x0: Vec<f64>,
    pub grid: TimeGrid,
    pub alpha: FracOrder,
}

impl<'a> FocpProblem<'a> {
    pub fn new(
        system: &'a dyn OptimalitySystem,
        x0: Vec<f64>,
        grid: TimeGrid,
        alpha: FracOrder,
    ) -> Result<Self> {
        if x0.len() != system.state_dim() {
            return Err(Error::Dimension(format!(
                "x0 has length {}, system state_dim is {}",
                x0.len(),
                system.state_dim()
            )));
        }
        if system.control_dim() == 0 {
            return Err(Error::Dimension("control_dim must be positive".into()));
        }
        Ok(Self {
            system,
            x0,
            grid,
            alpha,
        })
    }

    /// Forward state solve under a grid-aligned control trajectory.
    pub fn solve_state(&self, controls: &Trajectory) -> Result<Trajectory> {
        self.check_controls(controls)?;
        gen_euler_forward(
            |k, t, x, dx| self.system.state_rhs(t, x, controls.row(k), dx),
            &self.x0,
            &self.grid,
            self.alpha,
        )
    }

    /// Backward costate solve along `states` with terminal value zero.
    pub fn solve_costate(&self, states: &Trajectory, controls: &Trajectory) -> Result<Trajectory> {
        let terminal = vec![0.0; self.system.state_dim()];
        gen_euler_backward(
            |k, t, l, dl| self.system.costate_rhs(t, states.row(k), l, controls.row(k), dl),
            &terminal,
            &self.grid,
            self.alpha,
        )
    }

    /// Pointwise control candidates from the characterization.
    pub fn candidate_controls(&self, states: &Trajectory, costates: &Trajectory) -> Result<Trajectory> {
        let mut out = Trajectory::zeros(self.grid.n_nodes(), self.system.control_dim());
        for k in 0..self.grid.n_nodes() {
            self.system
                .control(self.grid.node(k), states.row(k), costates.row(k), out.row_mut(k))?;
        }
        Ok(out)
    }

    pub fn objective(&self, states: &Trajectory, controls: &Trajectory) -> f64 {
        objective_value(
            |t, x, u| self.system.integrand(t, x, u),
            &self.grid,
            states,
            controls,
        )
    }

    fn check_controls(&self, controls: &Trajectory) -> Result<()> {
        if controls.dim() != self.system.control_dim() || controls.len() != self.grid.n_nodes() {
            return Err(Error::Dimension(format!(
                "control trajectory is {}x{}, expected {}x{}",
                controls.len(),
                controls.dim(),
                self.grid.n_nodes(),
                self.system.control_dim()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialControls {
    Constant(Vec<f64>),
    Trajectory(Trajectory),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
    /// `None` starts from the zero control.
    pub initial_controls: Option<InitialControls>,
    /// Halve the relaxation weight when the largest per-channel change has
    /// not improved for [`STALL_WINDOW`] iterations (floor [`MIN_RELAXATION`]).
    pub adaptive_relaxation: bool,
}

pub const MIN_RELAXATION: f64 = 1.0 / 64.0;
pub const STALL_WINDOW: usize = 10;

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: 500,
            relaxation: 0.5,
            initial_controls: None,
            adaptive_relaxation: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "sweep.tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Config(format!(
                "sweep.relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("sweep.max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSolution {
    pub grid: TimeGrid,
    pub states: Trajectory,
    pub costates: Trajectory,
    pub controls: Trajectory,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relaxation weight in effect at the last iteration.
    pub final_relaxation: f64,
    /// Per iteration, per control channel: `Σ|u_new - u_old| / Σ|u_new|`
    /// (0 when both sums vanish).
    pub convergence_history: Vec<Vec<f64>>,
}

/// Mean control magnitude below which a channel's change is judged in
/// absolute rather than relative terms.
pub const CHANGE_FLOOR: f64 = 1e-3;

/// Per-channel relative change; `true` when every channel passes
/// `tol·max(Σ|new|, CHANGE_FLOOR·n) - Σ|new - old| >= 0` over `n` nodes.
///
/// Without the floor a channel whose optimum is identically zero never
/// passes: each relaxed step shrinks it by the same fraction.
pub fn relative_change(new: &Trajectory, old: &Trajectory, tol: f64) -> (Vec<f64>, bool) {
    let dim = new.dim();
    let floor = CHANGE_FLOOR * new.len() as f64;
    let mut norm = vec![0.0; dim];
    let mut diff = vec![0.0; dim];
    for (rn, ro) in new.rows().zip(old.rows()) {
        for i in 0..dim {
            norm[i] += rn[i].abs();
            diff[i] += (rn[i] - ro[i]).abs();
        }
    }
    let passed = norm.iter().zip(&diff).all(|(n, d)| tol * n.max(floor) - d >= 0.0);
    let rel = norm.iter().zip(&diff).map(|(&n, &d)| d / n.max(floor)).collect();
    (rel, passed)
}

fn relax(candidate: &Trajectory, old: &Trajectory, weight: f64) -> Trajectory {
    let rows: Vec<Vec<f64>> = candidate
        .rows()
        .zip(old.rows())
        .map(|(c, o)| {
            c.iter()
                .zip(o)
                .map(|(&c, &o)| weight * c + (1.0 - weight) * o)
                .collect()
        })
        .collect();
    Trajectory::from_rows(&rows).expect("rows share one width")
}

/// Runs the forward-backward sweep to a fixed point of the control map.
///
/// On convergence the returned controls are the iterate whose relaxed update
/// passed the stopping test, so one more iteration from the solution passes
/// it again. States, costates and `objective` belong to exactly those
/// controls. On failure to converge the partial solution rides inside
/// [`Error::NotConverged`].
pub fn sweep(problem: &FocpProblem<'_>, config: &SweepConfig) -> Result<SweepSolution> {
    config.validate()?;
    let n_nodes = problem.grid.n_nodes();
    let m = problem.system.control_dim();
    let mut controls = match &config.initial_controls {
        None => Trajectory::zeros(n_nodes, m),
        Some(InitialControls::Constant(v)) => {
            if v.len() != m {
                return Err(Error::Dimension(format!(
                    "initial control has length {}, expected {m}",
                    v.len()
                )));
            }
            Trajectory::constant(n_nodes, v)
        }
        Some(InitialControls::Trajectory(tr)) => tr.clone(),
    };
    problem.check_controls(&controls)?;

    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;
    let mut weight = config.relaxation;
    let mut best_change = f64::INFINITY;
    let mut stalled = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let states = problem.solve_state(&controls)?;
        let costates = problem.solve_costate(&states, &controls)?;
        let candidate = problem.candidate_controls(&states, &costates)?;
        let updated = relax(&candidate, &controls, weight);
        let (change, passed) = relative_change(&updated, &controls, config.tolerance);
        let worst = change.iter().copied().fold(0.0, f64::max);
        history.push(change);
        if passed {
            // `controls` is the verified fixed point and the trajectories
            // above were computed under it
            let objective = problem.objective(&states, &controls);
            return Ok(SweepSolution {
                grid: problem.grid,
                states,
                costates,
                controls,
                objective,
                iterations,
                converged: true,
                final_relaxation: weight,
                convergence_history: history,
            });
        }
        controls = updated;
        if worst < 0.99 * best_change {
            best_change = worst;
            stalled = 0;
        } else {
            stalled += 1;
        }
        if config.adaptive_relaxation && stalled >= STALL_WINDOW && weight > MIN_RELAXATION {
            // period-2 cycling of the control map; damp harder
            weight = (weight * 0.5).max(MIN_RELAXATION);
            best_change = worst;
            stalled = 0;
        }
    }

    let states = problem.solve_state(&controls)?;
    let costates = problem.solve_costate(&states, &controls)?;
    let objective = problem.objective(&states, &controls);
    Err(Error::NotConverged(Box::new(SweepSolution {
        grid: problem.grid,
        states,
        costates,
        controls,
        objective,
        iterations,
        converged: false,
        final_relaxation: weight,
        convergence_history: history,
    })))
}

/// Composite trapezoidal rule for `∫ W(t, x(t), u(t)) dt` over the grid.
pub fn objective_value<W>(integrand: W, grid: &TimeGrid, states: &Trajectory, controls: &Trajectory) -> f64
where
    W: Fn(f64, &[f64], &[f64]) -> f64,
{
    let n = grid.n_steps();
    let h = grid.h();
    let mut acc = 0.0;
    for k in 0..=n {
        let w = integrand(grid.node(k), states.row(k), controls.row(k));
        let weight = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += weight * w;
    }
    acc * h
}
