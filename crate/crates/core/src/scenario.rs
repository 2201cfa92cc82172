//! Strategy × order experiment matrix: configuration, execution and output.
//!
//! Config files are TOML with the sections `[params]`, `[initial_state]`,
//! `[grid]`, `[sweep]`, `[matrix]` and `[output]`. Every key is optional and
//! falls back to the default parameter set; unknown keys are rejected.
//!
//! ```toml
//! [params]              # any ModelParams key: lambda_h, lambda_v, mu_h, mu_v,
//! eta = 0.25            # a, b, c, delta, nu, gamma, r, rho, eta, A, d1, d2, d3
//!
//! [initial_state]
//! S_H = 800.0           # also I_H, R_H, S_V, I_V
//!
//! [grid]
//! horizon = 100.0       # days
//! n_steps = 1000
//!
//! [sweep]
//! tolerance = 1e-3
//! max_iterations = 500
//! relaxation = 0.5
//! initial_control = [0.0, 0.0, 0.0]
//! costate_variant = "mechanical_adjoint"   # or "literature"
//!
//! [matrix]
//! alphas = [1.0, 0.99, 0.95, 0.90]
//! strategies = ["bednets", "treatment", "spray", "bednets_treatment",
//!               "bednets_spray", "treatment_spray", "all"]
//! baseline = true       # zero-control run per alpha
//! workers = 4           # 0 = one per available core
//!
//! [output]
//! dir = "output"
//! plots = true
//! ```

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fractional::{FracOrder, TimeGrid};
use crate::model::{
    default_initial_state, total_populations, CostateVariant, MalariaSystem, ModelParams, StateVec,
    StrategyMask, STATE_NAMES,
};
use crate::output::{read_csv, trajectory_csv, write_atomic, SUMMARY_HEADER};
use crate::plot::{emit_plot, Chart, Series};
use crate::sweep::{sweep, FocpProblem, InitialControls, SweepConfig, SweepSolution};

pub const DEFAULT_ALPHAS: [f64; 4] = [1.0, 0.99, 0.95, 0.90];
pub const DEFAULT_HORIZON: f64 = 100.0;
pub const DEFAULT_N_STEPS: usize = 1000;

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub initial_state: StateVec,
    pub horizon: f64,
    pub n_steps: usize,
    pub alphas: Vec<FracOrder>,
    pub strategies: Vec<StrategyMask>,
    pub baseline: bool,
    pub sweep: SweepConfig,
    pub costate_variant: CostateVariant,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub plots: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            initial_state: default_initial_state(),
            horizon: DEFAULT_HORIZON,
            n_steps: DEFAULT_N_STEPS,
            alphas: DEFAULT_ALPHAS.iter().map(|&a| FracOrder::new(a).unwrap()).collect(),
            strategies: StrategyMask::SEVEN.to_vec(),
            baseline: true,
            sweep: SweepConfig::default(),
            costate_variant: CostateVariant::default(),
            workers: 0,
            output_dir: PathBuf::from("output"),
            plots: true,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<ModelParams>,
    initial_state: Option<RawInitialState>,
    grid: Option<RawGrid>,
    sweep: Option<RawSweep>,
    matrix: Option<RawMatrix>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialState {
    #[serde(rename = "S_H")]
    s_h: Option<f64>,
    #[serde(rename = "I_H")]
    i_h: Option<f64>,
    #[serde(rename = "R_H")]
    r_h: Option<f64>,
    #[serde(rename = "S_V")]
    s_v: Option<f64>,
    #[serde(rename = "I_V")]
    i_v: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    horizon: Option<f64>,
    n_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    relaxation: Option<f64>,
    initial_control: Option<Vec<f64>>,
    costate_variant: Option<CostateVariant>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    alphas: Option<Vec<f64>>,
    strategies: Option<Vec<String>>,
    baseline: Option<bool>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    plots: Option<bool>,
}

/// Parses and validates a config document.
pub fn parse_config_str(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = ScenarioConfig::default();

    if let Some(p) = raw.params {
        cfg.params = p;
    }
    if let Some(s) = raw.initial_state {
        let x = &mut cfg.initial_state;
        for (slot, v) in [
            (&mut x.s_h, s.s_h),
            (&mut x.i_h, s.i_h),
            (&mut x.r_h, s.r_h),
            (&mut x.s_v, s.s_v),
            (&mut x.i_v, s.i_v),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
    }
    if let Some(g) = raw.grid {
        cfg.horizon = g.horizon.unwrap_or(cfg.horizon);
        cfg.n_steps = g.n_steps.unwrap_or(cfg.n_steps);
    }
    if let Some(s) = raw.sweep {
        let sw = &mut cfg.sweep;
        sw.tolerance = s.tolerance.unwrap_or(sw.tolerance);
        sw.max_iterations = s.max_iterations.unwrap_or(sw.max_iterations);
        sw.relaxation = s.relaxation.unwrap_or(sw.relaxation);
        if let Some(u0) = s.initial_control {
            if u0.len() != 3 {
                return Err(Error::Config(format!(
                    "sweep.initial_control needs 3 values, got {}",
                    u0.len()
                )));
            }
            if u0.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Config(format!(
                    "sweep.initial_control values must lie in [0, 1], got {u0:?}"
                )));
            }
            sw.initial_controls = Some(InitialControls::Constant(u0));
        }
        cfg.costate_variant = s.costate_variant.unwrap_or(cfg.costate_variant);
    }
    if let Some(m) = raw.matrix {
        if let Some(alphas) = m.alphas {
            cfg.alphas = alphas
                .into_iter()
                .map(|a| {
                    FracOrder::new(a).map_err(|_| {
                        Error::Config(format!(
                            "matrix.alphas: {a} is out of range; the order must satisfy 0 < alpha <= 1"
                        ))
                    })
                })
                .collect::<Result<_>>()?;
        }
        if let Some(names) = m.strategies {
            cfg.strategies = names
                .iter()
                .map(|n| {
                    StrategyMask::from_name(n).ok_or_else(|| {
                        Error::Config(format!(
                            "matrix.strategies: unknown strategy `{n}` (expected one of none, bednets, \
                             treatment, spray, bednets_treatment, bednets_spray, treatment_spray, all)"
                        ))
                    })
                })
                .collect::<Result<_>>()?;
        }
        cfg.baseline = m.baseline.unwrap_or(cfg.baseline);
        cfg.workers = m.workers.unwrap_or(cfg.workers);
    }
    if let Some(o) = raw.output {
        cfg.output_dir = o.dir.unwrap_or(cfg.output_dir);
        cfg.plots = o.plots.unwrap_or(cfg.plots);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (name, v) in STATE_NAMES.iter().zip(self.initial_state.to_array()) {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "initial_state.{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if total_populations(&self.initial_state).0 <= 0.0 {
            return Err(Error::Config("initial human population must be positive".into()));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::Config(format!("grid.horizon must be > 0, got {}", self.horizon)));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("grid.n_steps must be positive".into()));
        }
        self.sweep.validate()?;
        if self.alphas.is_empty() {
            return Err(Error::Config("matrix.alphas must list at least one order".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("matrix.strategies must list at least one strategy".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.horizon, self.n_steps)
    }

    /// `(mask, alpha)` cells in execution order: per alpha, the baseline
    /// first, then the listed strategies. A listed `none` is the baseline.
    pub fn cells(&self) -> Vec<(StrategyMask, FracOrder)> {
        let mut cells = Vec::new();
        for &alpha in &self.alphas {
            let mut masks: Vec<StrategyMask> = Vec::new();
            if self.baseline {
                masks.push(StrategyMask::NONE);
            }
            for &m in &self.strategies {
                if !masks.contains(&m) {
                    masks.push(m);
                }
            }
            cells.extend(masks.into_iter().map(|m| (m, alpha)));
        }
        cells
    }

    fn worker_count(&self) -> usize {
        match self.workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }
}

/// Outcome of one (strategy, alpha) cell.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub strategy: String,
    pub mask: StrategyMask,
    pub alpha: FracOrder,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub final_i_h: f64,
    pub final_i_v: f64,
    pub csv_path: Option<PathBuf>,
    pub plot_paths: Vec<PathBuf>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn is_baseline(&self) -> bool {
        self.mask.is_none()
    }

    pub fn succeeded(&self) -> bool {
        self.converged && self.error.is_none()
    }

    fn summary_row(&self) -> String {
        let num = |v: f64| if v.is_finite() { v.to_string() } else { String::new() };
        format!(
            "{},{},{},{},{},{},{}",
            self.strategy,
            self.alpha,
            self.converged,
            self.iterations,
            num(self.objective),
            num(self.final_i_h),
            num(self.final_i_v)
        )
    }
}

pub fn cell_stem(mask: StrategyMask, alpha: FracOrder) -> String {
    format!("{}_alpha{}", mask.name(), alpha)
}

/// Runs one cell's sweep without touching the filesystem.
pub fn solve_cell(
    config: &ScenarioConfig,
    mask: StrategyMask,
    alpha: FracOrder,
) -> Result<SweepSolution> {
    let system = MalariaSystem::new(config.params.with_alpha(alpha), mask, config.costate_variant)?;
    let problem = FocpProblem::new(
        &system,
        config.initial_state.to_array().to_vec(),
        config.grid()?,
        alpha,
    )?;
    sweep(&problem, &config.sweep)
}

fn run_cell(config: &ScenarioConfig, mask: StrategyMask, alpha: FracOrder) -> RunRecord {
    let mut record = RunRecord {
        strategy: mask.name().to_string(),
        mask,
        alpha,
        converged: false,
        iterations: 0,
        objective: f64::NAN,
        final_i_h: f64::NAN,
        final_i_v: f64::NAN,
        csv_path: None,
        plot_paths: Vec::new(),
        error: None,
    };
    let solution = match solve_cell(config, mask, alpha) {
        Ok(sol) => sol,
        Err(Error::NotConverged(sol)) => {
            record.error = Some(format!("did not converge after {} iterations", sol.iterations));
            *sol
        }
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.converged = solution.converged;
    record.iterations = solution.iterations;
    record.objective = solution.objective;
    let last = solution.states.last();
    record.final_i_h = last[1];
    record.final_i_v = last[4];

    let stem = cell_stem(mask, alpha);
    let csv = config.output_dir.join(format!("{stem}.csv"));
    if let Err(e) = write_atomic(&csv, trajectory_csv(&solution).as_bytes()) {
        record.error = Some(e.to_string());
        return record;
    }
    record.csv_path = Some(csv.clone());

    if config.plots {
        let mut plots = vec![(format!("{stem}_infected.svg"), vec!["I_H", "I_V"])];
        if !mask.is_none() {
            plots.push((format!("{stem}_controls.svg"), vec!["u1", "u2", "u3"]));
        }
        for (file, channels) in plots {
            let out = config.output_dir.join(file);
            let channels: Vec<String> = channels.into_iter().map(String::from).collect();
            match emit_plot(&csv, &channels, &out) {
                Ok(()) => record.plot_paths.push(out),
                Err(e) => record.error = Some(e.to_string()),
            }
        }
    }
    record
}

/// Executes every cell, writes per-cell trajectory CSVs, `summary.csv` and
/// (optionally) SVG charts. Cell failures are recorded, not propagated.
pub fn run_matrix(config: &ScenarioConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir)?;
    let cells = config.cells();
    let slots: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let workers = config.worker_count().clamp(1, cells.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(mask, alpha)) = cells.get(i) else { break };
                let rec = run_cell(config, mask, alpha);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(rec);
            });
        }
    });
    let records: Vec<RunRecord> = slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect();

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for r in &records {
        summary.push_str(&r.summary_row());
        summary.push('\n');
    }
    write_atomic(&config.output_dir.join("summary.csv"), summary.as_bytes())?;

    if config.plots {
        write_order_comparison(config, &records)?;
    }
    Ok(records)
}

/// One chart per strategy and infected channel with a series per alpha.
fn write_order_comparison(config: &ScenarioConfig, records: &[RunRecord]) -> Result<()> {
    let mut masks: Vec<StrategyMask> = Vec::new();
    for r in records {
        if !masks.contains(&r.mask) {
            masks.push(r.mask);
        }
    }
    for mask in masks {
        for channel in ["I_H", "I_V"] {
            let mut series = Vec::new();
            for r in records.iter().filter(|r| r.mask == mask) {
                let Some(path) = &r.csv_path else { continue };
                let table = read_csv(path)?;
                series.push(Series {
                    label: format!("alpha = {}", r.alpha),
                    x: table.column("t")?,
                    y: table.column(channel)?,
                });
            }
            if series.is_empty() {
                continue;
            }
            let title = format!("{channel}, strategy {}", mask.name());
            let svg = Chart {
                title: &title,
                x_label: "time (days)",
                y_label: channel,
                series: &series,
            }
            .render();
            let out = config
                .output_dir
                .join(format!("compare_{}_{channel}.svg", mask.name()));
            write_atomic(&out, svg.as_bytes())?;
        }
    }
    Ok(())
}
