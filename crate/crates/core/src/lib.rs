//! Fractional-order optimal control of malaria transmission.
//!
//! The crate is layered bottom-up:
//!
//! - [`fractional`]: Γ, Mittag-Leffler and the explicit fractional Euler
//!   stepper for left (initial value) and right (terminal value) Caputo systems.
//! - [`sweep`]: a model-agnostic forward-backward sweep over an
//!   [`OptimalitySystem`](sweep::OptimalitySystem).
//! - [`model`]: the five-compartment host-vector model with bednet,
//!   treatment and insecticide controls.
//! - [`scenario`], [`output`], [`plot`]: the strategy × order batch runner
//!   behind the `malaria-focp` binary.

pub mod error;
pub mod fractional;
pub mod model;
pub mod output;
pub mod plot;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
pub use fractional::{gamma, mittag_leffler, FracOrder, TimeGrid, Trajectory};
pub use model::{
    default_initial_state, default_params, ControlVec, CostateVariant, CostateVec, MalariaSystem,
    ModelParams, StateVec, StrategyMask,
};
pub use scenario::{parse_config, run_matrix, RunRecord, ScenarioConfig};
pub use sweep::{sweep, FocpProblem, SweepConfig, SweepSolution};
