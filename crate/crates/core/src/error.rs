use crate::sweep::SweepSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid fractional order {0}: the order must satisfy 0 < alpha <= 1")]
    InvalidOrder(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical blowup: component {component} became non-finite at node {node} (t = {t})")]
    NumericalBlowup { node: usize, t: f64, component: usize },

    #[error("{compartment} = {value:e} went negative at t = {t}; refine the grid (increase n_steps)")]
    NegativeState {
        compartment: &'static str,
        value: f64,
        t: f64,
    },

    #[error("Mittag-Leffler series for alpha = {alpha}, z = {z} did not stabilize within {terms} terms")]
    SeriesNonConvergence { alpha: f64, z: f64, terms: usize },

    #[error("forward-backward sweep did not converge after {} iterations", .0.iterations)]
    NotConverged(Box<SweepSolution>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("channel `{0}` not found in input")]
    MissingChannel(String),

    #[error("plot request has no channels")]
    NoChannels,

    #[error("csv error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
