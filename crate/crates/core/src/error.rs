use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {re}+{im}i lies outside the chart")]
    OutsideChart { re: f64, im: f64 },

    #[error("pole of order {order} is not supported here (need order 2)")]
    UnsupportedOrder { order: i32 },

    #[error("path passes within {distance:e} of a singular point at {re}+{im}i")]
    BranchAmbiguity { re: f64, im: f64, distance: f64 },

    #[error("quadrature did not reach tolerance within {limit} panels")]
    Accuracy { limit: usize },

    #[error("{re}+{im}i is a singular point of the differential")]
    SingularPoint { re: f64, im: f64 },

    #[error("no admissible path from the base point: {0}")]
    ChartTopology(String),

    #[error("points belong to a different tree")]
    MismatchedTree,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e}, tolerance {tolerance:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("energy increased during sweep {sweep}: {before} -> {after}")]
    EnergyIncrease { sweep: usize, before: f64, after: f64 },

    #[error("fit is inconclusive: {0}")]
    Inconclusive(String),

    #[error("residue recovery failed: {0}")]
    Recovery(String),
}

pub type Result<T> = std::result::Result<T, Error>;
