use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed time series (length, sample period, dimension).
    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    /// Two series that must agree in shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A metric is undefined for the given data (e.g. zero-norm truth).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A decay reference whose tail has not settled.
    #[error("decay not settled: {0}")]
    NotSettled(String),

    /// The slow-input generator could not bracket the requested slowness.
    #[error("input generation failed: {0}")]
    GenerationFailure(String),

    /// Bad plant/controller/model parameter.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// State left the physically meaningful region during simulation.
    #[error("simulation fault: {0}")]
    SimulationFault(String),

    /// Integration step too coarse for the fastest local time constant.
    #[error("stiffness guard violated: {0}")]
    StiffnessGuard(String),

    /// An iterative solver ran out of its budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Regression problem numerically rank-deficient.
    #[error("rank-deficient regression: {0}")]
    RankDeficient(String),

    /// Structural model errors: grid range, transversality, shape mismatch.
    #[error("model error: {0}")]
    Model(String),

    /// Inversion requested on a non-monotone forward map.
    #[error("non-monotone map: {0}")]
    NonMonotone(String),

    /// Model or config (de)serialization failure.
    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
