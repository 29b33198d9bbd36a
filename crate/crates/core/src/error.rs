use thiserror::Error;

/// Invalid parameters, dimensions or schedules. Raised before any stepping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid arena dimensions: {0}")]
    Dimensions(String),
    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("population {requested} exceeds habitable capacity {capacity}")]
    Capacity { requested: usize, capacity: usize },
    #[error("lattice dimensions {0}x{1} do not match arena {2}x{3}")]
    Mismatch(usize, usize, usize, usize),
    #[error("{0}")]
    Invalid(String),
}

/// Errors from the measurement pipeline when a statistic is undefined for its input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasurementError {
    #[error("inside column set must be a non-empty strict subset of the {0} columns")]
    BadColumnSet(usize),
    #[error("mean count is zero; coefficient of variation undefined")]
    ZeroMean,
    #[error("onset window holds {0} samples, at least 2 required")]
    TooFewSamples(usize),
    #[error("space-time matrix is empty")]
    EmptyMatrix,
}
