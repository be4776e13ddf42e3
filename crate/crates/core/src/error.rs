use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("evaluation failed (non-finite result) at {point:?}")]
    Domain { point: Vec<f64> },
    #[error("fundamental tensor is singular at {point:?}")]
    SingularTensor { point: Vec<f64> },
    #[error("degenerate direction: F_vv = 0 at {point:?}")]
    DegenerateDirection { point: Vec<f64> },
    #[error("basis is not independent at sample {point:?}; resample")]
    DegenerateSample { point: Vec<f64> },
    #[error("bracket [X{i},X{j}] is not in the span of the basis (residual {residual:e})")]
    NotClosed { i: usize, j: usize, residual: f64 },
    #[error("curve sample is not unit speed (|c'| = {speed}); reparametrize first")]
    NotUnitSpeed { speed: f64 },
    #[error("degenerate circle fit: {0}")]
    DegenerateFit(String),
    #[error("initial point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("metric is not positive at {point:?} (F = {value})")]
    NotPositive { point: Vec<f64>, value: f64 },
    #[error("not cubic in z at {point:?} (check-node residual {residual:e})")]
    NotCubic { point: Vec<f64>, residual: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
