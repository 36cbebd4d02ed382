use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("packet under-resolved: width {width} must exceed 3 grid spacings ({min})")]
    UnderResolved { width: f64, min: f64 },

    #[error("packet too close to periodic boundary: need {required} from edge, have {available}")]
    BoundaryMargin { required: f64, available: f64 },

    #[error("numerical blow-up at t = {time}")]
    NumericalBlowUp { time: f64 },

    #[error("node region at x = {position:?}")]
    NodeRegion { position: Vec<f64> },

    #[error("trajectory left the grid margin at t = {time}, x = {position:?}")]
    OutOfGrid { time: f64, position: Vec<f64> },

    #[error("time {time} outside the recorded interval [{start}, {end}]")]
    OutOfRecord { time: f64, start: f64, end: f64 },

    #[error("locality assumption violated: {0}")]
    LocalityViolated(String),

    #[error("{affected} of {total} subsystems hit masked regions (limit {limit})")]
    TooManyResamples {
        affected: usize,
        total: usize,
        limit: usize,
    },

    #[error("trajectory aborted at t = {last_time}, x = {last_position:?}: {reason}")]
    TrajectoryAborted {
        reason: Box<Error>,
        last_time: f64,
        last_position: Vec<f64>,
    },

    #[error("internal forces do not cancel: residual {residual} exceeds {bound}")]
    InternalForceImbalance { residual: f64, bound: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
