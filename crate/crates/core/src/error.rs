use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("window volume must be positive, got {0}")]
    NonPositiveVolume(f64),
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("window axis {axis} is empty or not finite")]
    DegenerateWindow { axis: usize },
    #[error("shrinking by {margin} leaves no window (shortest side {side})")]
    ShrinkTooLarge { margin: f64, side: f64 },
    #[error("window is not contained in the carrier window")]
    NotContained,
    #[error("point {index} is not finite or lies outside the window")]
    PointOutsideWindow { index: usize },
    #[error("need {needed} neighbors but only {available} candidate points")]
    InsufficientPoints { needed: usize, available: usize },
    #[error("operation is only defined in the plane (d = 2)")]
    PlanarOnly,
    #[error("cell or fundamental region touches the window boundary")]
    BoundaryAffected,
    #[error("empirical distribution has no observations")]
    EmptySample,
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("density at the quantile must be positive and finite, got {0}")]
    NonPositiveDensity(f64),
    #[error("trimming radius needs n >= 2, got {0}")]
    TrimSampleTooSmall(f64),
    #[error("samples are degenerate: {0}")]
    Degenerate(&'static str),
    #[error("not enough observations: {0}")]
    InsufficientSample(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
