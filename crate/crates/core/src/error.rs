use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("outer radius {outer} leaves gap {gap:.6} which is not larger than 3*delta = {limit:.6}")]
    SeparationViolation { outer: f64, gap: f64, limit: f64 },
    #[error("interface radius is not positive (min {min:.3e}) at t = {t}")]
    NonPositiveRadius { min: f64, t: f64 },
    #[error("point is outside the tubular neighborhood (|r| = {distance:.6}, limit {limit:.6})")]
    OutsideTubularNeighborhood { distance: f64, limit: f64 },
    #[error("need at least {needed} time samples, got {got}")]
    InsufficientTimeSamples { needed: usize, got: usize },
    #[error("geometry is not a circle at t = {t}")]
    NonCircularGeometry { t: f64 },
    #[error("backend resolution too low: residual {residual:.3e} exceeds {tolerance:.3e}")]
    BackendResolutionTooLow { residual: f64, tolerance: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("compatibility condition violated: flux residual {residual:.3e}")]
    CompatibilityViolated { residual: f64 },
    #[error("coercivity condition violated: {0}")]
    CoercivityViolated(String),
    #[error("quadratic form is singular (smallest eigenvalue {lambda:.3e})")]
    SingularForm { lambda: f64 },
    #[error("power iteration did not converge in {iterations} iterations")]
    PowerIterationStall { iterations: usize },
    #[error("Richardson extrapolants disagree by {difference:.3e} (tolerance {tolerance:.3e})")]
    ExtrapolationDisagreement { difference: f64, tolerance: f64 },
    #[error("implicit solve failed: {0}")]
    ImplicitSolveFailed(String),
    #[error("step size too large: explicit growth factor {factor:.3e} exceeds 10")]
    StepsizeTooLarge { factor: f64 },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("cutoff mismatch: expected {expected}, got {got}")]
    CutoffMismatch { expected: usize, got: usize },
    #[error("not supported by this backend: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
