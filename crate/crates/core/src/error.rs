use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// The plateau value K0 = 1/sqrt(1+r+delta) does not lie in (2/2*, 1).
    #[error("plateau value K0 = {k0} must lie in ({lower}, 1); shrink r + delta")]
    PlateauOutOfRange { k0: f64, lower: f64 },

    /// The cubic bridge leaves [K0, 1] because it is not monotone.
    #[error("cubic bridge is not non-increasing (max slope {max_slope:e}); enlarge delta")]
    NonMonotoneBridge { max_slope: f64 },

    #[error("negative argument t = {0}")]
    NegativeArgument(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Rayleigh quotient minimization did not converge (best quotient {best}, {iterations} iterations)")]
    NonConvergence { best: f64, iterations: usize },

    #[error("g has no positive maximum at lambda = {lambda} (max value {max_value:e})")]
    NoPositiveMaximum { lambda: f64, max_value: f64 },

    #[error("cutoff window is degenerate: R0 = {r0}, R1 = {r1}")]
    DegenerateWindow { r0: f64, r1: f64 },

    #[error("no radius above 1e-10 makes the energy negative on the seed sphere (last radius {last_radius:e})")]
    RadiusSearchFailed { last_radius: f64 },

    #[error("line search stalled at iteration {iteration} (residual {residual:e})")]
    LineSearchStalled { iteration: usize, residual: f64 },

    #[error("iteration cap {iterations} reached (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("no seed converged to a negative-level critical point")]
    EmptySet,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error for key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("lambda = {lambda} is not below lambda* = {lambda_star}")]
    LambdaOutOfRange { lambda: f64, lambda_star: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
