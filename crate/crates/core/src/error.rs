use thiserror::Error;

/// Errors raised across the library.
///
/// Each variant maps onto one of the CLI exit codes via [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root bracket failure on branch {branch} for root index {index}")]
    Bracket { branch: &'static str, index: usize },

    #[error("step size {step} must be below half the correlation length {ell}")]
    StepSize { step: f64, ell: f64 },

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("coefficient bound violated: {0}")]
    CoefficientBound(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    CgNonConvergence { iterations: usize, residual: f64 },

    #[error("Picard iteration did not converge after {sweeps} sweeps (last change {change:e})")]
    PicardNonConvergence { sweeps: usize, change: f64 },

    #[error("empty determinacy region: kappa {kappa} must exceed c*T = {reach}")]
    EmptyRegion { kappa: f64, reach: f64 },

    #[error("characteristic through ({x}, {t}) left the determinacy region at tau = {tau}")]
    CharacteristicExit { x: f64, t: f64, tau: f64 },

    #[error("material error: {0}")]
    Material(String),

    #[error("{failed} of {total} samples failed (first: sample {sample}, lambda {lambda}: {message})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        sample: usize,
        lambda: usize,
        message: String,
    },

    #[error("comparison error: {0}")]
    Mismatch(String),

    #[error("bound ordering violated at {count} thresholds")]
    OrderingViolation { count: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Mismatch(_) | Error::InvalidInput(_) => 2,
            Error::CoefficientBound(_) | Error::Material(_) => 4,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
