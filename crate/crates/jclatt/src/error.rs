use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("physics validation failed: {0}")]
    Physics(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("on nodal loop: m' = {m_eff} equals ±2t0 (t0 = {t0}); winding undefined")]
    OnNodalLoop { m_eff: f64, t0: f64 },
    #[error("nodal line proximity: minimum gap {gap:.3e} below threshold {threshold:.3e}")]
    NodalLineProximity { gap: f64, threshold: f64 },
    #[error("no edge states in trivial phase: |m'| = {m_eff} >= 2t0 = {two_t0}")]
    TrivialPhase { m_eff: f64, two_t0: f64 },
    #[error("norm drift {drift:.3e} at t = {t:.6} exceeds {limit:.1e}; reduce dt below {dt:.3e}")]
    NormDrift { drift: f64, t: f64, limit: f64, dt: f64 },
    #[error("trace drift {drift:.3e} at t = {t:.6} exceeds {limit:.1e}")]
    TraceDrift { drift: f64, t: f64, limit: f64 },
    #[error("positivity violated: eigenvalue {eigenvalue:.3e} at t = {t:.6}")]
    Positivity { eigenvalue: f64, t: f64 },
    #[error("step size: {0}")]
    StepSize(String),
    #[error("SQUID inductance diverges: Phi_ext/(2 phi0) = {0} is within 1e-6 of pi/2 + k pi")]
    Divergence(f64),
    #[error("arccos argument {0} outside [-1, 1]")]
    Domain(f64),
    #[error("drive too strong: {0}")]
    DriveTooStrong(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::InvalidParameter(_) => 2,
            Error::Physics(_)
            | Error::TrivialPhase { .. }
            | Error::OnNodalLoop { .. }
            | Error::NodalLineProximity { .. }
            | Error::Divergence(_)
            | Error::Domain(_)
            | Error::DriveTooStrong(_) => 3,
            Error::NormDrift { .. }
            | Error::TraceDrift { .. }
            | Error::Positivity { .. }
            | Error::StepSize(_) => 4,
            _ => 1,
        }
    }
}
