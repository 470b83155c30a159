use thiserror::Error;

/// Errors raised by the solver and its numerical substrate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tensor is singular (|det| = {det:e})")]
    SingularTensor { det: f64 },
    #[error("deformation gradient does not preserve orientation (det F = {det:e})")]
    OrientationViolation { det: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("q = {q} lies outside the branch domain (sup = {sup})")]
    OutOfDomain { q: f64, sup: f64 },
    #[error("branch point sits on the junction of the negative branches")]
    AtBranchJunction,
    #[error("stress tensor has a (near) zero eigenvalue: {min_eig:e}")]
    DegenerateStress { min_eig: f64 },
    #[error("dual tensor equation residual {residual:e} exceeds {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },
}

impl Error {
    /// Stable identifier used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularTensor { .. } => "SingularTensor",
            Error::OrientationViolation { .. } => "OrientationViolation",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::AtBranchJunction => "AtBranchJunction",
            Error::DegenerateStress { .. } => "DegenerateStress",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
