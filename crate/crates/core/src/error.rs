use thiserror::Error;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violates a structural assumption (convexity, l(0) = 0, compatibility, ...).
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    #[error("k_R = {value} lies outside the slope interval [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    /// A closed form was requested at a coincident point; the caller must use the limit.
    #[error("degenerate scale: {0}")]
    DegenerateScale(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("bad decay certificate: {0}")]
    BadDecayCertificate(String),

    #[error("grid error: {0}")]
    GridError(String),

    #[error("singular marching step at n = {step}: |1 - w j| = {factor:e}; refine the grid")]
    SingularStep { step: usize, factor: f64 },

    #[error("domain error: {0}")]
    DomainError(String),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_) | Error::SingularStep { .. } | Error::BadDecayCertificate(_)
        )
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ConstraintViolation(_) => "ConstraintViolation",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::DegenerateScale(_) => "DegenerateScale",
            Error::NoConvergence(_) => "NoConvergence",
            Error::BadDecayCertificate(_) => "BadDecayCertificate",
            Error::GridError(_) => "GridError",
            Error::SingularStep { .. } => "SingularStep",
            Error::DomainError(_) => "DomainError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
