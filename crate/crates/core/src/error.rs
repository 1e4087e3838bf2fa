use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller supplied input outside an operation's domain.
    Precondition,
    /// The input was valid but a numerical procedure failed.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("inconsistent relations: {0}")]
    InconsistentRelations(String),
    #[error("inconsistent split profile: {0}")]
    InconsistentProfile(String),
    #[error("singular branch: {0}")]
    SingularBranch(String),
    #[error("function too small on contour (min |F| = {min_modulus:e} < {threshold:e}); perturb the radius")]
    ContourProximity { min_modulus: f64, threshold: f64 },
    #[error("zero count did not stabilise after {nodes} quadrature nodes (last estimate {estimate})")]
    QuadratureUnstable { nodes: usize, estimate: f64 },
    #[error("reduction did not terminate after {0} steps")]
    NonTermination(usize),
    #[error("Newton iteration stagnated (best residual {best_residual:e})")]
    NewtonStagnation { best_residual: f64 },
    #[error("Newton iterate left the certifying contour")]
    NewtonEscape,
    #[error("discriminant underflow: |Delta| = {0:e}")]
    Underflow(f64),
    #[error("rounding gap {gap:e} exceeds limit; increase precision")]
    PrecisionInsufficient { gap: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Precondition(_)
            | Error::Parse(_)
            | Error::InvalidDiscriminant(_)
            | Error::InconsistentRelations(_)
            | Error::InconsistentProfile(_)
            | Error::SingularBranch(_) => ErrorKind::Precondition,
            _ => ErrorKind::Numerical,
        }
    }
}
