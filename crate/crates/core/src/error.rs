use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge on [{a}, {b}] after {subdivisions} subdivisions (error estimate {estimate:e})")]
    QuadratureNonConvergence {
        a: f64,
        b: f64,
        subdivisions: usize,
        estimate: f64,
    },

    #[error("non-finite integrand value at x = {x}")]
    NonFinite { x: f64 },

    #[error("singular parameter: |det H| / scale = {ratio:e} (det = {det:e}, scale = {scale:e})")]
    SingularParameter { det: f64, scale: f64, ratio: f64 },

    #[error("singular linear system: pivot {pivot:e} in row {row}")]
    SingularSystem { pivot: f64, row: usize },

    #[error("grid too coarse: h = {h} exceeds eps / 20 = {limit}")]
    Resolution { h: f64, limit: f64 },

    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("{s} is within {tol:e} of a tangent pole")]
    PoleProximity { s: f64, tol: f64 },

    #[error("inconclusive limit: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from invalid user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidParameter(_)
                | Error::Precondition(_)
                | Error::Syntax { .. }
                | Error::Resolution { .. }
        )
    }
}
