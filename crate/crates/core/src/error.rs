use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point or parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The matrix is numerically singular; for a derivative matrix this means
    /// the holomorphic part is not locally biholomorphic at the queried point.
    #[error("singular matrix: minimal gain {min_gain:e} below tolerance {tolerance:e}")]
    SingularMatrix { min_gain: f64, tolerance: f64 },

    #[error("direction is not a unit vector (norm {norm})")]
    BadDirection { norm: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("holomorphic part is not normalized: {0}")]
    NotNormalized(String),

    #[error("bad map specification: {0}")]
    BadSpec(String),

    #[error("membership in PH(alpha, k) refuted: {0}")]
    MembershipRefuted(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("degenerate Jacobian: det J_f = {det:e} at sample {index}")]
    DegenerateJacobian { det: f64, index: usize },

    #[error("dilatation {value} exceeds cap {cap} at sample {index}")]
    DilatationCapViolated { value: f64, cap: f64, index: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
