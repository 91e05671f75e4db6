use thiserror::Error;

/// Errors raised by the numeric substrate and the envelope machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined root set: polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root finder did not converge (worst relative residual {worst_residual:e})")]
    RootsNotConverged { residuals: Vec<f64>, worst_residual: f64 },
    #[error("contour too close to zero set (|h| = {modulus:e} at {point_re}+{point_im}i)")]
    ContourTooClose { modulus: f64, point_re: f64, point_im: f64 },
    #[error("infeasible family: every start evaluated to +inf")]
    InfeasibleFamily,
    #[error("multiplicity undefined: disc is constant")]
    ConstantDisc,
    #[error("disc contained in H: f0 vanishes identically")]
    DiscInHyperplane,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("domain is empty")]
    EmptyDomain,
    #[error("domain is not convex")]
    NotConvex,
    #[error("point is off the curve model (distance {distance:e})")]
    OffCurve { distance: f64 },
    #[error("lift undefined: disc image lies in the singular set")]
    LiftUndefined,
    #[error("branch tracking failed: {0}")]
    BranchTracking(String),
    #[error("counterexample data rejected: {0}")]
    Rejected(String),
    #[error("root-count mismatch: roots {roots} vs winding {winding}")]
    CountMismatch { roots: usize, winding: i64 },
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
