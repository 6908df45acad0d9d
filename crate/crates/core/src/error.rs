use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation undefined on the empty set")]
    EmptySet,
    #[error("{what} exceeded the configured cap of {limit}")]
    CapExceeded { what: &'static str, limit: usize },
    #[error("point is not in the set")]
    PointNotInSet,
    #[error("polyhedron is not a cone")]
    NotACone,
    #[error("point lies outside the function domain")]
    PointOutsideDomain,
    #[error("point is not in the interior of the function domain")]
    PointOutsideDomainInterior,
    #[error("negative epsilon")]
    NegativeEps,
    #[error("restriction has an empty domain")]
    EmptyDomain,
    #[error("expression evaluation failed: {0}")]
    EvaluationFailure(String),
    #[error("point is not feasible")]
    InfeasiblePoint,
    #[error("point is not in the interior of dom g")]
    PointNotInteriorDomG,
    #[error("constraint set C is unbounded")]
    UnboundedC,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
