use thiserror::Error;

use crate::track_core::BranchId;

/// Every domain failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TtError {
    #[error("malformed slots: {0}")]
    MalformedSlots(String),
    #[error("unknown branch {0}")]
    UnknownBranch(BranchId),
    #[error("exceptional surface: 3g-3+k = {0} < 2")]
    ExceptionalSurface(i64),
    #[error("branch {0} is not large")]
    NotLargeBranch(BranchId),
    #[error("branch {0} is not mixed")]
    NotMixedBranch(BranchId),
    #[error("branch {0} is not the diagonal of a {1} split")]
    NotCollapsible(BranchId, &'static str),
    #[error("tie at branch {0}: both splits lose positivity")]
    TieCollision(BranchId),
    #[error("lamination proxy is not carried by this track: {0}")]
    NotCarried(String),
    #[error("both split directions at branch {0} carry the proxy")]
    Ambiguous(BranchId),
    #[error("no split at branch {0} carries the carried track")]
    NotCarriedBySplit(BranchId),
    #[error("the carried track is carried by a split at branch {0}")]
    CarriedBySplit(BranchId),
    #[error("incompatible local picture: {0}")]
    IncompatibleLocalPicture(String),
    #[error("move {index} failed: {source}")]
    SequenceFailed {
        index: usize,
        #[source]
        source: Box<TtError>,
    },
    #[error("lattice point is not a vertex of the enumerated cone")]
    NotInCone,
    #[error("join lies outside the enumerated radius")]
    RadiusExceeded,
    #[error("surfaces differ: {0} vs {1}")]
    SignatureMismatch(String, String),
    #[error("invalid gluing: {0}")]
    InvalidGluing(String),
    #[error("unknown curve {0}")]
    UnknownCurve(usize),
    #[error("unknown catalog name {0:?}")]
    UnknownName(String),
    #[error("agreement loop stalled: {0}")]
    NonTermination(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("track is not valid: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, TtError>;
