use thiserror::Error;

use crate::boolfn::OrbitKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n = {n} exceeds the enumeration cap {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("coordinate count mismatch: expected {expected}, found {found}")]
    CoordinateMismatch { expected: usize, found: usize },

    #[error("key {key} does not lie in region R{region}")]
    NotInRegion { region: u8, key: OrbitKey },

    #[error("region R{region} recipe is not integral at {key}: {detail}")]
    Divisibility { region: u8, key: OrbitKey, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("Hessian is not positive definite (det = {det})")]
    NotPositiveDefinite { det: f64 },

    #[error("construction captures no assignment of orbit {0}")]
    ZeroCapture(OrbitKey),

    #[error("orbit {key} still uncovered after {rounds} rounds")]
    RoundsExhausted { key: OrbitKey, rounds: usize },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
