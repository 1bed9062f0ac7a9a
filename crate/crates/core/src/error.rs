use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension n = {n} is outside the supported range [{min}, {max}]")]
    InvalidDimension { n: usize, min: usize, max: usize },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("direction vector vanishes after removing its mean")]
    ZeroVector,

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("coordinates {gap:e} apart are too close for the raw alternating sum")]
    NearCoincidentKnots { gap: f64 },

    #[error("exact slicing supports n <= {max}, got n = {n}")]
    UnsupportedDimension { n: usize, max: usize },

    #[error("no sign change found while bracketing {what}")]
    NoRoot { what: &'static str },

    #[error("root of {what} is not bracketed on [{lo}, {hi}]")]
    RootBracketFailure { what: &'static str, lo: f64, hi: f64 },

    #[error("no feasible sample for {claim} (n = {n}) after {attempts} attempts")]
    InfeasibleSampler {
        claim: &'static str,
        n: usize,
        attempts: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
