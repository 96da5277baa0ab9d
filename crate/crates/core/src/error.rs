use thiserror::Error;

/// Errors produced by the `hecke` library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds the supported bound {limit}")]
    BoundExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    /// A CRT-reconstructed coefficient does not fit in 128 signed bits.
    /// This indicates an internal bug and is never expected in normal use.
    #[error("coefficient at index {index} overflows 128 signed bits")]
    Overflow { index: usize },

    #[error("prime factor {p} of {n} exceeds the table bound {bound}")]
    UnreachablePrime { n: u64, p: u64, bound: u64 },

    #[error("Deligne bound violated at p = {p}: lambda(p) = {lambda}")]
    DeligneViolation { p: u64, lambda: f64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("unsupported form: weight {weight}, level {level} (only weight 12, level 1)")]
    UnsupportedForm { weight: u32, level: u32 },

    #[error("r must be positive, got {0}")]
    NonpositiveR(f64),

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "invalid envelope parameters: need 0 < kappa < eta < 1, got kappa = {kappa}, eta = {eta}"
    )]
    InvalidParams { kappa: f64, eta: f64 },

    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),

    #[error("formal series division by a series with zero constant term")]
    DivisionByZero,

    #[error("no parameter candidate produced a valid envelope")]
    NoValidCandidate,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("nonpositive series value {value} at x = {x}")]
    NonpositiveValue { x: u64, value: f64 },

    #[error("checkpoints must be ascending and at least 1")]
    InvalidCheckpoints,

    #[error("bad magic bytes in coefficient cache")]
    BadMagic,

    #[error("unsupported coefficient cache version {0}")]
    BadVersion(u32),

    #[error("coefficient cache is truncated")]
    TruncatedFile,

    #[error(
        "coefficient cache checksum mismatch: stored {stored:#018x}, computed {computed:#018x}"
    )]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("coefficient cache is malformed: {0}")]
    MalformedCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
