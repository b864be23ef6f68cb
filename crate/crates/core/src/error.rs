use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("form ({0}, {1}, {2}) is not positive definite")]
    NotPositiveDefinite(i64, i64, i64),
    #[error("form ({0}, {1}, {2}) is not primitive")]
    Imprimitive(i64, i64, i64),
    #[error("form ({0}, {1}, {2}) is not reduced")]
    NotReduced(i64, i64, i64),
    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),
    #[error("{0} is not a negative discriminant")]
    InvalidDiscriminant(i64),
    #[error("hurwitz parity violated for doubled coordinates {0:?}")]
    Parity([i64; 4]),
    #[error("no norm-{p} quaternion satisfies the congruence for rho = {rho}")]
    NoValidAlpha { p: u64, rho: i64 },
    #[error("invalid prime orientation p = {p}, rho = {rho} for d = {d}")]
    BadOrientation { p: u64, rho: i64, d: u64 },
    #[error("internal invariant failed: {0}")]
    Invariant(String),
    #[error("inconsistent packet labeling: {0}")]
    Labeling(String),
    #[error("point not in packet")]
    NotInPacket,
    #[error("character does not belong to the packet's class group")]
    CharacterMismatch,
    #[error("cutoff {0} exceeds the supported maximum {1}")]
    CutoffTooLarge(usize, usize),
    #[error("depth {given} is insufficient, need at least {needed}")]
    InsufficientDepth { given: u32, needed: u32 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("corrupt cache: {0}")]
    CorruptCache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
