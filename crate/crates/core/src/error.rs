use alloc::string::String;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid sector spec: {0}")]
    InvalidSpec(String),
    #[error("sector too small: {0} sites after clipping (need at least 6)")]
    TooSmall(usize),
    #[error("perturbation leaves a disconnected lattice ({components} components)")]
    Disconnected { components: usize },
    #[error("unsupported perturbation: {0}")]
    UnsupportedPerturbation(String),
    #[error("empty lattice")]
    EmptyLattice,
    #[error("chiral check is inapplicable when t' != 0 (t' = {0})")]
    ChiralInapplicable(f64),
    #[error("matrix dimension {dim} exceeds dense threshold {threshold}; use the windowed solver")]
    TooLargeForDense { dim: usize, threshold: usize },
    #[error("LDLT factorization broke down at shift {shift} (pivot {pivot})")]
    FactorizationBreakdown { shift: f64, pivot: usize },
    #[error("windowed eigensolve incomplete in [{lo}, {hi}]: missing {missing} of {expected}")]
    IncompleteWindow { lo: f64, hi: f64, expected: usize, missing: usize },
    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("not enough data: {what} (have {have}, need {need})")]
    NotEnoughData { what: &'static str, have: usize, need: usize },
    #[error("unfolding polynomial is not monotone on the window; try a lower degree")]
    NonMonotoneUnfolding,
    #[error("window [{lo}, {hi}] lies outside the band")]
    OutsideBand { lo: f64, hi: f64 },
    #[error("out of supported range: {0}")]
    OutOfRange(String),
    #[error("Weyl completeness check failed: found {found}, expected about {expected:.1}")]
    WeylMismatch { found: usize, expected: f64 },
    #[error("no reflection symmetry available for this lattice")]
    NoReflection,
    #[error("{count} states could not be assigned a parity")]
    Unclassified { count: usize },
    #[error("incompatible reports: {0}")]
    Incompatible(String),
    #[error("levels outside the validity window of the {0} regime")]
    RegimeMismatch(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
