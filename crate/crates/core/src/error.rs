use thiserror::Error;

use crate::zn::Sl2Matrix;

pub type Result<T> = std::result::Result<T, FpsError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FpsError {
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: i64, modulus: usize },

    #[error("modulus {0} is even; 2 has no inverse")]
    EvenModulus(usize),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("direction ({a}, {b}) is degenerate modulo {modulus}: gcd(a, b, N) != 1")]
    DegenerateDirection { a: usize, b: usize, modulus: usize },

    #[error("dimension {0} is not supported here (need N odd or N = 2^k)")]
    UnsupportedDimension(usize),

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("matrix ({a}, {b}; {c}, {d}) is not in SL(2, Z_{modulus}): determinant is {det}")]
    NotSl2 { a: i64, b: i64, c: i64, d: i64, modulus: usize, det: usize },

    #[error("index {value} out of range (must be < {bound})")]
    OutOfRange { value: usize, bound: usize },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("variant {variant} is incompatible with dimension {dim}")]
    VariantDimensionMismatch { variant: String, dim: usize },

    #[error("invariant violated: {identity} (max violation {violation:.3e})")]
    InvariantViolation { identity: String, violation: f64 },

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("imaginary residue {0:.3e} above tolerance")]
    ImaginaryResidue(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension {0} is even; this formula needs odd N")]
    EvenDimension(usize),

    #[error("dimension {0} is odd; this formula needs even N")]
    OddDimension(usize),

    #[error("closed form needs N/u even, but N = {n}, u = {u}")]
    PreconditionNU { n: usize, u: usize },

    #[error("inverse of {0} is not in L1")]
    NotInL1(Sl2Matrix),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid nu table: {0}")]
    InvalidNuTable(String),

    #[error("incomplete cover: {} frequencies unfilled, missing lines {missing_lines:?}", missing.len())]
    IncompleteCover { missing: Vec<(usize, usize)>, missing_lines: Vec<(usize, usize)> },

    #[error("inconsistent overlap: deviation {max_deviation:.3e} at frequency {at:?}")]
    InconsistentOverlap { max_deviation: f64, at: (usize, usize) },
}
