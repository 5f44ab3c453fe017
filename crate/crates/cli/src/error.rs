use fps_core::FpsError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid channel: {0}")]
    Channel(String),
    #[error(transparent)]
    Core(#[from] FpsError),
}

/// Process exit codes.
pub mod exit {
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INVARIANT: i32 = 3;
    pub const NOT_DENSITY: i32 = 4;
    pub const NOT_SL2: i32 = 5;
    pub const PRECONDITION: i32 = 6;
    pub const INCOMPLETE_COVER: i32 = 7;
    pub const CHANNEL: i32 = 8;
    pub const INCONSISTENT_DATA: i32 = 9;
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Io(_) | CliError::Parse(_) => exit::IO,
            CliError::Channel(_) => exit::CHANNEL,
            CliError::Core(e) => match e {
                FpsError::InvariantViolation { .. }
                | FpsError::DegenerateSpectrum(_)
                | FpsError::ImaginaryResidue(_) => exit::INVARIANT,
                FpsError::NotADensityMatrix(_) | FpsError::NotHermitian(_) => exit::NOT_DENSITY,
                FpsError::NotSl2 { .. } => exit::NOT_SL2,
                FpsError::NotInL1(_)
                | FpsError::PreconditionNU { .. }
                | FpsError::EvenDimension(_)
                | FpsError::OddDimension(_) => exit::PRECONDITION,
                FpsError::IncompleteCover { .. } => exit::INCOMPLETE_COVER,
                FpsError::InconsistentOverlap { .. } | FpsError::InvalidDistribution(_) => exit::INCONSISTENT_DATA,
                _ => exit::USAGE,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Parse(_) => "parse",
            CliError::Channel(_) => "channel",
            CliError::Core(e) => match e {
                FpsError::NotInvertible { .. } => "not-invertible",
                FpsError::EvenModulus(_) => "even-modulus",
                FpsError::NotPowerOfTwo(_) => "not-power-of-two",
                FpsError::DegenerateDirection { .. } => "degenerate-direction",
                FpsError::UnsupportedDimension(_) => "unsupported-dimension",
                FpsError::InvalidDimension(_) => "invalid-dimension",
                FpsError::NotSl2 { .. } => "not-sl2",
                FpsError::OutOfRange { .. } => "out-of-range",
                FpsError::DegenerateSpectrum(_) => "degenerate-spectrum",
                FpsError::VariantDimensionMismatch { .. } => "variant-dimension-mismatch",
                FpsError::InvariantViolation { .. } => "invariant-violation",
                FpsError::NotADensityMatrix(_) => "not-a-density-matrix",
                FpsError::ImaginaryResidue(_) => "imaginary-residue",
                FpsError::DimensionMismatch { .. } => "dimension-mismatch",
                FpsError::NotHermitian(_) => "not-hermitian",
                FpsError::EvenDimension(_) => "even-dimension",
                FpsError::OddDimension(_) => "odd-dimension",
                FpsError::PreconditionNU { .. } => "precondition-nu",
                FpsError::NotInL1(_) => "not-in-l1",
                FpsError::InvalidDistribution(_) => "invalid-distribution",
                FpsError::InvalidNuTable(_) => "invalid-nu-table",
                FpsError::IncompleteCover { .. } => "incomplete-cover",
                FpsError::InconsistentOverlap { .. } => "inconsistent-overlap",
            },
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            code: i32,
            kind: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            missing_lines: Option<&'a Vec<(usize, usize)>>,
        }
        let missing_lines = match self {
            CliError::Core(FpsError::IncompleteCover { missing_lines, .. }) => Some(missing_lines),
            _ => None,
        };
        let body = Body { code: self.code(), kind: self.kind(), message: self.to_string(), missing_lines };
        serde_json::json!({ "error": body }).to_string()
    }
}
