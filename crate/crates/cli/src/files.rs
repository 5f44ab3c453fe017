//! On-disk formats. Every file is JSON with `"format": 1`; complex matrices
//! are stored as separate `re` and `im` arrays of rows.

use std::fs;
use std::path::Path;

use fps_core::{ComplexMatrix, Sl2Matrix, Variant};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const FORMAT: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self { re, im }
    }

    /// Square matrix of side `dim`, or a description of what is wrong.
    pub fn to_matrix(&self, dim: usize) -> Result<ComplexMatrix, String> {
        let ok = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
        if !ok(&self.re) || !ok(&self.im) {
            return Err(format!("expected {dim}x{dim} re and im arrays"));
        }
        Ok(ComplexMatrix::from_fn(dim, |i, j| Complex64::new(self.re[i][j], self.im[i][j])))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub format: u32,
    pub dim: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

impl StateFile {
    pub fn new(m: &ComplexMatrix) -> Self {
        Self { format: FORMAT, dim: m.dim(), matrix: MatrixJson::from_matrix(m) }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        check_format(self.format)?;
        self.matrix.to_matrix(self.dim).map_err(CliError::Parse)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatorJson {
    pub x: usize,
    pub z: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetFile {
    pub format: u32,
    pub dim: usize,
    pub variant: String,
    pub operators: Vec<OperatorJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportFile {
    pub format: u32,
    pub dim: usize,
    pub variant: String,
    pub tolerance: f64,
    pub hermiticity: f64,
    pub orthogonality: f64,
    pub completeness: f64,
    pub diagonal: f64,
    pub position_projectors: f64,
    pub momentum_projectors: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BasisJson {
    /// Measured operator `tau^gamma_power X^m Z^n`.
    pub m: usize,
    pub n: usize,
    pub gamma_power: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MarginalFile {
    pub format: u32,
    pub dim: usize,
    pub variant: String,
    #[serde(rename = "M")]
    pub m: [i64; 4],
    pub probs: Vec<f64>,
    pub basis: BasisJson,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Counts in the measurement basis, index `j` for eigenvalue `ω^j`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    /// Marginal estimated from `counts`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampled_probs: Option<Vec<f64>>,
}

impl MarginalFile {
    pub fn matrix(&self) -> Result<Sl2Matrix, CliError> {
        let [a, b, c, d] = self.m;
        Ok(Sl2Matrix::new(a, b, c, d, self.dim)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub format: u32,
    pub dim: usize,
    /// `vectorization` must be `"row-major"`: `vec(A)[i*dim + j] = A[i][j]`.
    #[serde(default = "row_major")]
    pub vectorization: String,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

fn row_major() -> String {
    "row-major".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessFile {
    pub format: u32,
    pub dim: usize,
    pub variant: String,
    /// Rows `(x', z')`, columns `(x, z)`, both flattened as `x*dim + z`.
    pub values: Vec<Vec<f64>>,
}

pub fn check_format(format: u32) -> Result<(), CliError> {
    if format != FORMAT {
        return Err(CliError::Parse(format!("unsupported format {format}, expected {FORMAT}")));
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn variant_name(v: Variant) -> String {
    v.name().to_string()
}

pub fn parse_variant(s: &str) -> Result<Variant, CliError> {
    s.parse().map_err(CliError::Usage)
}
