//! Discrete Wigner functions on Z_N x Z_N and finite Radon inversion.
//!
//! The crate is layered bottom-up: [`zn`] (modular arithmetic, SL(2, Z_N),
//! lines), [`heisenberg`] (the operators X, Z and friends), [`phasepoint`]
//! (phase-point operators and Wigner grids), [`radon`] (marginals) and
//! [`reconstruct`] (Fourier-slice inversion, state and process tomography).

pub mod error;
pub mod heisenberg;
pub mod matrix;
pub mod phasepoint;
pub mod radon;
pub mod reconstruct;
pub mod zn;

pub use error::{FpsError, Result};
pub use heisenberg::{HeisenbergMonomial, OrderedEigenbasis};
pub use matrix::{ComplexMatrix, DEFAULT_TOLERANCE};
pub use phasepoint::{OrderingFunction, PhasePointSet, Variant, WignerGrid, WignerSetReport};
pub use radon::{MarginalRecord, RadonDataset};
pub use reconstruct::{AssemblyOptions, FrequencyGrid, MeasurementPlan, ProcessMatrix, Reconstruction, Superoperator};
pub use zn::{FrequencyLine, LineSpec, Sl2Matrix};
