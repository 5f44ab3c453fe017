//! Dense square complex matrices.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FpsError, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square `dim x dim` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::from_element(dim, dim, ZERO))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// Row-major entries; panics unless `entries.len() == dim * dim`.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square());
        Self(m)
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Complex64 {
        let n = self.dim();
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * rhs.0[(j, i)];
            }
        }
        acc
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::identity(self.dim());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        out
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }

    /// Matrix exponential.
    pub fn exp(&self) -> Self {
        Self(self.0.exp())
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n * n).map(|k| self.0[(k / n, k % n)]).collect()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum()).collect()
    }

    /// `<v| self |v>`.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let w = self.apply(v);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.0.iter().zip(rhs.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn hermiticity_violation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_violation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// Hermitian, unit trace and positive semidefinite, all within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        self.check_density(tol).is_ok()
    }

    pub fn check_density(&self, tol: f64) -> Result<()> {
        if !self.is_finite() {
            return Err(FpsError::NotADensityMatrix("non-finite entries".into()));
        }
        let h = self.hermiticity_violation();
        if h > tol {
            return Err(FpsError::NotADensityMatrix(format!("hermiticity violation {h:.3e}")));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol {
            return Err(FpsError::NotADensityMatrix(format!("trace {tr}")));
        }
        let min = self.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(FpsError::NotADensityMatrix(format!("eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `(A + A^†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|v| v * 0.5))
    }

    /// Ascending eigenvalues of the hermitian part.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = self.hermitian_part().0.symmetric_eigenvalues();
        let mut vals: Vec<f64> = eig.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Eigen-decomposition of the hermitian part: `(values, vectors as columns)`.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, Self) {
        let eig = self.hermitian_part().0.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), Self(eig.eigenvectors))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Random density matrices for tests and examples.
pub mod random {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// The generator used throughout for reproducible draws.
    pub fn seeded(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
    }

    pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
        let v = gaussian_vector(rng, n);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / norm).collect()
    }

    pub fn pure_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&pure_state(rng, n))
    }

    /// Ginibre-distributed mixed state `G G^† / tr(G G^†)`.
    pub fn mixed_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g =
            ComplexMatrix::from_fn(n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let rho = &g * &g.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr).hermitian_part()
    }

    /// Haar-ish random unitary from the QR decomposition of a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let qr = g.qr();
        let (q, r) = (qr.q(), qr.r());
        let phases = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let d = r[(i, i)];
                if d.norm() > 0.0 {
                    d / d.norm()
                } else {
                    ONE
                }
            } else {
                ZERO
            }
        });
        ComplexMatrix(q * phases)
    }
}
