//! The finite Heisenberg group H_N in its N-dimensional irreducible
//! representation: shift `X`, clock `Z`, Weyl monomials, the Fourier
//! operator and the images of `X`, `Z` under SL(2, Z_N).
//!
//! Conventions: `Z|j> = ω^j |j>`, `X|j> = |j + 1>`, so `Z X = ω X Z`.
//! Phases are carried as integer powers of `τ = exp(iπ/N)` (so `ω = τ²`)
//! and reduced mod 2N before exponentiating.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FpsError, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};
use crate::zn::{reduce, sgn_parity, Sl2Matrix};

/// `τ^e` with `τ = exp(iπ/N)`.
pub fn tau_pow(e: i64, n: usize) -> Complex64 {
    let r = e.rem_euclid(2 * n as i64);
    Complex64::from_polar(1.0, PI * r as f64 / n as f64)
}

/// `ω^e` with `ω = exp(2πi/N)`.
pub fn omega_pow(e: i64, n: usize) -> Complex64 {
    tau_pow(2 * e.rem_euclid(n as i64), n)
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        Err(FpsError::InvalidDimension(n))
    } else {
        Ok(())
    }
}

pub fn rep_x(n: usize) -> ComplexMatrix {
    rep_monomial(1, 0, n)
}

pub fn rep_z(n: usize) -> ComplexMatrix {
    rep_monomial(0, 1, n)
}

/// Matrix of `X^m Z^n`: entry `(k, j)` is `ω^{jn}` when `k = j + m`.
pub fn rep_monomial(m: i64, n: i64, dim: usize) -> ComplexMatrix {
    let (m, n) = (reduce(m, dim), reduce(n, dim));
    let mut out = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        out[((j + m) % dim, j)] = omega_pow((j * n) as i64, dim);
    }
    out
}

/// `τ^gamma_power · X^m Z^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeisenbergMonomial {
    pub m: usize,
    pub n: usize,
    /// Exponent of τ, reduced mod 2N.
    pub gamma_power: usize,
    pub dim: usize,
}

impl HeisenbergMonomial {
    pub fn new(m: i64, n: i64, gamma_power: i64, dim: usize) -> Self {
        Self { m: reduce(m, dim), n: reduce(n, dim), gamma_power: reduce(gamma_power, 2 * dim), dim }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(0, 0, 0, dim)
    }

    pub fn phase(&self) -> Complex64 {
        tau_pow(self.gamma_power as i64, self.dim)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        rep_monomial(self.m as i64, self.n as i64, self.dim).scale(self.phase())
    }

    /// Uses `Z^n X^m' = ω^{n m'} X^m' Z^n`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let extra = 2 * (self.n * rhs.m) as i64;
        Self::new(
            (self.m + rhs.m) as i64,
            (self.n + rhs.n) as i64,
            self.gamma_power as i64 + rhs.gamma_power as i64 + extra,
            self.dim,
        )
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::identity(self.dim), |acc, _| acc.mul(self))
    }
}

/// Fourier operator `Ω_{ij} = ω^{-ij} / √N`; satisfies `Ω^† X Ω = Z`.
pub fn qft(n: usize) -> ComplexMatrix {
    let s = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, |i, j| omega_pow(-((i * j) as i64), n) * s)
}

/// Tensor factors of `Ω|j>` on `(C^d)^{⊗m}`, most significant digit first.
pub fn qft_product_state(j: usize, d: usize, m: usize) -> Result<Vec<Vec<Complex64>>> {
    if d < 2 || m == 0 {
        return Err(FpsError::InvalidDimension(d));
    }
    let big = d.pow(m as u32);
    if j >= big {
        return Err(FpsError::OutOfRange { value: j, bound: big });
    }
    let s = 1.0 / (d as f64).sqrt();
    Ok((0..m)
        .map(|r| {
            let weight = d.pow((m - 1 - r) as u32);
            (0..d).map(|k| omega_pow(-(((j * weight) % big * k) as i64), big) * s).collect()
        })
        .collect())
}

pub fn kron_vectors(factors: &[Vec<Complex64>]) -> Vec<Complex64> {
    factors.iter().fold(vec![ONE], |acc, f| acc.iter().flat_map(|a| f.iter().map(move |b| a * b)).collect())
}

/// `ẑ = (2π/N) diag(0, …, N-1)`, so that `exp(iẑ) = Z`.
pub fn gen_z(n: usize) -> ComplexMatrix {
    let diag: Vec<Complex64> = (0..n).map(|k| Complex64::new(2.0 * PI * k as f64 / n as f64, 0.0)).collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// `x̂ = Ω ẑ Ω^†`, so that `exp(i x̂) = X`.
pub fn gen_x(n: usize) -> ComplexMatrix {
    let omega = qft(n);
    &(&omega * &gen_z(n)) * &omega.adjoint()
}

/// Circulant closed form of [`gen_x`]: `π(N-1)/N` on the diagonal and
/// `(2π/N) / (ω^{j-i} - 1)` off it.
pub fn gen_x_closed_form(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex64::new(PI * (n as f64 - 1.0) / n as f64, 0.0)
        } else {
            Complex64::new(2.0 * PI / n as f64, 0.0) / (omega_pow(j as i64 - i as i64, n) - ONE)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    X,
    Z,
}

/// `σ_M(X) = X^a Z^b`, `σ_M(Z) = X^c Z^d`, with an extra `τ^{sgn(ab)}`
/// (resp. `τ^{sgn(cd)}`) in even dimension so the N-th power is `I`.
pub fn sigma_monomial(m: &Sl2Matrix, which: Generator) -> HeisenbergMonomial {
    let n = m.modulus();
    let (p, q) = match which {
        Generator::X => (m.a(), m.b()),
        Generator::Z => (m.c(), m.d()),
    };
    let phase = if n.is_multiple_of(2) { sgn_parity((p * q) as i64) } else { 0 };
    HeisenbergMonomial::new(p as i64, q as i64, phase as i64, n)
}

pub fn sigma_m_image(m: &Sl2Matrix, which: Generator) -> ComplexMatrix {
    sigma_monomial(m, which).matrix()
}

/// The operator whose ordered eigenbasis carries the marginal
/// `Σ_x W(M (x, z)^T)`: `σ_{M^{-1}}(Z) = τ^{sgn(ac)} X^{-c} Z^{a}`.
pub fn measured_monomial(m: &Sl2Matrix) -> HeisenbergMonomial {
    sigma_monomial(&m.inverse(), Generator::Z)
}

/// Eigenvectors `α_j` of a unitary with `U α_j = φ ω^j α_j`.
#[derive(Debug, Clone)]
pub struct OrderedEigenbasis {
    pub dim: usize,
    pub vectors: Vec<Vec<Complex64>>,
    /// The global phase `φ` (1, or τ when `U^N = -I`).
    pub global_phase: Complex64,
    pub target: ComplexMatrix,
}

impl OrderedEigenbasis {
    /// `<α_j|ρ|α_j>` for every `j`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.vectors.iter().map(|v| rho.expectation(v).re).collect()
    }

    pub fn projector(&self, j: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&self.vectors[j])
    }

    /// Largest `‖U α_j − φ ω^j α_j‖`.
    pub fn residual(&self) -> f64 {
        let n = self.dim;
        self.vectors
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let lam = self.global_phase * omega_pow(j as i64, n);
                let uv = self.target.apply(v);
                uv.iter().zip(v).map(|(a, b)| (a - lam * b).norm_sqr()).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Orders the eigenvectors of `u` by eigenvalue `φ ω^j`.
///
/// Eigenvectors are read off the spectral projectors
/// `P_j = (1/N) Σ_s ω^{-js} (U/φ)^s`; each is normalised and rotated so its
/// largest entry (lowest index on ties) is real positive.
pub fn ordered_eigenbasis(u: &ComplexMatrix, tol: f64) -> Result<OrderedEigenbasis> {
    let n = u.dim();
    check_dim(n)?;
    let loose = tol.max(1e-8);
    let un = u.pow(n);
    let lam = un[(0, 0)];
    if un.max_abs_diff(&ComplexMatrix::identity(n).scale(lam)) > loose || (lam.norm() - 1.0).abs() > loose {
        return Err(FpsError::DegenerateSpectrum("U^N is not a unimodular scalar".into()));
    }
    let phase = if (lam - ONE).norm() < loose {
        ONE
    } else if (lam + ONE).norm() < loose {
        tau_pow(1, n)
    } else {
        Complex64::from_polar(1.0, lam.arg() / n as f64)
    };
    let v = u.scale(phase.conj());
    let mut powers = Vec::with_capacity(n);
    powers.push(ComplexMatrix::identity(n));
    for s in 1..n {
        powers.push(&powers[s - 1] * &v);
    }

    let mut vectors = Vec::with_capacity(n);
    for j in 0..n {
        let mut proj = ComplexMatrix::zeros(n);
        for (s, p) in powers.iter().enumerate() {
            let w = omega_pow(-((j * s) as i64), n) / n as f64;
            for r in 0..n {
                for c in 0..n {
                    proj[(r, c)] += w * p[(r, c)];
                }
            }
        }
        let tr = proj.trace();
        if (tr - ONE).norm() > loose {
            return Err(FpsError::DegenerateSpectrum(format!("eigenvalue ω^{j} has multiplicity {:.3}", tr.re)));
        }
        let col = (0..n).max_by(|&a, &b| proj[(a, a)].re.total_cmp(&proj[(b, b)].re)).unwrap_or(0);
        let mut vec: Vec<Complex64> = proj.column(col);
        let norm = vec.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        vec.iter_mut().for_each(|c| *c /= norm);
        fix_phase(&mut vec);
        vectors.push(vec);
    }
    let basis = OrderedEigenbasis { dim: n, vectors, global_phase: phase, target: u.clone() };
    let res = basis.residual();
    if res > loose {
        return Err(FpsError::DegenerateSpectrum(format!("eigen residual {res:.3e}")));
    }
    Ok(basis)
}

/// Rotates `v` so its largest-magnitude entry is real positive.
fn fix_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|c| c.norm() >= max - 1e-9).unwrap_or(0);
    let rot = v[pivot].conj() / v[pivot].norm();
    v.iter_mut().for_each(|c| *c *= rot);
}

/// Small gates used by the qubit factorisations of `X` and `Z` at N = 4.
pub mod gates {
    use super::*;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows.len(), |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn sigma1() -> ComplexMatrix {
        real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn sigma3() -> ComplexMatrix {
        real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    /// `S = diag(1, i)`.
    pub fn phase_s() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[ONE, Complex64::new(0.0, 1.0)])
    }

    /// CNOT with the low qubit as control, basis `|j1 j0>`.
    pub fn cnot_low_control() -> ComplexMatrix {
        real(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 0.0]])
    }

    #[allow(dead_code)]
    pub(crate) fn zero(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| ZERO)
    }
}
