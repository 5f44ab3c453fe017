//! Fourier analysis on Z_N × Z_N, inverse Radon assembly, state
//! reconstruction and process matrices in the phase-point basis.
//!
//! `W̃(μ) = (1/N) Σ_u ω^{-μ·u} W(u)` and `W(u) = (1/N) Σ_μ ω^{μ·u} W̃(μ)`.
//! A marginal of `M` fills the line `{(ct, -at)}` through
//! `W̃(ct, -at) = (1/N) Σ_z Ŵ(z) ω^{zt}`.

use num_complex::Complex64;

use crate::error::{FpsError, Result};
use crate::heisenberg::omega_pow;
use crate::matrix::{ComplexMatrix, DEFAULT_TOLERANCE, ONE, ZERO};
use crate::phasepoint::{reconstruct_from_wigner, wigner_of_operator, PhasePointSet, Variant, WignerGrid};
use crate::radon::{
    born_probabilities, marginal_from_born, measurement_basis, odd_shift, sampled_record, MarginalRecord, RadonDataset,
};
use crate::zn::{cover_lines, FrequencyLine, Sl2Matrix};

/// Complex `N × N` spectrum with a fill mask, row-major in `(μ₁, μ₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub n: usize,
    pub values: Vec<Complex64>,
    pub mask: Vec<bool>,
}

impl FrequencyGrid {
    pub fn empty(n: usize) -> Self {
        Self { n, values: vec![ZERO; n * n], mask: vec![false; n * n] }
    }

    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        self.values[(u % self.n) * self.n + v % self.n]
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    pub fn unfilled(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        (0..n * n).filter(|&i| !self.mask[i]).map(|i| (i / n, i % n)).collect()
    }

    /// Largest `|W̃(-μ) - conj W̃(μ)|`, zero for spectra of real grids.
    pub fn conjugate_symmetry_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for u in 0..n {
            for v in 0..n {
                let d = self.get((n - u) % n, (n - v) % n) - self.get(u, v).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Separable 1-D transform along rows then columns with sign `sign`.
fn transform(values: &[Complex64], n: usize, sign: i64) -> Vec<Complex64> {
    assert_eq!(values.len(), n * n);
    let table: Vec<Complex64> = (0..n).map(|k| omega_pow(sign * k as i64, n)).collect();
    let scale = 1.0 / n as f64;
    let mut tmp = vec![ZERO; n * n];
    for r in 0..n {
        for k in 0..n {
            tmp[r * n + k] = (0..n).map(|c| table[(k * c) % n] * values[r * n + c]).sum();
        }
    }
    let mut out = vec![ZERO; n * n];
    for k in 0..n {
        for j in 0..n {
            out[j * n + k] = (0..n).map(|r| table[(j * r) % n] * tmp[r * n + k]).sum::<Complex64>() * scale;
        }
    }
    out
}

pub fn fft2_zn(values: &[Complex64], n: usize) -> FrequencyGrid {
    FrequencyGrid { n, values: transform(values, n, -1), mask: vec![true; n * n] }
}

pub fn fft2_real(w: &WignerGrid) -> FrequencyGrid {
    let vals: Vec<Complex64> = w.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_zn(&vals, w.n)
}

/// Inverse of [`fft2_zn`]; unfilled entries count as zero.
pub fn ifft2_zn(grid: &FrequencyGrid) -> Vec<Complex64> {
    transform(&grid.values, grid.n, 1)
}

/// `((ct, -at), (1/N) Σ_z Ŵ(z) ω^{zt})` for `t = 0..N`.
pub fn line_spectrum(record: &MarginalRecord) -> Vec<((usize, usize), Complex64)> {
    let n = record.dim();
    let line = record.line();
    (0..n)
        .map(|t| {
            let v: Complex64 = record.probs.iter().enumerate().map(|(z, p)| omega_pow((z * t) as i64, n) * *p).sum();
            (line.point(t), v / n as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Largest allowed spread of overlapping line values at one frequency.
    pub consistency_tolerance: f64,
}

impl AssemblyOptions {
    pub const EXACT: Self = Self { consistency_tolerance: 1e-9 };
    pub const SAMPLED: Self = Self { consistency_tolerance: 1e-6 };

    pub fn with_tolerance(tol: f64) -> Self {
        Self { consistency_tolerance: tol }
    }
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self::EXACT
    }
}

/// Fills the spectrum from the records matching `plan`, averaging overlaps.
pub fn assemble_frequency(
    dataset: &RadonDataset,
    plan: &[FrequencyLine],
    opts: AssemblyOptions,
) -> Result<FrequencyGrid> {
    let n = dataset.n;
    let mut covered = vec![false; n * n];
    for line in plan {
        if line.n != n {
            return Err(FpsError::DimensionMismatch { expected: n, actual: line.n });
        }
        for (u, v) in line.points() {
            covered[u * n + v] = true;
        }
    }
    let mut sums = vec![ZERO; n * n];
    let mut contributions: Vec<Vec<Complex64>> = vec![Vec::new(); n * n];
    let mut missing_lines = Vec::new();
    for line in plan {
        match dataset.find_line(line) {
            Some(rec) => {
                for ((u, v), val) in line_spectrum(rec) {
                    sums[u * n + v] += val;
                    contributions[u * n + v].push(val);
                }
            }
            None => missing_lines.push((line.a, line.c)),
        }
    }
    let missing: Vec<(usize, usize)> =
        (0..n * n).filter(|&i| contributions[i].is_empty()).map(|i| (i / n, i % n)).collect();
    if !missing.is_empty() || covered.iter().any(|c| !c) {
        return Err(FpsError::IncompleteCover { missing, missing_lines });
    }
    let mut grid = FrequencyGrid::empty(n);
    let mut worst = (0.0f64, (0, 0));
    for i in 0..n * n {
        let mean = sums[i] / contributions[i].len() as f64;
        for c in &contributions[i] {
            let d = (c - mean).norm();
            if d > worst.0 {
                worst = (d, (i / n, i % n));
            }
        }
        grid.values[i] = mean;
        grid.mask[i] = true;
    }
    if worst.0 > opts.consistency_tolerance {
        return Err(FpsError::InconsistentOverlap { max_deviation: worst.0, at: worst.1 });
    }
    Ok(grid)
}

/// Covering frequency lines together with the matrix measured for each.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    pub n: usize,
    pub lines: Vec<FrequencyLine>,
    pub matrices: Vec<Sl2Matrix>,
}

impl MeasurementPlan {
    /// Lines from [`cover_lines`]; for `N = 2^k` every matrix has its inverse in L1.
    pub fn for_dimension(n: usize) -> Result<Self> {
        let lines = cover_lines(n)?;
        let matrices = lines.iter().map(|l| l.measurement_matrix()).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, lines, matrices })
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// Exact records for a hermitian operator (not necessarily a state).
pub fn exact_dataset(op: &ComplexMatrix, set: &PhasePointSet, plan: &MeasurementPlan) -> Result<RadonDataset> {
    if op.dim() != set.dim() || plan.n != set.dim() {
        return Err(FpsError::DimensionMismatch { expected: set.dim(), actual: op.dim() });
    }
    let mut ds = RadonDataset::new(set.dim(), set.variant());
    for m in &plan.matrices {
        let born = born_probabilities(op, m)?;
        let (probs, basis, source) = marginal_from_born(set.ordering(), m, &born)?;
        ds.push(MarginalRecord { m: *m, probs, basis, source, shots: None })?;
    }
    Ok(ds)
}

/// Simulated records with `shots` per matrix; record `i` uses seed `seed + i`.
pub fn sampled_dataset(
    rho: &ComplexMatrix,
    set: &PhasePointSet,
    plan: &MeasurementPlan,
    shots: u64,
    seed: u64,
) -> Result<RadonDataset> {
    rho.check_density(DEFAULT_TOLERANCE.max(1e-9))?;
    let mut ds = RadonDataset::new(set.dim(), set.variant());
    for (i, m) in plan.matrices.iter().enumerate() {
        ds.push(sampled_record(rho, m, set.ordering(), shots, seed.wrapping_add(i as u64))?)?;
    }
    Ok(ds)
}

/// Distinct lines of the records, in record order.
pub fn dataset_lines(dataset: &RadonDataset) -> Vec<FrequencyLine> {
    let mut out: Vec<FrequencyLine> = Vec::new();
    for r in dataset.records() {
        let l = r.line();
        if !out.iter().any(|o| o.same_points(&l)) {
            out.push(l);
        }
    }
    out
}

/// Inverse Radon transform to a grid; also returns the largest imaginary part.
pub fn reconstruct_wigner_grid(
    dataset: &RadonDataset,
    plan: &[FrequencyLine],
    opts: AssemblyOptions,
) -> Result<(WignerGrid, f64)> {
    let spectrum = assemble_frequency(dataset, plan, opts)?;
    let vals = ifft2_zn(&spectrum);
    let imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    let grid = WignerGrid::new(dataset.n, dataset.variant, vals.iter().map(|v| v.re).collect())?;
    Ok((grid, imag))
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    /// Hermitised, unit-trace estimate.
    pub rho: ComplexMatrix,
    /// `rho` with negative eigenvalues clipped and the trace renormalised.
    pub physical: ComplexMatrix,
    pub min_eigenvalue: f64,
    pub grid: WignerGrid,
    /// Largest imaginary part left by the inverse transform.
    pub imaginary_residue: f64,
}

/// Uses the dataset's own lines as the plan.
pub fn reconstruct_state(dataset: &RadonDataset, set: &PhasePointSet) -> Result<Reconstruction> {
    reconstruct_state_with(dataset, set, &dataset_lines(dataset), AssemblyOptions::default())
}

pub fn reconstruct_state_with(
    dataset: &RadonDataset,
    set: &PhasePointSet,
    plan: &[FrequencyLine],
    opts: AssemblyOptions,
) -> Result<Reconstruction> {
    if dataset.n != set.dim() {
        return Err(FpsError::DimensionMismatch { expected: set.dim(), actual: dataset.n });
    }
    if dataset.variant != set.variant() {
        return Err(FpsError::VariantDimensionMismatch { variant: dataset.variant.name().into(), dim: dataset.n });
    }
    let (grid, imag) = reconstruct_wigner_grid(dataset, plan, opts)?;
    let raw = reconstruct_from_wigner(&grid, set)?.hermitian_part();
    let tr = raw.trace().re;
    let rho = if tr.abs() > 1e-15 { raw.scale_real(1.0 / tr) } else { raw };
    let (physical, min_eigenvalue) = project_to_density(&rho);
    Ok(Reconstruction { rho, physical, min_eigenvalue, grid, imaginary_residue: imag })
}

/// Clips negative eigenvalues to zero and renormalises the trace.
pub fn project_to_density(rho: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let (vals, vecs) = rho.hermitian_eigen();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let n = rho.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (k, lam) in clipped.iter().enumerate() {
        if *lam == 0.0 {
            continue;
        }
        let v = vecs.column(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += v[r] * v[c].conj() * (lam / total);
            }
        }
    }
    (out, min)
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let sqrt_rho = psd_sqrt(rho);
    let inner = &(&sqrt_rho * sigma) * &sqrt_rho;
    let (vals, _) = inner.hermitian_eigen();
    let s: f64 = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
    s * s
}

fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = m.hermitian_eigen();
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (k, lam) in vals.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        let v = vecs.column(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += v[r] * v[c].conj() * s;
            }
        }
    }
    out
}

/// Linear map on `N × N` matrices as an `N² × N²` matrix acting on row-major
/// vectorisations: `vec(A)[iN + j] = A[i][j]`, `vec(U A U^†) = (U ⊗ conj U) vec(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    pub n: usize,
    pub matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(n: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != n * n {
            return Err(FpsError::DimensionMismatch { expected: n * n, actual: matrix.dim() });
        }
        Ok(Self { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, matrix: ComplexMatrix::identity(n * n) }
    }

    pub fn unitary(u: &ComplexMatrix) -> Self {
        let conj = ComplexMatrix::from_fn(u.dim(), |i, j| u[(i, j)].conj());
        Self { n: u.dim(), matrix: u.kron(&conj) }
    }

    /// `ρ ↦ (1 - p) ρ + p tr(ρ) I/N`; `p = 1` is completely depolarizing.
    pub fn depolarizing(n: usize, p: f64) -> Self {
        let nn = n * n;
        let m = ComplexMatrix::from_fn(nn, |r, c| {
            let mut v = if r == c { 1.0 - p } else { 0.0 };
            if r / n == r % n && c / n == c % n {
                v += p / n as f64;
            }
            Complex64::new(v, 0.0)
        });
        Self { n, matrix: m }
    }

    /// `ρ ↦ Σ K ρ K^†`.
    pub fn from_kraus(ops: &[ComplexMatrix]) -> Result<Self> {
        let n = ops.first().map(|k| k.dim()).ok_or(FpsError::InvalidDimension(0))?;
        let mut m = ComplexMatrix::zeros(n * n);
        for k in ops {
            if k.dim() != n {
                return Err(FpsError::DimensionMismatch { expected: n, actual: k.dim() });
            }
            m = &m + &Self::unitary(k).matrix;
        }
        Ok(Self { n, matrix: m })
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.dim() != self.n {
            return Err(FpsError::DimensionMismatch { expected: self.n, actual: a.dim() });
        }
        let v = self.matrix.apply(&a.row_major());
        Ok(ComplexMatrix::from_row_major(self.n, &v))
    }

    /// Largest deviation of `tr(E(|i><j|)) = δ_ij`.
    pub fn trace_preservation_violation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for c in 0..n * n {
            let tr: Complex64 = (0..n).map(|i| self.matrix[(i * n + i, c)]).sum();
            let want = if c / n == c % n { ONE } else { ZERO };
            worst = worst.max((tr - want).norm());
        }
        worst
    }
}

/// `T(x', z' : x, z)`, rows `(x', z')` and columns `(x, z)`, both as `xN + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    pub n: usize,
    pub values: Vec<f64>,
}

impl ProcessMatrix {
    pub fn get(&self, xp: usize, zp: usize, x: usize, z: usize) -> f64 {
        let n = self.n;
        let nn = n * n;
        self.values[((xp % n) * n + zp % n) * nn + (x % n) * n + z % n]
    }

    /// Largest `|Σ_{x'z'} T(x',z':x,z) - 1|`.
    pub fn column_sum_violation(&self) -> f64 {
        let nn = self.n * self.n;
        (0..nn).map(|c| ((0..nn).map(|r| self.values[r * nn + c]).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn check_channel(channel: &Superoperator, set: &PhasePointSet) -> Result<()> {
    if channel.n != set.dim() {
        return Err(FpsError::DimensionMismatch { expected: set.dim(), actual: channel.n });
    }
    Ok(())
}

/// `T(x',z':x,z) = N tr(â(x',z') E(â(x,z)))`.
pub fn process_matrix_forward(channel: &Superoperator, set: &PhasePointSet) -> Result<ProcessMatrix> {
    check_channel(channel, set)?;
    let n = set.dim();
    let nn = n * n;
    let mut values = vec![0.0; nn * nn];
    for (c, a) in set.operators().iter().enumerate() {
        let image = channel.apply(a)?;
        for (r, ap) in set.operators().iter().enumerate() {
            values[r * nn + c] = ap.trace_product(&image).re * n as f64;
        }
    }
    Ok(ProcessMatrix { n, values })
}

/// Process matrix rebuilt column by column from exact marginals of `E(â(x,z))`.
pub fn process_matrix_from_marginals(
    channel: &Superoperator,
    set: &PhasePointSet,
    plan: &MeasurementPlan,
) -> Result<ProcessMatrix> {
    check_channel(channel, set)?;
    let n = set.dim();
    let nn = n * n;
    let mut values = vec![0.0; nn * nn];
    for (c, a) in set.operators().iter().enumerate() {
        let image = channel.apply(a)?.hermitian_part();
        let ds = exact_dataset(&image, set, plan)?;
        let (grid, _) = reconstruct_wigner_grid(&ds, &plan.lines, AssemblyOptions::EXACT)?;
        for (r, w) in grid.values.iter().enumerate() {
            values[r * nn + c] = w * n as f64;
        }
    }
    Ok(ProcessMatrix { n, values })
}

/// Compares `(1/N) Σ_{x', x} T(M'(x',z') : M(x,z))` with
/// `<β'_{z'}| E(|β_z><β_z|) |β'_{z'}>`, where `β_z` is the measurement basis of
/// `M` read with its marginal shift. Returns the largest deviation.
pub fn process_radon_check(channel: &Superoperator, set: &PhasePointSet, m: &Sl2Matrix, mp: &Sl2Matrix) -> Result<f64> {
    let n = set.dim();
    if n.is_multiple_of(2) {
        return Err(FpsError::EvenDimension(n));
    }
    if set.variant() != Variant::Odd {
        return Err(FpsError::VariantDimensionMismatch { variant: set.variant().name().into(), dim: n });
    }
    let t = process_matrix_forward(channel, set)?;
    let (basis, basis_p) = (measurement_basis(m)?, measurement_basis(mp)?);
    let (k, kp) = (odd_shift(m)?, odd_shift(mp)?);
    let mut worst: f64 = 0.0;
    for z in 0..n {
        let beta = &basis.vectors[(z + n - k) % n];
        let image = channel.apply(&ComplexMatrix::outer(beta))?;
        for zp in 0..n {
            let mut lhs = 0.0;
            for xp in 0..n {
                let (u1, u2) = mp.apply(xp, zp);
                for x in 0..n {
                    let (v1, v2) = m.apply(x, z);
                    lhs += t.get(u1, u2, v1, v2);
                }
            }
            lhs /= n as f64;
            let rhs = image.expectation(&basis_p.vectors[(zp + n - kp) % n]).re;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Grid of `E(â(x,z))` for a channel; a convenience for process checks.
pub fn channel_image_grid(channel: &Superoperator, set: &PhasePointSet, x: usize, z: usize) -> Result<WignerGrid> {
    let image = channel.apply(set.get(x, z))?.hermitian_part();
    wigner_of_operator(&image, set, 1e-9)
}
