//! Finite Radon transforms of Wigner grids.
//!
//! For `M = (a b; c d)` the marginal is `Ŵ(z) = Σ_x W(M (x, z)^T)`. It is
//! determined by the Born probabilities `P_j = <α_j|ρ|α_j>` in the ordered
//! eigenbasis of `U_M = σ_{M^{-1}}(Z) = τ^σ X^{p} Z^{q}` with
//! `(p, q) = (-c, a)` and `σ = pq mod 2` in even dimension.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{FpsError, Result};
use crate::heisenberg::{
    measured_monomial, omega_pow, ordered_eigenbasis, tau_pow, HeisenbergMonomial, OrderedEigenbasis,
};
use crate::matrix::{ComplexMatrix, DEFAULT_TOLERANCE, ZERO};
use crate::phasepoint::{OrderingFunction, PhasePointSet, Variant, WignerGrid};
use crate::zn::{gcd, half_mod, l1_check, reduce, FrequencyLine, Sl2Matrix};

/// `Σ_x W(M (x, z)^T)` for each `z`; the convention-free oracle.
pub fn radon_direct(w: &WignerGrid, m: &Sl2Matrix) -> Result<Vec<f64>> {
    let n = w.n;
    if m.modulus() != n {
        return Err(FpsError::DimensionMismatch { expected: n, actual: m.modulus() });
    }
    Ok((0..n)
        .map(|z| {
            (0..n)
                .map(|x| {
                    let (u, v) = m.apply(x, z);
                    w.get(u, v)
                })
                .sum()
        })
        .collect())
}

/// How a marginal was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalSource {
    /// Line sums of a known grid.
    Direct,
    /// `Ŵ(z) = P_{z - shift}`.
    BornShift,
    /// Closed-form even-dimension sum over the eigenbasis probabilities.
    EvenClosedForm,
    /// General convolution kernel over the eigenbasis probabilities.
    Kernel,
}

impl MarginalSource {
    pub fn name(&self) -> &'static str {
        match self {
            MarginalSource::Direct => "direct",
            MarginalSource::BornShift => "born-shift",
            MarginalSource::EvenClosedForm => "even-closed-form",
            MarginalSource::Kernel => "kernel",
        }
    }
}

/// The measured operator and, for simple marginals, the index shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisTag {
    pub operator: HeisenbergMonomial,
    /// `Ŵ(z) = P_{z - shift}` when the marginal is simple.
    pub shift: Option<usize>,
}

impl BasisTag {
    pub fn for_matrix(m: &Sl2Matrix) -> Self {
        Self { operator: measured_monomial(m), shift: None }
    }

    /// e.g. `tau^1 X^3 Z^1, shift 1`.
    pub fn describe(&self) -> String {
        let op = self.operator;
        let mut s = format!("tau^{} X^{} Z^{}", op.gamma_power, op.m, op.n);
        if let Some(k) = self.shift {
            s.push_str(&format!(", shift {k}"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalRecord {
    pub m: Sl2Matrix,
    pub probs: Vec<f64>,
    pub basis: BasisTag,
    pub source: MarginalSource,
    /// Shots behind the record, if sampled.
    pub shots: Option<u64>,
}

impl MarginalRecord {
    pub fn dim(&self) -> usize {
        self.m.modulus()
    }

    pub fn line(&self) -> FrequencyLine {
        FrequencyLine::of_matrix(&self.m)
    }
}

/// Records for one dimension and variant, at most one per matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonDataset {
    pub n: usize,
    pub variant: Variant,
    records: Vec<MarginalRecord>,
}

impl RadonDataset {
    pub fn new(n: usize, variant: Variant) -> Self {
        Self { n, variant, records: Vec::new() }
    }

    pub fn push(&mut self, record: MarginalRecord) -> Result<()> {
        if record.dim() != self.n || record.probs.len() != self.n {
            return Err(FpsError::DimensionMismatch { expected: self.n, actual: record.probs.len() });
        }
        if self.records.iter().any(|r| r.m == record.m) {
            return Err(FpsError::InvalidDistribution(format!("duplicate record for {}", record.m)));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[MarginalRecord] {
        &self.records
    }

    pub fn remove(&mut self, m: &Sl2Matrix) -> Option<MarginalRecord> {
        let idx = self.records.iter().position(|r| &r.m == m)?;
        Some(self.records.remove(idx))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// First record whose frequency line has the same points as `line`.
    pub fn find_line(&self, line: &FrequencyLine) -> Option<&MarginalRecord> {
        self.records.iter().find(|r| r.line().same_points(line))
    }
}

/// `(p, q) = (-c, a)` and `σ`, the exponents of the measured operator.
fn measured_exponents(m: &Sl2Matrix) -> (usize, usize, usize) {
    let op = measured_monomial(m);
    (op.m, op.n, op.gamma_power)
}

/// Ordered eigenbasis of the measured operator `σ_{M^{-1}}(Z)`.
pub fn measurement_basis(m: &Sl2Matrix) -> Result<OrderedEigenbasis> {
    ordered_eigenbasis(&measured_monomial(m).matrix(), DEFAULT_TOLERANCE)
}

/// `<α_j|ρ|α_j>` in the measurement basis of `m`.
pub fn born_probabilities(rho: &ComplexMatrix, m: &Sl2Matrix) -> Result<Vec<f64>> {
    if rho.dim() != m.modulus() {
        return Err(FpsError::DimensionMismatch { expected: m.modulus(), actual: rho.dim() });
    }
    Ok(measurement_basis(m)?.probabilities(rho))
}

fn shifted(probs: &[f64], shift: usize) -> Vec<f64> {
    let n = probs.len();
    (0..n).map(|z| probs[(z + n - shift) % n]).collect()
}

/// Shift for odd N: `Ŵ(z) = P_{z - κ}` with `κ = pq/2 = -ac/2 mod N`.
pub fn odd_shift(m: &Sl2Matrix) -> Result<usize> {
    let n = m.modulus();
    if n.is_multiple_of(2) {
        return Err(FpsError::EvenDimension(n));
    }
    let (p, q, _) = measured_exponents(m);
    half_mod((p * q) as i64, n)
}

/// Shift for W₁ on `M^{-1} ∈ L1`: `κ = (pq - σ)/2 mod N`.
pub fn qubit_shift(m: &Sl2Matrix) -> Result<usize> {
    let n = m.modulus();
    if !l1_check(&m.inverse())? {
        return Err(FpsError::NotInL1(*m));
    }
    let (p, q, sigma) = measured_exponents(m);
    Ok(((p * q - sigma) / 2) % n)
}

fn check_rho(rho: &ComplexMatrix, set: &PhasePointSet, m: &Sl2Matrix) -> Result<()> {
    if rho.dim() != set.dim() || m.modulus() != set.dim() {
        return Err(FpsError::DimensionMismatch { expected: set.dim(), actual: rho.dim() });
    }
    Ok(())
}

fn require_variant(set: &PhasePointSet, want: Variant) -> Result<()> {
    if set.variant() != want {
        return Err(FpsError::VariantDimensionMismatch { variant: set.variant().name().into(), dim: set.dim() });
    }
    Ok(())
}

/// Simple marginal for odd N: `Ŵ(z) = <α_{z-κ}|ρ|α_{z-κ}>`.
pub fn marginal_simple_odd(rho: &ComplexMatrix, m: &Sl2Matrix, set: &PhasePointSet) -> Result<MarginalRecord> {
    if set.dim().is_multiple_of(2) {
        return Err(FpsError::EvenDimension(set.dim()));
    }
    check_rho(rho, set, m)?;
    require_variant(set, Variant::Odd)?;
    let shift = odd_shift(m)?;
    let probs = born_probabilities(rho, m)?;
    Ok(MarginalRecord {
        m: *m,
        probs: shifted(&probs, shift),
        basis: BasisTag { operator: measured_monomial(m), shift: Some(shift) },
        source: MarginalSource::BornShift,
        shots: None,
    })
}

/// Simple W₁ marginal for `N = 2^k` and `M^{-1} ∈ L1`.
pub fn marginal_qubit_w1(rho: &ComplexMatrix, m: &Sl2Matrix, set: &PhasePointSet) -> Result<MarginalRecord> {
    check_rho(rho, set, m)?;
    require_variant(set, Variant::QubitW1)?;
    let shift = qubit_shift(m)?;
    let probs = born_probabilities(rho, m)?;
    Ok(MarginalRecord {
        m: *m,
        probs: shifted(&probs, shift),
        basis: BasisTag { operator: measured_monomial(m), shift: Some(shift) },
        source: MarginalSource::BornShift,
        shots: None,
    })
}

/// Checks `N/u` even, `u = gcd(t, N)`, `t = p` if `p` is even else `q`.
pub fn even_precondition(m: &Sl2Matrix) -> Result<()> {
    let n = m.modulus();
    if n % 2 == 1 {
        return Err(FpsError::OddDimension(n));
    }
    let (p, q, _) = measured_exponents(m);
    let t = if p % 2 == 0 { p } else { q };
    let u = gcd(t, n);
    if (n / u) % 2 == 1 {
        return Err(FpsError::PreconditionNU { n, u });
    }
    Ok(())
}

/// The even-dimension closed form
/// `Ŵ(z) = (1/N) Σ_j P_j Σ_s ν_{ps,qs} (-1)^{qs⌊ps/N⌋ + ps⌊qs/N⌋} ω^{(κ + j - z)s}`
/// with `κ = (pq - σ)/2`, for any admissible ν table.
pub fn even_closed_form(f: &OrderingFunction, m: &Sl2Matrix, born: &[f64]) -> Result<Vec<f64>> {
    let n = m.modulus();
    if f.variant() != Variant::EvenNu {
        return Err(FpsError::VariantDimensionMismatch { variant: f.variant().name().into(), dim: n });
    }
    even_precondition(m)?;
    let (p, q, sigma) = measured_exponents(m);
    let kappa = ((p * q - sigma) / 2) as i64;
    let weights: Vec<Complex64> = (0..n)
        .map(|s| {
            let (ps, qs) = (p * s, q * s);
            let parity = (qs * (ps / n) + ps * (qs / n)) % 2;
            let sign = if parity == 0 { 1.0 } else { -1.0 };
            f.nu(ps % n, qs % n) * sign
        })
        .collect();
    Ok((0..n)
        .map(|z| {
            let mut acc = ZERO;
            for (j, pj) in born.iter().enumerate() {
                let e = kappa + j as i64 - z as i64;
                let inner: Complex64 = weights.iter().enumerate().map(|(s, w)| w * omega_pow(e * s as i64, n)).sum();
                acc += inner * *pj;
            }
            acc.re / n as f64
        })
        .collect())
}

/// Even-dimension marginal of an EvenNu set via the closed form.
pub fn marginal_even_general(rho: &ComplexMatrix, m: &Sl2Matrix, set: &PhasePointSet) -> Result<MarginalRecord> {
    if set.dim() % 2 == 1 {
        return Err(FpsError::OddDimension(set.dim()));
    }
    check_rho(rho, set, m)?;
    require_variant(set, Variant::EvenNu)?;
    even_precondition(m)?;
    let born = born_probabilities(rho, m)?;
    Ok(MarginalRecord {
        m: *m,
        probs: even_closed_form(set.ordering(), m, &born)?,
        basis: BasisTag::for_matrix(m),
        source: MarginalSource::EvenClosedForm,
        shots: None,
    })
}

/// Kernel `K(r) = N Σ_s G(s) ω^{-rs}` with
/// `G(s) = f(ps, qs) ω^{-pq s(s-1)/2} τ^{-σ s}`, so that
/// `Ŵ(z) = Σ_j P_j K(z - j)` for every variant and every `M`.
pub fn marginal_kernel(f: &OrderingFunction, m: &Sl2Matrix) -> Vec<f64> {
    let n = m.modulus();
    let (p, q, sigma) = measured_exponents(m);
    let g: Vec<Complex64> = (0..n)
        .map(|s| {
            let tri = ((p * q) % n * (s * s.saturating_sub(1) / 2 % n)) as i64;
            f.value((p * s) as i64, (q * s) as i64) * omega_pow(-tri, n) * tau_pow(-((sigma * s) as i64), n)
        })
        .collect();
    (0..n)
        .map(|r| {
            let k: Complex64 = g.iter().enumerate().map(|(s, v)| v * omega_pow(-((r * s) as i64), n)).sum();
            k.re * n as f64
        })
        .collect()
}

/// Marginal from eigenbasis probabilities, with the cheapest valid formula.
pub fn marginal_from_born(
    f: &OrderingFunction,
    m: &Sl2Matrix,
    born: &[f64],
) -> Result<(Vec<f64>, BasisTag, MarginalSource)> {
    let n = m.modulus();
    if born.len() != n || f.dim() != n {
        return Err(FpsError::DimensionMismatch { expected: n, actual: born.len() });
    }
    let mut tag = BasisTag::for_matrix(m);
    let simple = match f.variant() {
        Variant::Odd => Some(odd_shift(m)?),
        Variant::QubitW1 => qubit_shift(m).ok(),
        Variant::EvenNu => None,
    };
    if let Some(shift) = simple {
        tag.shift = Some(shift);
        return Ok((shifted(born, shift), tag, MarginalSource::BornShift));
    }
    if f.variant() == Variant::EvenNu && even_precondition(m).is_ok() {
        return Ok((even_closed_form(f, m, born)?, tag, MarginalSource::EvenClosedForm));
    }
    let k = marginal_kernel(f, m);
    let probs = (0..n).map(|z| born.iter().enumerate().map(|(j, pj)| pj * k[(z + n - j) % n]).sum()).collect();
    Ok((probs, tag, MarginalSource::Kernel))
}

/// Exact marginal record from a state, for any variant and matrix.
pub fn marginal_record(rho: &ComplexMatrix, m: &Sl2Matrix, set: &PhasePointSet) -> Result<MarginalRecord> {
    check_rho(rho, set, m)?;
    let born = born_probabilities(rho, m)?;
    let (probs, basis, source) = marginal_from_born(set.ordering(), m, &born)?;
    Ok(MarginalRecord { m: *m, probs, basis, source, shots: None })
}

/// Record from the line sums of a known grid.
pub fn direct_record(w: &WignerGrid, m: &Sl2Matrix) -> Result<MarginalRecord> {
    Ok(MarginalRecord {
        m: *m,
        probs: radon_direct(w, m)?,
        basis: BasisTag::for_matrix(m),
        source: MarginalSource::Direct,
        shots: None,
    })
}

/// Validates `probs` as a distribution and clips tiny negatives to zero.
pub fn validate_distribution(probs: &[f64], tol: f64) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(FpsError::InvalidDistribution("empty".into()));
    }
    if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < -tol) {
        return Err(FpsError::InvalidDistribution(format!("entry {i} is {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(FpsError::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(probs.iter().map(|p| p.max(0.0)).collect())
}

/// Multinomial counts by sequential binomials from a seeded ChaCha8 stream.
pub fn simulate_counts(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    let probs = validate_distribution(probs, 1e-9)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass: f64 = probs.iter().sum();
    let last = probs.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i == last {
            counts[i] = left;
            break;
        }
        let frac = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(left, frac).map_err(|e| FpsError::InvalidDistribution(e.to_string()))?.sample(&mut rng);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(counts)
}

/// Record from simulated measurement of the basis of `m` with `shots` shots.
pub fn sampled_record(
    rho: &ComplexMatrix,
    m: &Sl2Matrix,
    f: &OrderingFunction,
    shots: u64,
    seed: u64,
) -> Result<MarginalRecord> {
    let born = born_probabilities(rho, m)?;
    let counts = simulate_counts(&born, shots, seed)?;
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    let (probs, basis, source) = marginal_from_born(f, m, &freq)?;
    Ok(MarginalRecord { m: *m, probs, basis, source, shots: Some(shots) })
}

/// Grid with `W'(x, z) = W(x - a, z - b)`.
pub fn translate_grid(w: &WignerGrid, a: i64, b: i64) -> WignerGrid {
    let n = w.n;
    let (a, b) = (reduce(a, n), reduce(b, n));
    let mut out = w.clone();
    for x in 0..n {
        for z in 0..n {
            out.set(x, z, w.get(x + n - a, z + n - b));
        }
    }
    out
}
