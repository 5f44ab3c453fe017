//! Ordering functions, phase-point operators and Wigner grids.
//!
//! Normalisation is fixed throughout: `f(0,0) = 1/N²`, so `Σ â(x,z) = I`,
//! `tr(â(x,z) â(x',z')) = δ δ / N`, `W(x,z) = tr(ρ â(x,z))` and
//! `ρ = N Σ W(x,z) â(x,z)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{FpsError, Result};
use crate::heisenberg::{omega_pow, qft, rep_monomial, tau_pow};
use crate::matrix::{ComplexMatrix, DEFAULT_TOLERANCE, ONE, ZERO};
use crate::zn::{is_power_of_two, mod_inverse, reduce};

/// Which solution of the ordering equations to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `f = ω^{mn(N+1)/2} / N²`, odd N.
    Odd,
    /// `f = ν_{mn} τ^{mn} / N²`, even N.
    EvenNu,
    /// The `W₁` function for `N = 2^k`, simple on the L₁ matrices.
    QubitW1,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Odd => "odd",
            Variant::EvenNu => "even-nu",
            Variant::QubitW1 => "qubit-w1",
        }
    }

    pub fn supports(&self, n: usize) -> bool {
        match self {
            Variant::Odd => n >= 3 && n % 2 == 1,
            Variant::EvenNu => n >= 2 && n.is_multiple_of(2),
            Variant::QubitW1 => is_power_of_two(n),
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.supports(n) {
            Ok(())
        } else {
            Err(FpsError::VariantDimensionMismatch { variant: self.name().into(), dim: n })
        }
    }

    /// Odd for odd N, W₁ for powers of two, EvenNu otherwise.
    pub fn default_for(n: usize) -> Self {
        if n % 2 == 1 {
            Variant::Odd
        } else if is_power_of_two(n) {
            Variant::QubitW1
        } else {
            Variant::EvenNu
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "odd" => Ok(Variant::Odd),
            "even-nu" | "evennu" | "even" => Ok(Variant::EvenNu),
            "qubit-w1" | "qubitw1" | "w1" => Ok(Variant::QubitW1),
            other => Err(format!("unknown variant '{other}' (odd, even-nu, qubit-w1)")),
        }
    }
}

/// Default ν: `ω^{(m+n)² N/4}` off the axes, i.e. `i` when `m+n` is odd.
pub fn default_nu(m: usize, n: usize) -> Complex64 {
    if m == 0 || n == 0 || (m + n).is_multiple_of(2) {
        ONE
    } else {
        Complex64::new(0.0, 1.0)
    }
}

/// The `±1` attached to `τ^{mn}` in the W₁ ordering function.
pub fn qubit_sign(m: usize, n: usize, dim: usize) -> f64 {
    let (m, n) = (m % dim, n % dim);
    let floor_parity = |p: usize, q: usize| {
        // q odd: (p q^{-1} mod N) · q / N
        let inv = mod_inverse(q as i64, dim).expect("odd residues are units mod 2^k");
        let r = (p * inv) % dim;
        (r * q / dim) % 2
    };
    let s = if m == 0 || n == 0 || (m % 2 == 0 && n % 2 == 0) {
        0
    } else if n % 2 == 1 {
        floor_parity(m, n)
    } else {
        floor_parity(n, m)
    };
    if s == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An ordering function `f(m, n)` on `Z_N × Z_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingFunction {
    variant: Variant,
    n: usize,
    /// Row-major ν table, EvenNu only.
    nu: Option<Vec<Complex64>>,
}

impl OrderingFunction {
    pub fn new(variant: Variant, n: usize) -> Result<Self> {
        variant.check(n)?;
        Ok(Self { variant, n, nu: None })
    }

    /// EvenNu with a custom ν table (`table[m][n]`), validated for unit modulus,
    /// `ν = 1` on the axes and `conj(ν_{N-m,N-n}) = (-1)^{m+n} ν_{mn}`.
    pub fn with_nu(n: usize, table: &[Vec<Complex64>], tol: f64) -> Result<Self> {
        Variant::EvenNu.check(n)?;
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(FpsError::InvalidNuTable(format!("expected a {n}x{n} table")));
        }
        for m in 0..n {
            for k in 0..n {
                let v = table[m][k];
                if (v.norm() - 1.0).abs() > tol {
                    return Err(FpsError::InvalidNuTable(format!("|nu[{m}][{k}]| = {}", v.norm())));
                }
                if (m == 0 || k == 0) && (v - ONE).norm() > tol {
                    return Err(FpsError::InvalidNuTable(format!("nu[{m}][{k}] must be 1 on the axes")));
                }
                if m > 0 && k > 0 {
                    let sign = if (m + k) % 2 == 0 { 1.0 } else { -1.0 };
                    if (table[n - m][n - k].conj() - v * sign).norm() > tol {
                        return Err(FpsError::InvalidNuTable(format!("conjugation constraint fails at ({m}, {k})")));
                    }
                }
            }
        }
        Ok(Self { variant: Variant::EvenNu, n, nu: Some(table.iter().flatten().copied().collect()) })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn has_custom_nu(&self) -> bool {
        self.nu.is_some()
    }

    pub fn nu(&self, m: usize, n: usize) -> Complex64 {
        let (m, n) = (m % self.n, n % self.n);
        match &self.nu {
            Some(t) => t[m * self.n + n],
            None => default_nu(m, n),
        }
    }

    /// `f(m, n)` with `m, n` reduced mod N first.
    pub fn value(&self, m: i64, n: i64) -> Complex64 {
        let dim = self.n;
        let (m, n) = (reduce(m, dim), reduce(n, dim));
        let norm = 1.0 / (dim * dim) as f64;
        match self.variant {
            Variant::Odd => omega_pow(((m * n) % dim * dim.div_ceil(2)) as i64, dim) * norm,
            Variant::EvenNu => self.nu(m, n) * tau_pow((m * n) as i64, dim) * norm,
            Variant::QubitW1 => tau_pow((m * n) as i64, dim) * (qubit_sign(m, n, dim) * norm),
        }
    }

    /// Largest violation of `conj(f(-m,-n)) ω^{mn} = f(m,n)` over all `(m,n)`.
    pub fn reality_violation(&self) -> f64 {
        let dim = self.n as i64;
        let mut worst: f64 = 0.0;
        for m in 0..dim {
            for n in 0..dim {
                let lhs = self.value(-m, -n).conj() * omega_pow(m * n, self.n);
                worst = worst.max((lhs - self.value(m, n)).norm());
            }
        }
        worst
    }
}

pub fn ordering_f(variant: Variant, m: i64, n: i64, dim: usize) -> Result<Complex64> {
    Ok(OrderingFunction::new(variant, dim)?.value(m, n))
}

/// `N × N` array of hermitian phase-point operators, indexed `(x, z)`.
#[derive(Debug, Clone)]
pub struct PhasePointSet {
    n: usize,
    f: OrderingFunction,
    offset: (usize, usize),
    ops: Vec<ComplexMatrix>,
}

/// `â(x,z)_{kl} = ω^{-(k-l)x} g([k-l], [l-z])` with `g(m, r) = Σ_n f(m,n) ω^{nr}`.
fn definition_ops(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Vec<ComplexMatrix> {
    let mut g = vec![ZERO; dim * dim];
    for m in 0..dim {
        for r in 0..dim {
            g[m * dim + r] = (0..dim).map(|n| f(m, n) * omega_pow((n * r) as i64, dim)).sum();
        }
    }
    let mut ops = Vec::with_capacity(dim * dim);
    for x in 0..dim {
        for z in 0..dim {
            ops.push(ComplexMatrix::from_fn(dim, |k, l| {
                let m = (k + dim - l) % dim;
                let r = (l + dim - z) % dim;
                omega_pow(-((m * x) as i64), dim) * g[m * dim + r]
            }));
        }
    }
    ops
}

/// Closed form for the odd-N operators: `ω^{-(k-l)x} δ_{k+l, 2z} / N`.
pub fn closed_form_odd(x: usize, z: usize, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |k, l| {
        if (k + l) % dim == (2 * z) % dim {
            let d = (k + dim - l) % dim;
            omega_pow(-((d * x) as i64), dim) / dim as f64
        } else {
            ZERO
        }
    })
}

/// Closed form for the EvenNu operators with the default ν.
///
/// With `d = [k-l]`: the diagonal is `δ_{lz}/N`; for even `d > 0` the entry
/// is `ω^{-dx}(1 ± i)/(2N)` when `θ = d/2 + l - z ≡ 0 (mod N/2)` (`+` for
/// `θ ≡ 0`, `-` for `θ ≡ N/2` mod N) and zero otherwise; for odd `d` it is
/// `ω^{-dx}(1 - cot ψ + i csc ψ)/N²` with `ψ = π(d + 2l - 2z)/N`.
pub fn closed_form_even(x: usize, z: usize, dim: usize) -> ComplexMatrix {
    let half = dim / 2;
    ComplexMatrix::from_fn(dim, |k, l| {
        let d = (k + dim - l) % dim;
        let phase = omega_pow(-((d * x) as i64), dim);
        if d == 0 {
            return if l == z { Complex64::new(1.0 / dim as f64, 0.0) } else { ZERO };
        }
        if d.is_multiple_of(2) {
            let theta = (d / 2 + l + dim - z) % dim;
            if !theta.is_multiple_of(half) {
                return ZERO;
            }
            let sign = if theta == 0 { 1.0 } else { -1.0 };
            phase * Complex64::new(1.0, sign) / (2.0 * dim as f64)
        } else {
            let psi = PI * (d as f64 + 2.0 * l as f64 - 2.0 * z as f64) / dim as f64;
            let val = Complex64::new(1.0 - psi.cos() / psi.sin(), 1.0 / psi.sin());
            phase * val / (dim * dim) as f64
        }
    })
}

impl PhasePointSet {
    /// Builds the set by the definition sum and verifies every invariant.
    pub fn build(f: OrderingFunction) -> Result<Self> {
        Self::build_with_tolerance(f, 1e-9)
    }

    pub fn build_with_tolerance(f: OrderingFunction, tol: f64) -> Result<Self> {
        let n = f.dim();
        let ops = definition_ops(n, |m, k| f.value(m as i64, k as i64));
        let set = Self { n, f, offset: (0, 0), ops };
        let closed: Option<fn(usize, usize, usize) -> ComplexMatrix> = match set.f.variant {
            Variant::Odd => Some(closed_form_odd),
            Variant::EvenNu if !set.f.has_custom_nu() => Some(closed_form_even),
            _ => None,
        };
        if let Some(cf) = closed {
            let mut worst: f64 = 0.0;
            for x in 0..n {
                for z in 0..n {
                    worst = worst.max(set.get(x, z).max_abs_diff(&cf(x, z, n)));
                }
            }
            if worst > tol {
                return Err(FpsError::InvariantViolation {
                    identity: "closed form agrees with definition sum".into(),
                    violation: worst,
                });
            }
        }
        verify_wigner_set(&set).require(tol)?;
        Ok(set)
    }

    /// Operators supplied directly; nothing is checked.
    pub fn from_operators_unchecked(f: OrderingFunction, ops: Vec<ComplexMatrix>) -> Self {
        let n = f.dim();
        assert_eq!(ops.len(), n * n);
        Self { n, f, offset: (0, 0), ops }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.f.variant
    }

    pub fn ordering(&self) -> &OrderingFunction {
        &self.f
    }

    /// Accumulated translation `(a, b)` from [`translate_set`].
    pub fn offset(&self) -> (usize, usize) {
        self.offset
    }

    pub fn get(&self, x: usize, z: usize) -> &ComplexMatrix {
        &self.ops[(x % self.n) * self.n + z % self.n]
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn operators_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut self.ops
    }
}

pub fn build_phase_point_set(variant: Variant, n: usize) -> Result<PhasePointSet> {
    PhasePointSet::build(OrderingFunction::new(variant, n)?)
}

/// Set whose operator at `(x, z)` is the old operator at `(x - a, z - b)`.
pub fn translate_set(set: &PhasePointSet, a: i64, b: i64) -> PhasePointSet {
    let n = set.n;
    let (a, b) = (reduce(a, n), reduce(b, n));
    let mut ops = Vec::with_capacity(n * n);
    for x in 0..n {
        for z in 0..n {
            ops.push(set.get(x + n - a, z + n - b).clone());
        }
    }
    PhasePointSet { n, f: set.f.clone(), offset: ((set.offset.0 + a) % n, (set.offset.1 + b) % n), ops }
}

/// Max violation of each Wigner-set axiom.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WignerSetReport {
    pub hermiticity: f64,
    /// `tr(â â') - δδ/N`.
    pub orthogonality: f64,
    /// `Σ â - I`.
    pub completeness: f64,
    /// `â(x,z)_{kk} - δ_{kz}/N`.
    pub diagonal: f64,
    /// `Σ_x â(x,z) - |z><z|`.
    pub position_projectors: f64,
    /// `Σ_z â(x,z) - |x~><x~|`, with `|x~> = Ω|x>`.
    pub momentum_projectors: f64,
}

impl WignerSetReport {
    pub fn max(&self) -> f64 {
        [
            self.hermiticity,
            self.orthogonality,
            self.completeness,
            self.diagonal,
            self.position_projectors,
            self.momentum_projectors,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("hermiticity", self.hermiticity),
            ("orthogonality", self.orthogonality),
            ("completeness", self.completeness),
            ("diagonal", self.diagonal),
            ("position projectors", self.position_projectors),
            ("momentum projectors", self.momentum_projectors),
        ]
    }

    /// First failing identity as an error; NaN counts as failing.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn require(&self, tol: f64) -> Result<()> {
        match self.entries().into_iter().find(|(_, v)| !(*v <= tol)) {
            Some((name, v)) => Err(FpsError::InvariantViolation { identity: name.into(), violation: v }),
            None => Ok(()),
        }
    }
}

/// All pairwise traces are checked up to this dimension; above it only the
/// pairs involving `â(0,0)` and the self-overlaps are, which by the
/// Weyl covariance of the construction cover every difference vector.
const FULL_GRAM_LIMIT: usize = 24;

/// Diagonal and axis checks are taken relative to the set's offset, so a
/// translated set is held to the translated identities.
pub fn verify_wigner_set(set: &PhasePointSet) -> WignerSetReport {
    let n = set.n;
    let inv_n = 1.0 / n as f64;
    let mut rep = WignerSetReport::default();
    let (oa, ob) = set.offset;
    let mut total = ComplexMatrix::zeros(n);
    for (idx, op) in set.ops.iter().enumerate() {
        let z = (idx % n + n - ob) % n;
        rep.hermiticity = rep.hermiticity.max(op.hermiticity_violation());
        for k in 0..n {
            let want = if k == z { inv_n } else { 0.0 };
            rep.diagonal = rep.diagonal.max((op[(k, k)] - want).norm());
        }
        total = &total + op;
    }
    rep.completeness = total.max_abs_diff(&ComplexMatrix::identity(n));

    let flat: Vec<Vec<Complex64>> = set.ops.iter().map(|o| o.row_major()).collect();
    let overlap = |i: usize, j: usize| -> Complex64 {
        // tr(A B) = Σ A_kl B_lk = Σ A_kl conj(B_kl) for hermitian B
        flat[i].iter().zip(&flat[j]).map(|(a, b)| a * b.conj()).sum()
    };
    let count = n * n;
    let pairs: Box<dyn Iterator<Item = (usize, usize)>> = if n <= FULL_GRAM_LIMIT {
        Box::new((0..count).flat_map(move |i| (i..count).map(move |j| (i, j))))
    } else {
        Box::new((0..count).map(|j| (0, j)).chain((1..count).map(|i| (i, i))))
    };
    for (i, j) in pairs {
        let want = if i == j { inv_n } else { 0.0 };
        rep.orthogonality = rep.orthogonality.max((overlap(i, j) - want).norm());
    }

    let omega = qft(n);
    for c in 0..n {
        let mut pos = ComplexMatrix::zeros(n);
        let mut mom = ComplexMatrix::zeros(n);
        for t in 0..n {
            pos = &pos + set.get(t, c);
            mom = &mom + set.get(c, t);
        }
        let mut basis = ComplexMatrix::zeros(n);
        let cb = (c + n - ob) % n;
        basis[(cb, cb)] = ONE;
        rep.position_projectors = rep.position_projectors.max(pos.max_abs_diff(&basis));
        let fourier = ComplexMatrix::outer(&omega.column((c + n - oa) % n));
        rep.momentum_projectors = rep.momentum_projectors.max(mom.max_abs_diff(&fourier));
    }
    rep
}

/// Real `N × N` grid, row-major in `(x, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub n: usize,
    pub variant: Variant,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn new(n: usize, variant: Variant, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(FpsError::DimensionMismatch { expected: n * n, actual: values.len() });
        }
        Ok(Self { n, variant, values })
    }

    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.values[(x % self.n) * self.n + z % self.n]
    }

    pub fn set(&mut self, x: usize, z: usize, v: f64) {
        let n = self.n;
        self.values[(x % n) * n + z % n] = v;
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ_x W(x, z)` for each `z`.
    pub fn position_marginal(&self) -> Vec<f64> {
        (0..self.n).map(|z| (0..self.n).map(|x| self.get(x, z)).sum()).collect()
    }

    /// `Σ_z W(x, z)` for each `x`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        (0..self.n).map(|x| (0..self.n).map(|z| self.get(x, z)).sum()).collect()
    }

    pub fn count_nonzero(&self, threshold: f64) -> usize {
        self.values.iter().filter(|v| v.abs() > threshold).count()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn check_set_dim(set: &PhasePointSet, dim: usize) -> Result<()> {
    if set.n != dim {
        Err(FpsError::DimensionMismatch { expected: set.n, actual: dim })
    } else {
        Ok(())
    }
}

/// `tr(A â(x,z))` over the grid, with the largest imaginary part.
fn traces(op: &ComplexMatrix, set: &PhasePointSet) -> (Vec<f64>, f64) {
    let mut imag: f64 = 0.0;
    let values = set
        .ops
        .iter()
        .map(|a| {
            let t = op.trace_product(a);
            imag = imag.max(t.im.abs());
            t.re
        })
        .collect();
    (values, imag)
}

/// `W(x, z) = tr(ρ â(x, z))` for a density matrix `ρ`.
pub fn wigner(rho: &ComplexMatrix, set: &PhasePointSet) -> Result<WignerGrid> {
    wigner_with_tolerance(rho, set, DEFAULT_TOLERANCE)
}

pub fn wigner_with_tolerance(rho: &ComplexMatrix, set: &PhasePointSet, tol: f64) -> Result<WignerGrid> {
    check_set_dim(set, rho.dim())?;
    rho.check_density(tol)?;
    let (values, imag) = traces(rho, set);
    if imag > tol {
        return Err(FpsError::ImaginaryResidue(imag));
    }
    WignerGrid::new(set.n, set.variant(), values)
}

/// Grid of any hermitian operator; no trace or positivity requirement.
pub fn wigner_of_operator(op: &ComplexMatrix, set: &PhasePointSet, tol: f64) -> Result<WignerGrid> {
    check_set_dim(set, op.dim())?;
    let h = op.hermiticity_violation();
    if h > tol {
        return Err(FpsError::NotHermitian(h));
    }
    let (values, imag) = traces(op, set);
    if imag > tol {
        return Err(FpsError::ImaginaryResidue(imag));
    }
    WignerGrid::new(set.n, set.variant(), values)
}

/// `ρ = N Σ W(x,z) â(x,z)`.
pub fn reconstruct_from_wigner(w: &WignerGrid, set: &PhasePointSet) -> Result<ComplexMatrix> {
    check_set_dim(set, w.n)?;
    let n = set.n;
    let mut out = ComplexMatrix::zeros(n);
    for (v, a) in w.values.iter().zip(&set.ops) {
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += a[(r, c)] * *v;
            }
        }
    }
    Ok(out.scale_real(n as f64))
}

/// Symbol `t(x,z) = N tr(T â(x,z))`, so that `<T> = Σ W t` and the
/// symbol of `I` is identically 1.
pub fn observable_symbol(t: &ComplexMatrix, set: &PhasePointSet, tol: f64) -> Result<WignerGrid> {
    let mut g = wigner_of_operator(t, set, tol)?;
    let n = set.n as f64;
    g.values.iter_mut().for_each(|v| *v *= n);
    Ok(g)
}

pub fn expectation(w: &WignerGrid, symbol: &WignerGrid) -> Result<f64> {
    if w.n != symbol.n {
        return Err(FpsError::DimensionMismatch { expected: w.n, actual: symbol.n });
    }
    Ok(w.values.iter().zip(&symbol.values).map(|(a, b)| a * b).sum())
}

/// Oracle: `Σ f(m,n) X^m Z^n ω^{-(mx+nz)}` as a literal matrix sum.
pub fn definition_sum(f: &OrderingFunction, x: usize, z: usize) -> ComplexMatrix {
    let n = f.dim();
    let mut out = ComplexMatrix::zeros(n);
    for m in 0..n {
        for k in 0..n {
            let c = f.value(m as i64, k as i64) * omega_pow(-((m * x + k * z) as i64), n);
            out = &out + &rep_monomial(m as i64, k as i64, n).scale(c);
        }
    }
    out
}
