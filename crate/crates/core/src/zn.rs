//! Arithmetic in the ring Z_N, the group SL(2, Z_N) and lines in the
//! finite phase space Z_N x Z_N.
//!
//! Every value handed out by this module is a canonical residue in
//! `0..N`; negative intermediates are folded back with `rem_euclid`
//! before they leave a function.

use std::fmt;

use crate::error::{FpsError, Result};

/// Canonical representative of `v` modulo `n`.
#[inline]
pub fn reduce(v: i64, n: usize) -> usize {
    v.rem_euclid(n as i64) as usize
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_power_of_two(n: usize) -> bool {
    n >= 2 && n.is_power_of_two()
}

/// Multiplicative inverse of `u` in Z_N.
pub fn mod_inverse(u: i64, n: usize) -> Result<usize> {
    let u_red = reduce(u, n);
    if n == 1 {
        return Ok(0);
    }
    // extended Euclid on (u, n)
    let (mut r0, mut r1) = (n as i64, u_red as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(FpsError::NotInvertible { value: u, modulus: n });
    }
    Ok(reduce(t0, n))
}

/// Parity of an integer: 0 for even, 1 for odd.
#[inline]
pub fn sgn_parity(u: i64) -> usize {
    u.rem_euclid(2) as usize
}

/// `u / 2` in Z_N for odd N, i.e. `u * (N + 1) / 2 mod N`.
pub fn half_mod(u: i64, n: usize) -> Result<usize> {
    if n.is_multiple_of(2) {
        return Err(FpsError::EvenModulus(n));
    }
    let half = n.div_ceil(2) as i64;
    Ok(reduce(reduce(u, n) as i64 * half, n))
}

/// 2-adic valuation of a residue; zero counts as divisible by all of N = 2^k.
fn two_adic(j: usize, k: u32) -> u32 {
    if j == 0 {
        k
    } else {
        j.trailing_zeros()
    }
}

/// Element of SL(2, Z_N), stored row-major as `(a b; c d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sl2Matrix {
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    n: usize,
}

impl Sl2Matrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(FpsError::InvalidDimension(n));
        }
        let det = reduce(a * d - b * c, n);
        if det != 1 {
            return Err(FpsError::NotSl2 { a, b, c, d, modulus: n, det });
        }
        Ok(Self { a: reduce(a, n), b: reduce(b, n), c: reduce(c, n), d: reduce(d, n), n })
    }

    pub fn identity(n: usize) -> Self {
        Self { a: 1, b: 0, c: 0, d: 1, n }
    }

    pub fn a(&self) -> usize {
        self.a
    }
    pub fn b(&self) -> usize {
        self.b
    }
    pub fn c(&self) -> usize {
        self.c
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> [usize; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn inverse(&self) -> Self {
        let n = self.n;
        Self { a: self.d, b: reduce(-(self.b as i64), n), c: reduce(-(self.c as i64), n), d: self.a, n }
    }

    pub fn transpose(&self) -> Self {
        Self { b: self.c, c: self.b, ..*self }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "SL(2) product across moduli");
        let n = self.n;
        let m = |x: usize, y: usize, z: usize, w: usize| (x * y + z * w) % n;
        Self {
            a: m(self.a, rhs.a, self.b, rhs.c),
            b: m(self.a, rhs.b, self.b, rhs.d),
            c: m(self.c, rhs.a, self.d, rhs.c),
            d: m(self.c, rhs.b, self.d, rhs.d),
            n,
        }
    }

    /// `M (x, z)^T`.
    pub fn apply(&self, x: usize, z: usize) -> (usize, usize) {
        let n = self.n;
        ((self.a * x + self.b * z) % n, (self.c * x + self.d * z) % n)
    }

    pub fn is_valid(&self) -> bool {
        (self.a * self.d + self.n * self.n - (self.b * self.c) % self.n) % self.n == 1
    }

    /// All elements of SL(2, Z_N) in lexicographic order of `(a, b, c, d)`.
    pub fn enumerate(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        if (a * d + n * n - (b * c) % n) % n == 1 {
                            out.push(Self { a, b, c, d, n });
                        }
                    }
                }
            }
        }
        out
    }

    /// Smallest `(b, d)` completing the first column `(a, c)` to an SL(2) element.
    pub fn complete_column(a: usize, c: usize, n: usize) -> Result<Self> {
        let (a, c) = (a % n, c % n);
        for b in 0..n {
            for d in 0..n {
                if (a * d + n * n - (b * c) % n) % n == 1 {
                    return Ok(Self { a, b, c, d, n });
                }
            }
        }
        Err(FpsError::DegenerateDirection { a, b: c, modulus: n })
    }
}

impl fmt::Display for Sl2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {}) mod {}", self.a, self.b, self.c, self.d, self.n)
    }
}

/// Membership in L1 ⊂ SL(2, Z_{2^k}): every row holds an entry equal to 1,
/// and a diagonal entry different from 1 is even.
pub fn l1_check(m: &Sl2Matrix) -> Result<bool> {
    let n = m.modulus();
    if !is_power_of_two(n) {
        return Err(FpsError::NotPowerOfTwo(n));
    }
    let row_ok = |diag: usize, off: usize| (diag == 1 || off == 1) && (diag == 1 || diag.is_multiple_of(2));
    Ok(row_ok(m.a(), m.b()) && row_ok(m.d(), m.c()))
}

/// Translate of the line `a x + b z = 0` through `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineSpec {
    pub a: usize,
    pub b: usize,
    pub offset: (usize, usize),
    pub n: usize,
}

impl LineSpec {
    pub fn new(a: i64, b: i64, offset: (i64, i64), n: usize) -> Result<Self> {
        let (a, b) = (reduce(a, n), reduce(b, n));
        if gcd(gcd(a, b), n) != 1 {
            return Err(FpsError::DegenerateDirection { a, b, modulus: n });
        }
        Ok(Self { a, b, offset: (reduce(offset.0, n), reduce(offset.1, n)), n })
    }
}

/// Points of `S_ab + offset`, sorted lexicographically.
pub fn line_points(line: &LineSpec) -> Result<Vec<(usize, usize)>> {
    let LineSpec { a, b, offset, n } = *line;
    if gcd(gcd(a, b), n) != 1 {
        return Err(FpsError::DegenerateDirection { a, b, modulus: n });
    }
    // solutions of a x + b z = 0 are exactly the multiples of (-b, a)
    let mut pts: Vec<(usize, usize)> = (0..n)
        .map(|t| {
            let x = reduce(-((b * t) as i64), n);
            let z = (a * t) % n;
            ((x + offset.0) % n, (z + offset.1) % n)
        })
        .collect();
    pts.sort_unstable();
    Ok(pts)
}

/// Line `{(c t, -a t)}` through the origin of the dual group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyLine {
    pub a: usize,
    pub c: usize,
    pub n: usize,
}

impl FrequencyLine {
    pub fn new(a: i64, c: i64, n: usize) -> Result<Self> {
        let (a, c) = (reduce(a, n), reduce(c, n));
        if gcd(gcd(a, c), n) != 1 {
            return Err(FpsError::DegenerateDirection { a, b: c, modulus: n });
        }
        Ok(Self { a, c, n })
    }

    /// Frequency line swept by the marginal of `m`: its first column.
    pub fn of_matrix(m: &Sl2Matrix) -> Self {
        Self { a: m.a(), c: m.c(), n: m.modulus() }
    }

    /// Point for parameter `t`.
    pub fn point(&self, t: usize) -> (usize, usize) {
        let n = self.n;
        ((self.c * t) % n, reduce(-((self.a * t % n) as i64), n))
    }

    pub fn points(&self) -> Vec<(usize, usize)> {
        (0..self.n).map(|t| self.point(t)).collect()
    }

    /// Same point set, regardless of parametrisation.
    pub fn same_points(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let mut p = self.points();
        let mut q = other.points();
        p.sort_unstable();
        q.sort_unstable();
        p == q
    }

    /// An SL(2) matrix whose first column spans this line and whose inverse
    /// lies in L1 when N = 2^k (general completion otherwise).
    pub fn measurement_matrix(&self) -> Result<Sl2Matrix> {
        let n = self.n;
        if is_power_of_two(n) {
            if self.a == 1 {
                return Sl2Matrix::new(1, 0, self.c as i64, 1, n);
            }
            if self.c == 1 && self.a.is_multiple_of(2) {
                // reparametrise to the column (-a, -1) spanning the same points
                let a = -(self.a as i64);
                return Sl2Matrix::new(a, 1 - a, -1, 1, n);
            }
        }
        Sl2Matrix::complete_column(self.a, self.c, n)
    }
}

impl fmt::Display for FrequencyLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, c={}) mod {}", self.a, self.c, self.n)
    }
}

/// `{(c t, -a t) : t in Z_N}` for the direction `(a, c)`.
pub fn frequency_line_points(line: &FrequencyLine) -> Result<Vec<(usize, usize)>> {
    let FrequencyLine { a, c, n } = *line;
    if gcd(gcd(a, c), n) != 1 {
        return Err(FpsError::DegenerateDirection { a, b: c, modulus: n });
    }
    Ok(line.points())
}

/// Frequency lines whose union is all of Z_N x Z_N, sorted by `(a, c)`.
///
/// For N = 2^k each line has `a = 1` or `c = 1` (with `a` even), so that
/// [`FrequencyLine::measurement_matrix`] lands in L1. Odd N uses a greedy
/// set cover.
pub fn cover_lines(n: usize) -> Result<Vec<FrequencyLine>> {
    if n < 2 {
        return Err(FpsError::InvalidDimension(n));
    }
    let mut lines = if is_power_of_two(n) {
        cover_power_of_two(n)?
    } else if n % 2 == 1 {
        cover_odd_greedy(n)?
    } else {
        return Err(FpsError::UnsupportedDimension(n));
    };
    lines.sort_unstable();
    lines.dedup();
    Ok(lines)
}

fn cover_power_of_two(n: usize) -> Result<Vec<FrequencyLine>> {
    let k = n.trailing_zeros();
    let mut covered = vec![false; n * n];
    covered[0] = true;
    let mut lines = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if covered[x * n + y] {
                continue;
            }
            let (hx, hy) = (two_adic(x, k), two_adic(y, k));
            let line = if hx >= hy {
                // y != 0 here; t = -y hits (x, y)
                let y_odd = (y >> hy) as i64;
                let x_odd = if x == 0 { 0 } else { (x >> hx) as i64 };
                let c = -((1i64 << (hx - hy)) * x_odd * mod_inverse(y_odd, n)? as i64);
                FrequencyLine::new(1, c, n)?
            } else {
                // x != 0 here; t = x hits (x, y)
                let x_odd = (x >> hx) as i64;
                let y_odd = if y == 0 { 0 } else { (y >> hy) as i64 };
                let a = -((1i64 << (hy - hx)) * y_odd * mod_inverse(x_odd, n)? as i64);
                FrequencyLine::new(a, 1, n)?
            };
            for (u, v) in line.points() {
                covered[u * n + v] = true;
            }
            lines.push(line);
        }
    }
    Ok(lines)
}

fn cover_odd_greedy(n: usize) -> Result<Vec<FrequencyLine>> {
    let mut candidates: Vec<FrequencyLine> = Vec::new();
    for c in 0..n {
        candidates.push(FrequencyLine { a: 1, c, n });
    }
    for a in 0..n {
        candidates.push(FrequencyLine { a, c: 1, n });
    }
    for a in 0..n {
        for c in 0..n {
            if gcd(gcd(a, c), n) == 1 {
                candidates.push(FrequencyLine { a, c, n });
            }
        }
    }
    let point_sets: Vec<Vec<usize>> =
        candidates.iter().map(|l| l.points().into_iter().map(|(u, v)| u * n + v).collect()).collect();

    let mut covered = vec![false; n * n];
    let mut remaining = n * n;
    let mut chosen = Vec::new();
    while remaining > 0 {
        let (best, gain) = point_sets
            .iter()
            .enumerate()
            .map(|(i, pts)| (i, pts.iter().filter(|&&p| !covered[p]).count()))
            .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if gain == 0 {
            return Err(FpsError::UnsupportedDimension(n));
        }
        for &p in &point_sets[best] {
            if !covered[p] {
                covered[p] = true;
                remaining -= 1;
            }
        }
        chosen.push(candidates[best]);
    }
    Ok(chosen)
}
