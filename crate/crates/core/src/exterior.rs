//! Exterior algebra over `R^n` with the Euclidean inner product.
//!
//! Basis multivectors `e_I` are addressed by [`MultiIndex`], a bit set of
//! axes. Axes are 1-based in every public API.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, check_grade, Error, Result};

/// Largest ambient dimension supported by the bit-set index.
pub const MAX_DIM: usize = 30;

/// Coefficients below this magnitude are dropped on canonicalization.
pub const ZERO_CUTOFF: f64 = 1e-300;

/// A strictly increasing set of axes `I = (i_1 < ... < i_k)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct MultiIndex(u32);

impl MultiIndex {
    /// The grade-0 index.
    pub const EMPTY: MultiIndex = MultiIndex(0);

    /// Builds an index from strictly increasing 1-based axes.
    pub fn new(axes: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        let mut last = 0usize;
        for &a in axes {
            if a == 0 || a > MAX_DIM || a <= last {
                return Err(Error::Invalid(format!(
                    "axes must be strictly increasing in 1..={MAX_DIM}, got {axes:?}"
                )));
            }
            bits |= 1 << (a - 1);
            last = a;
        }
        Ok(MultiIndex(bits))
    }

    /// Builds an index from any axis list, sorting it; duplicates are an error.
    pub fn from_unsorted(axes: &[usize]) -> Result<Self> {
        let mut v = axes.to_vec();
        v.sort_unstable();
        Self::new(&v)
    }

    pub fn single(axis: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&axis), "axis {axis} out of range");
        MultiIndex(1 << (axis - 1))
    }

    /// `e_1 ∧ ... ∧ e_n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_DIM);
        if n == 32 {
            MultiIndex(u32::MAX)
        } else {
            MultiIndex((1u32 << n) - 1)
        }
    }

    pub const fn from_bits(bits: u32) -> Self {
        MultiIndex(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, axis: usize) -> bool {
        (1..=MAX_DIM).contains(&axis) && self.0 & (1 << (axis - 1)) != 0
    }

    /// Largest axis, or 0 for the empty index.
    pub fn max_axis(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    /// Axes in increasing order.
    pub fn axes(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let t = bits.trailing_zeros();
                bits &= bits - 1;
                Some(t as usize + 1)
            }
        })
    }

    pub fn complement(self, n: usize) -> Self {
        MultiIndex(Self::full(n).0 & !self.0)
    }

    pub fn union(self, other: Self) -> Self {
        MultiIndex(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    /// Shifts every axis up by `by` (used for Cartesian products).
    pub fn shifted(self, by: usize) -> Self {
        assert!(self.max_axis() + by <= MAX_DIM, "shifted index exceeds MAX_DIM");
        MultiIndex(self.0 << by)
    }

    /// Zero-based position of `axis` inside the index, if present.
    pub fn position(self, axis: usize) -> Option<usize> {
        self.contains(axis)
            .then(|| (self.0 & ((1u32 << (axis - 1)) - 1)).count_ones() as usize)
    }

    /// Every index of grade `k` over `n` axes, in increasing bit order.
    pub fn all_of_grade(n: usize, k: usize) -> impl Iterator<Item = MultiIndex> {
        assert!(n <= MAX_DIM);
        (0u64..(1u64 << n))
            .map(|b| MultiIndex(b as u32))
            .filter(move |m| m.grade() == k)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{self}")
    }
}

impl fmt::Display for MultiIndex {
    /// Comma-separated axes, or `.` for the empty index.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str(".");
        }
        let mut first = true;
        for a in self.axes() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        Ok(())
    }
}

impl std::str::FromStr for MultiIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "." || s.is_empty() {
            return Ok(MultiIndex::EMPTY);
        }
        let axes = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Invalid(format!("bad multi-index {s:?}: {e}")))?;
        MultiIndex::new(&axes)
    }
}

/// Sign of `e_A ∧ e_B` relative to `e_{A∪B}`; zero when the sets overlap.
pub fn merge_sign(a: MultiIndex, b: MultiIndex) -> f64 {
    if !a.is_disjoint(b) {
        return 0.0;
    }
    let mut swaps = 0u32;
    for axis in b.axes() {
        swaps += (a.0 >> axis).count_ones();
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `(-1)^e` for an integer exponent.
pub fn parity(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `⊥ e_I = sign(I^c, I) e_{I^c}`, so that `e_I^⊥ ∧ e_I = e_{1..n}`.
pub fn perp_basis(n: usize, idx: MultiIndex) -> (MultiIndex, f64) {
    let c = idx.complement(n);
    (c, merge_sign(c, idx))
}

/// Mass of a multivector together with its exactness flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub value: f64,
    /// `false` when `value` is only the basis-l1 upper bound.
    pub exact: bool,
}

/// A grade-`k` multivector in `Λ_k(R^n)`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct KVector {
    dim: usize,
    grade: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl fmt::Debug for KVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KVector(n={}, k={}; ", self.dim, self.grade)?;
        f.debug_map().entries(self.coeffs.iter()).finish()?;
        f.write_str(")")
    }
}

impl KVector {
    /// The zero multivector. `grade` may exceed `dim` (a formal grade).
    pub fn zero(dim: usize, grade: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        KVector { dim, grade, coeffs: BTreeMap::new() }
    }

    pub fn scalar(dim: usize, c: f64) -> Self {
        Self::from_terms(dim, 0, [(MultiIndex::EMPTY, c)]).expect("grade 0 index")
    }

    pub fn basis(dim: usize, idx: MultiIndex) -> Result<Self> {
        Self::from_terms(dim, idx.grade(), [(idx, 1.0)])
    }

    /// A 1-vector from its coordinates.
    pub fn vector(v: &[f64]) -> Self {
        let terms = v.iter().enumerate().map(|(i, &c)| (MultiIndex::single(i + 1), c));
        Self::from_terms(v.len(), 1, terms).expect("valid axes")
    }

    /// `v_1 ∧ ... ∧ v_k`; the empty list gives the unit scalar.
    pub fn from_vectors(dim: usize, vs: &[&[f64]]) -> Result<Self> {
        vs.iter().try_fold(Self::scalar(dim, 1.0), |acc, v| {
            check_dim(dim, v.len())?;
            acc.wedge(&Self::vector(v))
        })
    }

    /// Sums the given terms into canonical form.
    pub fn from_terms(
        dim: usize,
        grade: usize,
        terms: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let mut out = Self::zero(dim, grade);
        for (idx, c) in terms {
            check_grade(grade, idx.grade())?;
            if idx.max_axis() > dim {
                return Err(Error::BadAxis { axis: idx.max_axis(), dim });
            }
            *out.coeffs.entry(idx).or_insert(0.0) += c;
        }
        out.canonicalize();
        Ok(out)
    }

    fn canonicalize(&mut self) {
        self.coeffs.retain(|_, c| c.abs() >= ZERO_CUTOFF);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, idx: MultiIndex) -> f64 {
        self.coeffs.get(&idx).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.coeffs.iter().map(|(&i, &c)| (i, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        check_grade(self.grade, other.grade)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        self.check_shape(other)?;
        let terms = self.iter().map(|(i, c)| (i, a * c)).chain(other.iter().map(|(i, c)| (i, b * c)));
        Self::from_terms(self.dim, self.grade, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0, -1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|c| *c *= s);
        out.canonicalize();
        out
    }

    /// Exterior product. When `k + l > n` the result is the zero vector of
    /// formal grade `k + l`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let grade = self.grade + other.grade;
        if grade > self.dim {
            return Ok(Self::zero(self.dim, grade));
        }
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (a, ca) in self.iter() {
            for (b, cb) in other.iter() {
                let s = merge_sign(a, b);
                if s != 0.0 {
                    terms.push((a.union(b), s * ca * cb));
                }
            }
        }
        Self::from_terms(self.dim, grade, terms)
    }

    /// Determinant inner product; the `e_I` are orthonormal.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.iter().map(|(i, c)| c * other.get(i)).sum())
    }

    pub fn norm(&self) -> f64 {
        self.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    /// Basis l1 sum `Σ |a_I|`.
    pub fn l1(&self) -> f64 {
        self.iter().map(|(_, c)| c.abs()).sum()
    }

    /// Whether the multivector factors as `v_1 ∧ ... ∧ v_k`.
    ///
    /// Nonzero `α` is simple iff the kernel of `v ↦ v ∧ α` has dimension `k`.
    pub fn is_simple(&self) -> bool {
        let (n, k) = (self.dim, self.grade);
        if self.is_zero() || k <= 1 || k + 1 >= n {
            return true;
        }
        let rows: Vec<MultiIndex> = MultiIndex::all_of_grade(n, k + 1).collect();
        let mut m = DMatrix::<f64>::zeros(rows.len(), n);
        for axis in 1..=n {
            let e = MultiIndex::single(axis);
            for (idx, c) in self.iter() {
                let s = merge_sign(e, idx);
                if s != 0.0 {
                    let r = rows.binary_search(&e.union(idx)).expect("grade k+1 row");
                    m[(r, axis - 1)] += s * c;
                }
            }
        }
        let scale = self.norm();
        let rank = m.svd(false, false).rank(1e-10 * scale);
        n - rank == k
    }

    /// Mass: exact norm for simple multivectors, basis-l1 upper bound otherwise.
    pub fn mass(&self) -> Mass {
        if self.is_simple() {
            Mass { value: self.norm(), exact: true }
        } else {
            Mass { value: self.l1(), exact: false }
        }
    }

    /// Interior product `v ⌟ α = Σ_i (-1)^{pos(i)} v_i e_{I∖i}`.
    pub fn contract(&self, v: &[f64]) -> Result<Self> {
        check_dim(self.dim, v.len())?;
        if self.grade == 0 {
            return Ok(Self::zero(self.dim, 0));
        }
        let mut terms = Vec::new();
        for (idx, c) in self.iter() {
            for (pos, axis) in idx.axes().enumerate() {
                let vi = v[axis - 1];
                if vi != 0.0 {
                    let rest = MultiIndex(idx.0 & !(1 << (axis - 1)));
                    terms.push((rest, parity(pos) * vi * c));
                }
            }
        }
        Self::from_terms(self.dim, self.grade - 1, terms)
    }

    /// Perpendicular complement, characterised by `α^⊥ ∧ α = ‖α‖² e_{1..n}`.
    pub fn perp(&self) -> Self {
        let n = self.dim;
        let terms = self.iter().map(|(i, c)| {
            let (j, s) = perp_basis(n, i);
            (j, s * c)
        });
        Self::from_terms(n, n - self.grade, terms).expect("complement has matching grade")
    }

    /// The composition `C_{e_n} ∘ ... ∘ C_{e_1}` with `C_v = v∧· + v⌟·`.
    ///
    /// Agrees with [`KVector::perp`] up to a sign depending only on `(n, k)`.
    pub fn clifford_perp(&self) -> Self {
        let n = self.dim;
        let mut terms: Vec<(MultiIndex, f64)> = self.iter().collect();
        for axis in 1..=n {
            let e = MultiIndex::single(axis);
            for t in terms.iter_mut() {
                if t.0.contains(axis) {
                    let pos = t.0.position(axis).expect("present");
                    t.0 = MultiIndex(t.0 .0 & !e.0);
                    t.1 *= parity(pos);
                } else {
                    t.1 *= merge_sign(e, t.0);
                    t.0 = t.0.union(e);
                }
            }
        }
        Self::from_terms(n, n - self.grade, terms).expect("complement grade")
    }

    /// Pushforward by a linear map `M: R^n → R^m` given as an `m × n` matrix:
    /// `e_I ↦ Σ_J det(M[J, I]) e_J`.
    pub fn linear_map(&self, m: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.dim, m.ncols())?;
        let out_dim = m.nrows();
        let k = self.grade;
        if k > out_dim {
            return Ok(Self::zero(out_dim, k));
        }
        let mut terms = Vec::new();
        for (idx, c) in self.iter() {
            let cols: Vec<usize> = idx.axes().map(|a| a - 1).collect();
            for row_idx in MultiIndex::all_of_grade(out_dim, k) {
                let rows: Vec<usize> = row_idx.axes().map(|a| a - 1).collect();
                let det = minor(m, &rows, &cols);
                if det != 0.0 {
                    terms.push((row_idx, c * det));
                }
            }
        }
        Self::from_terms(out_dim, k, terms)
    }
}

/// Determinant of the square submatrix with the given rows and columns.
pub fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    debug_assert_eq!(rows.len(), cols.len());
    match rows.len() {
        0 => 1.0,
        1 => m[(rows[0], cols[0])],
        2 => {
            m[(rows[0], cols[0])] * m[(rows[1], cols[1])] - m[(rows[0], cols[1])] * m[(rows[1], cols[0])]
        }
        k => DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]).determinant(),
    }
}
