//! Dirac chains of arbitrary dipole order in canonical form.
//!
//! A term `(p; m ⊗ e_I)` carries a point, a degree vector `m` recording how
//! often each standard prederivative `P_{e_i}` was applied, a basis index and
//! a coefficient. Chains keep their terms sorted by `(point, degree, index)`
//! with like terms merged, so equality of chains is equality of term lists.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use smallvec::SmallVec;

use crate::error::{check_dim, check_grade, Error, Result};
use crate::exterior::{KVector, MultiIndex, MAX_DIM, ZERO_CUTOFF};

/// A point of `R^n`, compared bit-exactly (with `-0.0` folded into `0.0`).
#[derive(Clone, Default)]
pub struct Point(SmallVec<[f64; 4]>);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        coords.iter().copied().collect()
    }

    pub fn origin(n: usize) -> Self {
        Point(SmallVec::from_elem(0.0, n))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn translated(&self, u: &[f64]) -> Point {
        self.0.iter().zip(u).map(|(a, b)| a + b).collect()
    }

    pub fn concat(&self, other: &Point) -> Point {
        self.0.iter().chain(other.0.iter()).copied().collect()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

impl FromIterator<f64> for Point {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        // Adding +0.0 maps -0.0 to +0.0 and leaves every other value alone.
        Point(iter.into_iter().map(|x| x + 0.0).collect())
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.0.len().cmp(&other.0.len()))
    }
}

impl std::hash::Hash for Point {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for x in &self.0 {
            x.to_bits().hash(state);
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Per-axis prederivative counts; the total is the dipole order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Degree(SmallVec<[u8; 4]>);

impl Degree {
    pub fn zero(n: usize) -> Self {
        Degree(SmallVec::from_elem(0, n))
    }

    pub fn new(slots: &[u8]) -> Self {
        Degree(slots.iter().copied().collect())
    }

    /// The degree of a single `P_{e_axis}`, with 1-based `axis`.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut d = Self::zero(n);
        d.0[axis - 1] = 1;
        d
    }

    pub fn slots(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&d| d as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    /// Adds one to the slot of the 1-based `axis`.
    pub fn bumped(&self, axis: usize) -> Self {
        let mut d = self.clone();
        d.0[axis - 1] = d.0[axis - 1].checked_add(1).expect("degree slot overflow");
        d
    }

    /// Removes one from the slot of the 1-based `axis`.
    pub fn lowered(&self, axis: usize) -> Option<Self> {
        let mut d = self.clone();
        d.0[axis - 1] = d.0[axis - 1].checked_sub(1)?;
        Some(d)
    }

    pub fn plus(&self, other: &Degree) -> Self {
        Degree(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn concat(&self, other: &Degree) -> Self {
        Degree(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    /// Lowest axis (1-based) with a nonzero slot.
    pub fn first_axis(&self) -> Option<usize> {
        self.0.iter().position(|&d| d > 0).map(|i| i + 1)
    }

    /// All degrees `a ≤ self` slotwise, with the multinomial weight
    /// `Π C(self_i, a_i)`.
    pub fn sub_degrees(&self) -> Vec<(Degree, f64)> {
        let mut out = vec![(Degree(SmallVec::new()), 1.0)];
        for &m in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (m as usize + 1));
            for (d, w) in &out {
                for a in 0..=m {
                    let mut nd = d.clone();
                    nd.0.push(a);
                    next.push((nd, w * binomial(m as u32, a as u32)));
                }
            }
            out = next;
        }
        out
    }

    /// Slotwise difference, assuming `other ≤ self`.
    pub fn minus(&self, other: &Degree) -> Self {
        Degree(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// One canonical term `coeff · (point; degree ⊗ e_index)`.
#[derive(Clone, PartialEq, Debug)]
pub struct ChainTerm {
    pub point: Point,
    pub degree: Degree,
    pub index: MultiIndex,
    pub coeff: f64,
}

impl ChainTerm {
    pub fn order(&self) -> usize {
        self.degree.order()
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.point
            .cmp(&other.point)
            .then_with(|| self.degree.cmp(&other.degree))
            .then_with(|| self.index.cmp(&other.index))
    }

    fn same_key(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

/// Accumulates terms of a chain before canonicalization.
#[derive(Debug)]
pub struct ChainBuilder {
    dim: usize,
    grade: usize,
    terms: Vec<ChainTerm>,
}

impl ChainBuilder {
    pub fn new(dim: usize, grade: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        ChainBuilder { dim, grade, terms: Vec::new() }
    }

    pub fn with_capacity(dim: usize, grade: usize, cap: usize) -> Self {
        let mut b = Self::new(dim, grade);
        b.terms.reserve(cap);
        b
    }

    /// Adds a term; the caller guarantees its shape matches.
    pub fn push(&mut self, term: ChainTerm) {
        debug_assert_eq!(term.point.dim(), self.dim);
        debug_assert_eq!(term.degree.dim(), self.dim);
        debug_assert_eq!(term.index.grade(), self.grade);
        if term.coeff != 0.0 {
            self.terms.push(term);
        }
    }

    pub fn add(&mut self, point: Point, degree: Degree, index: MultiIndex, coeff: f64) {
        self.push(ChainTerm { point, degree, index, coeff });
    }

    /// Adds every term of `chain` scaled by `c`.
    pub fn extend_scaled(&mut self, chain: &DiracChain, c: f64) {
        debug_assert_eq!((chain.dim, chain.grade), (self.dim, self.grade));
        self.terms.extend(chain.terms.iter().map(|t| ChainTerm { coeff: t.coeff * c, ..t.clone() }));
    }

    pub fn finish(self) -> DiracChain {
        let ChainBuilder { dim, grade, mut terms } = self;
        terms.sort_by(|a, b| a.key_cmp(b));
        let mut merged: Vec<ChainTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.same_key(&t) => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.abs() >= ZERO_CUTOFF);
        DiracChain { dim, grade, terms: merged }
    }
}

/// A canonical finitely supported Dirac `k`-chain in `R^n`.
#[derive(Clone, PartialEq, Debug)]
pub struct DiracChain {
    dim: usize,
    grade: usize,
    terms: Vec<ChainTerm>,
}

impl DiracChain {
    pub fn zero(dim: usize, grade: usize) -> Self {
        ChainBuilder::new(dim, grade).finish()
    }

    /// The order-0 chain `(p; α)`.
    pub fn element(point: &[f64], alpha: &KVector) -> Result<Self> {
        check_dim(alpha.dim(), point.len())?;
        if alpha.grade() > alpha.dim() {
            return Err(Error::GradeOverflow { grade: alpha.grade(), dim: alpha.dim() });
        }
        let n = point.len();
        let p = Point::new(point);
        let mut b = ChainBuilder::new(n, alpha.grade());
        for (idx, c) in alpha.iter() {
            b.add(p.clone(), Degree::zero(n), idx, c);
        }
        Ok(b.finish())
    }

    /// Single term `c · (p; degree ⊗ e_I)`.
    pub fn term(point: &[f64], degree: &[u8], index: MultiIndex, c: f64) -> Result<Self> {
        let n = point.len();
        check_dim(n, degree.len())?;
        if index.max_axis() > n {
            return Err(Error::BadAxis { axis: index.max_axis(), dim: n });
        }
        let mut b = ChainBuilder::new(n, index.grade());
        b.add(Point::new(point), Degree::new(degree), index, c);
        Ok(b.finish())
    }

    /// Canonicalizes arbitrary terms after checking their shapes.
    pub fn from_terms(dim: usize, grade: usize, terms: impl IntoIterator<Item = ChainTerm>) -> Result<Self> {
        let mut b = ChainBuilder::new(dim, grade);
        for t in terms {
            check_dim(dim, t.point.dim())?;
            check_dim(dim, t.degree.dim())?;
            check_grade(grade, t.index.grade())?;
            if t.index.max_axis() > dim {
                return Err(Error::BadAxis { axis: t.index.max_axis(), dim });
            }
            b.push(t);
        }
        Ok(b.finish())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn terms(&self) -> &[ChainTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximal total degree over the terms (0 for the zero chain).
    pub fn order(&self) -> usize {
        self.terms.iter().map(ChainTerm::order).max().unwrap_or(0)
    }

    pub fn builder(&self) -> ChainBuilder {
        ChainBuilder::new(self.dim, self.grade)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        check_grade(self.grade, other.grade)
    }

    /// `ca·a + cb·b` in canonical form.
    pub fn combine(a: &Self, b: &Self, ca: f64, cb: f64) -> Result<Self> {
        a.check_shape(b)?;
        let mut out = ChainBuilder::with_capacity(a.dim, a.grade, a.len() + b.len());
        out.extend_scaled(a, ca);
        out.extend_scaled(b, cb);
        Ok(out.finish())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::combine(self, other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::combine(self, other, 1.0, -1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.builder();
        out.extend_scaled(self, c);
        out.finish()
    }

    /// Sum of many chains of one shape.
    pub fn sum<'a>(dim: usize, grade: usize, parts: impl IntoIterator<Item = &'a DiracChain>) -> Result<Self> {
        let mut out = ChainBuilder::new(dim, grade);
        for p in parts {
            check_dim(dim, p.dim)?;
            check_grade(grade, p.grade)?;
            out.extend_scaled(p, 1.0);
        }
        Ok(out.finish())
    }

    /// Largest absolute coefficient; a residual measure for identities.
    pub fn max_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    /// Sum of absolute coefficients.
    pub fn l1(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// `T_u`: shifts every point by `u`.
    pub fn translate(&self, u: &[f64]) -> Result<Self> {
        check_dim(self.dim, u.len())?;
        let mut out = ChainBuilder::with_capacity(self.dim, self.grade, self.len());
        for t in &self.terms {
            out.push(ChainTerm { point: t.point.translated(u), ..t.clone() });
        }
        Ok(out.finish())
    }

    /// `Δ_σ = (T_{u_j} − I) ∘ ... ∘ (T_{u_1} − I)` applied to `self`.
    pub fn difference(&self, sigma: &[Vec<f64>]) -> Result<Self> {
        sigma.iter().try_fold(self.clone(), |acc, u| acc.translate(u)?.sub(&acc))
    }

    /// Distinct points carrying a nonzero term, in lexicographic order.
    pub fn support(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self.terms.iter().map(|t| t.point.clone()).collect();
        pts.dedup();
        pts
    }

    /// Keeps exactly the terms whose point satisfies `pred`.
    pub fn restrict(&self, pred: impl Fn(&[f64]) -> bool) -> Self {
        DiracChain {
            dim: self.dim,
            grade: self.grade,
            terms: self.terms.iter().filter(|t| pred(t.point.coords())).cloned().collect(),
        }
    }

    /// The order-0 multivector part at one point, if the chain has order 0.
    pub fn kvector_at(&self, p: &Point) -> KVector {
        let terms = self.terms.iter().filter(|t| &t.point == p && t.degree.is_zero()).map(|t| (t.index, t.coeff));
        KVector::from_terms(self.dim, self.grade, terms).expect("chain terms share the grade")
    }

    /// Text form: header `dim k`, then `p1 … pn | d1 … dn | I | coeff` per
    /// term, reals as hexadecimal float literals.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.dim, self.grade);
        for t in &self.terms {
            let pts: Vec<String> = t.point.coords().iter().map(|&x| hex_float(x)).collect();
            let deg: Vec<String> = t.degree.slots().iter().map(u8::to_string).collect();
            let _ = writeln!(s, "{} | {} | {} | {}", pts.join(" "), deg.join(" "), t.index, hex_float(t.coeff));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| parse_err(1, 1, "missing header"))?;
        let hdr: Vec<&str> = header.split_whitespace().collect();
        if hdr.len() != 2 {
            return Err(parse_err(hl + 1, 1, "header must be `dim k`"));
        }
        let dim: usize = hdr[0].parse().map_err(|_| parse_err(hl + 1, 1, "bad dim"))?;
        let grade: usize = hdr[1].parse().map_err(|_| parse_err(hl + 1, 1, "bad grade"))?;
        if dim > MAX_DIM || grade > dim {
            return Err(parse_err(hl + 1, 1, "unsupported dim/grade"));
        }
        let mut b = ChainBuilder::new(dim, grade);
        for (ln, line) in lines {
            let ln = ln + 1;
            let fields: Vec<&str> = line.split('|').collect();
            if fields.len() != 4 {
                return Err(parse_err(ln, 1, "expected 4 `|`-separated fields"));
            }
            let col = |i: usize| fields[..i].iter().map(|f| f.len() + 1).sum::<usize>() + 1;
            let pts = fields[0]
                .split_whitespace()
                .map(parse_real)
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|m| parse_err(ln, col(0), &m))?;
            let deg = fields[1]
                .split_whitespace()
                .map(|t| t.parse::<u8>())
                .collect::<std::result::Result<Vec<u8>, _>>()
                .map_err(|e| parse_err(ln, col(1), &e.to_string()))?;
            let index: MultiIndex = fields[2].parse().map_err(|e: Error| parse_err(ln, col(2), &e.to_string()))?;
            let coeff = parse_real(fields[3].trim()).map_err(|m| parse_err(ln, col(3), &m))?;
            if pts.len() != dim || deg.len() != dim {
                return Err(parse_err(ln, 1, "point/degree length differs from dim"));
            }
            if index.grade() != grade || index.max_axis() > dim {
                return Err(parse_err(ln, col(2), "index has wrong grade or axis"));
            }
            b.add(Point::new(&pts), Degree::new(&deg), index, coeff);
        }
        Ok(b.finish())
    }
}

fn parse_err(line: usize, col: usize, msg: &str) -> Error {
    Error::Parse { line, col, msg: msg.to_string() }
}

/// Formats a float as a C99-style hexadecimal literal (`0x1.8p+1`).
pub fn hex_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{e:+}")
    }
}

/// Parses a hexadecimal or decimal float literal.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let body = t.strip_prefix('-').or_else(|| t.strip_prefix('+')).unwrap_or(t);
    if body.starts_with("0x") || body.starts_with("0X") {
        hexf_parse::parse_hexf64(t, false).map_err(|e| format!("bad hex float {t:?}: {e}"))
    } else {
        t.parse::<f64>().map_err(|e| format!("bad real {t:?}: {e}"))
    }
}

impl fmt::Display for DiracChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}·({:?}; {:?}⊗e{})", t.coeff, t.point, t.degree, t.index)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(n: usize, axes: &[usize]) -> KVector {
        KVector::basis(n, MultiIndex::new(axes).unwrap()).unwrap()
    }

    fn el(p: &[f64], a: &KVector) -> DiracChain {
        DiracChain::element(p, a).unwrap()
    }

    #[test]
    fn combine_examples() {
        let a = el(&[0.5, 0.25], &e(2, &[1]));
        assert!(DiracChain::combine(&a, &a, 1.0, -1.0).unwrap().is_zero());
        assert_eq!(a.add(&a).unwrap(), el(&[0.5, 0.25], &e(2, &[1]).scale(2.0)));
        let b = el(&[1.0, 0.25], &e(2, &[1]));
        assert_eq!(a.add(&b).unwrap().len(), 2);
        assert!(a.add(&el(&[0.0, 0.0], &e(2, &[1, 2]))).is_err());
    }

    #[test]
    fn negative_zero_is_folded() {
        let a = el(&[-0.0, 1.0], &e(2, &[1]));
        let b = el(&[0.0, 1.0], &e(2, &[1]));
        assert!(a.sub(&b).unwrap().is_zero());
    }

    #[test]
    fn translate_examples() {
        let a = el(&[0.5, 0.25], &e(2, &[2]));
        assert_eq!(a.translate(&[1.0, -0.25]).unwrap(), el(&[1.5, 0.0], &e(2, &[2])));
        assert_eq!(a.translate(&[0.0, 0.0]).unwrap(), a);
        let uv = a.translate(&[0.25, 0.5]).unwrap().translate(&[0.5, 0.125]).unwrap();
        assert_eq!(uv, a.translate(&[0.75, 0.625]).unwrap());
    }

    #[test]
    fn difference_examples() {
        let a = el(&[0.5, 0.25], &e(2, &[1]));
        let u = vec![0.25, 0.0];
        let expect = a.translate(&u).unwrap().sub(&a).unwrap();
        assert_eq!(a.difference(std::slice::from_ref(&u)).unwrap(), expect);
        let v = vec![0.0, 0.5];
        assert_eq!(a.difference(&[u.clone(), v.clone()]).unwrap(), a.difference(&[v, u]).unwrap());
        assert!(a.difference(&[vec![0.0, 0.0]]).unwrap().is_zero());
    }

    #[test]
    fn support_examples() {
        let a = el(&[0.0, 0.0], &e(2, &[1]));
        let b = el(&[1.0, 0.0], &e(2, &[2]));
        assert_eq!(a.add(&b).unwrap().support(), vec![Point::new(&[0.0, 0.0]), Point::new(&[1.0, 0.0])]);
        assert!(DiracChain::zero(2, 1).support().is_empty());
        assert!(a.sub(&a).unwrap().support().is_empty());
    }

    #[test]
    fn restrict_examples() {
        let a = el(&[0.0, 0.0], &e(2, &[1]));
        let b = el(&[1.0, 0.0], &e(2, &[2]).scale(0.0)).add(&el(&[1.0, 0.0], &e(2, &[1]))).unwrap();
        let ab = a.add(&b).unwrap();
        assert_eq!(ab.restrict(|_| true), ab);
        assert_eq!(ab.restrict(|p| p[0] == 0.0), a);
    }

    #[test]
    fn partition_of_unity_restriction() {
        // A_m = ((1+1/2m,0); m) − ((1−1/2m,0); m), B_m = A_m − ((1,0); e1⊗1),
        // restricted to the open unit disk.
        let m = 8.0;
        let h = 1.0 / (2.0 * m);
        let a_m = DiracChain::term(&[1.0 + h, 0.0], &[0, 0], MultiIndex::EMPTY, m)
            .unwrap()
            .sub(&DiracChain::term(&[1.0 - h, 0.0], &[0, 0], MultiIndex::EMPTY, m).unwrap())
            .unwrap();
        let dipole = DiracChain::term(&[1.0, 0.0], &[1, 0], MultiIndex::EMPTY, 1.0).unwrap();
        let b_m = a_m.sub(&dipole).unwrap();
        let inside = b_m.restrict(|p| p[0] * p[0] + p[1] * p[1] < 1.0);
        assert_eq!(inside, DiracChain::term(&[1.0 - h, 0.0], &[0, 0], MultiIndex::EMPTY, -m).unwrap());
    }

    #[test]
    fn hex_float_round_trip() {
        for x in [0.0, -0.0, 1.0, -1.5, 0.1, 1e-310, f64::MAX, f64::MIN_POSITIVE, 3.0f64.powi(-7)] {
            let s = hex_float(x);
            assert_eq!(parse_real(&s).unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(hex_float(3.0), "0x1.8p+1");
    }

    #[test]
    fn text_parse_errors_carry_position() {
        let err = DiracChain::from_text("2 1\n0x0p+0 0x0p+0 | 0 0 | 1 | zz\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(DiracChain::from_text("").is_err());
    }

    fn chain(n: usize, k: usize) -> impl Strategy<Value = DiracChain> {
        let basis: Vec<MultiIndex> = MultiIndex::all_of_grade(n, k).collect();
        prop::collection::vec(
            (prop::collection::vec(-8i32..8, n), prop::collection::vec(0u8..3, n), 0..basis.len(), -8i32..8),
            0..6,
        )
        .prop_map(move |ts| {
            let terms = ts.into_iter().map(|(p, d, i, c)| ChainTerm {
                point: p.iter().map(|&x| x as f64 / 8.0).collect(),
                degree: Degree::new(&d),
                index: basis[i],
                coeff: c as f64 / 4.0,
            });
            DiracChain::from_terms(n, k, terms).unwrap()
        })
    }

    fn any_chain() -> impl Strategy<Value = DiracChain> {
        (1usize..=3).prop_flat_map(|n| (0..=n).prop_flat_map(move |k| chain(n, k)))
    }

    proptest! {
        #[test]
        fn text_round_trip(a in any_chain()) {
            prop_assert_eq!(DiracChain::from_text(&a.to_text()).unwrap(), a);
        }

        #[test]
        fn canonicalization_is_idempotent(a in any_chain()) {
            let again = DiracChain::from_terms(a.dim(), a.grade(), a.terms().iter().cloned()).unwrap();
            prop_assert_eq!(again, a);
        }

        #[test]
        fn combine_commutes_and_associates(
            (a, b, c) in (1usize..=3).prop_flat_map(|n| (0..=n).prop_flat_map(move |k| (chain(n, k), chain(n, k), chain(n, k))))
        ) {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
            let sab = a.add(&b).unwrap().support();
            let (sa, sb) = (a.support(), b.support());
            prop_assert!(sab.iter().all(|p| sa.contains(p) || sb.contains(p)));
        }

        #[test]
        fn difference_is_finite_difference(
            p in prop::collection::vec(-8i32..8, 2),
            us in prop::collection::vec(prop::collection::vec(-4i32..4, 2), 0..4),
            a in -4i32..4, b in -4i32..4, c in -4i32..4,
        ) {
            // A form linear in p evaluated on the 1-element (p; e1).
            let f = |q: &[f64]| a as f64 * q[0] + b as f64 * q[1] + c as f64;
            let p: Vec<f64> = p.iter().map(|&x| x as f64 / 4.0).collect();
            let us: Vec<Vec<f64>> = us.iter().map(|u| u.iter().map(|&x| x as f64 / 4.0).collect()).collect();
            let d = el(&p, &e(2, &[1])).difference(&us).unwrap();
            let chain_val: f64 = d.terms().iter().map(|t| t.coeff * f(t.point.coords())).sum();
            // Inclusion-exclusion over subsets of the translations.
            let j = us.len();
            let mut brute = 0.0;
            for mask in 0u32..(1 << j) {
                let mut q = p.clone();
                for (i, u) in us.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        q[0] += u[0];
                        q[1] += u[1];
                    }
                }
                brute += f64::powi(-1.0, (j - mask.count_ones() as usize) as i32) * f(&q);
            }
            prop_assert!((chain_val - brute).abs() < 1e-12);
        }
    }
}
