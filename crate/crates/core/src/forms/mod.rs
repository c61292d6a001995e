//! Differential forms, vector fields and smooth maps, and the integral pairing
//! with Dirac chains.
//!
//! A form stores one scalar [`Field`] per basis covector `dx_I`. An order-`s`
//! chain term `(p; m ⊗ e_I)` evaluates as `∂^m f_I(p)`, so every operator
//! here is an exact manipulation of coefficient trees.

mod expr;
mod field;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use rayon::prelude::*;

pub use expr::{parse_field, parse_form_pieces};
pub use field::{Analytic, FdConfig, Field, FiniteDiff, Oracle};

use crate::chains::{ChainTerm, Degree, DiracChain};
use crate::error::{check_dim, check_grade, Error, Result};
use crate::exterior::{merge_sign, parity, perp_basis, KVector, MultiIndex};

type DerivCache = HashMap<(MultiIndex, Degree), Field>;

/// A differential `k`-form on `R^n`.
#[derive(Clone)]
pub struct Form {
    dim: usize,
    grade: usize,
    coeffs: BTreeMap<MultiIndex, Field>,
    cache: Arc<Mutex<DerivCache>>,
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(n={}, k={}; ", self.dim, self.grade)?;
        f.debug_map().entries(self.coeffs.iter()).finish()?;
        f.write_str(")")
    }
}

/// Chains longer than this are summed in parallel fixed-size chunks.
const PAR_CHUNK: usize = 1 << 14;

impl Form {
    pub fn zero(dim: usize, grade: usize) -> Self {
        Form { dim, grade, coeffs: BTreeMap::new(), cache: Arc::default() }
    }

    /// Sums `(index, field)` pieces; indices must have the stated grade.
    pub fn new(dim: usize, grade: usize, pieces: impl IntoIterator<Item = (MultiIndex, Field)>) -> Result<Self> {
        if grade > dim {
            return Err(Error::GradeOverflow { grade, dim });
        }
        let mut acc: BTreeMap<MultiIndex, Vec<(f64, Field)>> = BTreeMap::new();
        for (idx, f) in pieces {
            check_grade(grade, idx.grade())?;
            if idx.max_axis() > dim {
                return Err(Error::BadAxis { axis: idx.max_axis(), dim });
            }
            acc.entry(idx).or_default().push((1.0, f));
        }
        let coeffs = acc
            .into_iter()
            .map(|(i, fs)| (i, Field::linear(fs)))
            .filter(|(_, f)| !f.is_zero())
            .collect();
        Ok(Form { dim, grade, coeffs, cache: Arc::default() })
    }

    /// The 0-form `f`.
    pub fn scalar(dim: usize, f: Field) -> Self {
        Form::new(dim, 0, [(MultiIndex::EMPTY, f)]).expect("grade 0")
    }

    /// `c · dx_I`.
    pub fn constant(dim: usize, idx: MultiIndex, c: f64) -> Result<Self> {
        Form::new(dim, idx.grade(), [(idx, Field::constant(c))])
    }

    /// `dx_I`.
    pub fn basis(dim: usize, idx: MultiIndex) -> Result<Self> {
        Form::constant(dim, idx, 1.0)
    }

    /// `dV = dx_1 ∧ ... ∧ dx_n`.
    pub fn volume(dim: usize) -> Self {
        Form::basis(dim, MultiIndex::full(dim)).expect("full index")
    }

    /// Parses the mini-language form syntax, e.g. `dx2: x1`.
    pub fn parse(dim: usize, src: &str) -> Result<Self> {
        let (grade, pieces) = parse_form_pieces(src, dim)?;
        Form::new(dim, grade, pieces)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coeff(&self, idx: MultiIndex) -> Field {
        self.coeffs.get(&idx).cloned().unwrap_or_else(Field::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (MultiIndex, &Field)> {
        self.coeffs.iter().map(|(&i, f)| (i, f))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest derivative budget over the coefficients.
    pub fn budget(&self) -> Option<usize> {
        self.coeffs.values().filter_map(Field::budget).min()
    }

    fn derived(&self, idx: MultiIndex, degree: &Degree) -> Result<Field> {
        let key = (idx, degree.clone());
        if let Some(f) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let f = self.coeff(idx).derive_degree(degree)?;
        self.cache.lock().expect("cache lock").insert(key, f.clone());
        Ok(f)
    }

    /// `coeff · ∂^m f_I(p)` for one chain term.
    pub fn eval_term(&self, t: &ChainTerm) -> Result<f64> {
        check_dim(self.dim, t.point.dim())?;
        check_grade(self.grade, t.index.grade())?;
        Ok(t.coeff * self.derived(t.index, &t.degree)?.value(t.point.coords()))
    }

    /// `ω(p; α)` at order 0.
    pub fn eval_at(&self, p: &[f64], alpha: &KVector) -> Result<f64> {
        check_dim(self.dim, p.len())?;
        check_grade(self.grade, alpha.grade())?;
        Ok(alpha.iter().map(|(i, c)| c * self.coeff(i).value(p)).sum())
    }

    /// The pairing `⨍_A ω` on a Dirac chain.
    pub fn integrate(&self, a: &DiracChain) -> Result<f64> {
        check_dim(self.dim, a.dim())?;
        check_grade(self.grade, a.grade())?;
        let mut fields: HashMap<(MultiIndex, &Degree), Field> = HashMap::new();
        for t in a.terms() {
            if let std::collections::hash_map::Entry::Vacant(e) = fields.entry((t.index, &t.degree)) {
                e.insert(self.derived(t.index, &t.degree)?);
            }
        }
        let eval = |t: &ChainTerm| t.coeff * fields[&(t.index, &t.degree)].value(t.point.coords());
        let terms = a.terms();
        if terms.len() <= PAR_CHUNK {
            return Ok(terms.iter().map(eval).sum());
        }
        // Fixed chunking keeps the summation order independent of thread count.
        let partial: Vec<f64> = terms.par_chunks(PAR_CHUNK).map(|c| c.iter().map(eval).sum()).collect();
        Ok(partial.iter().sum())
    }

    fn check_shape(&self, other: &Form) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        check_grade(self.grade, other.grade)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, other: &Form, a: f64, b: f64) -> Result<Form> {
        self.check_shape(other)?;
        let pieces = self
            .coeffs
            .iter()
            .map(|(&i, f)| (i, f.scale(a)))
            .chain(other.coeffs.iter().map(|(&i, f)| (i, f.scale(b))));
        Form::new(self.dim, self.grade, pieces)
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.combine(other, 1.0, 1.0)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.combine(other, 1.0, -1.0)
    }

    pub fn scale(&self, c: f64) -> Form {
        let pieces = self.coeffs.iter().map(|(&i, f)| (i, f.scale(c)));
        Form::new(self.dim, self.grade, pieces).expect("same shape")
    }

    /// `f · ω`, dual to multiplication `m_f` on chains.
    pub fn mul_field(&self, f: &Field) -> Form {
        let pieces = self.coeffs.iter().map(|(&i, g)| (i, f.mul(g)));
        Form::new(self.dim, self.grade, pieces).expect("same shape")
    }

    /// Exterior product of forms.
    pub fn wedge(&self, other: &Form) -> Result<Form> {
        check_dim(self.dim, other.dim)?;
        let grade = self.grade + other.grade;
        if grade > self.dim {
            return Err(Error::GradeOverflow { grade, dim: self.dim });
        }
        let mut pieces = Vec::new();
        for (&i, f) in &self.coeffs {
            for (&j, g) in &other.coeffs {
                let s = merge_sign(i, j);
                if s != 0.0 {
                    pieces.push((i.union(j), f.mul(g).scale(s)));
                }
            }
        }
        Form::new(self.dim, grade, pieces)
    }

    /// Exterior derivative `dω = Σ_i dx_i ∧ ∂_i ω`.
    pub fn d(&self) -> Result<Form> {
        if self.grade == self.dim {
            return Err(Error::GradeOverflow { grade: self.grade + 1, dim: self.dim });
        }
        let mut pieces = Vec::new();
        for (&idx, f) in &self.coeffs {
            for axis in 1..=self.dim {
                let e = MultiIndex::single(axis);
                let s = merge_sign(e, idx);
                if s != 0.0 {
                    pieces.push((idx.union(e), f.derive(axis)?.scale(s)));
                }
            }
        }
        Form::new(self.dim, self.grade + 1, pieces)
    }

    /// `(i_V ω)(β) = ω(V ∧ β)`; zero on 0-forms.
    pub fn interior(&self, v: &VectorField) -> Result<Form> {
        check_dim(self.dim, v.dim())?;
        if self.grade == 0 {
            return Ok(Form::zero(self.dim, 0));
        }
        let mut pieces = Vec::new();
        for (&idx, f) in &self.coeffs {
            for axis in idx.axes() {
                let rest = MultiIndex::from_bits(idx.bits() & !MultiIndex::single(axis).bits());
                let s = merge_sign(MultiIndex::single(axis), rest);
                pieces.push((rest, v.component(axis).mul(f).scale(s)));
            }
        }
        Form::new(self.dim, self.grade - 1, pieces)
    }

    /// `(V♭ ∧ ω)(α) = ω(E†_V α)`, dual to retraction.
    pub fn flat_wedge(&self, v: &VectorField) -> Result<Form> {
        check_dim(self.dim, v.dim())?;
        if self.grade == self.dim {
            return Err(Error::GradeOverflow { grade: self.grade + 1, dim: self.dim });
        }
        let mut pieces = Vec::new();
        for (&idx, f) in &self.coeffs {
            for axis in 1..=self.dim {
                let e = MultiIndex::single(axis);
                let s = merge_sign(e, idx);
                if s != 0.0 {
                    pieces.push((idx.union(e), v.component(axis).mul(f).scale(s)));
                }
            }
        }
        Form::new(self.dim, self.grade + 1, pieces)
    }

    /// Lie derivative by Cartan's formula `L_V = i_V d + d i_V`.
    pub fn lie(&self, v: &VectorField) -> Result<Form> {
        check_dim(self.dim, v.dim())?;
        let mut out = Form::zero(self.dim, self.grade);
        if self.grade < self.dim {
            out = out.add(&self.d()?.interior(v)?)?;
        }
        if self.grade > 0 {
            out = out.add(&self.interior(v)?.d()?)?;
        }
        Ok(out)
    }

    /// `⋆ω = ω ∘ ⊥`.
    pub fn star(&self) -> Form {
        let n = self.dim;
        let pieces = MultiIndex::all_of_grade(n, n - self.grade).filter_map(|j| {
            let (i, s) = perp_basis(n, j);
            self.coeffs.get(&i).map(|f| (j, f.scale(s)))
        });
        Form::new(n, n - self.grade, pieces).expect("complement grade")
    }

    /// The codifferential-type operator `⋆ d ⋆`, dual to the coboundary.
    pub fn star_d_star(&self) -> Result<Form> {
        Ok(self.star().d()?.star())
    }

    /// `Δ = d(⋆d⋆) + (⋆d⋆)d`, dual to the geometric Laplacian.
    pub fn laplace(&self) -> Result<Form> {
        let mut out = Form::zero(self.dim, self.grade);
        if self.grade > 0 {
            out = out.add(&self.star_d_star()?.d()?)?;
        }
        if self.grade < self.dim {
            out = out.add(&self.d()?.star_d_star()?)?;
        }
        Ok(out)
    }

    /// `(F^*ω)(p; α) = ω(F(p); F_* α)`.
    pub fn pullback(&self, f: &SmoothMap) -> Result<Form> {
        check_dim(self.dim, f.out_dim())?;
        let k = self.grade;
        if k > f.in_dim() {
            return Ok(Form::zero(f.in_dim(), k.min(f.in_dim())));
        }
        let jac = f.jacobian_fields()?;
        let mut pieces = Vec::new();
        for (&j, g) in &self.coeffs {
            let outer = g.compose(f.components());
            let rows: Vec<usize> = j.axes().map(|a| a - 1).collect();
            for i in MultiIndex::all_of_grade(f.in_dim(), k) {
                let cols: Vec<usize> = i.axes().map(|a| a - 1).collect();
                let det = minor_field(jac, &rows, &cols);
                if !det.is_zero() {
                    pieces.push((i, outer.mul(&det)));
                }
            }
        }
        Form::new(f.in_dim(), k, pieces)
    }
}

/// Leibniz expansion of a symbolic minor.
fn minor_field(jac: &[Vec<Field>], rows: &[usize], cols: &[usize]) -> Field {
    let k = rows.len();
    let mut terms = Vec::new();
    for perm in permutations(k) {
        let sign = permutation_sign(&perm);
        let factors = (0..k).map(|a| jac[rows[a]][cols[perm[a]]].clone());
        let prod = Field::product(factors);
        if !prod.is_zero() {
            terms.push((sign, prod));
        }
    }
    Field::linear(terms)
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn permutation_sign(p: &[usize]) -> f64 {
    let inversions = (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
    parity(inversions)
}

/// A vector field `V = Σ f_i e_i` on `R^n`.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: Vec<Field>,
}

impl VectorField {
    pub fn new(comps: Vec<Field>) -> Self {
        VectorField { comps }
    }

    pub fn constant(v: &[f64]) -> Self {
        VectorField { comps: v.iter().map(|&c| Field::constant(c)).collect() }
    }

    /// One expression per component, in the mini-language.
    pub fn parse(exprs: &[&str]) -> Result<Self> {
        let n = exprs.len();
        Ok(VectorField { comps: exprs.iter().map(|e| parse_field(e, n)).collect::<Result<_>>()? })
    }

    /// The rotation field `(-x2, x1)`.
    pub fn rotation() -> Self {
        VectorField::new(vec![Field::coord(2).scale(-1.0), Field::coord(1)])
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// Component `f_axis` with a 1-based axis.
    pub fn component(&self, axis: usize) -> &Field {
        &self.comps[axis - 1]
    }

    pub fn components(&self) -> &[Field] {
        &self.comps
    }

    pub fn value(&self, p: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|f| f.value(p)).collect()
    }

    /// The constant vector, if every component is constant.
    pub fn as_constant(&self) -> Option<Vec<f64>> {
        self.comps.iter().map(Field::as_const).collect()
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        check_dim(self.dim(), other.dim())?;
        Ok(VectorField::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect()))
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField::new(self.comps.iter().map(|a| a.scale(c)).collect())
    }

    /// Symbolic Jacobian `J[i][j] = ∂_j f_i`.
    pub fn jacobian_fields(&self) -> Result<Vec<Vec<Field>>> {
        let n = self.dim();
        self.comps.iter().map(|f| (1..=n).map(|j| f.derive(j).map(|d| d.expand())).collect()).collect()
    }

    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let j = self.jacobian_fields()?;
        let n = self.dim();
        Ok(DMatrix::from_fn(n, n, |r, c| j[r][c].value(p)))
    }

    /// Lie bracket `[X, Y] = DY·X − DX·Y`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        check_dim(self.dim(), other.dim())?;
        let n = self.dim();
        let (dx, dy) = (self.jacobian_fields()?, other.jacobian_fields()?);
        let comps = (0..n)
            .map(|i| {
                Field::linear((0..n).flat_map(|j| {
                    [
                        (1.0, self.comps[j].mul(&dy[i][j])),
                        (-1.0, other.comps[j].mul(&dx[i][j])),
                    ]
                }))
            })
            .collect();
        Ok(VectorField::new(comps))
    }
}

/// A smooth map `F: R^n → R^m` with symbolic components.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    in_dim: usize,
    comps: Vec<Field>,
    jac: Vec<Vec<Field>>,
    affine: bool,
}

impl SmoothMap {
    /// Builds a map from component fields; the Jacobian is derived symbolically
    /// (or numerically for finite-difference leaves).
    pub fn new(in_dim: usize, comps: Vec<Field>) -> Result<Self> {
        let jac: Vec<Vec<Field>> =
            comps
                .iter()
                .map(|f| (1..=in_dim).map(|j| f.derive(j).map(|d| d.expand())).collect::<Result<_>>())
                .collect::<Result<_>>()?;
        let affine = jac.iter().flatten().all(Field::is_constant);
        Ok(SmoothMap { in_dim, comps, jac, affine })
    }

    /// `x ↦ A x + b`.
    pub fn affine(a: &DMatrix<f64>, b: &[f64]) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        let comps = (0..a.nrows())
            .map(|r| {
                Field::linear(
                    (0..a.ncols())
                        .map(|c| (a[(r, c)], Field::coord(c + 1)))
                        .chain(std::iter::once((b[r], Field::one()))),
                )
            })
            .collect();
        SmoothMap::new(a.ncols(), comps)
    }

    pub fn identity(n: usize) -> Self {
        SmoothMap::affine(&DMatrix::identity(n, n), &vec![0.0; n]).expect("square")
    }

    /// One expression per output component over `x1..x_in_dim`.
    pub fn parse(in_dim: usize, exprs: &[&str]) -> Result<Self> {
        let comps = exprs.iter().map(|e| parse_field(e, in_dim)).collect::<Result<_>>()?;
        SmoothMap::new(in_dim, comps)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Field] {
        &self.comps
    }

    pub fn is_affine(&self) -> bool {
        self.affine
    }

    pub fn jacobian_fields(&self) -> Result<&[Vec<Field>]> {
        Ok(&self.jac)
    }

    pub fn value(&self, p: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|f| f.value(p)).collect()
    }

    /// `DF_p` as an `m × n` matrix.
    pub fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.out_dim(), self.in_dim, |r, c| self.jac[r][c].value(p))
    }
}
