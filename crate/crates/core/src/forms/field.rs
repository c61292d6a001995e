//! Scalar fields with exact symbolic partial derivatives.
//!
//! A [`Field`] is an expression tree. Leaves are coordinates, constants or
//! external [`Oracle`]s that report their own mixed partials. Derivatives are
//! new trees, so derived forms stay exact whenever their leaves are.

use std::fmt;
use std::sync::{Arc, OnceLock};

use smallvec::SmallVec;

use crate::chains::Degree;
use crate::error::{Error, Result};

/// A source of mixed partial derivatives `∂^m f(p)`.
pub trait Oracle: Send + Sync {
    /// Ambient dimension of the domain.
    fn dim(&self) -> usize;
    /// `∂^m f(p)` for a degree vector `m`.
    fn partial(&self, m: &Degree, p: &[f64]) -> f64;
    /// Largest total derivative order available, `None` when unlimited.
    fn budget(&self) -> Option<usize>;
    fn label(&self) -> String {
        "oracle".into()
    }
}

/// Central-difference settings for [`FiniteDiff`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FdConfig {
    /// Base step, scaled by `max(1, |p|)`.
    pub h: f64,
    /// Factor applied to the step at each additional nested derivative.
    pub growth: f64,
    /// Maximal total derivative order.
    pub budget: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { h: 1e-5, growth: 4.0, budget: 3 }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !(self.growth >= 1.0) {
            return Err(Error::Invalid(format!("finite-difference config {self:?}")));
        }
        Ok(())
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type PartialFn = dyn Fn(&Degree, &[f64]) -> f64 + Send + Sync;

/// Nested second-order central differences of a value callback.
#[derive(Clone)]
pub struct FiniteDiff {
    dim: usize,
    f: Arc<ValueFn>,
    cfg: FdConfig,
}

impl FiniteDiff {
    pub fn new(dim: usize, cfg: FdConfig, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        cfg.validate()?;
        Ok(FiniteDiff { dim, f: Arc::new(f), cfg })
    }

    fn nested(&self, m: &mut [u8], p: &mut [f64], h: f64) -> f64 {
        match m.iter().position(|&d| d > 0) {
            None => (self.f)(p),
            Some(i) => {
                m[i] -= 1;
                let x = p[i];
                p[i] = x + h;
                let fp = self.nested(m, p, h * self.cfg.growth);
                p[i] = x - h;
                let fm = self.nested(m, p, h * self.cfg.growth);
                p[i] = x;
                m[i] += 1;
                (fp - fm) / (2.0 * h)
            }
        }
    }
}

impl Oracle for FiniteDiff {
    fn dim(&self) -> usize {
        self.dim
    }

    fn partial(&self, m: &Degree, p: &[f64]) -> f64 {
        let scale = p.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        let mut m: SmallVec<[u8; 4]> = m.slots().iter().copied().collect();
        let mut q: SmallVec<[f64; 4]> = p.iter().copied().collect();
        self.nested(&mut m, &mut q, self.cfg.h * scale)
    }

    fn budget(&self) -> Option<usize> {
        Some(self.cfg.budget)
    }

    fn label(&self) -> String {
        format!("fd(h={:e})", self.cfg.h)
    }
}

/// A user callback returning mixed partials directly.
#[derive(Clone)]
pub struct Analytic {
    dim: usize,
    budget: Option<usize>,
    f: Arc<PartialFn>,
}

impl Analytic {
    pub fn new(
        dim: usize,
        budget: Option<usize>,
        f: impl Fn(&Degree, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Analytic { dim, budget, f: Arc::new(f) }
    }
}

impl Oracle for Analytic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn partial(&self, m: &Degree, p: &[f64]) -> f64 {
        (self.f)(m, p)
    }

    fn budget(&self) -> Option<usize> {
        self.budget
    }

    fn label(&self) -> String {
        "analytic".into()
    }
}

#[derive(Clone)]
enum Node {
    Const(f64),
    /// Zero-based coordinate.
    Var(usize),
    Sum(Vec<(f64, Field)>),
    Prod(Vec<Field>),
    Powi(Field, i32),
    Sin(Field),
    Cos(Field),
    Exp(Field),
    Leaf { oracle: Arc<dyn Oracle>, shift: Degree },
    /// `outer(inner_1(p), ..., inner_m(p))`.
    Compose { outer: Field, inner: Arc<[Field]> },
    /// Lazy `∂^m base`; keeps mixed partials of one base canonical so that
    /// `∂_i∂_j f − ∂_j∂_i f` folds to zero.
    Partial { base: Field, m: Slots, expanded: OnceLock<Field> },
}

type Slots = SmallVec<[u8; 4]>;

/// Identity used to merge like terms in linear combinations.
#[derive(PartialEq)]
enum TermKey {
    Ptr(usize),
    Partial(usize, Slots),
    Leaf(usize, Degree),
}

/// A real scalar field on some `R^n`.
#[derive(Clone)]
pub struct Field(Arc<Node>);

impl Field {
    fn node(n: Node) -> Field {
        Field(Arc::new(n))
    }

    pub fn constant(c: f64) -> Field {
        Field::node(Node::Const(c))
    }

    pub fn zero() -> Field {
        Field::constant(0.0)
    }

    pub fn one() -> Field {
        Field::constant(1.0)
    }

    /// The coordinate `x_axis` with a 1-based axis.
    pub fn coord(axis: usize) -> Field {
        assert!(axis >= 1, "axes are 1-based");
        Field::node(Node::Var(axis - 1))
    }

    pub fn oracle(o: impl Oracle + 'static) -> Field {
        let n = o.dim();
        Field::node(Node::Leaf { oracle: Arc::new(o), shift: Degree::zero(n) })
    }

    /// A field known only through values, differentiated numerically.
    pub fn finite_diff(
        dim: usize,
        cfg: FdConfig,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Field> {
        Ok(Field::oracle(FiniteDiff::new(dim, cfg, f)?))
    }

    /// A field with user-supplied partials.
    pub fn analytic(
        dim: usize,
        budget: Option<usize>,
        f: impl Fn(&Degree, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Field {
        Field::oracle(Analytic::new(dim, budget, f))
    }

    /// A field with values only; it cannot be differentiated.
    pub fn values(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Field {
        Field::analytic(dim, Some(0), move |_, p| f(p))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    /// `Σ c_i f_i` with constant folding.
    pub fn linear(terms: impl IntoIterator<Item = (f64, Field)>) -> Field {
        let mut konst = 0.0;
        let mut out: Vec<(f64, Field)> = Vec::new();
        for (c, f) in terms {
            if c == 0.0 {
                continue;
            }
            match &*f.0 {
                Node::Const(k) => konst += c * k,
                Node::Sum(inner) => {
                    for (ci, fi) in inner {
                        match fi.as_const() {
                            Some(k) => konst += c * ci * k,
                            None => out.push((c * ci, fi.clone())),
                        }
                    }
                }
                _ => out.push((c, f)),
            }
        }
        let mut merged: Vec<(f64, Field)> = Vec::with_capacity(out.len());
        let mut keys: Vec<TermKey> = Vec::with_capacity(out.len());
        for (c, f) in out {
            let k = f.term_key();
            match keys.iter().position(|x| *x == k) {
                Some(pos) => merged[pos].0 += c,
                None => {
                    keys.push(k);
                    merged.push((c, f));
                }
            }
        }
        let mut out: Vec<(f64, Field)> = merged.into_iter().filter(|(c, _)| *c != 0.0).collect();
        if konst != 0.0 {
            out.push((1.0, Field::constant(konst)));
        }
        match out.len() {
            0 => Field::zero(),
            1 if out[0].0 == 1.0 => out.pop().expect("one term").1,
            _ => Field::node(Node::Sum(out)),
        }
    }

    fn term_key(&self) -> TermKey {
        match &*self.0 {
            Node::Partial { base, m, .. } => TermKey::Partial(Arc::as_ptr(&base.0) as usize, m.clone()),
            Node::Leaf { oracle, shift } => {
                TermKey::Leaf(Arc::as_ptr(oracle) as *const () as usize, shift.clone())
            }
            _ => TermKey::Ptr(Arc::as_ptr(&self.0) as usize),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        Field::linear([(1.0, self.clone()), (1.0, other.clone())])
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field::linear([(1.0, self.clone()), (-1.0, other.clone())])
    }

    pub fn scale(&self, c: f64) -> Field {
        Field::linear([(c, self.clone())])
    }

    /// Product with constant folding.
    pub fn product(factors: impl IntoIterator<Item = Field>) -> Field {
        let mut konst = 1.0;
        let mut out = Vec::new();
        for f in factors {
            match &*f.0 {
                Node::Const(k) => konst *= k,
                Node::Prod(inner) => out.extend(inner.iter().cloned()),
                _ => out.push(f),
            }
        }
        if konst == 0.0 {
            return Field::zero();
        }
        let prod = match out.len() {
            0 => return Field::constant(konst),
            1 => out.pop().expect("one factor"),
            _ => Field::node(Node::Prod(out)),
        };
        if konst == 1.0 {
            prod
        } else {
            Field::linear([(konst, prod)])
        }
    }

    pub fn mul(&self, other: &Field) -> Field {
        Field::product([self.clone(), other.clone()])
    }

    pub fn powi(&self, k: i32) -> Field {
        match (k, self.as_const()) {
            (0, _) => Field::one(),
            (1, _) => self.clone(),
            (_, Some(c)) => Field::constant(c.powi(k)),
            _ => Field::node(Node::Powi(self.clone(), k)),
        }
    }

    pub fn sin(&self) -> Field {
        match self.as_const() {
            Some(c) => Field::constant(c.sin()),
            None => Field::node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Field {
        match self.as_const() {
            Some(c) => Field::constant(c.cos()),
            None => Field::node(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Field {
        match self.as_const() {
            Some(c) => Field::constant(c.exp()),
            None => Field::node(Node::Exp(self.clone())),
        }
    }

    /// `self ∘ (inner_1, ..., inner_m)`.
    pub fn compose(&self, inner: &[Field]) -> Field {
        if let Some(c) = self.as_const() {
            return Field::constant(c);
        }
        Field::node(Node::Compose { outer: self.clone(), inner: inner.into() })
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(i) => p[*i],
            Node::Sum(ts) => ts.iter().map(|(c, f)| c * f.value(p)).sum(),
            Node::Prod(fs) => fs.iter().map(|f| f.value(p)).product(),
            Node::Powi(f, k) => f.value(p).powi(*k),
            Node::Sin(f) => f.value(p).sin(),
            Node::Cos(f) => f.value(p).cos(),
            Node::Exp(f) => f.value(p).exp(),
            Node::Leaf { oracle, shift } => oracle.partial(shift, p),
            Node::Compose { outer, inner } => {
                let q: SmallVec<[f64; 4]> = inner.iter().map(|f| f.value(p)).collect();
                outer.value(&q)
            }
            Node::Partial { .. } => self.expanded().value(p),
        }
    }

    /// Explicit tree of a lazy partial, built once.
    fn expanded(&self) -> &Field {
        match &*self.0 {
            Node::Partial { base, m, expanded } => expanded.get_or_init(|| {
                let axis = m.iter().position(|&d| d > 0).expect("nonzero partial") + 1;
                let first = base.explicit_derive(axis).expect("budget checked when the partial was built");
                let mut rest = m.clone();
                rest[axis - 1] -= 1;
                let mut out = first;
                for (i, &d) in rest.iter().enumerate() {
                    for _ in 0..d {
                        out = out.derive(i + 1).expect("budget checked when the partial was built");
                    }
                }
                out
            }),
            _ => self,
        }
    }

    /// Replaces lazy partials at the root by their explicit trees.
    pub fn expand(&self) -> Field {
        match &*self.0 {
            Node::Partial { .. } => self.expanded().expand(),
            _ => self.clone(),
        }
    }

    /// Remaining derivative budget, `None` when unlimited.
    pub fn budget(&self) -> Option<usize> {
        fn min(a: Option<usize>, b: Option<usize>) -> Option<usize> {
            match (a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            }
        }
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => None,
            Node::Sum(ts) => ts.iter().fold(None, |acc, (_, f)| min(acc, f.budget())),
            Node::Prod(fs) => fs.iter().fold(None, |acc, f| min(acc, f.budget())),
            Node::Powi(f, _) | Node::Sin(f) | Node::Cos(f) | Node::Exp(f) => f.budget(),
            Node::Leaf { oracle, shift } => oracle.budget().map(|b| b.saturating_sub(shift.order())),
            Node::Compose { outer, inner } => inner.iter().fold(outer.budget(), |acc, f| min(acc, f.budget())),
            Node::Partial { base, m, .. } => {
                base.budget().map(|b| b.saturating_sub(m.iter().map(|&d| d as usize).sum()))
            }
        }
    }

    /// Whether no coordinate or oracle appears in the tree.
    pub fn is_constant(&self) -> bool {
        match &*self.0 {
            Node::Const(_) => true,
            Node::Var(_) | Node::Leaf { .. } => false,
            Node::Sum(ts) => ts.iter().all(|(_, f)| f.is_constant()),
            Node::Prod(fs) => fs.iter().all(Field::is_constant),
            Node::Powi(f, _) | Node::Sin(f) | Node::Cos(f) | Node::Exp(f) => f.is_constant(),
            Node::Compose { outer, inner } => outer.is_constant() || inner.iter().all(Field::is_constant),
            Node::Partial { .. } => self.expanded().is_constant(),
        }
    }

    /// `∂f/∂x_axis` with a 1-based axis.
    pub fn derive(&self, axis: usize) -> Result<Field> {
        let need = |order: usize, budget: Option<usize>| match budget {
            Some(b) if order > b => Err(Error::DepthExceeded { required: order, available: b }),
            _ => Ok(()),
        };
        match &*self.0 {
            Node::Const(_) | Node::Var(_) | Node::Leaf { .. } => self.explicit_derive(axis),
            Node::Partial { base, m, .. } => {
                let mut m = m.clone();
                if m.len() < axis {
                    m.resize(axis, 0);
                }
                m[axis - 1] += 1;
                need(m.iter().map(|&d| d as usize).sum(), base.budget())?;
                Ok(Field::node(Node::Partial { base: base.clone(), m, expanded: OnceLock::new() }))
            }
            _ => {
                need(1, self.budget())?;
                let mut m: Slots = SmallVec::from_elem(0, axis);
                m[axis - 1] = 1;
                Ok(Field::node(Node::Partial { base: self.clone(), m, expanded: OnceLock::new() }))
            }
        }
    }

    fn explicit_derive(&self, axis: usize) -> Result<Field> {
        let i = axis - 1;
        Ok(match &*self.0 {
            Node::Const(_) => Field::zero(),
            Node::Var(j) => {
                if *j == i {
                    Field::one()
                } else {
                    Field::zero()
                }
            }
            Node::Sum(ts) => {
                let mut out = Vec::with_capacity(ts.len());
                for (c, f) in ts {
                    out.push((*c, f.derive(axis)?));
                }
                Field::linear(out)
            }
            Node::Prod(fs) => {
                let mut out = Vec::with_capacity(fs.len());
                for k in 0..fs.len() {
                    let dk = fs[k].derive(axis)?;
                    if dk.is_zero() {
                        continue;
                    }
                    let factors = fs.iter().enumerate().map(|(j, f)| if j == k { dk.clone() } else { f.clone() });
                    out.push((1.0, Field::product(factors)));
                }
                Field::linear(out)
            }
            Node::Powi(f, k) => {
                let df = f.derive(axis)?;
                Field::product([Field::constant(*k as f64), f.powi(k - 1), df])
            }
            Node::Sin(f) => f.cos().mul(&f.derive(axis)?),
            Node::Cos(f) => f.sin().mul(&f.derive(axis)?).scale(-1.0),
            Node::Exp(f) => self.mul(&f.derive(axis)?),
            Node::Leaf { oracle, shift } => {
                if axis > oracle.dim() {
                    return Ok(Field::zero());
                }
                let next = shift.bumped(axis);
                if let Some(b) = oracle.budget() {
                    if next.order() > b {
                        return Err(Error::DepthExceeded { required: next.order(), available: b });
                    }
                }
                Field::node(Node::Leaf { oracle: oracle.clone(), shift: next })
            }
            Node::Compose { outer, inner } => {
                let mut out = Vec::new();
                for (j, g) in inner.iter().enumerate() {
                    let dg = g.derive(axis)?;
                    if dg.is_zero() {
                        continue;
                    }
                    let df = outer.derive(j + 1)?;
                    if df.is_zero() {
                        continue;
                    }
                    out.push((1.0, df.compose(inner).mul(&dg)));
                }
                Field::linear(out)
            }
            Node::Partial { .. } => self.derive(axis)?,
        })
    }

    /// `∂^m f` differentiating the lowest axis first.
    pub fn derive_degree(&self, m: &Degree) -> Result<Field> {
        if let Some(b) = self.budget() {
            if m.order() > b {
                return Err(Error::DepthExceeded { required: m.order(), available: b });
            }
        }
        let mut f = self.clone();
        for (i, &d) in m.slots().iter().enumerate() {
            for _ in 0..d {
                f = f.derive(i + 1)?;
            }
        }
        Ok(f)
    }

    /// `∂^m f(p)`.
    pub fn partial(&self, m: &Degree, p: &[f64]) -> Result<f64> {
        Ok(self.derive_degree(m)?.value(p))
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Sum(ts) => {
                f.write_str("(")?;
                for (k, (c, t)) in ts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    if *c == 1.0 {
                        write!(f, "{t:?}")?;
                    } else {
                        write!(f, "{c}*{t:?}")?;
                    }
                }
                f.write_str(")")
            }
            Node::Prod(fs) => {
                for (k, t) in fs.iter().enumerate() {
                    if k > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{t:?}")?;
                }
                Ok(())
            }
            Node::Powi(t, k) => write!(f, "{t:?}^{k}"),
            Node::Sin(t) => write!(f, "sin({t:?})"),
            Node::Cos(t) => write!(f, "cos({t:?})"),
            Node::Exp(t) => write!(f, "exp({t:?})"),
            Node::Leaf { oracle, shift } => write!(f, "{}∂{:?}", oracle.label(), shift),
            Node::Compose { outer, inner } => write!(f, "({outer:?})∘{inner:?}"),
            Node::Partial { base, m, .. } => write!(f, "∂{:?}({base:?})", m.as_slice()),
        }
    }
}

impl From<f64> for Field {
    fn from(c: f64) -> Field {
        Field::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Field {
        Field::coord(i)
    }

    #[test]
    fn symbolic_derivatives() {
        // f = x1^2 * x2 + sin(x1)
        let f = x(1).powi(2).mul(&x(2)).add(&x(1).sin());
        let p = [0.3, -1.2];
        let fx = f.partial(&Degree::new(&[1, 0]), &p).unwrap();
        assert!((fx - (2.0 * p[0] * p[1] + p[0].cos())).abs() < 1e-15);
        let fxy = f.partial(&Degree::new(&[1, 1]), &p).unwrap();
        assert!((fxy - 2.0 * p[0]).abs() < 1e-15);
        let fxxx = f.partial(&Degree::new(&[3, 0]), &p).unwrap();
        assert!((fxxx + p[0].cos()).abs() < 1e-15);
        assert!(f.partial(&Degree::new(&[0, 2]), &p).unwrap().abs() < 1e-15);
    }

    #[test]
    fn exp_and_cos_chain_rule() {
        let f = x(1).mul(&x(2)).exp().add(&x(2).cos());
        let p = [0.5, 0.25];
        let fy = f.partial(&Degree::new(&[0, 1]), &p).unwrap();
        assert!((fy - (p[0] * (p[0] * p[1]).exp() - p[1].sin())).abs() < 1e-14);
    }

    #[test]
    fn mixed_partials_commute_on_trees() {
        let f = x(1).powi(3).mul(&x(2).sin()).add(&x(1).mul(&x(2)).exp());
        let a = f.derive(1).unwrap().derive(2).unwrap().value(&[0.4, 0.7]);
        let b = f.derive(2).unwrap().derive(1).unwrap().value(&[0.4, 0.7]);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn compose_chain_rule() {
        // g(u, v) = u*v, inner = (x1^2, sin x1)
        let g = x(1).mul(&x(2));
        let h = g.compose(&[x(1).powi(2), x(1).sin()]);
        let t = 0.8f64;
        let dh = h.partial(&Degree::new(&[1]), &[t]).unwrap();
        assert!((dh - (2.0 * t * t.sin() + t * t * t.cos())).abs() < 1e-14);
        let d2 = h.partial(&Degree::new(&[2]), &[t]).unwrap();
        let expect = 2.0 * t.sin() + 4.0 * t * t.cos() - t * t * t.sin();
        assert!((d2 - expect).abs() < 1e-13);
    }

    #[test]
    fn finite_difference_budget_is_enforced() {
        let f = Field::finite_diff(2, FdConfig::default(), |p| p[0] * p[0] * p[1]).unwrap();
        assert_eq!(f.budget(), Some(3));
        let fx = f.partial(&Degree::new(&[1, 0]), &[0.5, 2.0]).unwrap();
        assert!((fx - 2.0).abs() < 1e-8);
        let err = f.partial(&Degree::new(&[2, 2]), &[0.5, 2.0]).unwrap_err();
        assert_eq!(err, Error::DepthExceeded { required: 4, available: 3 });
        let v = Field::values(1, |p| p[0].abs());
        assert!(v.derive(1).is_err());
    }

    #[test]
    fn finite_difference_is_second_order() {
        // Error against the exact derivative shrinks ~4× when h halves.
        let err = |h: f64| {
            let cfg = FdConfig { h, ..FdConfig::default() };
            let f = Field::finite_diff(1, cfg, |p| p[0].sin() * p[0].exp()).unwrap();
            (f.partial(&Degree::new(&[1]), &[0.0]).unwrap() - 1.0).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "observed order {order}");
    }
}
