//! Primitive operators on Dirac chains.
//!
//! Constant-vector operators act on the multivector part of each term and
//! leave the degree untouched, since they commute with every `P_w`. Field
//! versions are assembled from them with the multiplication operator `m_f`.

use serde::Serialize;

use crate::chains::{ChainBuilder, Degree, DiracChain, Point};
use crate::error::{check_dim, Error, Result};
use crate::exterior::{merge_sign, parity, perp_basis, KVector, MultiIndex};
use crate::forms::{Field, SmoothMap, VectorField};

/// Shape summary of one operator application.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OperatorReport {
    pub name: String,
    pub in_grade: usize,
    pub out_grade: usize,
    pub in_order: usize,
    pub out_order: usize,
    pub in_terms: usize,
    pub out_terms: usize,
}

impl OperatorReport {
    pub fn of(name: &str, input: &DiracChain, output: &DiracChain) -> Self {
        OperatorReport {
            name: name.to_string(),
            in_grade: input.grade(),
            out_grade: output.grade(),
            in_order: input.order(),
            out_order: output.order(),
            in_terms: input.len(),
            out_terms: output.len(),
        }
    }
}

fn without(idx: MultiIndex, axis: usize) -> MultiIndex {
    MultiIndex::from_bits(idx.bits() & !MultiIndex::single(axis).bits())
}

/// `E_v` for a constant vector: `(p; σ⊗α) ↦ (p; σ⊗v∧α)`.
pub fn extrude_const(v: &[f64], j: &DiracChain) -> Result<DiracChain> {
    let n = j.dim();
    check_dim(n, v.len())?;
    if j.grade() == n {
        return Err(Error::GradeOverflow { grade: n + 1, dim: n });
    }
    let mut out = ChainBuilder::with_capacity(n, j.grade() + 1, j.len() * n);
    for t in j.terms() {
        for (i, &vi) in v.iter().enumerate() {
            let e = MultiIndex::single(i + 1);
            let s = merge_sign(e, t.index);
            if vi != 0.0 && s != 0.0 {
                out.add(t.point.clone(), t.degree.clone(), e.union(t.index), s * vi * t.coeff);
            }
        }
    }
    Ok(out.finish())
}

/// `E_v†` for a constant vector: contraction of the multivector part.
pub fn retract_const(v: &[f64], j: &DiracChain) -> Result<DiracChain> {
    let n = j.dim();
    check_dim(n, v.len())?;
    if j.grade() == 0 {
        return Ok(DiracChain::zero(n, 0));
    }
    let mut out = ChainBuilder::with_capacity(n, j.grade() - 1, j.len() * j.grade());
    for t in j.terms() {
        for (pos, axis) in t.index.axes().enumerate() {
            let vi = v[axis - 1];
            if vi != 0.0 {
                out.add(t.point.clone(), t.degree.clone(), without(t.index, axis), parity(pos) * vi * t.coeff);
            }
        }
    }
    Ok(out.finish())
}

/// `P_v` for a constant vector: `(p; σ⊗α) ↦ (p; (v∘σ)⊗α)`.
pub fn prederiv_const(v: &[f64], j: &DiracChain) -> Result<DiracChain> {
    let n = j.dim();
    check_dim(n, v.len())?;
    let mut out = ChainBuilder::with_capacity(n, j.grade(), j.len() * n);
    for t in j.terms() {
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                out.add(t.point.clone(), t.degree.bumped(i + 1), t.index, vi * t.coeff);
            }
        }
    }
    Ok(out.finish())
}

/// `∂ = Σ_i P_{e_i} E_{e_i}†`. A grade-0 chain has zero boundary, returned
/// as the zero chain of grade 0.
pub fn boundary(j: &DiracChain) -> DiracChain {
    let n = j.dim();
    if j.grade() == 0 {
        return DiracChain::zero(n, 0);
    }
    let mut out = ChainBuilder::with_capacity(n, j.grade() - 1, j.len() * j.grade());
    for t in j.terms() {
        for (pos, axis) in t.index.axes().enumerate() {
            out.add(t.point.clone(), t.degree.bumped(axis), without(t.index, axis), parity(pos) * t.coeff);
        }
    }
    out.finish()
}

/// Directional boundary `∂_v = P_v E_v†`.
pub fn dir_boundary(v: &[f64], j: &DiracChain) -> Result<DiracChain> {
    prederiv_const(v, &retract_const(v, j)?)
}

/// Termwise perpendicular complement `(p; σ⊗α) ↦ (p; σ⊗⊥α)`.
pub fn perp_chain(j: &DiracChain) -> DiracChain {
    let n = j.dim();
    let mut out = ChainBuilder::with_capacity(n, n - j.grade(), j.len());
    for t in j.terms() {
        let (idx, s) = perp_basis(n, t.index);
        out.add(t.point.clone(), t.degree.clone(), idx, s * t.coeff);
    }
    out.finish()
}

/// Geometric coboundary `◊ = ⊥∂⊥`; zero of grade `n` on top-grade chains.
pub fn cobound(j: &DiracChain) -> DiracChain {
    if j.grade() == j.dim() {
        return DiracChain::zero(j.dim(), j.dim());
    }
    perp_chain(&boundary(&perp_chain(j)))
}

/// Geometric Laplacian `□ = ◊∂ + ∂◊`, grade preserving.
pub fn laplace(j: &DiracChain) -> DiracChain {
    let (n, k) = (j.dim(), j.grade());
    let mut out = ChainBuilder::new(n, k);
    if k > 0 {
        out.extend_scaled(&cobound(&boundary(j)), 1.0);
    }
    if k < n {
        out.extend_scaled(&boundary(&cobound(j)), 1.0);
    }
    out.finish()
}

/// Geometric Dirac operator `∂ + ◊`, returned by grade as `(∂J, ◊J)`.
pub fn dirac_op(j: &DiracChain) -> (DiracChain, DiracChain) {
    (boundary(j), cobound(j))
}

/// Multiplication `m_f`. On order-0 terms it scales by `f(p)`; higher
/// orders peel one prederivative at a time, lowest axis first, using
/// `m_f P_i = P_i m_f + m_{∂_i f}`.
pub fn mult(f: &Field, j: &DiracChain) -> Result<DiracChain> {
    if let Some(c) = f.as_const() {
        return Ok(j.scale(c));
    }
    let mut out = ChainBuilder::with_capacity(j.dim(), j.grade(), j.len());
    for t in j.terms() {
        mult_term(f, &t.point, &t.degree, t.index, t.coeff, &mut out)?;
    }
    Ok(out.finish())
}

fn mult_term(f: &Field, p: &Point, deg: &Degree, idx: MultiIndex, c: f64, out: &mut ChainBuilder) -> Result<()> {
    let Some(axis) = deg.first_axis() else {
        out.add(p.clone(), deg.clone(), idx, c * f.value(p.coords()));
        return Ok(());
    };
    if f.is_zero() {
        return Ok(());
    }
    let rest = deg.lowered(axis).expect("first axis is nonzero");
    // P_axis ∘ m_f on the lowered term.
    let mut inner = ChainBuilder::new(p.dim(), idx.grade());
    mult_term(f, p, &rest, idx, c, &mut inner)?;
    for t in inner.finish().terms() {
        out.add(t.point.clone(), t.degree.bumped(axis), t.index, t.coeff);
    }
    mult_term(&f.derive(axis)?, p, &rest, idx, c, out)
}

/// `E_V = Σ_i m_{f_i} E_{e_i}`.
pub fn extrude(v: &VectorField, j: &DiracChain) -> Result<DiracChain> {
    if j.grade() == j.dim() {
        return Err(Error::GradeOverflow { grade: j.dim() + 1, dim: j.dim() });
    }
    by_components(v, j, j.grade() + 1, extrude_const)
}

/// `E_V† = Σ_i m_{f_i} E_{e_i}†`.
pub fn retract(v: &VectorField, j: &DiracChain) -> Result<DiracChain> {
    if j.grade() == 0 {
        return Ok(DiracChain::zero(j.dim(), 0));
    }
    by_components(v, j, j.grade() - 1, retract_const)
}

fn by_components(
    v: &VectorField,
    j: &DiracChain,
    out_grade: usize,
    op: fn(&[f64], &DiracChain) -> Result<DiracChain>,
) -> Result<DiracChain> {
    let n = j.dim();
    check_dim(n, v.dim())?;
    if let Some(c) = v.as_constant() {
        return op(&c, j);
    }
    let mut out = ChainBuilder::new(n, out_grade);
    for (i, f) in v.components().iter().enumerate() {
        if f.is_zero() {
            continue;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.extend_scaled(&mult(f, &op(&e, j)?)?, 1.0);
    }
    Ok(out.finish())
}

/// `P_V = ∂E_V + E_V∂`. The first term vanishes on top-grade chains.
pub fn prederiv(v: &VectorField, j: &DiracChain) -> Result<DiracChain> {
    let n = j.dim();
    check_dim(n, v.dim())?;
    if let Some(c) = v.as_constant() {
        return prederiv_const(&c, j);
    }
    let mut out = ChainBuilder::new(n, j.grade());
    if j.grade() < n {
        out.extend_scaled(&boundary(&extrude(v, j)?), 1.0);
    }
    if j.grade() > 0 {
        out.extend_scaled(&extrude(v, &boundary(j))?, 1.0);
    }
    Ok(out.finish())
}

/// Pushforward `F_*(p; α) = (F(p); DF_p α)`. Higher-order terms are
/// accepted only for affine maps, where `F_* P_v = P_{Av} F_*`.
pub fn pushforward(f: &SmoothMap, j: &DiracChain) -> Result<DiracChain> {
    check_dim(f.in_dim(), j.dim())?;
    let m = f.out_dim();
    if j.grade() > m {
        return Ok(DiracChain::zero(m, j.grade().min(m)));
    }
    if j.order() > 0 && !f.is_affine() {
        return Err(Error::Unsupported(format!(
            "pushforward of an order-{} chain under a nonaffine map",
            j.order()
        )));
    }
    let affine_jac = f.is_affine().then(|| f.jacobian(&vec![0.0; f.in_dim()]));
    let mut out = ChainBuilder::with_capacity(m, j.grade(), j.len());
    for t in j.terms() {
        let p = t.point.coords();
        let jac = match &affine_jac {
            Some(a) => a.clone(),
            None => f.jacobian(p),
        };
        let alpha = KVector::from_terms(j.dim(), j.grade(), [(t.index, t.coeff)])?.linear_map(&jac)?;
        let q = Point::new(&f.value(p));
        let mut b = ChainBuilder::new(m, j.grade());
        for (idx, c) in alpha.iter() {
            b.add(q.clone(), Degree::zero(m), idx, c);
        }
        let mut image = b.finish();
        for (axis, &count) in t.degree.slots().iter().enumerate() {
            let col: Vec<f64> = jac.column(axis).iter().copied().collect();
            for _ in 0..count {
                image = prederiv_const(&col, &image)?;
            }
        }
        out.extend_scaled(&image, 1.0);
    }
    Ok(out.finish())
}

/// Operators with matching shapes: `[A, B] = AB − BA`.
pub fn commutator(
    a: impl Fn(&DiracChain) -> Result<DiracChain>,
    b: impl Fn(&DiracChain) -> Result<DiracChain>,
    j: &DiracChain,
) -> Result<DiracChain> {
    a(&b(j)?)?.sub(&b(&a(j)?)?)
}

/// `{A, B} = AB + BA`.
pub fn anticommutator(
    a: impl Fn(&DiracChain) -> Result<DiracChain>,
    b: impl Fn(&DiracChain) -> Result<DiracChain>,
    j: &DiracChain,
) -> Result<DiracChain> {
    a(&b(j)?)?.add(&b(&a(j)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Form;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, axis: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[axis - 1] = 1.0;
        v
    }

    fn el(p: &[f64], axes: &[usize]) -> DiracChain {
        DiracChain::term(p, &vec![0; p.len()], MultiIndex::new(axes).unwrap(), 1.0).unwrap()
    }

    fn term(p: &[f64], degree: &[u8], axes: &[usize], c: f64) -> DiracChain {
        DiracChain::term(p, degree, MultiIndex::new(axes).unwrap(), c).unwrap()
    }

    #[test]
    fn constant_examples() {
        let p = [0.25, -0.5, 1.0];
        assert_eq!(extrude_const(&e(3, 1), &el(&p, &[2])).unwrap(), el(&p, &[1, 2]));
        assert!(extrude_const(&e(3, 1), &el(&p, &[1])).unwrap().is_zero());
        assert_eq!(retract_const(&e(3, 1), &el(&p, &[1, 2])).unwrap(), el(&p, &[2]));
        let r = retract_const(&[1.0, 1.0, 0.0], &el(&p, &[1, 2])).unwrap();
        assert_eq!(r, el(&p, &[2]).sub(&el(&p, &[1])).unwrap());
        assert!(retract_const(&e(3, 3), &el(&p, &[1, 2])).unwrap().is_zero());
        let q = [0.5, 0.5];
        assert_eq!(prederiv_const(&e(2, 1), &el(&q, &[])).unwrap(), term(&q, &[1, 0], &[], 1.0));
    }

    #[test]
    fn field_extrusion_evaluates_at_point() {
        let v = VectorField::parse(&["x1", "0"]).unwrap();
        assert!(extrude(&v, &el(&[0.0, 0.0], &[2])).unwrap().is_zero());
        let w = extrude(&v, &el(&[0.5, 0.0], &[2])).unwrap();
        assert_eq!(w, el(&[0.5, 0.0], &[1, 2]).scale(0.5));
    }

    #[test]
    fn boundary_examples() {
        let p = [0.0, 0.0];
        assert_eq!(boundary(&el(&p, &[1])), term(&p, &[1, 0], &[], 1.0));
        let b = boundary(&el(&p, &[1, 2]));
        let expected = term(&p, &[1, 0], &[2], 1.0).sub(&term(&p, &[0, 1], &[1], 1.0)).unwrap();
        assert_eq!(b, expected);
        assert!(boundary(&boundary(&el(&p, &[1, 2]))).is_zero());
        assert!(boundary(&el(&p, &[])).is_zero());
    }

    #[test]
    fn directional_boundary_examples() {
        let p = [0.0, 0.0];
        assert_eq!(dir_boundary(&e(2, 1), &el(&p, &[1])).unwrap(), term(&p, &[1, 0], &[], 1.0));
        assert_eq!(dir_boundary(&e(2, 2), &el(&p, &[1, 2])).unwrap(), term(&p, &[0, 1], &[1], -1.0));
        assert!(dir_boundary(&e(3, 3), &el(&[0.0; 3], &[1])).unwrap().is_zero());
    }

    #[test]
    fn perp_examples() {
        let p = [0.5, 0.5];
        assert_eq!(perp_chain(&el(&p, &[])), el(&p, &[1, 2]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for k in 0..=n {
                let j = sample::chain(&mut rng, n, k, 2, 6);
                let s = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(perp_chain(&perp_chain(&j)), j.scale(s));
                let pj = perp_chain(&j);
                assert_eq!(pj.len(), j.len());
                assert_eq!(pj.l1(), j.l1());
            }
        }
    }

    #[test]
    fn laplacian_preserves_grade() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            for k in 0..=n {
                let j = sample::chain(&mut rng, n, k, 1, 4);
                assert_eq!(laplace(&j).grade(), k);
            }
        }
    }

    #[test]
    fn mult_examples() {
        let j = el(&[0.25, 0.5], &[1]);
        assert_eq!(mult(&Field::one(), &j).unwrap(), j);
        let f = crate::forms::parse_field("x1 + 2*x2", 2).unwrap();
        assert_eq!(mult(&f, &j).unwrap(), j.scale(1.25));
        let dip = term(&[0.0], &[1], &[], 1.0);
        assert_eq!(mult(&Field::coord(1), &dip).unwrap(), el(&[0.0], &[]));
    }

    /// `m_f (p; m⊗α) = Σ_{a ≤ m} C(m, a) ∂^{m−a} f(p) (p; a⊗α)`.
    fn mult_leibniz(f: &Field, j: &DiracChain) -> DiracChain {
        let mut b = ChainBuilder::new(j.dim(), j.grade());
        for t in j.terms() {
            for (a, w) in t.degree.sub_degrees() {
                let df = f.partial(&t.degree.minus(&a), t.point.coords()).unwrap();
                b.add(t.point.clone(), a, t.index, w * df * t.coeff);
            }
        }
        b.finish()
    }

    #[test]
    fn mult_matches_leibniz_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = 1 + (rand::RngExt::random_range(&mut rng, 0..4));
            let k = rand::RngExt::random_range(&mut rng, 0..=n);
            let f = sample::polynomial(&mut rng, n, 4, 4);
            let j = sample::chain(&mut rng, n, k, 3, 5);
            let diff = mult(&f, &j).unwrap().sub(&mult_leibniz(&f, &j)).unwrap();
            assert!(diff.max_abs() <= 1e-12 * (1.0 + j.max_abs()), "{diff:?}");
        }
    }

    #[test]
    fn mult_boundary_commutator() {
        // [m_f, ∂] = Σ_i (∂_i f) E_{e_i}†, read as Σ_i m_{∂_i f} E_{e_i}†.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = 1 + rand::RngExt::random_range(&mut rng, 0..3);
            let k = 1 + rand::RngExt::random_range(&mut rng, 0..n);
            let f = sample::polynomial(&mut rng, n, 3, 3);
            let j = sample::chain(&mut rng, n, k, 2, 4);
            let lhs = mult(&f, &boundary(&j)).unwrap().sub(&boundary(&mult(&f, &j).unwrap())).unwrap();
            let mut rhs = DiracChain::zero(n, k - 1);
            for i in 1..=n {
                rhs = rhs.add(&mult(&f.derive(i).unwrap(), &retract_const(&e(n, i), &j).unwrap()).unwrap()).unwrap();
            }
            assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn pushforward_examples() {
        let j = el(&[0.5, 0.25], &[1, 2]);
        assert_eq!(pushforward(&SmoothMap::identity(2), &j).unwrap(), j);
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let f = SmoothMap::affine(&m, &[0.0, 0.0]).unwrap();
        assert_eq!(pushforward(&f, &j).unwrap(), el(&[1.25, 0.75], &[1, 2]).scale(6.0));
        let g = SmoothMap::parse(2, &["x1^2", "x2"]).unwrap();
        let pt = el(&[0.5, 0.25], &[]).scale(3.0);
        assert_eq!(pushforward(&g, &pt).unwrap(), el(&[0.25, 0.25], &[]).scale(3.0));
        let dip = term(&[0.5, 0.0], &[1, 0], &[], 1.0);
        assert!(matches!(pushforward(&g, &dip), Err(Error::Unsupported(_))));
    }

    #[test]
    fn affine_pushforward_commutes_with_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = nalgebra::DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -1.0, 2.0, 0.25, 0.0]);
        let f = SmoothMap::affine(&m, &[0.5, 0.0, -0.25]).unwrap();
        for _ in 0..50 {
            let j = sample::chain(&mut rng, 2, 2, 2, 4);
            let a = boundary(&pushforward(&f, &j).unwrap());
            let b = pushforward(&f, &boundary(&j)).unwrap();
            assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn duality_with_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..60 {
            let n = 1 + rand::RngExt::random_range(&mut rng, 0..3);
            let k = rand::RngExt::random_range(&mut rng, 0..=n);
            let j = sample::chain(&mut rng, n, k, 1, 4);
            let v = sample::vector_field(&mut rng, n, 2);
            let f = sample::polynomial(&mut rng, n, 2, 3);
            let w = sample::form(&mut rng, n, k, 3);
            let pair = |c: &DiracChain, w: &Form| w.integrate(c).unwrap();
            if k < n {
                let w1 = sample::form(&mut rng, n, k + 1, 3);
                assert!(rel(pair(&extrude(&v, &j).unwrap(), &w1), pair(&j, &w1.interior(&v).unwrap())) < 1e-10);
                let j1 = sample::chain(&mut rng, n, k + 1, 1, 4);
                assert!(rel(pair(&boundary(&j1), &w), pair(&j1, &w.d().unwrap())) < 1e-10);
            }
            if k > 0 {
                let w0 = sample::form(&mut rng, n, k - 1, 3);
                assert!(rel(pair(&retract(&v, &j).unwrap(), &w0), pair(&j, &w0.flat_wedge(&v).unwrap())) < 1e-10);
            }
            assert!(rel(pair(&prederiv(&v, &j).unwrap(), &w), pair(&j, &w.lie(&v).unwrap())) < 1e-10);
            assert!(rel(pair(&mult(&f, &j).unwrap(), &w), pair(&j, &w.mul_field(&f))) < 1e-10);
            let wp = sample::form(&mut rng, n, n - k, 2);
            assert!(rel(pair(&perp_chain(&j), &wp), pair(&j, &wp.star())) < 1e-10);
        }
    }

    #[test]
    fn field_commutators() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = 2 + rand::RngExt::random_range(&mut rng, 0..2);
            let k = rand::RngExt::random_range(&mut rng, 0..n);
            let j = sample::chain(&mut rng, n, k, 0, 3);
            let v1 = sample::vector_field(&mut rng, n, 2);
            let v2 = sample::vector_field(&mut rng, n, 2);
            let b12 = v1.bracket(&v2).unwrap();
            let ce = commutator(|c| extrude(&v2, c), |c| prederiv(&v1, c), &j).unwrap();
            let scale = 1.0 + ce.max_abs();
            assert!(ce.sub(&extrude(&b12, &j).unwrap()).unwrap().max_abs() < 1e-9 * scale);
            // The prederivatives compose contravariantly: [P_V1, P_V2] = P_[V2,V1].
            let cp = commutator(|c| prederiv(&v1, c), |c| prederiv(&v2, c), &j).unwrap();
            let b21 = v2.bracket(&v1).unwrap();
            assert!(cp.sub(&prederiv(&b21, &j).unwrap()).unwrap().max_abs() < 1e-9 * (1.0 + cp.max_abs()));
        }
    }

    #[test]
    fn retraction_commutator_for_killing_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let v1 = VectorField::rotation();
        for _ in 0..20 {
            let j = sample::chain(&mut rng, 2, 2, 0, 3);
            let v2 = sample::vector_field(&mut rng, 2, 2);
            let c = commutator(|c| retract(&v2, c), |c| prederiv(&v1, c), &j).unwrap();
            let r = retract(&v1.bracket(&v2).unwrap(), &j).unwrap();
            assert!(c.sub(&r).unwrap().max_abs() < 1e-9 * (1.0 + c.max_abs()));
        }
    }
}
