//! Cartesian wedge product `J ×̂ K` of chains in `R^{n1}` and `R^{n2}`.

use nalgebra::DMatrix;

use crate::chains::{ChainBuilder, DiracChain};
use crate::error::Result;
use crate::forms::{Form, SmoothMap};

/// `(p; σ⊗α) ×̂ (q; τ⊗β) = ((p, q); (σ∘τ) ⊗ ι₁α ∧ ι₂β)`.
///
/// Second-factor axes are shifted past the first block, so the wedge of
/// indices is a plain union with no reordering sign.
pub fn cartesian_wedge(j: &DiracChain, k: &DiracChain) -> DiracChain {
    let n1 = j.dim();
    let mut out = ChainBuilder::with_capacity(n1 + k.dim(), j.grade() + k.grade(), j.len() * k.len());
    for a in j.terms() {
        for b in k.terms() {
            out.add(
                a.point.concat(&b.point),
                a.degree.concat(&b.degree),
                a.index.union(b.index.shifted(n1)),
                a.coeff * b.coeff,
            );
        }
    }
    out.finish()
}

/// Projection of `R^{n1+n2}` onto the first (`first = true`) or second
/// factor, as an affine map.
pub fn projection(n1: usize, n2: usize, first: bool) -> SmoothMap {
    let (rows, offset) = if first { (n1, 0) } else { (n2, n1) };
    let mut m = DMatrix::zeros(rows, n1 + n2);
    for i in 0..rows {
        m[(i, offset + i)] = 1.0;
    }
    SmoothMap::affine(&m, &vec![0.0; rows]).expect("projection shape")
}

/// The product form `π₁*ω ∧ π₂*η` on `R^{n1+n2}`.
pub fn product_form(omega: &Form, eta: &Form) -> Result<Form> {
    let (n1, n2) = (omega.dim(), eta.dim());
    omega.pullback(&projection(n1, n2, true))?.wedge(&eta.pullback(&projection(n1, n2, false))?)
}

/// Right side of the boundary Leibniz rule, including the cases where one
/// factor has grade 0.
pub fn leibniz_boundary(j: &DiracChain, k: &DiracChain) -> Result<DiracChain> {
    use crate::operators::boundary;
    let (gj, gk) = (j.grade(), k.grade());
    let left = cartesian_wedge(&boundary(j), k);
    let right = cartesian_wedge(j, &boundary(k));
    Ok(match (gj > 0, gk > 0) {
        (true, true) => left.add(&right.scale(if gj % 2 == 0 { 1.0 } else { -1.0 }))?,
        (true, false) => left,
        (false, true) => right,
        (false, false) => DiracChain::zero(j.dim() + k.dim(), 0),
    })
}
