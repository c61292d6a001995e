//! Cartesian wedge products: the boundary Leibniz rule and Fubini.
//!
//! cargo run --example cartesian

use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::forms::Form;
use chaincalc::operators::boundary;
use chaincalc::product::{cartesian_wedge, leibniz_boundary, product_form};
use chaincalc::represent::cube_chain;

fn main() -> Result<()> {
    let seg = cube_chain(&[0.0], 1.0, MultiIndex::single(1), 1.0, 3)?;
    let sq = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, 2)?;
    let p = cartesian_wedge(&seg, &sq);
    println!("J × K in R^{} of grade {}, {} terms", p.dim(), p.grade(), p.len());

    let residual = boundary(&p).sub(&leibniz_boundary(&seg, &sq)?)?.max_abs();
    println!("max |∂(J×K) − (∂J×K + (−1)^k J×∂K)| = {residual:e}");

    let (w, e) = (Form::parse(1, "dx1: x1^2")?, Form::parse(2, "dx1 dx2: x1 + x2")?);
    let lhs = product_form(&w, &e)?.integrate(&p)?;
    println!("⨍_(J×K) ω×η = {lhs:.12},  ⨍_J ω · ⨍_K η = {:.12}", w.integrate(&seg)? * e.integrate(&sq)?);
    Ok(())
}
