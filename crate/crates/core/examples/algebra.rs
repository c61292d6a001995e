//! Operators on a small Dirac chain and their duals on forms.
//!
//! cargo run --example algebra

use chaincalc::chains::DiracChain;
use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::forms::{Form, VectorField};
use chaincalc::operators::{boundary, extrude, perp_chain, prederiv};

fn main() -> Result<()> {
    // A 1-element at (1/2, 1/4) carrying 2·e1, plus a dipole along e2.
    let e1 = MultiIndex::single(1);
    let j = DiracChain::term(&[0.5, 0.25], &[0, 0], e1, 2.0)?.add(&DiracChain::term(&[0.0, 1.0], &[0, 1], e1, -1.0)?)?;
    println!("J =\n{}", j.to_text());

    let v = VectorField::parse(&["x2", "x1^2"])?;
    let omega = Form::parse(2, "dx1 dx2: x1*x2 + 1")?;
    let eta = Form::parse(2, "dx1: x2^2; dx2: x1")?;

    let ej = extrude(&v, &j)?;
    println!("extrusion:        {:+.6} = {:+.6}", omega.integrate(&ej)?, omega.interior(&v)?.integrate(&j)?);
    let pj = prederiv(&v, &j)?;
    println!("prederivative:    {:+.6} = {:+.6}", eta.integrate(&pj)?, eta.lie(&v)?.integrate(&j)?);
    let f = Form::parse(2, "x1^3 + x2")?;
    println!("boundary:         {:+.6} = {:+.6}", f.integrate(&boundary(&j))?, f.d()?.integrate(&j)?);
    println!("perpendicular:    {:+.6} = {:+.6}", eta.integrate(&perp_chain(&j))?, eta.star().integrate(&j)?);
    println!("boundary squared: max |∂∂J| = {:e}", boundary(&boundary(&ej)).max_abs());
    Ok(())
}
