//! The vector field y e1 on the unit disk as a chain of 1-elements.
//!
//! cargo run --example vectorfield

use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::forms::{Field, Form};
use chaincalc::represent::{unit_disk, vectorfield_chain, BBox};

fn main() -> Result<()> {
    let w = Form::parse(2, "dx1: x2")?;
    for j in 3..=8 {
        let x = vectorfield_chain(&[(MultiIndex::single(1), Field::coord(2))], unit_disk, &BBox::cube(-1.0, 1.0, 2), j)?;
        let got = w.integrate(&x)?;
        println!("j={j}  terms {:6}  ⨍ y dx {got:.8}  error {:.3e}", x.len(), (got - std::f64::consts::FRAC_PI_4).abs());
    }
    Ok(())
}
