//! A dipole layer P_{e3} ∂B on the unit sphere in R³ against z² dx∧dy.
//!
//! cargo run --example dipole_sphere

use chaincalc::error::Result;
use chaincalc::forms::Form;
use chaincalc::operators::{boundary, prederiv_const};
use chaincalc::represent::{open_set_chain, BBox};

fn main() -> Result<()> {
    let w = Form::parse(3, "dx1 dx2: x3^2")?;
    let exact = 8.0 * std::f64::consts::PI / 3.0;
    for j in 2..=5 {
        let ball = open_set_chain(|p| p.iter().map(|x| x * x).sum::<f64>() < 1.0, &BBox::cube(-1.0, 1.0, 3), j);
        let dip = prederiv_const(&[0.0, 0.0, 1.0], &boundary(&ball))?;
        let got = w.integrate(&dip)?;
        println!("j={j}  terms {:6}  ⨍ {got:.6}  2·vol {:.6}  limit {exact:.6}", dip.len(), 2.0 * Form::volume(3).integrate(&ball)?);
    }
    Ok(())
}
