//! Weighted Sierpinski chains keep area and boundary flux at 1/2.
//!
//! cargo run --example sierpinski

use chaincalc::error::Result;
use chaincalc::forms::Form;
use chaincalc::operators::boundary;
use chaincalc::represent::{sierpinski_chain, sierpinski_triangles};

fn main() -> Result<()> {
    let xdy = Form::parse(2, "dx2: x1")?;
    for m in 0..=6 {
        let s = sierpinski_chain(m, 2)?;
        println!(
            "m={m}  triangles {:5}  terms {:6}  ⨍ dV {:.12}  ⨍_∂ x dy {:.12}",
            sierpinski_triangles(m).len(),
            s.len(),
            Form::volume(2).integrate(&s)?,
            xdy.integrate(&boundary(&s))?
        );
    }
    Ok(())
}
