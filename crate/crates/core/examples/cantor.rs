//! Stage-m Cantor chains: ⨍_Γ dx = ⨍_{∂Γ} x = 1 although the lengths tend to 0.
//!
//! cargo run --example cantor

use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::forms::Form;
use chaincalc::operators::boundary;
use chaincalc::represent::{cantor_chain, cantor_intervals};

fn main() -> Result<()> {
    let dx = Form::basis(1, MultiIndex::single(1))?;
    let x = Form::parse(1, "x1")?;
    println!(" m  intervals  length      ⨍ dx      ⨍_∂ x");
    for m in 0..=10 {
        let g = cantor_chain(m, 2);
        let length: f64 = cantor_intervals(m).iter().map(|(_, len)| len).sum();
        println!("{m:2}  {:9}  {length:.6}  {:.12}  {:.12}", 1usize << m, dx.integrate(&g)?, x.integrate(&boundary(&g))?);
    }
    Ok(())
}
