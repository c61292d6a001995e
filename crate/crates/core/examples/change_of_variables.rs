//! Pushforward through a nonlinear map against pullback, and convergence to
//! the classical integral over the image of the square.
//!
//! cargo run --example change_of_variables

use chaincalc::cli::converge::{self, change_of_vars_map, ConvergeOptions, Theorem};
use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::forms::Form;
use chaincalc::operators::pushforward;
use chaincalc::represent::cube_chain;

fn main() -> Result<()> {
    let f = change_of_vars_map();
    let w = Form::parse(2, "dx1 dx2: x1^2 + x2 + 1")?;
    let pulled = w.pullback(&f)?;
    for j in [2, 4, 6] {
        let a = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, j)?;
        println!("j={j}  ⨍_(F_* A) ω = {:.15}   ⨍_A F^* ω = {:.15}", w.integrate(&pushforward(&f, &a)?)?, pulled.integrate(&a)?);
    }
    let (report, table) = converge::run(Theorem::ChangeOfVars, &ConvergeOptions::default())?;
    println!("\nexact {:.12}, passed {}\n{}", table.exact, report.passed(), table.to_csv());
    Ok(())
}
