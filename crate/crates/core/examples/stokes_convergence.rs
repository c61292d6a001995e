//! Dyadic representatives of the unit square: ⨍_{∂P_j} x dy → 1 at rate 2^{-j}.
//!
//! cargo run --example stokes_convergence

use chaincalc::cli::converge::{self, ConvergeOptions, Theorem};
use chaincalc::error::Result;
use chaincalc::forms::Form;
use chaincalc::operators::boundary;
use chaincalc::represent::{open_set_chain, BBox};

fn main() -> Result<()> {
    let w = Form::parse(2, "dx2: x1")?;
    let square = |p: &[f64]| p.iter().all(|x| 0.0 < *x && *x < 1.0);
    let mut prev: Option<f64> = None;
    println!(" j  ⨍_∂ x dy      error");
    for j in 3..=8 {
        let c = open_set_chain(square, &BBox::cube(0.0, 1.0, 2), j);
        let err = (w.integrate(&boundary(&c))? - 1.0).abs();
        let ratio = prev.map_or(String::new(), |p| format!("  ratio {:.3}", err / p));
        println!("{j:2}  {:.10}  {err:.3e}{ratio}", 1.0 - err);
        prev = Some(err);
    }

    // The same tables for the other theorems, as produced by `chaincalc converge`.
    for th in [Theorem::GaussGreen, Theorem::KelvinStokes] {
        let (report, table) = converge::run(th, &ConvergeOptions::default())?;
        println!("\n{} (exact {:.10}), passed: {}\n{}", th.name(), table.exact, report.passed(), table.to_csv());
    }
    Ok(())
}
