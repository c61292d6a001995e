//! The unit square carried by the rotation field: the fundamental theorem
//! in a flow and the Reynolds transport identity.
//!
//! cargo run --release --example flow

use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::flow::{ftc_refinement, reynolds_verify, Flow, FlowConfig, TimeForm};
use chaincalc::forms::{Form, VectorField};
use chaincalc::represent::cube_chain;

fn main() -> Result<()> {
    let v = VectorField::rotation();
    let cfg = FlowConfig::default();
    let square = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, 5)?;

    let (x, m) = Flow::new(&v, &cfg)?.point(&[1.0, 0.0], std::f64::consts::FRAC_PI_2)?;
    println!("φ_(π/2)(1, 0) = ({:.9}, {:.9}), det Dφ = {:.9}", x[0], x[1], m.determinant());

    let w = Form::parse(2, "dx1 dx2: x1")?;
    println!("\n  N    ⨍_(J_1) ω − ⨍_(J_0) ω    ⨍_trace L_V ω    error     ratio");
    for row in ftc_refinement(&square, &v, &w, 0.0, 1.0, &cfg, &[16, 32, 64, 128])? {
        println!("{:4}   {:+.10}          {:+.10}    {:.3e}  {}", row.n_sub, row.lhs, row.rhs, row.abs_err, row.ratio.map_or(String::new(), |r| format!("{r:.3}")));
    }

    let at = |t: f64| Form::parse(2, "dx2: x1").map(|f| f.scale(t));
    let dt = |_: f64| Form::parse(2, "dx2: x1");
    let edge = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::single(1), 1.0, 6)?;
    let r = reynolds_verify(&edge, &v, &TimeForm { at: &at, dt: &dt }, 0.5, 1e-3, &cfg)?;
    println!("\nReynolds: three terms {:.10}, finite difference {:.10}", r.lhs, r.rhs);
    for (name, value) in &r.extra {
        println!("  {name:15} {value:+.10}");
    }
    Ok(())
}
