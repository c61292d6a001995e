//! Certified brackets lower ≤ ‖A‖_{B^r} ≤ upper.
//!
//! cargo run --example norms

use chaincalc::error::Result;
use chaincalc::exterior::MultiIndex;
use chaincalc::norms::{decompose, norm_bound, standard_dictionary, Strategy};
use chaincalc::represent::cube_chain;

fn main() -> Result<()> {
    let dict = standard_dictionary(2, 2);
    let p = |j| cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, j);
    println!(" j   ‖P_j‖ bracket          ‖P_j − P_(j+1)‖_B1 upper   2^(1-j)");
    for j in 0..=6 {
        let a = norm_bound(&p(j)?, 1, Strategy::Pairing, &dict)?;
        let diff = p(j)?.sub(&p(j + 1)?)?;
        let d = norm_bound(&diff, 1, Strategy::Pairing, &dict)?;
        println!("{j:2}   [{:.6}, {:.6}]     {:.6e}            {:.6e}", a.lower, a.upper, d.upper, 0.5f64.powi(j as i32 - 1));
    }

    // A witness decomposition reconstructs the chain it bounds.
    let diff = p(2)?.sub(&p(3)?)?;
    let w = decompose(&diff, 1, Strategy::Pairing)?;
    w.verify(&diff)?;
    println!("\nwitness for j=2: {:?}", w.summary());
    Ok(())
}
