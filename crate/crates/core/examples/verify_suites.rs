//! The randomised identity suites behind `chaincalc verify`.
//!
//! cargo run --release --example verify_suites

use chaincalc::cli::verify::{self, OracleKind, Suite, VerifyOptions};
use chaincalc::error::Result;

fn main() -> Result<()> {
    for suite in [Suite::Algebra, Suite::Duality, Suite::Commutators, Suite::Cartesian, Suite::Norms] {
        let r = verify::run(suite, &VerifyOptions { seed: 7, samples: None, oracle: OracleKind::Analytic, tol: None })?;
        println!("{}: {} cases, {} failing", suite.name(), r.cases.len(), r.failures().count());
        for c in r.failures() {
            println!("  {}: residual {:e} > {:e}", c.id, c.abs_err, c.tol);
        }
    }
    Ok(())
}
