//! Segments approaching a slit from either side against ω₀² dx, where ω₀
//! jumps across the slit. The two one-sided limits differ.
//!
//! cargo run --example slit_disk

use chaincalc::cli::demo::{self, Demo, DemoOptions};
use chaincalc::error::Result;

fn main() -> Result<()> {
    let r = demo::run(Demo::SlitDisk, &DemoOptions::default(), None)?;
    for c in &r.cases {
        println!("{:<36} expected {:>10.6}  computed {:>10.6}  {}", c.id, c.expected, c.computed, if c.pass { "ok" } else { "FAIL" });
    }
    Ok(())
}
