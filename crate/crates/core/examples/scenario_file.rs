//! Load a JSON scenario, print its linear-unit form and run it.
//!
//! `cargo run --example scenario_file -- crates/core/scenarios/three_cell_db.json`

use asymap::prelude::*;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/three_cell_db.json").to_string());
    let s = Scenario::read(&path)?;
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", s.to_json_string());
    let m = s.mapping()?;
    let v = feasibility_check(m.as_ref(), &s.asymptotic()?, true, &s.solver)?;
    println!("rho = {:.6e}, feasible = {}", v.rho, v.feasible);
    Ok(())
}
