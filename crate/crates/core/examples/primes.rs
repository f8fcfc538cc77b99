//! Group receivers by maximal demand sets and compare the constraint sets
//! of full and grouped alignment.

use dof_region::demand::{compute_grouping, receiver_meta};
use dof_region::plan::{build_constraints, ConstraintMode};
use dof_region::DemandSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/specs/poset5.json").into()
    });
    let spec = DemandSpec::parse(&std::fs::read_to_string(&path)?)?;
    let grouping = compute_grouping(&spec);

    for meta in receiver_meta(&spec) {
        let j = meta.receiver;
        println!(
            "rx{j}: wants {:?}, dominant interferer {:?}, group {} (prime rx{}){}",
            spec.demand(j),
            meta.delta,
            grouping.group_of(j),
            grouping.prime_of(j),
            if grouping.is_prime(j) { " *" } else { "" }
        );
    }

    for mode in [ConstraintMode::Full, ConstraintMode::Grouped] {
        let constraints = build_constraints(&spec, mode);
        let text: Vec<String> = constraints
            .iter()
            .map(|c| format!("({},{},{})", c.m, c.n, c.j))
            .collect();
        println!(
            "{mode:?}: Gamma = {}  {}",
            constraints.len(),
            text.join(" ")
        );
    }
    Ok(())
}
