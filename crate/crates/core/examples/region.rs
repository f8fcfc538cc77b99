//! Expand a demand spec into its DoF-region half-spaces.
//!
//!     cargo run --example region -- examples/specs/poset5.json

use dof_region::region::{expand_region, prime_region, raw_expansion};
use dof_region::DemandSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/specs/chain4.json").into()
    });
    let spec = DemandSpec::parse(&std::fs::read_to_string(&path)?)?;

    let region = expand_region(&spec);
    println!("K = {}, M = {}, {} receivers", spec.k(), spec.m(), spec.j());
    println!(
        "{} raw half-spaces, {} after deduplication",
        raw_expansion(&spec).len(),
        region.inequalities.len()
    );
    for ineq in &region.inequalities {
        let terms: Vec<String> = ineq.support.iter().map(|k| format!("d{k}")).collect();
        let sources: Vec<String> = ineq
            .provenance
            .iter()
            .map(|p| format!("rx{}", p.receiver))
            .collect();
        println!(
            "  {} <= {}   from {}",
            terms.join(" + "),
            ineq.bound,
            sources.join(",")
        );
    }

    let irredundant = region.irredundant_supports();
    if irredundant.len() < region.inequalities.len() {
        println!(
            "{} supports are implied by larger ones",
            region.inequalities.len() - irredundant.len()
        );
    }

    let reduced = prime_region(&spec);
    println!(
        "prime receivers alone give {} half-spaces",
        reduced.inequalities.len()
    );
    Ok(())
}
