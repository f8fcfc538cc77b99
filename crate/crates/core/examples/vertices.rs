//! Enumerate the vertices of a DoF region exactly.
//!
//!     cargo run --example vertices -- examples/specs/ic3.json

use dof_region::region::expand_region;
use dof_region::vertex::{enumerate_vertices, tight_rank};
use dof_region::DemandSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/examples/specs/chain4.json").into()
    });
    let spec = DemandSpec::parse(&std::fs::read_to_string(&path)?)?;
    let region = expand_region(&spec);
    let vertices = enumerate_vertices(&region)?;

    for v in &vertices.vertices {
        println!(
            "{v}   sum {}   tight rank {}",
            v.sum(),
            tight_rank(&region, v)
        );
    }
    println!(
        "{} vertices; solved {} of at most {} bases (raw expansion bound {})",
        vertices.len(),
        vertices.bases_solved,
        vertices.basic_solution_bound,
        vertices.raw_expansion_bound
    );
    Ok(())
}
