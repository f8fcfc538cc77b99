//! Build a single-antenna alignment plan and watch the DoF fractions
//! approach the target as `l` grows.
//!
//!     cargo run --example plan -- 1/2,1/4,1/4,1/4

use dof_region::plan::{plan_for_point, verify_plan_symbolic, ConstraintMode, DEFAULT_TAU_CAP};
use dof_region::{DemandSpec, DofPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DemandSpec::new(4, 1, vec![vec![1, 2], vec![2, 3], vec![3, 4]])?;
    let point = DofPoint::parse(
        &std::env::args()
            .nth(1)
            .unwrap_or_else(|| "1/3,1/3,1/3,1/3".into()),
    )?;

    let plan = plan_for_point(&spec, &point, 1, ConstraintMode::Grouped, DEFAULT_TAU_CAP)?;
    let summary = plan.summary();
    println!("target {point}");
    println!(
        "dbar {:?} (kappa {}), plan order {:?}",
        plan.integerized.dbar,
        plan.kappa(),
        plan.integerized.order
    );
    for c in &plan.constraints {
        println!("  align {} into {} at rx{} (plan numbering)", c.n, c.m, c.j);
    }

    for l in 1..=5 {
        let plan = plan_for_point(&spec, &point, l, ConstraintMode::Grouped, DEFAULT_TAU_CAP)?;
        let fractions: Vec<String> = plan
            .summary()
            .dof_fractions
            .iter()
            .map(|f| f.to_string())
            .collect();
        println!(
            "l={l}: tau {:>5}  columns {:?}  fractions {}  symbolic {}",
            plan.tau,
            plan.summary().column_counts,
            fractions.join(" "),
            verify_plan_symbolic(&plan).pass
        );
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
