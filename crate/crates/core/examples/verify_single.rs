//! Numeric achievability for a single-antenna network over a handful of
//! seeds, plus the out-of-region precondition failure.

use dof_region::verify::{run_verification, VerifyOptions};
use dof_region::{DemandSpec, DofPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = DemandSpec::new(4, 1, vec![vec![1, 2], vec![2, 3], vec![3, 4]])?;

    for text in ["1/3,1/3,1/3,1/3", "1/2,1/4,1/4,1/4"] {
        let point = DofPoint::parse(text)?;
        for l in [1, 2] {
            for seed in [42, 7, 2024] {
                let r = run_verification(
                    &spec,
                    &point,
                    &VerifyOptions {
                        l,
                        seed,
                        ..Default::default()
                    },
                )?;
                println!(
                    "{point} l={l} seed={seed:<4}  residual {:.1e}  tx {:.2e}  rx {:.2e}  {}",
                    r.max_alignment_residual(),
                    r.min_tx_margin().unwrap_or(f64::NAN),
                    r.min_rx_margin().unwrap_or(f64::NAN),
                    if r.passed() { "pass" } else { "FAIL" }
                );
            }
        }
    }

    let outside = DofPoint::parse("1/2,1/2,1/2,0")?;
    match run_verification(&spec, &outside, &VerifyOptions::default()) {
        Ok(_) => println!("{outside}: unexpectedly verified"),
        Err(e) => println!("{outside}: {e}"),
    }
    Ok(())
}
