//! In the interference channel every point `(d1, d2, .., d2)` of the region
//! is a time share of `(M, 0, .., 0)`, `(M/2, .., M/2)` and the origin.

use dof_region::rational::{int, rat};
use dof_region::region::{expand_region, ic_timeshare_weights};
use dof_region::vertex::enumerate_vertices;
use dof_region::{DemandSpec, DofPoint, Rational};

fn main() {
    let (k, m) = (3, 2);
    let ic = DemandSpec::interference_channel(k, m).unwrap();
    let region = expand_region(&ic);
    let hull: Vec<String> = enumerate_vertices(&region)
        .unwrap()
        .vertices
        .iter()
        .map(|v| v.to_string())
        .collect();
    println!("K={k} M={m} vertices: {}", hull.join(" "));

    for (d1, d2) in [
        (rat(3, 2), rat(1, 2)),
        (int(1), int(1)),
        (rat(1, 4), rat(1, 4)),
    ] {
        let [a, b, c] = ic_timeshare_weights(&d1, &d2, m).unwrap();
        let mut comps = vec![a.clone() * int(m as i64) + b.clone() * rat(m as i64, 2)];
        comps.extend(std::iter::repeat_n(b.clone() * rat(m as i64, 2), k - 1));
        let mixed = DofPoint::new(comps).unwrap();
        let target = DofPoint::new(
            std::iter::once(d1.clone())
                .chain(std::iter::repeat_n(d2.clone(), k - 1))
                .collect::<Vec<Rational>>(),
        )
        .unwrap();
        println!(
            "({d1}, {d2}, ..): weights {a}, {b}, {c} -> {mixed} matches: {}",
            mixed == target
        );
    }
}
