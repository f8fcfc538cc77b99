//! Maximum total DoF: the symmetric closed form against the exact LP, and
//! an asymmetric instance that beats the symmetric point.

use dof_region::rational::rat;
use dof_region::region::{expand_region, max_sum_dof, max_sum_dof_simplex, symmetric_total};
use dof_region::{DemandSpec, DofPoint};

fn all_subsets(k: usize, size: usize, m: usize) -> DemandSpec {
    let demands = (0u32..1 << k)
        .filter(|mask| mask.count_ones() as usize == size)
        .map(|mask| (1..=k).filter(|i| mask & (1 << (i - 1)) != 0).collect())
        .collect();
    DemandSpec::new(k, m, demands).unwrap()
}

fn main() {
    for m in [1, 2] {
        for beta in [2, 3] {
            let best = max_sum_dof(&expand_region(&all_subsets(4, beta, m)));
            println!(
                "K=4 M={m} beta={beta}: LP {} (via {:?}), MK/(beta+1) = {}",
                best.total,
                best.method,
                symmetric_total(4, m, beta).unwrap()
            );
        }
    }

    let star = DemandSpec::new(4, 1, vec![vec![1, 2], vec![1, 3], vec![1, 4]]).unwrap();
    let region = expand_region(&star);
    let best = max_sum_dof(&region);
    let uniform = DofPoint::uniform(4, rat(1, 3)).unwrap();
    println!(
        "demands {{1,2}},{{1,3}},{{1,4}}: max {} at {}",
        best.total, best.argmax
    );
    println!(
        "  uniform {} is feasible: {}, total {}",
        uniform,
        region.contains(&uniform).unwrap().inside,
        uniform.sum()
    );
    println!(
        "  simplex agrees: {}",
        max_sum_dof_simplex(&region).total == best.total
    );
}
