//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints its own line; exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use dof_region::demand::compute_grouping;
use dof_region::plan::{
    build_constraints, multi_plan_for_point, plan_for_point, verify_multi_plan_symbolic,
    verify_plan_symbolic, ConstraintMode, DEFAULT_TAU_CAP,
};
use dof_region::rational::{int, rat};
use dof_region::region::{expand_region, max_sum_dof, prime_region, symmetric_total};
use dof_region::verify::{run_verification, VerifyOptions};
use dof_region::vertex::enumerate_vertices;
use dof_region::{DemandSpec, DofPoint, Error, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn spec(k: usize, m: usize, demands: &[&[usize]]) -> DemandSpec {
    DemandSpec::new(k, m, demands.iter().map(|d| d.to_vec()).collect()).unwrap()
}

fn chain4() -> DemandSpec {
    spec(4, 1, &[&[1, 2], &[2, 3], &[3, 4]])
}

fn poset5() -> DemandSpec {
    spec(4, 1, &[&[1, 2], &[2], &[2, 3], &[2, 3], &[1, 4]])
}

fn star4() -> DemandSpec {
    spec(4, 1, &[&[1, 2], &[1, 3], &[1, 4]])
}

fn subsets(k: usize, size: usize, m: usize) -> DemandSpec {
    let mut demands = Vec::new();
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize == size {
            demands.push((1..=k).filter(|i| mask & (1 << (i - 1)) != 0).collect());
        }
    }
    DemandSpec::new(k, m, demands).unwrap()
}

fn mimo3() -> DemandSpec {
    spec(3, 2, &[&[1], &[2]])
}

fn point(text: &str) -> DofPoint {
    DofPoint::parse(text).unwrap()
}

fn set(items: &[usize]) -> BTreeSet<usize> {
    items.iter().copied().collect()
}

fn region_fixture() -> Outcome {
    let region = expand_region(&chain4());
    let got: Vec<_> = region
        .inequalities
        .iter()
        .map(|i| (i.support.clone(), i.bound))
        .collect();
    let want = vec![
        (set(&[1, 2, 3]), 1),
        (set(&[1, 2, 4]), 1),
        (set(&[2, 3, 4]), 1),
        (set(&[1, 3, 4]), 1),
    ];
    outcome(got == want, format!("{} supports", got.len()))
}

fn vertex_fixture() -> Outcome {
    let vs = enumerate_vertices(&expand_region(&chain4())).unwrap();
    let mut want = vec![DofPoint::zeros(4), DofPoint::uniform(4, rat(1, 3)).unwrap()];
    for k in 1..=4 {
        want.push(DofPoint::axis(4, k, int(1)).unwrap());
    }
    let got: BTreeSet<String> = vs.vertices.iter().map(|v| v.to_string()).collect();
    let want: BTreeSet<String> = want.iter().map(|v| v.to_string()).collect();
    outcome(
        got == want && vs.len() == 6,
        format!("{} vertices", vs.len()),
    )
}

fn ic_region() -> Outcome {
    let mut mismatches = Vec::new();
    for k in [3, 4] {
        for m in [1, 2] {
            let ic = DemandSpec::interference_channel(k, m).unwrap();
            let vs = enumerate_vertices(&expand_region(&ic)).unwrap();
            let mut want: BTreeSet<String> = BTreeSet::new();
            want.insert(DofPoint::zeros(k).to_string());
            want.insert(DofPoint::uniform(k, rat(m as i64, 2)).unwrap().to_string());
            for i in 1..=k {
                want.insert(DofPoint::axis(k, i, int(m as i64)).unwrap().to_string());
            }
            let got: BTreeSet<String> = vs.vertices.iter().map(|v| v.to_string()).collect();
            if got != want {
                let extra: Vec<_> = got.difference(&want).cloned().collect();
                let missing: Vec<_> = want.difference(&got).cloned().collect();
                mismatches.push(format!("K={k} M={m} extra {extra:?} missing {missing:?}"));
            }
        }
    }
    let detail = if mismatches.is_empty() {
        "4 instances".to_string()
    } else {
        mismatches.join("; ")
    };
    outcome(mismatches.is_empty(), detail)
}

fn total_dof() -> Outcome {
    for m in [1, 2] {
        for beta in [2, 3] {
            let best = max_sum_dof(&expand_region(&subsets(4, beta, m)));
            let want = symmetric_total(4, m, beta).unwrap();
            let literal = if beta == 2 {
                rat(4 * m as i64, 3)
            } else {
                int(m as i64)
            };
            if best.total != want || want != literal {
                return outcome(false, format!("M={m} beta={beta}: {}", best.total));
            }
        }
    }
    let best = max_sum_dof(&expand_region(&star4()));
    let ok = best.total == rat(3, 2) && best.argmax == point("0,1/2,1/2,1/2");
    outcome(
        ok,
        format!("remark instance {} at {}", best.total, best.argmax),
    )
}

fn prime_receivers() -> Outcome {
    let spec = poset5();
    let grouping = compute_grouping(&spec);
    let full = build_constraints(&spec, ConstraintMode::Full).len();
    let grouped = build_constraints(&spec, ConstraintMode::Grouped).len();
    let all = expand_region(&spec);
    let primes = prime_region(&spec);
    let same_supports = all
        .irredundant_supports()
        .into_iter()
        .collect::<BTreeSet<_>>()
        == primes
            .irredundant_supports()
            .into_iter()
            .collect::<BTreeSet<_>>();
    let same_vertices =
        enumerate_vertices(&all).unwrap().vertices == enumerate_vertices(&primes).unwrap().vertices;
    let ok = grouping.primes == vec![1, 3, 5]
        && full == 6
        && grouped == 3
        && same_supports
        && same_vertices;
    outcome(
        ok,
        format!(
            "primes {:?}, Gamma {full}, Gamma' {grouped}",
            grouping.primes
        ),
    )
}

fn plan_arithmetic() -> Outcome {
    let third = DofPoint::uniform(4, rat(1, 3)).unwrap();
    let p1 = plan_for_point(
        &chain4(),
        &third,
        1,
        ConstraintMode::Grouped,
        DEFAULT_TAU_CAP,
    )
    .unwrap();
    let p2 = plan_for_point(
        &chain4(),
        &third,
        2,
        ConstraintMode::Grouped,
        DEFAULT_TAU_CAP,
    )
    .unwrap();
    let fractions: Vec<Rational> = (1..=4).map(|k| p1.dof_fraction(k)).collect();
    let closed_form = |p: &dof_region::BeamPlan| {
        (1..=4).all(|k| p.columns[k - 1].len() as u128 == p.expected_column_count(k))
            && p.tau == p.kappa() as u128 * (p.l as u128 + 1).pow(p.gamma() as u32)
    };
    let ok = p1.kappa() == 3
        && p1.gamma() == 3
        && p1.gamma_ks() == vec![0, 1, 1, 3]
        && p1.tau == 24
        && p1.column_counts() == vec![8, 4, 4, 1]
        && fractions == vec![rat(1, 3), rat(1, 6), rat(1, 6), rat(1, 24)]
        && p2.tau == 81
        && p2.column_counts() == vec![27, 18, 18, 8]
        && closed_form(&p1)
        && closed_form(&p2);
    outcome(
        ok,
        format!(
            "tau {} / {}, counts {:?} / {:?}",
            p1.tau,
            p2.tau,
            p1.column_counts(),
            p2.column_counts()
        ),
    )
}

/// Components `p/q` with `q <= 4` drawn independently in `[0, M]`, rejected
/// until the point lies in the region and is nonzero.
fn random_point(rng: &mut ChaCha8Rng, spec: &DemandSpec) -> DofPoint {
    let region = expand_region(spec);
    loop {
        let comps: Vec<Rational> = (0..spec.k())
            .map(|_| {
                let q = rng.random_range(1..=4i64);
                rat(rng.random_range(0..=q * spec.m() as i64), q)
            })
            .collect();
        let p = DofPoint::new(comps).unwrap();
        if p.sum() > int(0) && region.contains(&p).unwrap().inside {
            return p;
        }
    }
}

fn symbolic_alignment() -> Outcome {
    let fixtures = [
        chain4(),
        poset5(),
        star4(),
        subsets(4, 2, 1),
        DemandSpec::interference_channel(3, 1).unwrap(),
        mimo3(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut plans = 0;
    for i in 0..20 {
        let spec = &fixtures[i % fixtures.len()];
        let p = random_point(&mut rng, spec);
        for l in [1, 2] {
            for mode in [ConstraintMode::Grouped, ConstraintMode::Full] {
                let pass = if spec.m() > 1 {
                    verify_multi_plan_symbolic(
                        &multi_plan_for_point(spec, &p, l, mode, DEFAULT_TAU_CAP).unwrap(),
                    )
                    .pass
                } else {
                    verify_plan_symbolic(
                        &plan_for_point(spec, &p, l, mode, DEFAULT_TAU_CAP).unwrap(),
                    )
                    .pass
                };
                if !pass {
                    return outcome(false, format!("{p} l={l} {mode:?}"));
                }
                plans += 1;
            }
        }
    }
    let mut tampered = plan_for_point(
        &chain4(),
        &DofPoint::uniform(4, rat(1, 3)).unwrap(),
        1,
        ConstraintMode::Full,
        DEFAULT_TAU_CAP,
    )
    .unwrap();
    let l = tampered.l;
    tampered.columns[2].retain(|col| col.exponents[0] < l);
    let negative = !verify_plan_symbolic(&tampered).pass;
    outcome(
        negative,
        format!("{plans} plans pass, off-by-one control rejected: {negative}"),
    )
}

fn single_antenna() -> Outcome {
    let mut worst_residual = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    let mut runs = 0;
    for p in ["1/3,1/3,1/3,1/3", "1/2,1/4,1/4,1/4"] {
        for l in [1, 2] {
            for seed in 0..20u64 {
                let options = VerifyOptions {
                    l,
                    seed,
                    ..VerifyOptions::default()
                };
                let report = run_verification(&chain4(), &point(p), &options).unwrap();
                worst_residual = worst_residual.max(report.max_alignment_residual());
                for m in [report.min_tx_margin(), report.min_rx_margin()]
                    .into_iter()
                    .flatten()
                {
                    worst_margin = worst_margin.min(m);
                }
                if !report.passed() {
                    return outcome(
                        false,
                        format!("{p} l={l} seed={seed}: {:?}", report.verdict),
                    );
                }
                runs += 1;
            }
        }
    }
    let outside = run_verification(
        &chain4(),
        &point("1/2,1/2,1/2,0"),
        &VerifyOptions::default(),
    );
    let precondition = matches!(outside, Err(Error::ColumnBudget { .. }));
    outcome(
        precondition && worst_residual < 1e-10 && worst_margin > 1e-6,
        format!("{runs} runs, max residual {worst_residual:.2e}, min margin {worst_margin:.2e}, out-of-region precondition: {precondition}"),
    )
}

fn multi_antenna() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_diag = 0.0f64;
    let mut worst_sep = f64::INFINITY;
    for seed in 42..47u64 {
        let options = VerifyOptions {
            seed,
            ..VerifyOptions::default()
        };
        let report = run_verification(&mimo3(), &point("1/4,1/4,1/4"), &options).unwrap();
        assert_eq!(report.rx_rank_margins.len(), 2);
        let diag = report.max_diag_residual();
        let sep = report.min_rx_margin().unwrap_or(0.0);
        worst_diag = worst_diag.max(diag);
        worst_sep = worst_sep.min(sep);
        if !(diag < 1e-9 && sep > 1e-6 && report.diag_residuals.len() == 8) {
            failures.push(format!("seed {seed} (separation {sep:.2e})"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("tau 256, max off-diagonal {worst_diag:.2e}, min separation {worst_sep:.2e}; failing: {failures:?}"),
    )
}

fn convergence() -> Outcome {
    let third = DofPoint::uniform(4, rat(1, 3)).unwrap();
    let mut seq = Vec::new();
    for l in 1..=5u32 {
        let plan = plan_for_point(
            &chain4(),
            &third,
            l,
            ConstraintMode::Grouped,
            DEFAULT_TAU_CAP,
        )
        .unwrap();
        let got = plan.dof_fraction(2);
        let li = l as i64;
        if got != rat(li * (li + 1) * (li + 1), 3 * (li + 1).pow(3)) || got != rat(li, 3 * (li + 1))
        {
            return outcome(false, format!("l={l}: {got}"));
        }
        seq.push(got);
    }
    let monotone = seq.windows(2).all(|w| w[0] < w[1]) && seq.iter().all(|x| *x < rat(1, 3));
    let text: Vec<String> = seq.iter().map(|x| x.to_string()).collect();
    outcome(monotone, text.join(", "))
}

fn main() {
    type Criterion = (u32, &'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (
            1,
            "region fixture",
            Duration::from_millis(1),
            region_fixture,
        ),
        (2, "vertex fixture", Duration::from_secs(1), vertex_fixture),
        (
            3,
            "interference channel region",
            Duration::from_secs(5),
            ic_region,
        ),
        (4, "total DoF", Duration::from_secs(1), total_dof),
        (
            5,
            "prime receivers",
            Duration::from_millis(1),
            prime_receivers,
        ),
        (
            6,
            "plan arithmetic",
            Duration::from_millis(1),
            plan_arithmetic,
        ),
        (
            7,
            "symbolic alignment",
            Duration::from_secs(10),
            symbolic_alignment,
        ),
        (
            8,
            "numeric single antenna",
            Duration::from_secs(60),
            single_antenna,
        ),
        (
            9,
            "numeric multi antenna",
            Duration::from_secs(120),
            multi_antenna,
        ),
        (
            10,
            "DoF-fraction convergence",
            Duration::from_millis(1),
            convergence,
        ),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < budget;
        let pass = result.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {:<28} {}  {:>10.3} ms (limit {} ms)  {}",
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64() * 1e3,
            budget.as_millis(),
            result.detail
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
