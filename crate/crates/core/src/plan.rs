//! Symbolic interference-alignment plans.
//!
//! Messages are first renumbered so the target DoF vector is nonincreasing
//! and scaled by `kappa` to integers `dbar`. At receiver `j` every undesired
//! message `n` is aligned into the dominant undesired message
//! `m = delta_j` (the smallest undesired index after renumbering), one
//! constraint `(m, n, j)` per pair. Base vector `w_i` is shared by every
//! transmitter `k` with `dbar_k >= i`, and a beamforming column of
//! transmitter `k` is `prod_c T_c^{alpha_c} w_i` where the exponent of
//! constraint `c = (m, n, j)` ranges over `0..=l` when `n > k` and over
//! `0..l` otherwise. Multiplying a column of `V_n` by `T_c` bumps one
//! exponent by one, which always lands on a column of `V_m`.
//!
//! Everything in this module lives in the renumbered message space;
//! [`IntegerizedPoint::order`] maps back.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::demand::{compute_grouping, receiver_meta, DemandSpec};
use crate::error::{Error, Result};
use crate::rational::{serde_rational_vec, DofPoint, Rational};

pub const DEFAULT_TAU_CAP: u128 = 20_000;

/// `dbar = kappa * d` in nonincreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegerizedPoint {
    pub dbar: Vec<u64>,
    pub kappa: u64,
    /// `order[r]` is the original index of renumbered message `r + 1`.
    pub order: Vec<usize>,
}

pub fn integerize(point: &DofPoint) -> Result<IntegerizedPoint> {
    let kappa = point
        .components()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<u64> = point
        .components()
        .iter()
        .map(|c| {
            (c * Rational::from_integer(kappa.clone()))
                .to_integer()
                .to_u64()
                .ok_or_else(|| Error::InvalidParameter(format!("DoF component {c} too large")))
        })
        .collect::<Result<_>>()?;
    let kappa = kappa
        .to_u64()
        .ok_or_else(|| Error::InvalidParameter("common denominator too large".into()))?;

    let mut order: Vec<usize> = (1..=scaled.len()).collect();
    order.sort_by(|&a, &b| scaled[b - 1].cmp(&scaled[a - 1]).then(a.cmp(&b)));
    Ok(IntegerizedPoint {
        dbar: order.iter().map(|&i| scaled[i - 1]).collect(),
        kappa,
        order,
    })
}

impl IntegerizedPoint {
    pub fn k(&self) -> usize {
        self.dbar.len()
    }

    /// The demand spec with messages renumbered into plan order.
    pub fn relabel(&self, spec: &DemandSpec) -> DemandSpec {
        spec.relabeled(&self.order)
    }

    /// Original index of plan message `k` (1-based).
    pub fn original(&self, k: usize) -> usize {
        self.order[k - 1]
    }

    /// The DoF point in plan order.
    pub fn point(&self) -> DofPoint {
        DofPoint::new(
            self.dbar
                .iter()
                .map(|&d| Rational::new(d.into(), self.kappa.into()))
                .collect(),
        )
        .expect("nonnegative")
    }

    /// Checks `sum_{m in M_j} dbar_m + dbar_{delta_j} <= kappa * M` for every
    /// receiver of `spec` (plan order). With sorted DoF this is exactly
    /// region membership, and it is what keeps every receiver's stacked
    /// signal-plus-interference matrix no wider than it is tall.
    pub fn check_column_budget(&self, spec: &DemandSpec) -> Result<()> {
        let available = self.kappa as u128 * spec.m() as u128;
        for meta in receiver_meta(spec) {
            let wanted: u128 = spec
                .demand(meta.receiver)
                .iter()
                .map(|&m| self.dbar[m - 1] as u128)
                .sum();
            let dominant = meta.delta.map_or(0, |d| self.dbar[d - 1] as u128);
            if wanted + dominant > available {
                return Err(Error::ColumnBudget {
                    receiver: meta.receiver,
                    required: wanted + dominant,
                    available,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintMode {
    /// One constraint set per receiver.
    Full,
    /// Constraints from prime receivers only.
    #[default]
    Grouped,
}

impl ConstraintMode {
    pub fn grouped(flag: bool) -> Self {
        if flag {
            ConstraintMode::Grouped
        } else {
            ConstraintMode::Full
        }
    }

    pub fn is_grouped(self) -> bool {
        self == ConstraintMode::Grouped
    }
}

/// Interference of message `n` aligned into that of `m` at receiver `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AlignmentConstraint {
    pub m: usize,
    pub n: usize,
    pub j: usize,
}

/// Constraints sorted by `(j, n)`. `spec` must already be in plan order.
pub fn build_constraints(spec: &DemandSpec, mode: ConstraintMode) -> Vec<AlignmentConstraint> {
    let receivers: Vec<usize> = match mode {
        ConstraintMode::Full => (1..=spec.j()).collect(),
        ConstraintMode::Grouped => compute_grouping(spec).primes,
    };
    let mut out = Vec::new();
    for j in receivers {
        let complement = spec.complement(j);
        let Some(&m) = complement.iter().next() else {
            continue;
        };
        out.extend(
            complement
                .iter()
                .filter(|&&n| n > m)
                .map(|&n| AlignmentConstraint { m, n, j }),
        );
    }
    out.sort_by_key(|c| (c.j, c.n));
    out
}

/// One beamforming column: base vector index (1-based) and one exponent per
/// constraint, in constraint order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Column {
    pub base: usize,
    pub exponents: Vec<u32>,
}

fn checked_tau(kappa: u64, factor: u128, base: u32, power: usize, cap: u128) -> Result<u128> {
    let over = || Error::TauCap {
        tau: u128::MAX,
        cap,
    };
    let pow = (base as u128)
        .checked_pow(u32::try_from(power).map_err(|_| over())?)
        .ok_or_else(over)?;
    let tau = (kappa as u128)
        .checked_mul(factor)
        .and_then(|v| v.checked_mul(pow))
        .ok_or_else(over)?;
    if tau > cap {
        return Err(Error::TauCap { tau, cap });
    }
    Ok(tau)
}

/// All vectors with `ranges[i].0 <= v[i] <= ranges[i].1`, last coordinate fastest.
fn exponent_grid(ranges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    if ranges.iter().any(|&(lo, hi)| hi < lo) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current: Vec<u32> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(current.clone());
        let mut pos = ranges.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if current[pos] < ranges[pos].1 {
                current[pos] += 1;
                break;
            }
            current[pos] = ranges[pos].0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeamPlan {
    pub spec: DemandSpec,
    pub integerized: IntegerizedPoint,
    pub l: u32,
    pub constraints: Vec<AlignmentConstraint>,
    pub tau: u128,
    /// `columns[k - 1]` lists the columns of transmitter `k`.
    pub columns: Vec<Vec<Column>>,
}

impl BeamPlan {
    pub fn k(&self) -> usize {
        self.integerized.k()
    }

    pub fn kappa(&self) -> u64 {
        self.integerized.kappa
    }

    pub fn dbar(&self, k: usize) -> u64 {
        self.integerized.dbar[k - 1]
    }

    pub fn gamma(&self) -> usize {
        self.constraints.len()
    }

    /// Number of constraints `(m, n, j)` with `n <= k`.
    pub fn gamma_k(&self, k: usize) -> usize {
        self.constraints.iter().filter(|c| c.n <= k).count()
    }

    pub fn gamma_ks(&self) -> Vec<usize> {
        (1..=self.k()).map(|k| self.gamma_k(k)).collect()
    }

    /// `dbar_k * l^{Gamma_k} * (l+1)^{Gamma - Gamma_k}`.
    pub fn expected_column_count(&self, k: usize) -> u128 {
        let gk = self.gamma_k(k) as u32;
        let rest = self.gamma() as u32 - gk;
        self.dbar(k) as u128 * (self.l as u128).pow(gk) * (self.l as u128 + 1).pow(rest)
    }

    pub fn column_counts(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    /// `|V_k| / tau`, exact.
    pub fn dof_fraction(&self, k: usize) -> Rational {
        Rational::new(
            BigInt::from(self.columns[k - 1].len()),
            BigInt::from(self.tau),
        )
    }

    pub fn exponent_range(
        &self,
        transmitter: usize,
        constraint: &AlignmentConstraint,
    ) -> (u32, u32) {
        if constraint.n > transmitter {
            (0, self.l)
        } else {
            (0, self.l - 1)
        }
    }
}

/// Builds the plan for an integerized point. `spec` and `constraints` must be
/// in plan order (see [`IntegerizedPoint::relabel`]).
pub fn build_plan(
    spec: &DemandSpec,
    ip: &IntegerizedPoint,
    l: u32,
    constraints: Vec<AlignmentConstraint>,
    tau_cap: u128,
) -> Result<BeamPlan> {
    ip.check_column_budget(spec)?;
    assemble_plan(spec, ip, l, constraints, tau_cap)
}

pub(crate) fn assemble_plan(
    spec: &DemandSpec,
    ip: &IntegerizedPoint,
    l: u32,
    constraints: Vec<AlignmentConstraint>,
    tau_cap: u128,
) -> Result<BeamPlan> {
    if l < 1 {
        return Err(Error::InvalidParameter("l must be at least 1".into()));
    }
    if ip.k() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            found: ip.k(),
        });
    }
    let tau = checked_tau(ip.kappa, 1, l + 1, constraints.len(), tau_cap)?;
    let mut plan = BeamPlan {
        spec: spec.clone(),
        integerized: ip.clone(),
        l,
        constraints,
        tau,
        columns: Vec::new(),
    };
    plan.columns = (1..=plan.k())
        .map(|k| {
            let ranges: Vec<(u32, u32)> = plan
                .constraints
                .iter()
                .map(|c| plan.exponent_range(k, c))
                .collect();
            let grid = exponent_grid(&ranges);
            (1..=plan.dbar(k) as usize)
                .flat_map(|base| {
                    grid.iter().map(move |e| Column {
                        base,
                        exponents: e.clone(),
                    })
                })
                .collect()
        })
        .collect();
    Ok(plan)
}

/// Integerize, renumber, build constraints and the plan in one go.
pub fn plan_for_point(
    spec: &DemandSpec,
    point: &DofPoint,
    l: u32,
    mode: ConstraintMode,
    tau_cap: u128,
) -> Result<BeamPlan> {
    if point.dim() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            found: point.dim(),
        });
    }
    let ip = integerize(point)?;
    let relabeled = ip.relabel(spec);
    let constraints = build_constraints(&relabeled, mode);
    build_plan(&relabeled, &ip, l, constraints, tau_cap)
}

/// First alignment that fails to close: a column of `V_n` that, bumped along
/// `constraint`, is not a column of `V_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SymbolicFailure {
    pub constraint: AlignmentConstraint,
    pub branch: Option<usize>,
    pub base: usize,
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SymbolicVerdict {
    pub pass: bool,
    pub checked: usize,
    pub failure: Option<SymbolicFailure>,
}

/// Exhaustive containment check over every constraint and every column.
pub fn verify_plan_symbolic(plan: &BeamPlan) -> SymbolicVerdict {
    let sets: Vec<HashSet<&Column>> = plan
        .columns
        .iter()
        .map(|cols| cols.iter().collect())
        .collect();
    let mut checked = 0;
    for (ci, c) in plan.constraints.iter().enumerate() {
        for col in &plan.columns[c.n - 1] {
            checked += 1;
            let mut bumped = col.clone();
            bumped.exponents[ci] += 1;
            if !sets[c.m - 1].contains(&bumped) {
                return SymbolicVerdict {
                    pass: false,
                    checked,
                    failure: Some(SymbolicFailure {
                        constraint: *c,
                        branch: None,
                        base: col.base,
                        exponents: col.exponents.clone(),
                    }),
                };
            }
        }
    }
    SymbolicVerdict {
        pass: true,
        checked,
        failure: None,
    }
}

/// Machine-readable plan summary in original message numbering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanSummary {
    pub mode: &'static str,
    pub l: u32,
    pub kappa: u64,
    pub tau: u128,
    pub order: Vec<usize>,
    pub constraints: Vec<AlignmentConstraint>,
    #[serde(rename = "Gamma")]
    pub gamma: usize,
    #[serde(rename = "GammaK")]
    pub gamma_k: Vec<usize>,
    pub column_counts: Vec<usize>,
    #[serde(with = "serde_rational_vec")]
    pub dof_fractions: Vec<Rational>,
    pub symbolic_pass: bool,
}

fn to_original<T: Clone>(order: &[usize], values: Vec<T>) -> Vec<T> {
    let mut out = values.clone();
    for (pos, v) in values.into_iter().enumerate() {
        out[order[pos] - 1] = v;
    }
    out
}

impl BeamPlan {
    pub fn summary(&self) -> PlanSummary {
        let order = &self.integerized.order;
        PlanSummary {
            mode: "single",
            l: self.l,
            kappa: self.kappa(),
            tau: self.tau,
            order: order.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| AlignmentConstraint {
                    m: order[c.m - 1],
                    n: order[c.n - 1],
                    j: c.j,
                })
                .collect(),
            gamma: self.gamma(),
            gamma_k: to_original(order, self.gamma_ks()),
            column_counts: to_original(order, self.column_counts()),
            dof_fractions: to_original(
                order,
                (1..=self.k()).map(|k| self.dof_fraction(k)).collect(),
            ),
            symbolic_pass: verify_plan_symbolic(self).pass,
        }
    }
}

// Multi-antenna plans ------------------------------------------------------

/// Message `n` from transmit antenna `p` aligned into all antennas of `m` at
/// receiver `j`; `q` picks the diagonal block of the stacked operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MultiAlignmentConstraint {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub j: usize,
}

/// `C x {1..M}^2`, sorted by `(j, n, p, q)`.
pub fn build_multi_constraints(
    spec: &DemandSpec,
    mode: ConstraintMode,
) -> Vec<MultiAlignmentConstraint> {
    let m_ant = spec.m();
    let mut out: Vec<MultiAlignmentConstraint> = build_constraints(spec, mode)
        .into_iter()
        .flat_map(|c| {
            (1..=m_ant).flat_map(move |p| {
                (1..=m_ant).map(move |q| MultiAlignmentConstraint {
                    m: c.m,
                    n: c.n,
                    p,
                    q,
                    j: c.j,
                })
            })
        })
        .collect();
    out.sort_by_key(|c| (c.j, c.n, c.p, c.q));
    out
}

/// Column of one branch: exponents follow `branch_constraints[q - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiColumn {
    pub branch: usize,
    pub base: usize,
    pub exponents: Vec<u32>,
}

/// Branch `q` only uses constraints whose block index is `q`, with
/// exponents confined to the window starting at `(q-1)(l+1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiBeamPlan {
    pub spec: DemandSpec,
    pub integerized: IntegerizedPoint,
    pub l: u32,
    pub constraints: Vec<MultiAlignmentConstraint>,
    /// `branch_constraints[q - 1]` indexes into `constraints`.
    pub branch_constraints: Vec<Vec<usize>>,
    pub tau: u128,
    pub columns: Vec<Vec<MultiColumn>>,
}

impl MultiBeamPlan {
    pub fn k(&self) -> usize {
        self.integerized.k()
    }

    pub fn antennas(&self) -> usize {
        self.spec.m()
    }

    pub fn kappa(&self) -> u64 {
        self.integerized.kappa
    }

    pub fn dbar(&self, k: usize) -> u64 {
        self.integerized.dbar[k - 1]
    }

    pub fn gamma_m(&self) -> usize {
        self.constraints.len()
    }

    pub fn gamma_m_q(&self) -> usize {
        self.gamma_m() / self.antennas()
    }

    /// Branch constraints with `n <= k`; identical for every branch.
    pub fn gamma_m_kq(&self, k: usize) -> usize {
        self.branch_constraints[0]
            .iter()
            .filter(|&&ci| self.constraints[ci].n <= k)
            .count()
    }

    /// Inclusive exponent window for transmitter `k` on `constraint`.
    pub fn window(&self, transmitter: usize, constraint: &MultiAlignmentConstraint) -> (u32, u32) {
        let width = self.l + 1;
        let lo = (constraint.q as u32 - 1) * width;
        let hi = if constraint.n > transmitter {
            constraint.q as u32 * width - 1
        } else {
            constraint.q as u32 * width - 2
        };
        (lo, hi)
    }

    /// `dbar_k * M * l^{Gamma_kq} * (l+1)^{Gamma_q - Gamma_kq}`.
    pub fn expected_column_count(&self, k: usize) -> u128 {
        let gkq = self.gamma_m_kq(k) as u32;
        let rest = self.gamma_m_q() as u32 - gkq;
        self.dbar(k) as u128
            * self.antennas() as u128
            * (self.l as u128).pow(gkq)
            * (self.l as u128 + 1).pow(rest)
    }

    pub fn column_counts(&self) -> Vec<usize> {
        self.columns.iter().map(Vec::len).collect()
    }

    /// DoF of transmitter `k`: `M` virtual antennas, `|V_k|` streams each.
    pub fn dof_fraction(&self, k: usize) -> Rational {
        Rational::new(
            BigInt::from(self.antennas() * self.columns[k - 1].len()),
            BigInt::from(self.tau),
        )
    }

    pub fn summary(&self) -> PlanSummary {
        let order = &self.integerized.order;
        let collapsed: Vec<AlignmentConstraint> = {
            let mut seen = Vec::new();
            for c in &self.constraints {
                let a = AlignmentConstraint {
                    m: order[c.m - 1],
                    n: order[c.n - 1],
                    j: c.j,
                };
                if !seen.contains(&a) {
                    seen.push(a);
                }
            }
            seen
        };
        PlanSummary {
            mode: "multi",
            l: self.l,
            kappa: self.kappa(),
            tau: self.tau,
            order: order.clone(),
            constraints: collapsed,
            gamma: self.gamma_m(),
            gamma_k: to_original(order, (1..=self.k()).map(|k| self.gamma_m_kq(k)).collect()),
            column_counts: to_original(order, self.column_counts()),
            dof_fractions: to_original(
                order,
                (1..=self.k()).map(|k| self.dof_fraction(k)).collect(),
            ),
            symbolic_pass: verify_multi_plan_symbolic(self).pass,
        }
    }
}

pub fn build_multi_plan(
    spec: &DemandSpec,
    ip: &IntegerizedPoint,
    l: u32,
    constraints: Vec<MultiAlignmentConstraint>,
    tau_cap: u128,
) -> Result<MultiBeamPlan> {
    let m_ant = spec.m();
    if m_ant < 2 {
        return Err(Error::InvalidParameter(
            "multi-antenna plans need M >= 2; use the single-antenna plan".into(),
        ));
    }
    if l < 1 {
        return Err(Error::InvalidParameter("l must be at least 1".into()));
    }
    ip.check_column_budget(spec)?;
    let branch_constraints: Vec<Vec<usize>> = (1..=m_ant)
        .map(|q| {
            constraints
                .iter()
                .enumerate()
                .filter(|(_, c)| c.q == q)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let per_branch = branch_constraints[0].len();
    if branch_constraints.iter().any(|b| b.len() != per_branch) {
        return Err(Error::InvalidParameter(
            "every block index must carry the same number of constraints".into(),
        ));
    }
    let factor = (m_ant as u128) * (m_ant as u128);
    let tau = checked_tau(ip.kappa, factor, l + 1, per_branch, tau_cap)?;
    let mut plan = MultiBeamPlan {
        spec: spec.clone(),
        integerized: ip.clone(),
        l,
        constraints,
        branch_constraints,
        tau,
        columns: Vec::new(),
    };
    plan.columns = (1..=plan.k())
        .map(|k| {
            let mut cols = Vec::new();
            for q in 1..=m_ant {
                let ranges: Vec<(u32, u32)> = plan.branch_constraints[q - 1]
                    .iter()
                    .map(|&ci| plan.window(k, &plan.constraints[ci]))
                    .collect();
                let grid = exponent_grid(&ranges);
                for base in 1..=plan.dbar(k) as usize {
                    cols.extend(grid.iter().map(|e| MultiColumn {
                        branch: q,
                        base,
                        exponents: e.clone(),
                    }));
                }
            }
            cols
        })
        .collect();
    Ok(plan)
}

pub fn multi_plan_for_point(
    spec: &DemandSpec,
    point: &DofPoint,
    l: u32,
    mode: ConstraintMode,
    tau_cap: u128,
) -> Result<MultiBeamPlan> {
    if point.dim() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            found: point.dim(),
        });
    }
    let ip = integerize(point)?;
    let relabeled = ip.relabel(spec);
    let constraints = build_multi_constraints(&relabeled, mode);
    build_multi_plan(&relabeled, &ip, l, constraints, tau_cap)
}

/// Per-branch containment: for a constraint with block `q`, every branch-`q`
/// column of `V_n` bumped along it must be a branch-`q` column of `V_m`.
pub fn verify_multi_plan_symbolic(plan: &MultiBeamPlan) -> SymbolicVerdict {
    let sets: Vec<HashSet<&MultiColumn>> = plan
        .columns
        .iter()
        .map(|cols| cols.iter().collect())
        .collect();
    let mut checked = 0;
    for (q_idx, branch) in plan.branch_constraints.iter().enumerate() {
        let q = q_idx + 1;
        for (pos, &ci) in branch.iter().enumerate() {
            let c = plan.constraints[ci];
            for col in plan.columns[c.n - 1].iter().filter(|col| col.branch == q) {
                checked += 1;
                let mut bumped = col.clone();
                bumped.exponents[pos] += 1;
                if !sets[c.m - 1].contains(&bumped) {
                    return SymbolicVerdict {
                        pass: false,
                        checked,
                        failure: Some(SymbolicFailure {
                            constraint: AlignmentConstraint {
                                m: c.m,
                                n: c.n,
                                j: c.j,
                            },
                            branch: Some(q),
                            base: col.base,
                            exponents: col.exponents.clone(),
                        }),
                    };
                }
            }
        }
    }
    SymbolicVerdict {
        pass: true,
        checked,
        failure: None,
    }
}
