//! Numeric verification of an alignment plan.
//!
//! The plan is materialised over one seeded channel realization and checked
//! three ways:
//!
//! * alignment: `T_c v` equals the plan-predicted column of the aligned-to
//!   transmitter for every constraint `c` and every column `v`;
//! * transmit rank: each beamforming matrix has full column rank;
//! * receive separation: at every receiver the desired images stay linearly
//!   independent of the interference.
//!
//! Rank margins are smallest singular values of column-normalised matrices.
//! Columns are stored at unit norm; both the alignment residual and the rank
//! checks are insensitive to per-column scale.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::channel::{
    assemble_t, assemble_t_multi_blocks, generate_base_vectors_with, generate_channels_with,
    AlignmentOperator, BaseVectors, ChannelRealization, MagnitudeBounds,
};
use crate::demand::{compute_grouping, DemandSpec, IndexSet};
use crate::error::{Error, Result};
use crate::linalg::{
    column_rank_margin, hstack, max_abs_diff, min_singular_value, normalize_columns, numeric_rank,
    orthonormal_basis, CMatrix,
};
use crate::plan::{
    build_constraints, build_multi_constraints, build_multi_plan, build_plan, integerize,
    verify_multi_plan_symbolic, verify_plan_symbolic, BeamPlan, Column, ConstraintMode,
    MultiBeamPlan, MultiColumn, DEFAULT_TAU_CAP,
};
use crate::rational::{serde_rational_vec, DofPoint, Rational};
use crate::region::expand_region;

pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_ALIGNMENT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_DIAGONAL_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;
pub const SINGULAR_RETRIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaMode {
    Single,
    Multi,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub l: u32,
    pub seed: u64,
    pub mode: ConstraintMode,
    /// `None` infers from the spec: multi-antenna iff `M > 1`.
    pub antenna_mode: Option<AntennaMode>,
    pub rank_tolerance: f64,
    pub alignment_tolerance: f64,
    pub diagonal_tolerance: f64,
    pub tau_cap: u128,
    pub bounds: MagnitudeBounds,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            l: 1,
            seed: DEFAULT_SEED,
            mode: ConstraintMode::Grouped,
            antenna_mode: None,
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
            alignment_tolerance: DEFAULT_ALIGNMENT_TOLERANCE,
            diagonal_tolerance: DEFAULT_DIAGONAL_TOLERANCE,
            tau_cap: DEFAULT_TAU_CAP,
            bounds: MagnitudeBounds::default(),
        }
    }
}

impl VerifyOptions {
    fn antenna_mode_for(&self, spec: &DemandSpec) -> Result<AntennaMode> {
        let inferred = if spec.m() > 1 {
            AntennaMode::Multi
        } else {
            AntennaMode::Single
        };
        match self.antenna_mode {
            None => Ok(inferred),
            Some(requested) if requested == inferred => Ok(requested),
            Some(requested) => Err(Error::InvalidParameter(format!(
                "{requested:?} scheme requested but the spec has M = {}",
                spec.m()
            ))),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(Error::InvalidParameter("l must be at least 1".into()));
        }
        for (name, tol) in [
            ("rank tolerance", self.rank_tolerance),
            ("alignment tolerance", self.alignment_tolerance),
            ("diagonal tolerance", self.diagonal_tolerance),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

fn fixed<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*value))
}

fn fixed_opt<S: Serializer>(value: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_f64(round_sig(*v)),
        None => s.serialize_none(),
    }
}

/// Seven significant digits, so machine output is stable to the last byte.
fn round_sig(value: f64) -> f64 {
    format!("{value:.6e}").parse().unwrap_or(value)
}

// Numeric beams --------------------------------------------------------------

/// Unit-norm beamforming columns per transmitter (plan order), `tau` rows.
#[derive(Clone, Debug)]
pub struct Beams {
    pub matrices: Vec<CMatrix>,
    /// Natural log of each column's norm before normalisation.
    pub log_scales: Vec<Vec<f64>>,
}

impl Beams {
    pub fn column_counts(&self) -> Vec<usize> {
        self.matrices.iter().map(|m| m.ncols()).collect()
    }

    /// Largest pre-normalisation column magnitude, as a natural log.
    pub fn max_log_scale(&self) -> f64 {
        self.log_scales
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_log_scale(&self) -> f64 {
        self.log_scales
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn monomial_column(
    tau: usize,
    base: &[Complex64],
    factors: &[(&[Complex64], u32)],
) -> (Vec<Complex64>, f64) {
    let mut v: Vec<Complex64> = base[..tau].to_vec();
    let mut log_scale = 0.0;
    for &(diag, power) in factors {
        for _ in 0..power {
            for (x, d) in v.iter_mut().zip(diag) {
                *x *= d;
            }
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            log_scale += norm.ln();
        }
    }
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    (v, log_scale + norm.ln())
}

fn beams_from<C>(
    tau: usize,
    columns: &[Vec<C>],
    build: impl Fn(&C) -> (Vec<Complex64>, f64),
) -> Beams {
    let mut matrices = Vec::with_capacity(columns.len());
    let mut scales = Vec::with_capacity(columns.len());
    for cols in columns {
        let mut mat = CMatrix::zeros(tau, cols.len());
        let mut sc = Vec::with_capacity(cols.len());
        for (idx, col) in cols.iter().enumerate() {
            let (v, s) = build(col);
            mat.column_mut(idx).copy_from_slice(&v);
            sc.push(s);
        }
        matrices.push(mat);
        scales.push(sc);
    }
    Beams {
        matrices,
        log_scales: scales,
    }
}

/// Single-antenna operators, one per plan constraint, in physical indexing.
pub fn plan_operators(
    plan: &BeamPlan,
    chan: &ChannelRealization,
) -> Result<Vec<AlignmentOperator>> {
    let order = &plan.integerized.order;
    plan.constraints
        .iter()
        .map(|c| assemble_t(chan, order[c.m - 1], order[c.n - 1], c.j))
        .collect()
}

/// `prod_c T_c^{alpha_c} w_i` for every plan column.
pub fn build_beams(plan: &BeamPlan, ops: &[AlignmentOperator], bases: &BaseVectors) -> Beams {
    let tau = plan.tau as usize;
    beams_from(tau, &plan.columns, |col: &Column| {
        let factors: Vec<(&[Complex64], u32)> = ops
            .iter()
            .zip(&col.exponents)
            .map(|(op, &e)| (op.diag.as_slice(), e))
            .collect();
        monomial_column(tau, bases.get(col.base), &factors)
    })
}

// Alignment residuals --------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstraintResidual {
    pub m: usize,
    pub n: usize,
    pub j: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(serialize_with = "fixed")]
    pub residual: f64,
    /// Columns of `V_n` whose predicted partner is missing from `V_m`.
    pub unmatched: usize,
}

fn unit_residual(op: &[Complex64], v: &[Complex64], target: &[Complex64]) -> f64 {
    let mut image: Vec<Complex64> = op.iter().zip(v).map(|(d, x)| d * x).collect();
    let norm = image.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    image.iter_mut().for_each(|x| *x /= norm);
    max_abs_diff(&image, target)
}

fn column_slice(m: &CMatrix, idx: usize) -> Vec<Complex64> {
    m.column(idx).iter().copied().collect()
}

/// For each constraint `(m, n, j)`: max over columns `v` of `V_n` of the
/// distance between `T v` (renormalised) and the column of `V_m` whose
/// exponent vector is `v`'s bumped by one along the constraint.
pub fn check_alignment_numeric(
    plan: &BeamPlan,
    ops: &[AlignmentOperator],
    beams: &Beams,
) -> Vec<ConstraintResidual> {
    let order = &plan.integerized.order;
    let index: Vec<HashMap<&Column, usize>> = plan
        .columns
        .iter()
        .map(|cols| cols.iter().enumerate().map(|(i, c)| (c, i)).collect())
        .collect();
    plan.constraints
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut residual = 0.0f64;
            let mut unmatched = 0;
            for (col_idx, col) in plan.columns[c.n - 1].iter().enumerate() {
                let mut bumped = col.clone();
                bumped.exponents[ci] += 1;
                match index[c.m - 1].get(&bumped) {
                    Some(&target_idx) => {
                        let v = column_slice(&beams.matrices[c.n - 1], col_idx);
                        let target = column_slice(&beams.matrices[c.m - 1], target_idx);
                        residual = residual.max(unit_residual(&ops[ci].diag, &v, &target));
                    }
                    None => unmatched += 1,
                }
            }
            ConstraintResidual {
                m: order[c.m - 1],
                n: order[c.n - 1],
                j: c.j,
                p: None,
                q: None,
                residual,
                unmatched,
            }
        })
        .collect()
}

// Transmit rank --------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TxMargin {
    pub transmitter: usize,
    pub columns: usize,
    #[serde(serialize_with = "fixed_opt")]
    pub margin: Option<f64>,
}

/// Smallest singular value of each column-normalised `V_k`; `None` for a
/// transmitter with no columns. `order` maps plan to original indices.
pub fn check_tx_rank(beams: &Beams, order: &[usize]) -> Result<Vec<TxMargin>> {
    beams
        .matrices
        .iter()
        .enumerate()
        .map(|(pos, v)| {
            if v.ncols() > v.nrows() {
                return Err(Error::InvalidParameter(format!(
                    "transmitter {} has {} columns but only {} rows",
                    order[pos],
                    v.ncols(),
                    v.nrows()
                )));
            }
            Ok(TxMargin {
                transmitter: order[pos],
                columns: v.ncols(),
                margin: column_rank_margin(v),
            })
        })
        .collect()
}

// Receive separation ---------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RxMargin {
    pub receiver: usize,
    /// Messages this receiver resolves (original indices).
    pub decoded: IndexSet,
    /// Rank margin of `Lambda_j` (single antenna) or the rank-additivity
    /// margin (multi antenna).
    #[serde(serialize_with = "fixed_opt")]
    pub margin: Option<f64>,
    /// Numeric rank of the column-normalised desired images.
    pub signal_rank: usize,
    /// Numeric rank of the whole interference image.
    pub interference_rank: usize,
    /// Dimension the interference is allowed to occupy.
    pub interference_budget: usize,
    /// Smallest singular value of `[Q_S Q_I]` for orthonormal signal and
    /// interference bases. Single antenna computes it only when the
    /// interference overflows its budget.
    #[serde(serialize_with = "fixed_opt", skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precondition: Option<String>,
}

impl RxMargin {
    /// Unaligned interference still passes when it stays separable from
    /// the signal space.
    pub fn passes(&self, tol: f64) -> bool {
        self.precondition.is_none()
            && self.margin.is_none_or(|m| m > tol)
            && (self.interference_rank <= self.interference_budget
                || self.separation.is_some_and(|m| m > tol))
    }
}

fn separation_margin(signal: &CMatrix, interference: &CMatrix, tol: f64) -> Option<f64> {
    let qs = orthonormal_basis(&normalize_columns(signal), tol);
    let qi = orthonormal_basis(&normalize_columns(interference), tol);
    min_singular_value(&hstack(&[qs, qi]))
}

/// Messages receiver `j` resolves: its own demand set, or its group prime's
/// in grouped mode. Plan order.
fn decoded_set(spec: &DemandSpec, mode: ConstraintMode, j: usize) -> IndexSet {
    match mode {
        ConstraintMode::Full => spec.demand(j).clone(),
        ConstraintMode::Grouped => {
            let grouping = compute_grouping(spec);
            spec.demand(grouping.prime_of(j)).clone()
        }
    }
}

fn single_image(chan: &ChannelRealization, j: usize, physical: usize, v: &CMatrix) -> CMatrix {
    let mut out = v.clone();
    for t in 0..v.nrows() {
        let h = chan.scalar(j, physical, t);
        out.row_mut(t).iter_mut().for_each(|x| *x *= h);
    }
    out
}

fn originals(order: &[usize], set: &IndexSet) -> IndexSet {
    set.iter().map(|&k| order[k - 1]).collect()
}

/// Single antenna: `Lambda_j = [H_jm V_m for m decoded | H_j,delta V_delta]`
/// must have full column rank, and the images of all undesired messages must
/// fit inside `|V_delta|` dimensions.
pub fn check_rx_separation(
    plan: &BeamPlan,
    mode: ConstraintMode,
    chan: &ChannelRealization,
    beams: &Beams,
    tol: f64,
) -> Vec<RxMargin> {
    let spec = &plan.spec;
    let order = &plan.integerized.order;
    let tau = plan.tau as usize;
    (1..=spec.j())
        .map(|j| {
            let decoded = decoded_set(spec, mode, j);
            let undesired: Vec<usize> = (1..=spec.k()).filter(|k| !decoded.contains(k)).collect();
            let delta = undesired.first().copied();

            let mut blocks: Vec<CMatrix> = decoded
                .iter()
                .map(|&k| single_image(chan, j, order[k - 1], &beams.matrices[k - 1]))
                .collect();
            let signal_rank = numeric_rank(&normalize_columns(&hstack(&blocks)), tol);
            if let Some(d) = delta {
                blocks.push(single_image(chan, j, order[d - 1], &beams.matrices[d - 1]));
            }
            let lambda = hstack(&blocks);
            let budget = delta.map_or(0, |d| beams.matrices[d - 1].ncols());
            let interference = hstack(
                &undesired
                    .iter()
                    .map(|&k| single_image(chan, j, order[k - 1], &beams.matrices[k - 1]))
                    .collect::<Vec<_>>(),
            );
            let interference_rank = if undesired.is_empty() {
                0
            } else {
                numeric_rank(&normalize_columns(&interference), tol)
            };

            let (margin, mut precondition) = if lambda.ncols() > tau {
                (
                    None,
                    Some(format!(
                        "column budget: Lambda_{j} has {} columns but only {tau} rows",
                        lambda.ncols()
                    )),
                )
            } else {
                (column_rank_margin(&lambda), None)
            };
            let mut separation = None;
            if precondition.is_none() && interference_rank > budget {
                let signal = lambda.columns(0, lambda.ncols() - budget).into_owned();
                if signal.ncols() + interference_rank > tau {
                    precondition = Some(format!(
                        "dimension budget: {} signal columns plus unaligned interference rank {interference_rank} exceed {tau}",
                        signal.ncols()
                    ));
                } else {
                    separation = separation_margin(&signal, &interference, tol);
                }
            }
            RxMargin {
                receiver: j,
                decoded: originals(order, &decoded),
                margin,
                signal_rank,
                interference_rank,
                interference_budget: budget,
                separation,
                precondition,
            }
        })
        .collect()
}

// Report ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagResidual {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub j: usize,
    #[serde(serialize_with = "fixed")]
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub symbolic: bool,
    pub alignment: bool,
    pub tx_rank: bool,
    pub rx_separation: bool,
    pub diagonality: bool,
    pub overall: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub spec: DemandSpec,
    pub point: DofPoint,
    pub l: u32,
    pub seed: u64,
    pub grouped: bool,
    pub mode: AntennaMode,
    pub symbolic_pass: bool,
    pub alignment_residuals: Vec<ConstraintResidual>,
    pub tx_rank_margins: Vec<TxMargin>,
    pub rx_rank_margins: Vec<RxMargin>,
    pub diag_residuals: Vec<DiagResidual>,
    #[serde(with = "serde_rational_vec")]
    pub dof_fractions: Vec<Rational>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict.overall
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn max_alignment_residual(&self) -> f64 {
        self.alignment_residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn min_tx_margin(&self) -> Option<f64> {
        self.tx_rank_margins
            .iter()
            .filter_map(|m| m.margin)
            .reduce(f64::min)
    }

    pub fn min_rx_margin(&self) -> Option<f64> {
        self.rx_rank_margins
            .iter()
            .filter_map(|m| m.margin)
            .reduce(f64::min)
    }

    pub fn max_diag_residual(&self) -> f64 {
        self.diag_residuals
            .iter()
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }
}

fn seed_for_attempt(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn to_original<T: Clone>(order: &[usize], values: Vec<T>) -> Vec<T> {
    let mut out = values.clone();
    for (pos, v) in values.into_iter().enumerate() {
        out[order[pos] - 1] = v;
    }
    out
}

fn fractions(beams: &Beams, tau: u128, antennas: usize, order: &[usize]) -> Vec<Rational> {
    to_original(
        order,
        beams
            .matrices
            .iter()
            .map(|v| Rational::new(BigInt::from(antennas * v.ncols()), BigInt::from(tau)))
            .collect(),
    )
}

/// Region check, plan, symbolic check, channels, beams and every numeric
/// check, in that order.
pub fn run_verification(
    spec: &DemandSpec,
    point: &DofPoint,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    options.validate()?;
    let antenna_mode = options.antenna_mode_for(spec)?;
    let membership = expand_region(spec).contains(point)?;
    let ip = integerize(point)?;
    let relabeled = ip.relabel(spec);
    if !membership.inside {
        // Report through the per-receiver budget that fails.
        ip.check_column_budget(&relabeled)?;
        return Err(Error::OutsideRegion {
            violated: format!("{:?}", membership.violated),
        });
    }
    match antenna_mode {
        AntennaMode::Single => {
            let constraints = build_constraints(&relabeled, options.mode);
            let plan = build_plan(&relabeled, &ip, options.l, constraints, options.tau_cap)?;
            verify_single(spec, point, &plan, options)
        }
        AntennaMode::Multi => {
            let constraints = build_multi_constraints(&relabeled, options.mode);
            let plan = build_multi_plan(&relabeled, &ip, options.l, constraints, options.tau_cap)?;
            verify_multi(spec, point, &plan, options)
        }
    }
}

/// Numeric checks for an already-built single-antenna plan.
pub fn verify_single(
    spec: &DemandSpec,
    point: &DofPoint,
    plan: &BeamPlan,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let tau = plan.tau as usize;
    let order = &plan.integerized.order;
    let symbolic = verify_plan_symbolic(plan);
    let chan = generate_channels_with(spec, tau, options.seed, options.bounds)?;
    let bases =
        generate_base_vectors_with(tau, plan.dbar(1) as usize, options.seed, options.bounds);
    let ops = plan_operators(plan, &chan)?;
    let beams = build_beams(plan, &ops, &bases);

    let alignment = check_alignment_numeric(plan, &ops, &beams);
    let tx = check_tx_rank(&beams, order)?;
    let rx = check_rx_separation(plan, options.mode, &chan, &beams, options.rank_tolerance);

    let verdict = verdict(&symbolic.pass, &alignment, &tx, &rx, &[], options);
    Ok(VerificationReport {
        spec: spec.clone(),
        point: point.clone(),
        l: plan.l,
        seed: options.seed,
        grouped: options.mode.is_grouped(),
        mode: AntennaMode::Single,
        symbolic_pass: symbolic.pass,
        alignment_residuals: alignment,
        tx_rank_margins: tx,
        rx_rank_margins: rx,
        diag_residuals: Vec::new(),
        dof_fractions: fractions(&beams, plan.tau, 1, order),
        verdict,
    })
}

fn verdict(
    symbolic: &bool,
    alignment: &[ConstraintResidual],
    tx: &[TxMargin],
    rx: &[RxMargin],
    diag: &[DiagResidual],
    options: &VerifyOptions,
) -> Verdict {
    let alignment_ok = alignment
        .iter()
        .all(|r| r.unmatched == 0 && r.residual < options.alignment_tolerance);
    let tx_ok = tx
        .iter()
        .all(|m| m.margin.is_none_or(|v| v > options.rank_tolerance));
    let rx_ok = rx.iter().all(|m| m.passes(options.rank_tolerance));
    let diag_ok = diag.iter().all(|d| d.residual < options.diagonal_tolerance);
    Verdict {
        symbolic: *symbolic,
        alignment: alignment_ok,
        tx_rank: tx_ok,
        rx_separation: rx_ok,
        diagonality: diag_ok,
        overall: *symbolic && alignment_ok && tx_ok && rx_ok && diag_ok,
    }
}

// Multi-antenna --------------------------------------------------------------

/// Operators for a multi-antenna plan, one per constraint, in constraint order.
pub fn multi_plan_operators(
    plan: &MultiBeamPlan,
    chan: &ChannelRealization,
) -> Result<Vec<AlignmentOperator>> {
    let order = &plan.integerized.order;
    let mut cache: HashMap<(usize, usize, usize, usize), Vec<AlignmentOperator>> = HashMap::new();
    plan.constraints
        .iter()
        .map(|c| {
            let key = (c.m, c.n, c.p, c.j);
            if let std::collections::hash_map::Entry::Vacant(slot) = cache.entry(key) {
                slot.insert(assemble_t_multi_blocks(
                    chan,
                    order[c.m - 1],
                    order[c.n - 1],
                    c.p,
                    c.j,
                )?);
            }
            Ok(cache[&key][c.q - 1].clone())
        })
        .collect()
}

pub fn build_multi_beams(
    plan: &MultiBeamPlan,
    ops: &[AlignmentOperator],
    bases: &BaseVectors,
) -> Beams {
    let tau = plan.tau as usize;
    beams_from(tau, &plan.columns, |col: &MultiColumn| {
        let factors: Vec<(&[Complex64], u32)> = plan.branch_constraints[col.branch - 1]
            .iter()
            .zip(&col.exponents)
            .map(|(&ci, &e)| (ops[ci].diag.as_slice(), e))
            .collect();
        monomial_column(tau, bases.get(col.base), &factors)
    })
}

pub fn check_multi_alignment_numeric(
    plan: &MultiBeamPlan,
    ops: &[AlignmentOperator],
    beams: &Beams,
) -> Vec<ConstraintResidual> {
    let order = &plan.integerized.order;
    let index: Vec<HashMap<&MultiColumn, usize>> = plan
        .columns
        .iter()
        .map(|cols| cols.iter().enumerate().map(|(i, c)| (c, i)).collect())
        .collect();
    let mut out = Vec::with_capacity(plan.constraints.len());
    for (ci, c) in plan.constraints.iter().enumerate() {
        let pos = plan.branch_constraints[c.q - 1]
            .iter()
            .position(|&x| x == ci)
            .expect("every constraint sits in its block's branch");
        let mut residual = 0.0f64;
        let mut unmatched = 0;
        for (col_idx, col) in plan.columns[c.n - 1].iter().enumerate() {
            if col.branch != c.q {
                continue;
            }
            let mut bumped = col.clone();
            bumped.exponents[pos] += 1;
            match index[c.m - 1].get(&bumped) {
                Some(&target_idx) => {
                    let v = column_slice(&beams.matrices[c.n - 1], col_idx);
                    let target = column_slice(&beams.matrices[c.m - 1], target_idx);
                    residual = residual.max(unit_residual(&ops[ci].diag, &v, &target));
                }
                None => unmatched += 1,
            }
        }
        out.push(ConstraintResidual {
            m: order[c.m - 1],
            n: order[c.n - 1],
            j: c.j,
            p: Some(c.p),
            q: Some(c.q),
            residual,
            unmatched,
        });
    }
    out
}

/// `H_jk,p V_k` for every antenna `p`, side by side: `M tau x M |V_k|`.
fn multi_image(chan: &ChannelRealization, j: usize, physical: usize, v: &CMatrix) -> CMatrix {
    let tau = v.nrows();
    let m = chan.antennas();
    let mut out = CMatrix::zeros(m * tau, m * v.ncols());
    for p in 0..m {
        for t in 0..tau {
            for r in 0..m {
                let h = chan.entry(j, physical, t, r, p);
                for c in 0..v.ncols() {
                    out[(r * tau + t, p * v.ncols() + c)] = h * v[(t, c)];
                }
            }
        }
    }
    out
}

/// Multi antenna: `rank [S_j I_j] = rank S_j + rank I_j`, measured as the
/// smallest singular value of the concatenated orthonormal bases.
pub fn check_multi_rx_separation(
    plan: &MultiBeamPlan,
    mode: ConstraintMode,
    chan: &ChannelRealization,
    beams: &Beams,
    tol: f64,
) -> Vec<RxMargin> {
    let spec = &plan.spec;
    let order = &plan.integerized.order;
    let rows = plan.antennas() * plan.tau as usize;
    (1..=spec.j())
        .map(|j| {
            let decoded = decoded_set(spec, mode, j);
            let signal = hstack(
                &decoded
                    .iter()
                    .map(|&k| multi_image(chan, j, order[k - 1], &beams.matrices[k - 1]))
                    .collect::<Vec<_>>(),
            );
            let interference_blocks: Vec<CMatrix> = (1..=spec.k())
                .filter(|k| !decoded.contains(k))
                .map(|k| normalize_columns(&multi_image(chan, j, order[k - 1], &beams.matrices[k - 1])))
                .collect();
            let interference_basis = if interference_blocks.is_empty() {
                CMatrix::zeros(rows, 0)
            } else {
                orthonormal_basis(&hstack(&interference_blocks), tol)
            };
            let interference_rank = interference_basis.ncols();
            let budget = rows.saturating_sub(signal.ncols());
            let signal_basis = orthonormal_basis(&normalize_columns(&signal), tol);
            let signal_rank = signal_basis.ncols();

            let (margin, precondition) = if signal.ncols() + interference_rank > rows {
                (
                    None,
                    Some(format!(
                        "dimension budget: {} signal columns plus interference rank {interference_rank} exceed {rows}",
                        signal.ncols()
                    )),
                )
            } else {
                (min_singular_value(&hstack(&[signal_basis, interference_basis])), None)
            };
            RxMargin {
                receiver: j,
                decoded: originals(order, &decoded),
                margin,
                signal_rank,
                interference_rank,
                interference_budget: budget,
                separation: margin,
                precondition,
            }
        })
        .collect()
}

/// Numeric checks for a multi-antenna plan. A singular stacked channel is
/// retried with up to [`SINGULAR_RETRIES`] fresh seeds; the report carries
/// the seed that was used.
pub fn verify_multi(
    spec: &DemandSpec,
    point: &DofPoint,
    plan: &MultiBeamPlan,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let tau = plan.tau as usize;
    let order = &plan.integerized.order;
    let symbolic = verify_multi_plan_symbolic(plan);

    let mut attempt = 0;
    let (seed, chan, ops) = loop {
        let seed = seed_for_attempt(options.seed, attempt);
        let chan = generate_channels_with(spec, tau, seed, options.bounds)?;
        match multi_plan_operators(plan, &chan) {
            Ok(ops) => break (seed, chan, ops),
            Err(Error::SingularChannel { .. }) if attempt < SINGULAR_RETRIES => attempt += 1,
            Err(Error::SingularChannel { .. }) => {
                return Err(Error::SingularChannel {
                    attempts: attempt + 1,
                })
            }
            Err(e) => return Err(e),
        }
    };
    let bases = generate_base_vectors_with(tau, plan.dbar(1) as usize, seed, options.bounds);
    let beams = build_multi_beams(plan, &ops, &bases);

    let alignment = check_multi_alignment_numeric(plan, &ops, &beams);
    let tx = check_tx_rank(&beams, order)?;
    let rx = check_multi_rx_separation(plan, options.mode, &chan, &beams, options.rank_tolerance);
    let diag: Vec<DiagResidual> = plan
        .constraints
        .iter()
        .zip(&ops)
        .map(|(c, op)| DiagResidual {
            m: order[c.m - 1],
            n: order[c.n - 1],
            p: c.p,
            q: c.q,
            j: c.j,
            residual: op.off_diagonal_residual,
        })
        .collect();

    let verdict = verdict(&symbolic.pass, &alignment, &tx, &rx, &diag, options);
    Ok(VerificationReport {
        spec: spec.clone(),
        point: point.clone(),
        l: plan.l,
        seed,
        grouped: options.mode.is_grouped(),
        mode: AntennaMode::Multi,
        symbolic_pass: symbolic.pass,
        alignment_residuals: alignment,
        tx_rank_margins: tx,
        rx_rank_margins: rx,
        diag_residuals: diag,
        dof_fractions: fractions(&beams, plan.tau, plan.antennas(), order),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> DemandSpec {
        DemandSpec::new(4, 1, vec![vec![1, 2], vec![2, 3], vec![3, 4]]).unwrap()
    }

    fn multi_example() -> DemandSpec {
        DemandSpec::new(3, 2, vec![vec![1], vec![2]]).unwrap()
    }

    fn options(l: u32, seed: u64) -> VerifyOptions {
        VerifyOptions {
            l,
            seed,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn worked_example_passes() {
        let point = DofPoint::parse("1/3,1/3,1/3,1/3").unwrap();
        let report = run_verification(&worked_example(), &point, &options(1, 42)).unwrap();
        assert!(report.passed(), "{}", report.to_json());
        assert_eq!(
            report
                .tx_rank_margins
                .iter()
                .map(|m| m.columns)
                .collect::<Vec<_>>(),
            vec![8, 4, 4, 1]
        );
        assert_eq!(
            report.dof_fractions,
            vec![rat(1, 3), rat(1, 6), rat(1, 6), rat(1, 24)]
        );
        assert!(report.max_alignment_residual() < 1e-10);
    }

    #[test]
    fn unequal_point_passes() {
        let point = DofPoint::parse("1/2,1/4,1/4,1/4").unwrap();
        for l in [1, 2] {
            let report = run_verification(&worked_example(), &point, &options(l, 7)).unwrap();
            assert!(report.passed(), "l={l}: {}", report.to_json());
        }
    }

    #[test]
    fn out_of_region_is_a_budget_error() {
        let point = DofPoint::parse("1/2,1/2,1/2,0").unwrap();
        let err = run_verification(&worked_example(), &point, &options(1, 42)).unwrap_err();
        assert!(matches!(err, Error::ColumnBudget { .. }), "{err:?}");
    }

    #[test]
    fn minimal_interference_channel() {
        let spec = DemandSpec::new(2, 1, vec![vec![1], vec![2]]).unwrap();
        let point = DofPoint::parse("1/2,1/2").unwrap();
        let report = run_verification(&spec, &point, &options(1, 42)).unwrap();
        assert!(report.passed(), "{}", report.to_json());
        assert!(report.alignment_residuals.is_empty());
    }

    #[test]
    fn single_column_margin_is_one() {
        let point = DofPoint::parse("1/3,1/3,1/3,1/3").unwrap();
        let report = run_verification(&worked_example(), &point, &options(1, 42)).unwrap();
        let last = report
            .tx_rank_margins
            .iter()
            .find(|m| m.transmitter == 4)
            .unwrap();
        assert!((last.margin.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tampered_plan_fails_alignment() {
        let spec = worked_example();
        let point = DofPoint::parse("1/3,1/3,1/3,1/3").unwrap();
        let ip = integerize(&point).unwrap();
        let relabeled = ip.relabel(&spec);
        let constraints = build_constraints(&relabeled, ConstraintMode::Full);
        let mut plan = build_plan(&relabeled, &ip, 1, constraints, DEFAULT_TAU_CAP).unwrap();
        // Cap transmitter 3 one below its window on a constraint it is not bounded by.
        plan.columns[2].retain(|col| col.exponents[0] < plan.l);
        let report = verify_single(&spec, &point, &plan, &options(1, 42)).unwrap();
        assert!(!report.verdict.symbolic);
        assert!(!report.verdict.alignment);
        assert!(!report.passed());
    }

    #[test]
    fn duplicated_column_has_zero_margin() {
        let spec = worked_example();
        let point = DofPoint::parse("1/3,1/3,1/3,1/3").unwrap();
        let ip = integerize(&point).unwrap();
        let relabeled = ip.relabel(&spec);
        let plan = build_plan(
            &relabeled,
            &ip,
            1,
            build_constraints(&relabeled, ConstraintMode::Grouped),
            DEFAULT_TAU_CAP,
        )
        .unwrap();
        let tau = plan.tau as usize;
        let chan = generate_channels_with(&spec, tau, 1, MagnitudeBounds::default()).unwrap();
        let bases = generate_base_vectors_with(tau, 1, 1, MagnitudeBounds::default());
        let ops = plan_operators(&plan, &chan).unwrap();
        let mut beams = build_beams(&plan, &ops, &bases);
        let v = &beams.matrices[1];
        let dup = hstack(&[v.clone(), v.columns(0, 1).into_owned()]);
        beams.matrices[1] = dup;
        let tx = check_tx_rank(&beams, &ip.order).unwrap();
        assert!(tx[1].margin.unwrap() < 1e-12);
    }

    #[test]
    fn empty_plan_columns_match_bases() {
        let spec = DemandSpec::new(2, 1, vec![vec![1], vec![2]]).unwrap();
        let point = DofPoint::parse("1/2,1/2").unwrap();
        let ip = integerize(&point).unwrap();
        let relabeled = ip.relabel(&spec);
        let plan = build_plan(
            &relabeled,
            &ip,
            1,
            build_constraints(&relabeled, ConstraintMode::Full),
            DEFAULT_TAU_CAP,
        )
        .unwrap();
        assert_eq!(plan.gamma(), 0);
        let chan = generate_channels_with(&spec, plan.tau as usize, 3, MagnitudeBounds::default())
            .unwrap();
        let bases = generate_base_vectors_with(plan.tau as usize, 1, 3, MagnitudeBounds::default());
        let beams = build_beams(&plan, &plan_operators(&plan, &chan).unwrap(), &bases);
        let w = bases.get(1);
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for k in 0..2 {
            for (a, b) in beams.matrices[k].column(0).iter().zip(w) {
                assert!((a - b / norm).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn multi_antenna_passes() {
        let point = DofPoint::parse("1/4,1/4,1/4").unwrap();
        let report = run_verification(&multi_example(), &point, &options(1, 1)).unwrap();
        assert_eq!(report.mode, AntennaMode::Multi);
        assert!(report.passed(), "{}", report.to_json());
        assert_eq!(report.diag_residuals.len(), 8);
        assert!(report.max_diag_residual() < 1e-9);
        assert_eq!(report.dof_fractions, vec![rat(1, 4), rat(1, 4), rat(1, 64)]);
        for rx in &report.rx_rank_margins {
            assert_eq!(rx.signal_rank, 64);
        }
    }

    #[test]
    fn antenna_override_must_match() {
        let point = DofPoint::parse("1/3,1/3,1/3,1/3").unwrap();
        let mut opts = options(1, 42);
        opts.antenna_mode = Some(AntennaMode::Multi);
        let err = run_verification(&worked_example(), &point, &opts).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }

    #[test]
    fn report_json_uses_camel_case() {
        let point = DofPoint::parse("1/3,1/3,1/3,1/3").unwrap();
        let report = run_verification(&worked_example(), &point, &options(1, 42)).unwrap();
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        for key in [
            "spec",
            "point",
            "l",
            "seed",
            "grouped",
            "mode",
            "symbolicPass",
            "alignmentResiduals",
            "txRankMargins",
            "rxRankMargins",
            "diagResiduals",
            "dofFractions",
            "verdict",
        ] {
            assert!(value.get(key).is_some(), "missing {key}");
        }
        assert_eq!(value["dofFractions"][3], "1/24");
        assert_eq!(
            report.to_json(),
            run_verification(&worked_example(), &point, &options(1, 42))
                .unwrap()
                .to_json()
        );
    }

    use crate::rational::rat;
}
