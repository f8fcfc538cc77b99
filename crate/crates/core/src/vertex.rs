//! Exact vertex enumeration for the DoF polytope.
//!
//! Every vertex is a basic feasible solution: pick `K` linearly independent
//! rows from the half-spaces and the coordinate planes `d_k = 0`, solve them
//! as equalities and keep the solution if it satisfies everything else. The
//! search walks row subsets depth-first while keeping the chosen rows in
//! echelon form, so a dependent row prunes its whole subtree.
//!
//! Coefficients are 0/1 and bounds are `M`, so `i128` rationals cannot
//! overflow at the sizes the enumeration limit allows.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{DofPoint, Rational};
use crate::region::RegionDescription;

pub const DEFAULT_ENUMERATION_LIMIT: usize = 8;

type Q = Ratio<i128>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VertexSet {
    pub vertices: Vec<DofPoint>,
    /// `C(R, K)` with `R` the deduplicated half-spaces plus the `K` coordinate planes.
    pub basic_solution_bound: u128,
    /// `C(J(K-1)+K, K)`, the count over the raw expansion.
    pub raw_expansion_bound: u128,
    /// Nonsingular row subsets actually solved.
    pub bases_solved: u64,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, point: &DofPoint) -> bool {
        self.vertices.binary_search(point).is_ok()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

struct Row {
    coeffs: Vec<Q>,
    rhs: Q,
    /// Coordinate plane `d_k = 0`; only ever used as an equality.
    plane: bool,
}

struct EchelonRow {
    coeffs: Vec<Q>,
    rhs: Q,
    pivot: usize,
}

fn rows_of(region: &RegionDescription) -> Vec<Row> {
    let k = region.k();
    let mut rows: Vec<Row> = region
        .inequalities
        .iter()
        .map(|ineq| Row {
            coeffs: (1..=k)
                .map(|i| Q::from_integer(ineq.support.contains(&i) as i128))
                .collect(),
            rhs: Q::from_integer(ineq.bound as i128),
            plane: false,
        })
        .collect();
    rows.extend((0..k).map(|axis| {
        Row {
            coeffs: (0..k)
                .map(|i| Q::from_integer((i == axis) as i128))
                .collect(),
            rhs: Q::zero(),
            plane: true,
        }
    }));
    rows
}

fn reduce(row: &Row, echelon: &[EchelonRow]) -> Option<EchelonRow> {
    let mut coeffs = row.coeffs.clone();
    let mut rhs = row.rhs;
    for e in echelon {
        let factor = coeffs[e.pivot] / e.coeffs[e.pivot];
        if factor.is_zero() {
            continue;
        }
        for (c, ec) in coeffs.iter_mut().zip(&e.coeffs) {
            *c -= factor * ec;
        }
        rhs -= factor * e.rhs;
    }
    let pivot = coeffs.iter().position(|c| !c.is_zero())?;
    Some(EchelonRow { coeffs, rhs, pivot })
}

fn solve(echelon: &[EchelonRow], k: usize) -> Vec<Q> {
    let mut x = vec![Q::zero(); k];
    for e in echelon.iter().rev() {
        let mut acc = e.rhs;
        for (col, c) in e.coeffs.iter().enumerate() {
            if col != e.pivot && !c.is_zero() {
                acc -= c * x[col];
            }
        }
        x[e.pivot] = acc / e.coeffs[e.pivot];
    }
    x
}

fn feasible(rows: &[Row], x: &[Q]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows.iter().filter(|row| !row.plane).all(|row| {
            let lhs = row
                .coeffs
                .iter()
                .zip(x)
                .fold(Q::zero(), |acc, (c, v)| acc + c * v);
            lhs <= row.rhs
        })
}

struct Search<'a> {
    rows: &'a [Row],
    k: usize,
    echelon: Vec<EchelonRow>,
    found: BTreeSet<Vec<Q>>,
    solved: u64,
}

impl Search<'_> {
    fn descend(&mut self, start: usize) {
        if self.echelon.len() == self.k {
            self.solved += 1;
            let x = solve(&self.echelon, self.k);
            if feasible(self.rows, &x) {
                self.found.insert(x);
            }
            return;
        }
        let needed = self.k - self.echelon.len();
        for idx in start..self.rows.len() {
            if self.rows.len() - idx < needed {
                break;
            }
            if let Some(reduced) = reduce(&self.rows[idx], &self.echelon) {
                self.echelon.push(reduced);
                self.descend(idx + 1);
                self.echelon.pop();
            }
        }
    }
}

fn to_big(q: &Q) -> Rational {
    Rational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

pub fn enumerate_vertices(region: &RegionDescription) -> Result<VertexSet> {
    enumerate_vertices_with_limit(region, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_vertices_with_limit(
    region: &RegionDescription,
    limit: usize,
) -> Result<VertexSet> {
    let k = region.k();
    if k > limit {
        return Err(Error::EnumerationLimit { k, limit });
    }
    let rows = rows_of(region);
    let mut search = Search {
        rows: &rows,
        k,
        echelon: Vec::with_capacity(k),
        found: BTreeSet::new(),
        solved: 0,
    };
    search.descend(0);

    let mut vertices: Vec<DofPoint> = search
        .found
        .iter()
        .map(|x| {
            DofPoint::new(x.iter().map(to_big).collect()).expect("feasible points are nonnegative")
        })
        .collect();
    vertices.sort();
    let j = region.spec.j();
    Ok(VertexSet {
        vertices,
        basic_solution_bound: binomial(rows.len(), k),
        raw_expansion_bound: binomial(j * (k - 1) + k, k),
        bases_solved: search.solved,
    })
}

/// Rank of the constraints (half-spaces and coordinate planes) that hold
/// with equality at `point`.
pub fn tight_rank(region: &RegionDescription, point: &DofPoint) -> usize {
    let rows = rows_of(region);
    let x: Vec<Rational> = point.components().to_vec();
    let mut echelon: Vec<EchelonRow> = Vec::new();
    for row in &rows {
        let lhs = row
            .coeffs
            .iter()
            .zip(&x)
            .fold(Rational::zero(), |acc, (c, v)| acc + to_big(c) * v);
        if lhs == to_big(&row.rhs) {
            if let Some(reduced) = reduce(row, &echelon) {
                echelon.push(reduced);
            }
        }
    }
    echelon.len()
}
