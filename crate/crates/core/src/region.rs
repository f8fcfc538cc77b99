//! The DoF region as an exact polytope of simplex-form half-spaces
//! `sum_{i in S} d_i <= M`.
//!
//! Receiver `j` bounds `sum_{k in M_j} d_k + max_{i in M_j^c} d_i` by `M`;
//! expanding the `max` gives one half-space per undesired message `i`, with
//! support `M_j + {i}`. A receiver that wants every message contributes its
//! own demand set as support (an empty max counts as zero).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::demand::{compute_grouping, DemandSpec, IndexSet};
use crate::error::{Error, Result};
use crate::rational::{serde_rational_vec, DofPoint, Rational};
use crate::simplex::{self, LpOutcome};
use crate::vertex::{enumerate_vertices_with_limit, DEFAULT_ENUMERATION_LIMIT};

/// Which receiver (and which undesired message, if any) produced a half-space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Provenance {
    pub receiver: usize,
    pub excluded: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Inequality {
    pub support: IndexSet,
    pub bound: usize,
    pub provenance: Vec<Provenance>,
}

impl Inequality {
    pub fn lhs(&self, point: &DofPoint) -> Rational {
        self.support
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + point.get(i))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionDescription {
    pub spec: DemandSpec,
    pub inequalities: Vec<Inequality>,
}

/// Every expanded half-space, one per (receiver, undesired message), before
/// deduplication.
pub fn raw_expansion(spec: &DemandSpec) -> Vec<Inequality> {
    let mut out = Vec::new();
    for j in 1..=spec.j() {
        let demand = spec.demand(j);
        let complement = spec.complement(j);
        if complement.is_empty() {
            out.push(Inequality {
                support: demand.clone(),
                bound: spec.m(),
                provenance: vec![Provenance {
                    receiver: j,
                    excluded: None,
                }],
            });
        }
        for &i in &complement {
            let mut support = demand.clone();
            support.insert(i);
            out.push(Inequality {
                support,
                bound: spec.m(),
                provenance: vec![Provenance {
                    receiver: j,
                    excluded: Some(i),
                }],
            });
        }
    }
    out
}

/// Half-spaces deduplicated by support, in order of first appearance.
pub fn expand_region(spec: &DemandSpec) -> RegionDescription {
    let mut inequalities: Vec<Inequality> = Vec::new();
    let mut seen: BTreeMap<IndexSet, usize> = BTreeMap::new();
    for ineq in raw_expansion(spec) {
        match seen.get(&ineq.support) {
            Some(&pos) => inequalities[pos].provenance.extend(ineq.provenance),
            None => {
                seen.insert(ineq.support.clone(), inequalities.len());
                inequalities.push(ineq);
            }
        }
    }
    RegionDescription {
        spec: spec.clone(),
        inequalities,
    }
}

/// Result of a membership query. Supports are listed in region order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub inside: bool,
    pub tight: Vec<IndexSet>,
    pub violated: Vec<IndexSet>,
    #[serde(with = "serde_rational_vec")]
    pub slacks: Vec<Rational>,
}

impl RegionDescription {
    pub fn k(&self) -> usize {
        self.spec.k()
    }

    pub fn bound(&self) -> usize {
        self.spec.m()
    }

    pub fn supports(&self) -> Vec<IndexSet> {
        self.inequalities
            .iter()
            .map(|i| i.support.clone())
            .collect()
    }

    pub fn contains(&self, point: &DofPoint) -> Result<Membership> {
        if point.dim() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: point.dim(),
            });
        }
        let mut tight = Vec::new();
        let mut violated = Vec::new();
        let mut slacks = Vec::with_capacity(self.inequalities.len());
        for ineq in &self.inequalities {
            let slack = Rational::from_integer(BigInt::from(ineq.bound)) - ineq.lhs(point);
            if slack.is_zero() {
                tight.push(ineq.support.clone());
            } else if slack.is_negative() {
                violated.push(ineq.support.clone());
            }
            slacks.push(slack);
        }
        Ok(Membership {
            inside: violated.is_empty(),
            tight,
            violated,
            slacks,
        })
    }

    /// Drops every half-space whose support is strictly contained in another
    /// support: with `d >= 0` and equal bounds the larger one implies it.
    /// Supports are returned sorted.
    pub fn irredundant_supports(&self) -> Vec<IndexSet> {
        let supports = self.supports();
        let mut kept: Vec<IndexSet> = supports
            .iter()
            .filter(|s| !supports.iter().any(|o| o.len() > s.len() && s.is_subset(o)))
            .cloned()
            .collect();
        kept.sort();
        kept.dedup();
        kept
    }

    /// Constraint matrix and right-hand side of the half-spaces (nonnegativity
    /// excluded), as exact rationals.
    pub fn constraint_rows(&self) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let k = self.k();
        let rows = self
            .inequalities
            .iter()
            .map(|ineq| {
                (1..=k)
                    .map(|i| {
                        if ineq.support.contains(&i) {
                            Rational::from_integer(1.into())
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let rhs = self
            .inequalities
            .iter()
            .map(|ineq| Rational::from_integer(BigInt::from(ineq.bound)))
            .collect();
        (rows, rhs)
    }
}

/// The region built from the prime receivers alone.
pub fn prime_region(spec: &DemandSpec) -> RegionDescription {
    let grouping = compute_grouping(spec);
    expand_region(&spec.restricted_to(&grouping.primes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxSum {
    #[serde(with = "crate::rational::serde_rational")]
    pub total: Rational,
    pub argmax: DofPoint,
    pub method: LpMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpMethod {
    Vertices,
    Simplex,
}

/// Maximum total DoF. Uses the vertex list when `K` is within the
/// enumeration limit (ties go to the lexicographically largest vertex), and
/// the exact simplex otherwise.
pub fn max_sum_dof(region: &RegionDescription) -> MaxSum {
    max_sum_dof_with_limit(region, DEFAULT_ENUMERATION_LIMIT)
}

pub fn max_sum_dof_with_limit(region: &RegionDescription, limit: usize) -> MaxSum {
    if let Ok(vertices) = enumerate_vertices_with_limit(region, limit) {
        let best = vertices
            .vertices
            .iter()
            .max_by(|a, b| a.sum().cmp(&b.sum()).then_with(|| a.cmp(b)))
            .expect("origin is always a vertex");
        return MaxSum {
            total: best.sum(),
            argmax: best.clone(),
            method: LpMethod::Vertices,
        };
    }
    max_sum_dof_simplex(region)
}

pub fn max_sum_dof_simplex(region: &RegionDescription) -> MaxSum {
    let (rows, rhs) = region.constraint_rows();
    let ones = vec![Rational::from_integer(1.into()); region.k()];
    match simplex::maximize(&ones, &rows, &rhs) {
        LpOutcome::Optimal { value, x } => MaxSum {
            total: value,
            argmax: DofPoint::new(x).expect("simplex keeps x >= 0"),
            method: LpMethod::Simplex,
        },
        // Every d_k appears in some support with a finite bound.
        LpOutcome::Unbounded => unreachable!("DoF region is bounded"),
    }
}

/// Total DoF `MK/(beta+1)` when every prime receiver wants `beta` messages and
/// every message is wanted by equally many prime receivers.
pub fn symmetric_total(k: usize, m: usize, beta: usize) -> Result<Rational> {
    if beta < 1 || beta + 1 > k {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in 1..={}, got {beta}",
            k.saturating_sub(1)
        )));
    }
    Ok(Rational::new(BigInt::from(m * k), BigInt::from(beta + 1)))
}

/// Time-sharing weights over `(M, 0, .., 0)`, `(M/2, .., M/2)` and the
/// origin that reach `(d1, d2, d2, .., d2)` in the interference channel.
pub fn ic_timeshare_weights(d1: &Rational, d2: &Rational, m: usize) -> Result<[Rational; 3]> {
    let m_rat = Rational::from_integer(BigInt::from(m));
    if m == 0 || d2.is_negative() || d1 < d2 || d1 + d2 > m_rat {
        return Err(Error::InvalidParameter(format!(
            "need d1 >= d2 >= 0 and d1 + d2 <= M, got d1={d1}, d2={d2}, M={m}"
        )));
    }
    let one = Rational::from_integer(1.into());
    Ok([
        (d1 - d2) / &m_rat,
        Rational::from_integer(2.into()) * d2 / &m_rat,
        one - d1 / &m_rat - d2 / &m_rat,
    ])
}
