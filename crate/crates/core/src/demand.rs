//! Network instances: who sends what, who wants what.
//!
//! Message and receiver indices are 1-based everywhere, in memory and in
//! every document.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type IndexSet = BTreeSet<usize>;

/// `K` transmitters (one message each), `J = demands.len()` receivers, `M`
/// antennas per node, and the message set each receiver requests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandSpec {
    k: usize,
    m: usize,
    demands: Vec<IndexSet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDocument {
    #[serde(rename = "K")]
    k: i64,
    #[serde(rename = "M")]
    m: i64,
    demands: Vec<Vec<i64>>,
}

impl DemandSpec {
    pub fn new(k: usize, m: usize, demands: Vec<Vec<usize>>) -> Result<Self> {
        let raw = demands
            .into_iter()
            .map(|d| d.into_iter().map(|i| i as i64).collect())
            .collect();
        Self::validate(k as i64, m as i64, raw)
    }

    fn validate(k: i64, m: i64, demands: Vec<Vec<i64>>) -> Result<Self> {
        if k < 1 {
            return Err(Error::NonPositive {
                field: "K",
                value: k,
            });
        }
        if m < 1 {
            return Err(Error::NonPositive {
                field: "M",
                value: m,
            });
        }
        if demands.is_empty() {
            return Err(Error::NonPositive {
                field: "J",
                value: 0,
            });
        }
        let k = k as usize;
        let mut sets = Vec::with_capacity(demands.len());
        for (pos, demand) in demands.into_iter().enumerate() {
            let receiver = pos + 1;
            if demand.is_empty() {
                return Err(Error::EmptyDemand { receiver });
            }
            let mut set = IndexSet::new();
            for index in demand {
                if index < 1 || index as u64 > k as u64 {
                    return Err(Error::IndexOutOfRange { receiver, index, k });
                }
                set.insert(index as usize);
            }
            sets.push(set);
        }
        Ok(DemandSpec {
            k,
            m: m as usize,
            demands: sets,
        })
    }

    /// Parses the JSON demand-spec document `{"K": .., "M": .., "demands": [[..], ..]}`.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::validate(doc.k, doc.m, doc.demands)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialises")
    }

    /// Multiple-unicast interference channel: `J = K`, receiver `j` wants message `j`.
    pub fn interference_channel(k: usize, m: usize) -> Result<Self> {
        Self::new(k, m, (1..=k).map(|j| vec![j]).collect())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn j(&self) -> usize {
        self.demands.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn demands(&self) -> &[IndexSet] {
        &self.demands
    }

    /// Demand set of receiver `j` (1-based).
    pub fn demand(&self, j: usize) -> &IndexSet {
        &self.demands[j - 1]
    }

    pub fn complement(&self, j: usize) -> IndexSet {
        let demand = self.demand(j);
        (1..=self.k).filter(|i| !demand.contains(i)).collect()
    }

    /// Keeps only the listed receivers (1-based), in the given order.
    pub fn restricted_to(&self, receivers: &[usize]) -> DemandSpec {
        DemandSpec {
            k: self.k,
            m: self.m,
            demands: receivers.iter().map(|&j| self.demand(j).clone()).collect(),
        }
    }

    /// Renames messages: `order[r]` is the original index that becomes message `r + 1`.
    pub fn relabeled(&self, order: &[usize]) -> DemandSpec {
        assert_eq!(order.len(), self.k, "relabeling must cover every message");
        let mut new_index = vec![0usize; self.k + 1];
        for (pos, &original) in order.iter().enumerate() {
            new_index[original] = pos + 1;
        }
        DemandSpec {
            k: self.k,
            m: self.m,
            demands: self
                .demands
                .iter()
                .map(|set| set.iter().map(|&i| new_index[i]).collect())
                .collect(),
        }
    }

    /// Same demands with a different antenna count.
    pub fn with_antennas(&self, m: usize) -> Result<DemandSpec> {
        if m < 1 {
            return Err(Error::NonPositive {
                field: "M",
                value: m as i64,
            });
        }
        Ok(DemandSpec { m, ..self.clone() })
    }
}

impl Serialize for DemandSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecDocument {
            k: self.k as i64,
            m: self.m as i64,
            demands: self
                .demands
                .iter()
                .map(|d| d.iter().map(|&i| i as i64).collect())
                .collect(),
        }
        .serialize(s)
    }
}

/// Per-receiver view used by the region and the alignment plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReceiverMeta {
    pub receiver: usize,
    pub complement: IndexSet,
    /// Smallest undesired index; the dominant interferer once messages are
    /// sorted by nonincreasing DoF. `None` for receivers that want everything.
    pub delta: Option<usize>,
    pub demand_size: usize,
}

pub fn receiver_meta(spec: &DemandSpec) -> Vec<ReceiverMeta> {
    (1..=spec.j())
        .map(|j| {
            let complement = spec.complement(j);
            ReceiverMeta {
                receiver: j,
                delta: complement.iter().next().copied(),
                complement,
                demand_size: spec.demand(j).len(),
            }
        })
        .collect()
}

/// Receivers grouped under the maximal elements of the demand-set poset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Grouping {
    #[serde(rename = "G")]
    pub g: usize,
    pub maximal_sets: Vec<IndexSet>,
    /// `assignment[j - 1]` is the 1-based group of receiver `j`.
    pub assignment: Vec<usize>,
    /// `primes[g - 1]` is the prime receiver of group `g`.
    pub primes: Vec<usize>,
}

impl Grouping {
    pub fn is_prime(&self, receiver: usize) -> bool {
        self.primes.contains(&receiver)
    }

    pub fn group_of(&self, receiver: usize) -> usize {
        self.assignment[receiver - 1]
    }

    pub fn prime_of(&self, receiver: usize) -> usize {
        self.primes[self.group_of(receiver) - 1]
    }
}

/// Groups are numbered in order of their prime receiver. A prime is the
/// lowest-indexed receiver holding a maximal set; a non-maximal receiver
/// joins the lexicographically smallest maximal superset.
pub fn compute_grouping(spec: &DemandSpec) -> Grouping {
    let demands = spec.demands();
    let is_maximal = |set: &IndexSet| {
        !demands
            .iter()
            .any(|other| other.len() > set.len() && set.is_subset(other))
    };

    let mut maximal_sets: Vec<IndexSet> = Vec::new();
    let mut primes = Vec::new();
    for (pos, set) in demands.iter().enumerate() {
        if is_maximal(set) && !maximal_sets.contains(set) {
            maximal_sets.push(set.clone());
            primes.push(pos + 1);
        }
    }

    let assignment = demands
        .iter()
        .map(|set| {
            if let Some(g) = maximal_sets.iter().position(|m| m == set) {
                return g + 1;
            }
            maximal_sets
                .iter()
                .enumerate()
                .filter(|(_, m)| set.is_subset(m))
                .min_by(|(_, a), (_, b)| a.iter().cmp(b.iter()))
                .map(|(g, _)| g + 1)
                .expect("finite poset: every set lies below a maximal element")
        })
        .collect();

    Grouping {
        g: maximal_sets.len(),
        maximal_sets,
        assignment,
        primes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[usize]) -> IndexSet {
        items.iter().copied().collect()
    }

    fn worked_example() -> DemandSpec {
        DemandSpec::new(4, 1, vec![vec![1, 2], vec![2, 3], vec![3, 4]]).unwrap()
    }

    fn example_one() -> DemandSpec {
        DemandSpec::new(
            4,
            1,
            vec![vec![1, 2], vec![2], vec![2, 3], vec![2, 3], vec![1, 4]],
        )
        .unwrap()
    }

    #[test]
    fn parses_worked_example_document() {
        let spec =
            DemandSpec::parse(r#"{"K": 4, "M": 1, "demands": [[1,2],[2,3],[3,4]]}"#).unwrap();
        assert_eq!((spec.k(), spec.j(), spec.m()), (4, 3, 1));
        assert_eq!(spec, worked_example());
    }

    #[test]
    fn parses_minimal_document() {
        let spec = DemandSpec::parse(r#"{"K": 1, "M": 1, "demands": [[1]]}"#).unwrap();
        assert_eq!((spec.k(), spec.j(), spec.m()), (1, 1, 1));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 2, "M": 1, "demands": [[0,2]]}"#),
            Err(Error::IndexOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 2, "M": 1, "demands": [[3]]}"#),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 2, "M": 1, "demands": [[1],[]]}"#),
            Err(Error::EmptyDemand { receiver: 2 })
        ));
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 0, "M": 1, "demands": [[1]]}"#),
            Err(Error::NonPositive { field: "K", .. })
        ));
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 2, "M": -1, "demands": [[1]]}"#),
            Err(Error::NonPositive { field: "M", .. })
        ));
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 2, "M": 1, "demands": []}"#),
            Err(Error::NonPositive { field: "J", .. })
        ));
        assert!(matches!(
            DemandSpec::parse(r#"{"K": 2, "demands": [[1]]}"#),
            Err(Error::Malformed(_))
        ));
        assert!(matches!(
            DemandSpec::parse("not json"),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn document_round_trips() {
        let spec = example_one();
        assert_eq!(DemandSpec::parse(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn meta_for_worked_example() {
        let meta = receiver_meta(&worked_example());
        assert_eq!(meta[0].complement, set(&[3, 4]));
        assert_eq!(meta[0].delta, Some(3));
        assert_eq!(meta[1].complement, set(&[1, 4]));
        assert_eq!(meta[1].delta, Some(1));
        assert_eq!(meta[2].delta, Some(1));
        assert_eq!(meta[0].demand_size, 2);
    }

    #[test]
    fn full_demand_receiver_has_no_delta() {
        let spec = DemandSpec::new(2, 1, vec![vec![1, 2]]).unwrap();
        let meta = receiver_meta(&spec);
        assert!(meta[0].complement.is_empty());
        assert_eq!(meta[0].delta, None);
    }

    #[test]
    fn grouping_of_example_one() {
        let g = compute_grouping(&example_one());
        assert_eq!(g.g, 3);
        assert_eq!(
            g.maximal_sets,
            vec![set(&[1, 2]), set(&[2, 3]), set(&[1, 4])]
        );
        assert_eq!(g.primes, vec![1, 3, 5]);
        // receiver 2 ({2}) sits below {1,2} and {2,3}; {1,2} wins the tie.
        assert_eq!(g.assignment, vec![1, 1, 2, 2, 3]);
    }

    #[test]
    fn incomparable_sets_are_all_prime() {
        let g = compute_grouping(&DemandSpec::interference_channel(3, 1).unwrap());
        assert_eq!(g.g, 3);
        assert_eq!(g.primes, vec![1, 2, 3]);
    }

    #[test]
    fn duplicate_sets_share_one_prime() {
        let g = compute_grouping(&DemandSpec::new(2, 1, vec![vec![1], vec![1]]).unwrap());
        assert_eq!(g.g, 1);
        assert_eq!(g.primes, vec![1]);
        assert_eq!(g.assignment, vec![1, 1]);
    }

    #[test]
    fn relabel_moves_indices() {
        let spec = worked_example().relabeled(&[2, 1, 3, 4]);
        assert_eq!(spec.demand(1), &set(&[1, 2]));
        assert_eq!(spec.demand(2), &set(&[1, 3]));
    }

    fn arb_spec() -> impl Strategy<Value = DemandSpec> {
        (1usize..=5, 1usize..=6).prop_flat_map(|(k, j)| {
            proptest::collection::vec(proptest::collection::btree_set(1..=k, 1..=k), j).prop_map(
                move |sets| {
                    DemandSpec::new(
                        k,
                        1,
                        sets.into_iter().map(|s| s.into_iter().collect()).collect(),
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn delta_is_min_of_complement(spec in arb_spec()) {
            for meta in receiver_meta(&spec) {
                match meta.delta {
                    Some(d) => {
                        prop_assert!(meta.complement.contains(&d));
                        prop_assert!(meta.complement.iter().all(|&k| d <= k));
                    }
                    None => prop_assert_eq!(spec.demand(meta.receiver).len(), spec.k()),
                }
            }
        }

        #[test]
        fn grouping_invariants(spec in arb_spec()) {
            let g = compute_grouping(&spec);
            prop_assert_eq!(g.assignment.len(), spec.j());
            prop_assert_eq!(g.primes.len(), g.g);
            for (pos, group) in g.assignment.iter().enumerate() {
                prop_assert!(spec.demands()[pos].is_subset(&g.maximal_sets[group - 1]));
            }
            for (idx, &p) in g.primes.iter().enumerate() {
                prop_assert_eq!(spec.demand(p), &g.maximal_sets[idx]);
            }
            for j in 1..=spec.j() {
                let strictly_below = spec
                    .demands()
                    .iter()
                    .any(|o| o.len() > spec.demand(j).len() && spec.demand(j).is_subset(o));
                if strictly_below {
                    prop_assert!(!g.is_prime(j));
                }
            }
            prop_assert_eq!(compute_grouping(&spec), g);
        }
    }
}
