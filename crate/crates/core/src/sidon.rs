//! Sidon pruning.
//!
//! An element `b` of `A` is a violation if `b + a' = a'' + a'''` for some
//! `a', a'', a''' ∈ A` all smaller than `b` (repeats allowed, e.g. `3 + 1 = 2 + 2`).
//! Removing every violation in one pass leaves a Sidon set: in any equality
//! `w + x = y + z` between two different pairs the largest of the four terms
//! appears only once and is a violation witnessed by the other three.

use std::collections::HashMap;

use serde::Serialize;

/// Witness `member + smaller = pair.0 + pair.1` with `smaller, pair.0, pair.1 < member`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ViolationWitness {
    pub member: u64,
    pub smaller: u64,
    pub pair: (u64, u64),
}

impl ViolationWitness {
    pub fn is_valid_in(&self, set: &[u64]) -> bool {
        let b = self.member;
        let (x, y) = self.pair;
        let has = |v: u64| set.binary_search(&v).is_ok();
        has(b)
            && has(self.smaller)
            && has(x)
            && has(y)
            && self.smaller < b
            && x < b
            && y < b
            && b + self.smaller == x + y
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ViolationSet {
    /// Violating elements in increasing order.
    pub elements: Vec<u64>,
    /// One witness per element, aligned with `elements`.
    pub witnesses: Vec<ViolationWitness>,
}

impl ViolationSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, b: u64) -> bool {
        self.elements.binary_search(&b).is_ok()
    }

    pub fn witness(&self, b: u64) -> Option<&ViolationWitness> {
        self.elements.binary_search(&b).ok().map(|i| &self.witnesses[i])
    }
}

/// For every pair sum, the pair `(x, y)`, `x <= y`, with the smallest `y`.
fn lowest_pairs(set: &[u64]) -> HashMap<u64, (u64, u64)> {
    let mut best: HashMap<u64, (u64, u64)> = HashMap::with_capacity(set.len() * (set.len() + 1) / 2);
    for (j, &y) in set.iter().enumerate() {
        for &x in &set[..=j] {
            // y increases through the outer loop, so the first pair seen wins.
            best.entry(x + y).or_insert((x, y));
        }
    }
    best
}

/// The violation set `B` of a strictly increasing set `A`.
pub fn violating_set(set: &[u64]) -> ViolationSet {
    let pairs = lowest_pairs(set);
    let mut out = ViolationSet::default();
    for (i, &b) in set.iter().enumerate() {
        let found = set[..i].iter().find_map(|&a| {
            pairs
                .get(&(b + a))
                .filter(|&&(_, y)| y < b)
                .map(|&pair| ViolationWitness {
                    member: b,
                    smaller: a,
                    pair,
                })
        });
        if let Some(w) = found {
            out.elements.push(b);
            out.witnesses.push(w);
        }
    }
    out
}

/// `A \ B`.
pub fn prune(set: &[u64]) -> Vec<u64> {
    let b = violating_set(set);
    set.iter().copied().filter(|&x| !b.contains(x)).collect()
}

/// `A \ B` together with `B`.
pub fn prune_with_violations(set: &[u64]) -> (Vec<u64>, ViolationSet) {
    let b = violating_set(set);
    let kept = set.iter().copied().filter(|&x| !b.contains(x)).collect();
    (kept, b)
}

/// Whether all sums `a + b`, `a <= b`, are distinct.
pub fn is_sidon(set: &[u64]) -> bool {
    first_violation(set).is_none()
}

/// Smallest `n` with two different representations `n = a + b`, `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SidonViolation {
    pub sum: u64,
    pub first: (u64, u64),
    pub second: (u64, u64),
}

/// The smallest repeated pair sum with its two lexicographically first pairs.
pub fn first_violation(set: &[u64]) -> Option<SidonViolation> {
    let mut seen: HashMap<u64, (u64, u64)> = HashMap::with_capacity(set.len() * (set.len() + 1) / 2);
    let mut best: Option<SidonViolation> = None;
    for (i, &x) in set.iter().enumerate() {
        for &y in &set[i..] {
            let s = x + y;
            if best.is_some_and(|b| s >= b.sum) {
                // Sums only grow along this row.
                break;
            }
            match seen.get(&s) {
                Some(&first) => {
                    best = Some(SidonViolation {
                        sum: s,
                        first,
                        second: (x, y),
                    })
                }
                None => {
                    seen.insert(s, (x, y));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repcount::{rep_table, Order};
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        assert!(violating_set(&[1, 2, 5, 11]).is_empty());
        let b = violating_set(&[1, 2, 3, 4]);
        assert_eq!(b.elements, vec![3, 4]);
        assert_eq!(b.witness(3).unwrap().pair, (2, 2));
        assert_eq!(b.witness(4).unwrap().pair, (2, 3));
        assert!(violating_set(&[]).is_empty());
        assert!(violating_set(&[7]).is_empty());

        assert_eq!(prune(&[1, 2, 3, 4]), vec![1, 2]);
        assert_eq!(prune(&[1, 2, 5, 11]), vec![1, 2, 5, 11]);

        assert!(is_sidon(&[1, 2, 5, 11]));
        assert!(!is_sidon(&[1, 2, 3, 4]));
        assert!(is_sidon(&[]));
        assert!(is_sidon(&[9]));

        // 1 + 3 = 2 + 2 precedes 1 + 4 = 2 + 3.
        assert_eq!(
            first_violation(&[1, 2, 3, 4]),
            Some(SidonViolation { sum: 4, first: (1, 3), second: (2, 2) })
        );
        assert_eq!(
            first_violation(&[1, 2, 4, 5]),
            Some(SidonViolation { sum: 6, first: (1, 5), second: (2, 4) })
        );
        assert_eq!(first_violation(&[1, 2, 5, 11]), None);
        assert_eq!(first_violation(&[2, 4]), None);
    }

    #[test]
    fn doubled_element_counts_as_violation() {
        // 1 + 3 = 2 + 2: the multiset definition forbids it.
        assert!(!is_sidon(&[1, 2, 3]));
        assert_eq!(violating_set(&[1, 2, 3]).elements, vec![3]);
    }

    #[test]
    fn first_violation_is_smallest_sum() {
        // 1+10 = 4+7 and 4+13 = 7+10 also collide, but 1+7 = 4+4 comes first.
        let v = first_violation(&[1, 4, 7, 10, 13]).unwrap();
        assert_eq!(v.sum, 8);
        assert_eq!((v.first, v.second), ((1, 7), (4, 4)));
    }

    fn arbitrary_set() -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::btree_set(1u64..400, 0..40).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn pruned_set_is_sidon(set in arbitrary_set()) {
            let (kept, b) = prune_with_violations(&set);
            prop_assert!(is_sidon(&kept));
            prop_assert_eq!(prune(&kept), kept.clone());
            for w in &b.witnesses {
                prop_assert!(w.is_valid_in(&set));
            }
        }

        #[test]
        fn sidon_iff_pair_counts_at_most_one(set in arbitrary_set()) {
            let max = set.last().copied().unwrap_or(1);
            let t = rep_table(&set, Order::TWO, 2 * max).unwrap();
            let by_table = t.totals().iter().all(|&c| c <= 1);
            prop_assert_eq!(is_sidon(&set), by_table);
            if let Some(v) = first_violation(&set) {
                prop_assert!(t.total(v.sum).unwrap() >= 2);
                prop_assert!(t.totals()[..v.sum as usize].iter().all(|&c| c <= 1));
                prop_assert_ne!(v.first, v.second);
                prop_assert_eq!(v.first.0 + v.first.1, v.sum);
                prop_assert_eq!(v.second.0 + v.second.1, v.sum);
            }
        }

        #[test]
        fn violation_membership_matches_brute_force(set in proptest::collection::btree_set(1u64..80, 0..16)) {
            let set: Vec<u64> = set.into_iter().collect();
            let b = violating_set(&set);
            for &x in &set {
                let below: Vec<u64> = set.iter().copied().filter(|&a| a < x).collect();
                let brute = below.iter().any(|&a1| {
                    below.iter().any(|&a2| below.iter().any(|&a3| x + a1 == a2 + a3))
                });
                prop_assert_eq!(b.contains(x), brute, "x={}", x);
            }
        }
    }
}
