//! Representation functions of a finite set of positive integers.
//!
//! For an order `h`:
//! - `R_h(A, n)` counts non-decreasing `h`-tuples of elements summing to `n`,
//! - `r_h(A, n)` counts strictly increasing ones,
//! - `r*_h(A, n) = R_h(A, n) - r_h(A, n)` counts those with a repeated term.
//!
//! [`rep_table`] computes all three for every `n <= N` at once. It convolves
//! sparse power series `f(x^k) = Σ_{a∈A} x^{k·a}` and turns ordered-tuple
//! counts into multiset and distinct-set counts with the cycle index of the
//! symmetric group:
//!
//! ```text
//! R_h = (1/h!) Σ_λ c_λ Π_{k∈λ} f(x^k)        r_h = (1/h!) Σ_λ sgn(λ) c_λ Π_{k∈λ} f(x^k)
//! ```
//!
//! where `λ` runs over cycle types of `S_h` and `c_λ` is the size of the class.
//! For `h = 4` the dominant term `f(x)^4` is the self-convolution of the
//! ordered pair-sum multiplicities, which is cheap for sparse sets.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Order `h` of a representation, restricted to `2..=4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(into = "u32")]
pub struct Order(u32);

impl Order {
    pub const TWO: Order = Order(2);
    pub const THREE: Order = Order(3);
    pub const FOUR: Order = Order(4);

    pub fn new(h: u32) -> Result<Self> {
        if (2..=4).contains(&h) {
            Ok(Order(h))
        } else {
            Err(Error::UnsupportedOrder(h))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `1 + 2 + ... + h`, the smallest sum of `h` distinct positive integers.
    pub fn min_distinct_sum(self) -> u64 {
        let h = u64::from(self.0);
        h * (h + 1) / 2
    }
}

impl From<Order> for u32 {
    fn from(o: Order) -> u32 {
        o.0
    }
}

/// Checks that `set` is a strictly increasing list of positive integers.
pub fn validate_set(set: &[u64]) -> Result<()> {
    if set.first() == Some(&0) {
        return Err(Error::InvalidSet("elements must be positive".into()));
    }
    if let Some(w) = set.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSet(format!(
            "elements must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn out_of_reach(set: &[u64], n: u64, h: Order) -> bool {
    match set.last() {
        None => true,
        Some(&max) => n == 0 || n > u64::from(h.get()).saturating_mul(max),
    }
}

/// `R_h(A, n)`.
pub fn count_nondecreasing(set: &[u64], n: u64, h: Order) -> Result<u64> {
    if out_of_reach(set, n, h) {
        return Ok(0);
    }
    Ok(count_tuples(set, 0, h.get(), n, false))
}

/// `r_h(A, n)`: strictly increasing tuples (all terms are then `< n`).
pub fn count_distinct(set: &[u64], n: u64, h: Order) -> Result<u64> {
    if out_of_reach(set, n, h) || n < h.min_distinct_sum() {
        return Ok(0);
    }
    Ok(count_tuples(set, 0, h.get(), n, true))
}

// Tuples drawn from set[start..] in non-decreasing (or increasing) index order.
fn count_tuples(set: &[u64], start: usize, terms: u32, target: u64, strict: bool) -> u64 {
    if terms == 1 {
        return u64::from(set[start..].binary_search(&target).is_ok());
    }
    let mut total = 0;
    for i in start..set.len() {
        let a = set[i];
        if a.saturating_mul(u64::from(terms)) > target {
            break;
        }
        let next = if strict { i + 1 } else { i };
        if next < set.len() {
            total += count_tuples(set, next, terms - 1, target - a, strict);
        }
    }
    total
}

/// The triple `(R_h, r_h, r*_h)` at a single `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub total: u64,
    pub distinct: u64,
    pub repeated: u64,
}

pub fn decompose(set: &[u64], n: u64, h: Order) -> Result<Decomposition> {
    let total = count_nondecreasing(set, n, h)?;
    let distinct = count_distinct(set, n, h)?;
    Ok(Decomposition {
        total,
        distinct,
        repeated: total - distinct,
    })
}

/// Brute force `R_h(A, n)`: walks every non-decreasing index tuple.
///
/// Intended as a test oracle for small sets (|A| up to about 50).
pub fn count_nondecreasing_naive(set: &[u64], n: u64, h: u32) -> u64 {
    let h = h as usize;
    if set.is_empty() || h == 0 {
        return 0;
    }
    let mut idx = vec![0usize; h];
    let mut count = 0;
    loop {
        let sum: u64 = idx.iter().map(|&i| set[i]).sum();
        if sum == n {
            count += 1;
        }
        // Advance the odometer keeping idx non-decreasing.
        let mut pos = h;
        while pos > 0 && idx[pos - 1] == set.len() - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return count;
        }
        let v = idx[pos - 1] + 1;
        for slot in &mut idx[pos - 1..] {
            *slot = v;
        }
    }
}

/// Per-`n` counts for every `0 <= n <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepCountTable {
    pub order: Order,
    pub bound: u64,
    nondecreasing: Vec<u64>,
    distinct: Vec<u64>,
}

impl RepCountTable {
    fn check(&self, n: u64) -> Option<usize> {
        (n <= self.bound).then_some(n as usize)
    }

    /// `R_h(A, n)`, or `None` beyond the table bound.
    pub fn total(&self, n: u64) -> Option<u64> {
        self.check(n).map(|i| self.nondecreasing[i])
    }

    /// `r_h(A, n)`.
    pub fn distinct(&self, n: u64) -> Option<u64> {
        self.check(n).map(|i| self.distinct[i])
    }

    /// `r*_h(A, n)`.
    pub fn repeated(&self, n: u64) -> Option<u64> {
        self.check(n).map(|i| self.nondecreasing[i] - self.distinct[i])
    }

    pub fn decomposition(&self, n: u64) -> Option<Decomposition> {
        self.check(n).map(|i| Decomposition {
            total: self.nondecreasing[i],
            distinct: self.distinct[i],
            repeated: self.nondecreasing[i] - self.distinct[i],
        })
    }

    /// `R_h(A, ·)` indexed by `n`.
    pub fn totals(&self) -> &[u64] {
        &self.nondecreasing
    }

    /// `r_h(A, ·)` indexed by `n`.
    pub fn distincts(&self) -> &[u64] {
        &self.distinct
    }

    pub fn into_distincts(self) -> Vec<u64> {
        self.distinct
    }
}

/// Sparse series `Σ count·x^pos`, positions increasing.
type Sparse = Vec<(usize, u64)>;

fn dilated(set: &[u64], k: u64, limit: usize) -> Sparse {
    set.iter()
        .map(|&a| a.saturating_mul(k))
        .take_while(|&p| p <= limit as u64)
        .map(|p| (p as usize, 1))
        .collect()
}

fn to_sparse(dense: &[i64]) -> Sparse {
    dense
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(p, &c)| (p, c as u64))
        .collect()
}

fn accumulate_product(a: &Sparse, b: &Sparse, limit: usize, out: &mut [i64]) {
    for &(pa, ca) in a {
        if pa > limit {
            break;
        }
        for &(pb, cb) in b {
            let p = pa + pb;
            if p > limit {
                break;
            }
            out[p] += (ca * cb) as i64;
        }
    }
}

fn accumulate_square(a: &Sparse, limit: usize, out: &mut [i64]) {
    for (i, &(pa, ca)) in a.iter().enumerate() {
        if 2 * pa > limit {
            break;
        }
        out[2 * pa] += (ca * ca) as i64;
        let twice = 2 * ca;
        for &(pb, cb) in &a[i + 1..] {
            let p = pa + pb;
            if p > limit {
                break;
            }
            out[p] += (twice * cb) as i64;
        }
    }
}

/// Cycle types of `S_h` with class sizes: `(parts, class size)`.
fn cycle_types(h: u32) -> &'static [(&'static [u64], i64)] {
    match h {
        2 => &[(&[1, 1], 1), (&[2], 1)],
        3 => &[(&[1, 1, 1], 1), (&[2, 1], 3), (&[3], 2)],
        4 => &[
            (&[1, 1, 1, 1], 1),
            (&[2, 1, 1], 6),
            (&[2, 2], 3),
            (&[3, 1], 8),
            (&[4], 6),
        ],
        _ => unreachable!("orders are validated"),
    }
}

struct SeriesProducts<'a> {
    set: &'a [u64],
    limit: usize,
    memo: BTreeMap<Vec<u64>, Vec<i64>>,
}

impl SeriesProducts<'_> {
    /// Dense coefficients of `Π_{k∈parts} f(x^k)` up to `limit`.
    fn product(&mut self, parts: &[u64]) -> Vec<i64> {
        let mut key = parts.to_vec();
        key.sort_unstable_by(|a, b| b.cmp(a));
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let mut out = vec![0i64; self.limit + 1];
        match key.len() {
            0 => out[0] = 1,
            1 => {
                for (p, c) in dilated(self.set, key[0], self.limit) {
                    out[p] += c as i64;
                }
            }
            _ => {
                let mid = key.len() / 2;
                let (left, right) = key.split_at(mid);
                let a = to_sparse(&self.product(left));
                if left == right {
                    accumulate_square(&a, self.limit, &mut out);
                } else {
                    let b = to_sparse(&self.product(right));
                    accumulate_product(&a, &b, self.limit, &mut out);
                }
            }
        }
        self.memo.insert(key, out.clone());
        out
    }
}

/// All of `R_h(A, n)`, `r_h(A, n)`, `r*_h(A, n)` for `0 <= n <= bound`.
pub fn rep_table(set: &[u64], h: Order, bound: u64) -> Result<RepCountTable> {
    validate_set(set)?;
    let limit = usize::try_from(bound)
        .map_err(|_| Error::domain("table bound does not fit in memory"))?;
    let h_fact: i64 = (1..=i64::from(h.get())).product();

    // Every ordered count is at most |A|^(h-1); the weighted class sums must fit i64.
    let worst = (set.len() as u128)
        .checked_pow(h.get() - 1)
        .and_then(|x| x.checked_mul(h_fact as u128));
    if worst.is_none_or(|w| w > i64::MAX as u128) {
        return Err(Error::Overflow(format!(
            "|A| = {} is too large for 64-bit order-{} counts",
            set.len(),
            h.get()
        )));
    }

    let mut products = SeriesProducts {
        set,
        limit,
        memo: BTreeMap::new(),
    };
    let mut multiset = vec![0i64; limit + 1];
    let mut distinct = vec![0i64; limit + 1];
    for &(parts, class) in cycle_types(h.get()) {
        let sign = if (h.get() as usize - parts.len()).is_multiple_of(2) { 1 } else { -1 };
        let term = products.product(parts);
        for ((m, d), t) in multiset.iter_mut().zip(distinct.iter_mut()).zip(&term) {
            *m += class * t;
            *d += sign * class * t;
        }
    }

    let finish = |v: Vec<i64>| -> Vec<u64> {
        v.into_iter()
            .map(|x| {
                debug_assert!(x >= 0 && x % h_fact == 0, "class sum {x} not divisible");
                (x / h_fact) as u64
            })
            .collect()
    };
    Ok(RepCountTable {
        order: h,
        bound,
        nondecreasing: finish(multiset),
        distinct: finish(distinct),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIVE: &[u64] = &[1, 2, 3, 4, 5];

    #[test]
    fn order_range() {
        assert!(Order::new(1).is_err());
        assert!(matches!(Order::new(5), Err(Error::UnsupportedOrder(5))));
        assert_eq!(Order::new(4).unwrap().min_distinct_sum(), 10);
    }

    #[test]
    fn worked_examples() {
        // Multisets of {1..5} of size 4 summing to 10, enumerated by hand:
        // {1,1,3,5} {1,1,4,4} {1,2,2,5} {1,2,3,4} {1,3,3,3} {2,2,2,4} {2,2,3,3}
        assert_eq!(count_nondecreasing(FIVE, 10, Order::FOUR).unwrap(), 7);
        assert_eq!(count_distinct(FIVE, 10, Order::FOUR).unwrap(), 1);
        assert_eq!(
            decompose(FIVE, 10, Order::FOUR).unwrap(),
            Decomposition { total: 7, distinct: 1, repeated: 6 }
        );
        assert_eq!(count_nondecreasing(&[1, 2, 3], 4, Order::TWO).unwrap(), 2);
        assert_eq!(count_distinct(&[1, 2, 3], 4, Order::TWO).unwrap(), 1);
        assert_eq!(
            decompose(&[1, 2, 3], 4, Order::TWO).unwrap(),
            Decomposition { total: 2, distinct: 1, repeated: 1 }
        );
        assert_eq!(count_nondecreasing(FIVE, 1, Order::TWO).unwrap(), 0);
        assert_eq!(count_distinct(&[1, 2, 3, 4], 9, Order::FOUR).unwrap(), 0);
        assert_eq!(count_nondecreasing_naive(&[5], 10, 2), 1);
        assert_eq!(count_nondecreasing_naive(&[5], 11, 2), 0);
    }

    #[test]
    fn empty_set() {
        for h in [Order::TWO, Order::THREE, Order::FOUR] {
            let d = decompose(&[], 12, h).unwrap();
            assert_eq!((d.total, d.distinct, d.repeated), (0, 0, 0));
            let t = rep_table(&[], h, 40).unwrap();
            assert!(t.totals().iter().chain(t.distincts()).all(|&c| c == 0));
        }
    }

    #[test]
    fn table_point_and_bounds() {
        let t = rep_table(FIVE, Order::FOUR, 20).unwrap();
        assert_eq!(t.total(10), Some(7));
        assert_eq!(t.distinct(10), Some(1));
        assert_eq!(t.repeated(10), Some(6));
        assert_eq!(t.total(21), None);
        assert_eq!(t.total(0), Some(0));
    }

    #[test]
    fn pair_table_sums_to_pair_count() {
        let set = [2u64, 3, 7, 11, 12, 30];
        let k = set.len() as u64;
        let t = rep_table(&set, Order::TWO, 60).unwrap();
        assert_eq!(t.totals().iter().sum::<u64>(), k * (k - 1) / 2 + k);
        assert_eq!(t.distincts().iter().sum::<u64>(), k * (k - 1) / 2);
    }

    #[test]
    fn invalid_sets_are_rejected() {
        assert!(rep_table(&[3, 3], Order::TWO, 10).is_err());
        assert!(rep_table(&[0, 3], Order::TWO, 10).is_err());
        assert!(validate_set(&[1, 5, 9]).is_ok());
    }

    #[test]
    fn overflow_is_reported() {
        let big: Vec<u64> = (1..=3_000_000).collect();
        assert!(matches!(rep_table(&big, Order::FOUR, 4), Err(Error::Overflow(_))));
    }

    #[test]
    fn full_interval_matches_distinct_partitions() {
        // r_4({1..N}, n) counts partitions of n into 4 distinct parts.
        let set: Vec<u64> = (1..=60).collect();
        let t = rep_table(&set, Order::FOUR, 60).unwrap();
        for n in 0..=60u64 {
            let mut brute = 0;
            for a in 1..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        let d = n as i64 - (a + b + c) as i64;
                        if d > c as i64 {
                            brute += 1;
                        }
                    }
                }
            }
            assert_eq!(t.distinct(n), Some(brute), "n={n}");
        }
    }

    fn small_set() -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::btree_set(1u64..60, 0..14).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn table_agrees_with_pointwise_and_naive(set in small_set(), h in 2u32..=4) {
            let order = Order::new(h).unwrap();
            let t = rep_table(&set, order, 200).unwrap();
            for n in 0..=200u64 {
                let d = t.decomposition(n).unwrap();
                prop_assert_eq!(d, decompose(&set, n, order).unwrap());
                prop_assert_eq!(d.total, count_nondecreasing_naive(&set, n, h));
                prop_assert_eq!(d.total, d.distinct + d.repeated);
            }
            if h == 2 {
                let k = set.len() as u64;
                prop_assert_eq!(t.distincts().iter().sum::<u64>(), k * k.saturating_sub(1) / 2);
            }
            for n in 0..order.min_distinct_sum() {
                prop_assert_eq!(t.distinct(n), Some(0));
            }
        }

        #[test]
        fn adding_an_element_never_decreases_counts(set in small_set(), extra in 1u64..60, h in 2u32..=4) {
            let order = Order::new(h).unwrap();
            let mut bigger = set.clone();
            if let Err(pos) = bigger.binary_search(&extra) {
                bigger.insert(pos, extra);
            }
            let a = rep_table(&set, order, 150).unwrap();
            let b = rep_table(&bigger, order, 150).unwrap();
            for n in 0..=150u64 {
                prop_assert!(b.total(n) >= a.total(n));
                prop_assert!(b.distinct(n) >= a.distinct(n));
            }
        }
    }
}
