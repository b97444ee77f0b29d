use std::collections::HashMap;

use crate::error::{Error, Result};

use super::polynomial::{Monomial, MultilinearPolynomial, VarSet};

/// `r_4(A, n)` as a polynomial in `t_i = [i ∈ A]`: one monomial
/// `t_{x_1}t_{x_2}t_{x_3}t_{x_4}` per `x_1 < x_2 < x_3 < x_4` summing to `n`.
pub fn build_r4_polynomial(n: u64) -> MultilinearPolynomial {
    let mut monomials = Vec::new();
    let n32 = u32::try_from(n).expect("n fits in u32 for any enumerable polynomial");
    let mut x1 = 1u32;
    while 4 * x1 + 6 <= n32 {
        let mut x2 = x1 + 1;
        while x1 + 3 * x2 + 3 <= n32 {
            let mut x3 = x2 + 1;
            while x1 + x2 + 2 * x3 < n32 {
                let x4 = n32 - x1 - x2 - x3;
                monomials.push(Monomial { vars: VarSet::from_slice(&[x1, x2, x3, x4]), coefficient: 1.0 });
                x3 += 1;
            }
            x2 += 1;
        }
        x1 += 1;
    }
    MultilinearPolynomial::from_sorted_unique(monomials)
}

/// Default largest `n` for [`build_violation_polynomial`].
pub const VIOLATION_DEFAULT_CAP: u64 = 64;

/// Upper bound for `r_4(A, n) - r_4(A \ B, n)`: the sum of `t_{x_1} ⋯ t_{x_7}`
/// over ordered tuples with `x_1 + x_2 + x_3 + x_4 = n`, `x_1, …, x_4`
/// distinct, `x_4 + x_5 = x_6 + x_7` and `x_5, x_6, x_7 < x_4`. Each tuple
/// contributes to the monomial of its distinct values; coefficients count
/// the tuples.
pub fn build_violation_polynomial(n: u64, cap: u64) -> Result<MultilinearPolynomial> {
    if n > cap {
        return Err(Error::CapExceeded {
            what: format!("violation polynomial at n = {n}"),
            cap,
            hint: "the tuple count grows like n^5; raise the cap only for small n".into(),
        });
    }
    let n = n as u32;
    let mut counts: HashMap<VarSet, u64> = HashMap::new();
    let mut set = VarSet::new();
    for x4 in 1..n {
        // Inner relations depend only on x4; collect them once.
        let mut inner: Vec<[u32; 3]> = Vec::new();
        for x5 in 1..x4 {
            for x6 in 1..x4 {
                let x7 = x4 + x5 - x6;
                if x7 < x4 {
                    inner.push([x5, x6, x7]);
                }
            }
        }
        if inner.is_empty() {
            continue;
        }
        let rest = n - x4;
        for x1 in 1..rest {
            for x2 in 1..rest - x1 {
                let x3 = rest - x1 - x2;
                let head = [x1, x2, x3, x4];
                if (0..4).any(|i| head[i + 1..].contains(&head[i])) {
                    continue;
                }
                for tail in &inner {
                    set.clear();
                    set.extend_from_slice(&head);
                    set.extend_from_slice(tail);
                    set.sort_unstable();
                    set.dedup();
                    *counts.entry(set.clone()).or_insert(0) += 1;
                }
            }
        }
    }
    let mut monomials: Vec<Monomial> = counts
        .into_iter()
        .map(|(vars, c)| Monomial { vars, coefficient: c as f64 })
        .collect();
    monomials.sort_unstable_by(|a, b| a.vars.cmp(&b.vars));
    Ok(MultilinearPolynomial::from_sorted_unique(monomials))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectations::{expected_r4, R4Method};
    use crate::kimvu::{e_d, expectation, ProfileSpace};
    use crate::repcount::{count_distinct, Order};
    use crate::sampler::{sample_set, ProbabilityProfile};
    use crate::sidon::prune;

    fn distinct_partitions(n: u32) -> usize {
        let mut c = 0;
        for a in 1..n {
            for b in a + 1..n {
                for d in b + 1..n {
                    if a + b + d < n && n - a - b - d > d {
                        c += 1;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn r4_polynomial_examples() {
        let p = build_r4_polynomial(10);
        assert_eq!(p.len(), 1);
        assert_eq!(p.monomials()[0].vars.as_slice(), &[1, 2, 3, 4]);
        assert!(build_r4_polynomial(9).is_zero());
        assert!(build_r4_polynomial(0).is_zero());
        assert_eq!(build_r4_polynomial(14).len(), distinct_partitions(14));
        for n in 10..80 {
            let p = build_r4_polynomial(n);
            assert_eq!(p.len(), distinct_partitions(n as u32));
            assert!(p.is_regular());
            assert_eq!(p.degree(), 4);
            assert!(p.monomials().iter().all(|m| m.vars.iter().sum::<u32>() == n as u32));
        }
    }

    #[test]
    fn r4_polynomial_matches_expected_r4() {
        let profile = ProbabilityProfile::default();
        let space = ProfileSpace(profile);
        for n in [10u64, 37, 120, 333, 500] {
            let poly = build_r4_polynomial(n);
            let e = expectation(&poly, &space).unwrap();
            let want = expected_r4(&profile, n, R4Method::Convolution).unwrap();
            assert!((e - want).abs() <= 1e-9 * want, "n={n}");
            assert_eq!(e_d(&poly, &space, 0).unwrap(), e);
        }
    }

    #[test]
    fn r4_polynomial_counts_representations() {
        let s = sample_set(&ProbabilityProfile::new(1, 3).unwrap(), 200, 3).unwrap();
        for n in [10u64, 50, 123, 200] {
            let poly = build_r4_polynomial(n);
            let y = poly.evaluate(|v| s.contains(v as u64));
            assert_eq!(y as u64, count_distinct(s.as_slice(), n, Order::FOUR).unwrap());
        }
    }

    #[test]
    fn violation_polynomial_small_cases() {
        assert!(build_violation_polynomial(9, 40).unwrap().is_zero());
        let p = build_violation_polynomial(10, 40).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.monomials()[0].vars.as_slice(), &[1, 2, 3, 4]);
        // Six orderings of the other three, times three relations with x4 = 4
        // (4+1 = 2+3, 4+1 = 3+2, 4+2 = 3+3) and one with x4 = 3 (3+1 = 2+2).
        assert_eq!(p.monomials()[0].coefficient, 24.0);
        assert!(matches!(build_violation_polynomial(41, 40), Err(Error::CapExceeded { cap: 40, .. })));
    }

    #[test]
    fn violation_polynomial_matches_brute_force() {
        for n in [11u64, 14, 17] {
            let p = build_violation_polynomial(n, 40).unwrap();
            let mut brute: HashMap<Vec<u32>, f64> = HashMap::new();
            let n = n as u32;
            for x1 in 1..n {
                for x2 in 1..n {
                    for x3 in 1..n {
                        for x4 in 1..n {
                            let h = [x1, x2, x3, x4];
                            if h.iter().sum::<u32>() != n || (0..4).any(|i| h[i + 1..].contains(&h[i])) {
                                continue;
                            }
                            for x5 in 1..x4 {
                                for x6 in 1..x4 {
                                    for x7 in 1..x4 {
                                        if x4 + x5 == x6 + x7 {
                                            let mut s = vec![x1, x2, x3, x4, x5, x6, x7];
                                            s.sort_unstable();
                                            s.dedup();
                                            *brute.entry(s).or_insert(0.0) += 1.0;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            assert_eq!(p.len(), brute.len());
            for m in p.monomials() {
                assert_eq!(brute[&m.vars.to_vec()], m.coefficient);
            }
        }
    }

    #[test]
    fn violation_polynomial_bounds_the_loss() {
        for seed in 0..40 {
            let s = sample_set(&ProbabilityProfile::new(1, 4).unwrap(), 32, seed).unwrap();
            let kept = prune(s.as_slice());
            for n in 10..=32u64 {
                let loss = count_distinct(s.as_slice(), n, Order::FOUR).unwrap()
                    - count_distinct(&kept, n, Order::FOUR).unwrap();
                let bound = build_violation_polynomial(n, 40).unwrap().evaluate(|v| s.contains(v as u64));
                assert!(loss as f64 <= bound, "seed {seed} n {n}: {loss} > {bound}");
            }
        }
    }
}
