//! Six coupled sums: an ordered composition `x_1 + x_2 + x_3 + x_4 = n`
//! weighted by `θ_{x_1}θ_{x_2}θ_{x_3}θ_{x_4}`, combined with a second linear
//! relation through `x_4`:
//!
//! | case | relation                      | extra factor            |
//! |------|-------------------------------|-------------------------|
//! | 1    | `x_4 + x_5 = x_6 + x_7`       | `θ_{x_5}θ_{x_6}θ_{x_7}` |
//! | 2    | `x_4 + x_3 = x_5 + x_6`       | `θ_{x_5}θ_{x_6}`        |
//! | 3    | `x_4 + x_5 = x_3 + x_6`       | `θ_{x_5}θ_{x_6}`        |
//! | 4    | `x_4 + x_3 = x_2 + x_5`       | `θ_{x_5}`               |
//! | 5    | `x_4 + x_5 = x_2 + x_3`       | `θ_{x_5}`               |
//! | 6    | `x_4 + x_3 = x_2 + x_1`       | none                    |
//!
//! Every variable of the relation other than `x_4` is strictly below `x_4`,
//! which keeps each sum finite. Repeated values are weighted by the plain
//! product of `θ`s. [`coupled_case_distinct`] additionally requires all
//! variables to be pairwise different.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{convolve, CompensatedSum};
use crate::sampler::ProbabilityProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "u8")]
pub enum CoupledCase {
    One = 1,
    Two,
    Three,
    Four,
    Five,
    Six,
}

impl CoupledCase {
    pub const ALL: [CoupledCase; 6] = [
        CoupledCase::One,
        CoupledCase::Two,
        CoupledCase::Three,
        CoupledCase::Four,
        CoupledCase::Five,
        CoupledCase::Six,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for CoupledCase {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1..=6 => Ok(Self::ALL[id as usize - 1]),
            _ => Err(Error::InvalidCase(id)),
        }
    }
}

impl From<CoupledCase> for u8 {
    fn from(c: CoupledCase) -> u8 {
        c.id()
    }
}

impl fmt::Display for CoupledCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Largest `n` accepted by [`coupled_case_distinct`].
pub const DISTINCT_VARIANT_CAP: u64 = 64;

/// Value of the coupled sum at `n`, in `O(n^2)` time.
pub fn coupled_case(case: CoupledCase, n: u64, profile: &ProbabilityProfile) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if n < 4 {
        return Ok(0.0);
    }
    let th = profile.thetas(n);
    let n = n as usize;
    Ok(match case {
        CoupledCase::One => case_one(&th, n),
        CoupledCase::Two => case_two(&th, n),
        CoupledCase::Three => case_three(&th, n),
        CoupledCase::Four => case_four(&th, n),
        CoupledCase::Five => case_five(&th, n),
        CoupledCase::Six => case_six(&th, n),
    })
}

/// Same sum restricted to pairwise distinct variables, by enumeration.
pub fn coupled_case_distinct(case: CoupledCase, n: u64, profile: &ProbabilityProfile) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if n > DISTINCT_VARIANT_CAP {
        return Err(Error::CapExceeded {
            what: format!("distinct-variant enumeration at n = {n}"),
            cap: DISTINCT_VARIANT_CAP,
            hint: "the unrestricted sum is available for large n".into(),
        });
    }
    Ok(enumerate(case, n, profile, true))
}

/// Pair sums `Σ_{a+b=s} θ_a θ_b` for `s ≤ limit`.
fn pair_sums(th: &[f64], limit: usize) -> Vec<f64> {
    convolve(th, th, limit)
}

/// Pair sums with both terms `< M`, kept current as `M` grows.
struct BoundedPairs<'a> {
    th: &'a [f64],
    below: usize,
    sums: Vec<f64>,
}

impl<'a> BoundedPairs<'a> {
    fn new(th: &'a [f64], max_sum: usize) -> Self {
        Self { th, below: 1, sums: vec![0.0; max_sum + 1] }
    }

    /// Admit `M = below` as a term, so terms range over `1..=M`.
    fn raise(&mut self) {
        let m = self.below;
        let tm = self.th[m];
        for x in 1..m {
            self.sums[m + x] += 2.0 * tm * self.th[x];
        }
        self.sums[2 * m] += tm * tm;
        self.below += 1;
    }

    fn get(&self, s: usize) -> f64 {
        self.sums[s]
    }
}

fn case_one(th: &[f64], n: usize) -> f64 {
    let pairs = pair_sums(th, n);
    let triples = convolve(&pairs, th, n);
    let mut q = BoundedPairs::new(th, 2 * n);
    let mut total = CompensatedSum::new();
    for x4 in 1..=n - 3 {
        // q holds pairs with both terms below x4.
        let inner: f64 = (1..x4).map(|x5| th[x5] * q.get(x4 + x5)).sum();
        total.add(th[x4] * triples[n - x4] * inner);
        q.raise();
    }
    total.value()
}

fn case_two(th: &[f64], n: usize) -> f64 {
    let pairs = pair_sums(th, n);
    let mut q = BoundedPairs::new(th, 2 * n);
    let mut total = CompensatedSum::new();
    for x4 in 2..n {
        while q.below < x4 {
            q.raise();
        }
        let mut x3 = 1;
        while x3 < x4 && x3 + x4 + 2 <= n {
            total.add(th[x3] * th[x4] * pairs[n - x3 - x4] * q.get(x3 + x4));
            x3 += 1;
        }
    }
    total.value()
}

fn case_three(th: &[f64], n: usize) -> f64 {
    let pairs = pair_sums(th, n);
    let mut total = CompensatedSum::new();
    // d = x4 - x3; inner sum Σ_{x5 < x3} θ_{x5} θ_{x5 + d}.
    for d in 1..n {
        let mut inner = 0.0;
        let mut x3 = 1;
        while 2 * x3 + d + 2 <= n {
            if x3 > 1 {
                inner += th[x3 - 1] * th[x3 - 1 + d];
            }
            total.add(th[x3] * th[x3 + d] * pairs[n - 2 * x3 - d] * inner);
            x3 += 1;
        }
    }
    total.value()
}

/// `P[k] = Σ_{j=1}^{k} θ_j θ_{s-j}` for `k < s`.
fn split_prefix(th: &[f64], s: usize, upto: usize, out: &mut Vec<f64>) {
    out.clear();
    out.push(0.0);
    let mut acc = 0.0;
    for j in 1..=upto {
        acc += th[j] * th[s - j];
        out.push(acc);
    }
}

fn case_four(th: &[f64], n: usize) -> f64 {
    let mut total = CompensatedSum::new();
    let mut prefix = Vec::new();
    // s = x2 + x5 = x3 + x4, x1 = n - s - x2.
    for s in 2..n - 1 {
        split_prefix(th, s, s / 2, &mut prefix);
        for x2 in 1..s.min(n - s) {
            let x5 = s - x2;
            let x1 = n - s - x2;
            let lo = x2.min(x5) - 1;
            if lo == 0 {
                continue;
            }
            total.add(th[x1] * th[x2] * th[x5] * prefix[lo]);
        }
    }
    total.value()
}

fn case_five(th: &[f64], n: usize) -> f64 {
    let mut total = CompensatedSum::new();
    let mut prefix = Vec::new();
    // s = x4 + x5 = x2 + x3 with x5 < x2 < x4, x1 = n - s - x4.
    for s in 3..n - 1 {
        split_prefix(th, s, s - 1, &mut prefix);
        for x5 in 1..s.div_ceil(2) {
            let x4 = s - x5;
            if s + x4 >= n {
                continue;
            }
            let x1 = n - s - x4;
            let inner = prefix[x4 - 1] - prefix[x5];
            total.add(th[x1] * th[x4] * th[x5] * inner);
        }
    }
    total.value()
}

fn case_six(th: &[f64], n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let h = n / 2;
    let mut total = CompensatedSum::new();
    for x4 in h.div_ceil(2)..h {
        let x3 = h - x4;
        if x3 == 0 || x3 >= x4 {
            continue;
        }
        // x1 + x2 = h with x1, x2 < x4.
        let inner: f64 = (h - x4 + 1..x4).filter(|&x1| x1 < h).map(|x1| th[x1] * th[h - x1]).sum();
        total.add(th[x3] * th[x4] * inner);
    }
    total.value()
}

/// Literal enumeration of the coupled sum, optionally with all variables distinct.
fn enumerate(case: CoupledCase, n: u64, profile: &ProbabilityProfile, distinct: bool) -> f64 {
    let n = n as usize;
    if n < 4 {
        return 0.0;
    }
    let th = profile.thetas(n as u64);
    let mut total = CompensatedSum::new();
    let mut vars: Vec<usize> = Vec::with_capacity(7);
    let mut visit = |vars: &[usize]| {
        if distinct && (0..vars.len()).any(|i| vars[i + 1..].contains(&vars[i])) {
            return;
        }
        total.add(vars.iter().map(|&v| th[v]).product());
    };
    for x1 in 1..n {
        for x2 in 1..n - x1 {
            for x3 in 1..n - x1 - x2 {
                let x4 = n - x1 - x2 - x3;
                let below = |v: i64| v >= 1 && (v as usize) < x4;
                let (i3, i4) = (x3 as i64, x4 as i64);
                vars.clear();
                vars.extend([x1, x2, x3, x4]);
                match case {
                    CoupledCase::One => {
                        for x5 in 1..x4 {
                            for x6 in 1..x4 {
                                let x7 = i4 + x5 as i64 - x6 as i64;
                                if below(x7) {
                                    vars.truncate(4);
                                    vars.extend([x5, x6, x7 as usize]);
                                    visit(&vars);
                                }
                            }
                        }
                    }
                    CoupledCase::Two => {
                        if x3 >= x4 {
                            continue;
                        }
                        for x5 in 1..x4 {
                            let x6 = i4 + i3 - x5 as i64;
                            if below(x6) {
                                vars.truncate(4);
                                vars.extend([x5, x6 as usize]);
                                visit(&vars);
                            }
                        }
                    }
                    CoupledCase::Three => {
                        if x3 >= x4 {
                            continue;
                        }
                        for x5 in 1..x4 {
                            let x6 = i4 + x5 as i64 - i3;
                            if below(x6) {
                                vars.truncate(4);
                                vars.extend([x5, x6 as usize]);
                                visit(&vars);
                            }
                        }
                    }
                    CoupledCase::Four => {
                        let x5 = i4 + i3 - x2 as i64;
                        if x2 < x4 && x3 < x4 && below(x5) {
                            vars.push(x5 as usize);
                            visit(&vars);
                        }
                    }
                    CoupledCase::Five => {
                        let x5 = x2 as i64 + i3 - i4;
                        if x2 < x4 && x3 < x4 && below(x5) {
                            vars.push(x5 as usize);
                            visit(&vars);
                        }
                    }
                    CoupledCase::Six => {
                        if x4 + x3 == x2 + x1 && x1 < x4 && x2 < x4 && x3 < x4 {
                            visit(&vars);
                        }
                    }
                }
            }
        }
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_ids() {
        for id in 1..=6u8 {
            assert_eq!(CoupledCase::try_from(id).unwrap().id(), id);
        }
        assert!(matches!(CoupledCase::try_from(0), Err(Error::InvalidCase(0))));
        assert!(matches!(CoupledCase::try_from(7), Err(Error::InvalidCase(7))));
    }

    #[test]
    fn fast_sums_match_enumeration() {
        let profiles = [ProbabilityProfile::default(), ProbabilityProfile::full(), ProbabilityProfile::new(1, 3).unwrap()];
        for p in &profiles {
            for case in CoupledCase::ALL {
                for n in 1..=40 {
                    let fast = coupled_case(case, n, p).unwrap();
                    let slow = enumerate(case, n, p, false);
                    assert!(
                        (fast - slow).abs() <= 1e-12 * slow.max(1.0),
                        "case {case} n={n} profile {p}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn full_profile_counts_solutions() {
        let p = ProbabilityProfile::full();
        // n = 8: x1 + x2 = x3 + x4 = 4 with x1, x2, x3 < x4 forces x4 = 3, x3 = 1, {x1, x2} = {2, 2}.
        assert_eq!(coupled_case(CoupledCase::Six, 8, &p).unwrap(), 1.0);
        assert_eq!(enumerate(CoupledCase::Six, 8, &p, false), 1.0);
    }

    #[test]
    fn case_six_parity_and_small_value() {
        let p = ProbabilityProfile::default();
        for n in (1..200).step_by(2) {
            assert_eq!(coupled_case(CoupledCase::Six, n, &p).unwrap(), 0.0);
        }
        // Only (2, 2, 1, 3) at n = 8.
        let expected = 2f64.powf(-10.0 / 7.0) * 3f64.powf(-5.0 / 7.0);
        let v = coupled_case(CoupledCase::Six, 8, &p).unwrap();
        assert!((v - expected).abs() < 1e-15);
        assert_eq!(coupled_case_distinct(CoupledCase::Six, 8, &p).unwrap(), 0.0);
    }

    #[test]
    fn distinct_variant_is_smaller() {
        let p = ProbabilityProfile::default();
        for case in CoupledCase::ALL {
            for n in [12u64, 25, 40] {
                let all = coupled_case(case, n, &p).unwrap();
                let d = coupled_case_distinct(case, n, &p).unwrap();
                assert!(d >= 0.0 && d <= all + 1e-15, "case {case} n={n}");
            }
        }
        assert!(matches!(
            coupled_case_distinct(CoupledCase::One, 65, &p),
            Err(Error::CapExceeded { cap: 64, .. })
        ));
    }

    #[test]
    fn values_stay_bounded() {
        let p = ProbabilityProfile::default();
        for case in CoupledCase::ALL {
            let early = (10..100).map(|n| coupled_case(case, n, &p).unwrap()).fold(0.0, f64::max);
            let late = [100, 1_000, 10_000].map(|n| coupled_case(case, n, &p).unwrap());
            let late_max = late.iter().copied().fold(0.0, f64::max);
            if case == CoupledCase::One {
                // Converges at rate n^(-1/7) to Γ(2/7)³/Γ(6/7) · c · B(1/7, 6/7)
                // ≈ 2086.92, where c = ∫_0^1 u^(-5/7) ∫_u^1 x^(-5/7)(1+u-x)^(-5/7) dx du.
                assert!(late.windows(2).all(|w| w[0] < w[1]), "{late:?}");
                assert!(late_max < 2086.92, "{late:?}");
            } else {
                assert!(late_max <= 2.0 * early, "case {case}: {late:?} vs {early}");
            }
        }
    }

    #[test]
    fn zero_is_a_domain_error() {
        let p = ProbabilityProfile::default();
        assert!(matches!(coupled_case(CoupledCase::One, 0, &p), Err(Error::Domain(_))));
    }
}
