//! Expectations of sums over solutions of one linear equation in at most
//! four positive integer unknowns.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sampler::ProbabilityProfile;

/// `Σ θ_{y_1} ⋯ θ_{y_v}` over positive integer solutions of
/// `a_1 y_1 + ⋯ + a_v y_v = m`, optionally with `y_i < y_j` constraints and
/// pairwise distinct coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConstraintSystem {
    pub coefficients: Vec<i64>,
    pub target: i64,
    /// Pairs `(i, j)` requiring `y_i < y_j` (0-based indices).
    pub less_than: Vec<(usize, usize)>,
    pub distinct: bool,
    pub profile: ProbabilityProfile,
    pub epsilon: f64,
    /// Largest coordinate enumerated when the solution set is infinite.
    /// `None` picks a budget from the number of unknowns.
    pub max_box: Option<u64>,
}

/// Result of [`constrained_expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstrainedSum {
    /// Sum over every enumerated solution; a lower bound for the full sum.
    pub value: f64,
    /// Estimated mass of the solutions beyond `box_limit` (0 if finite).
    pub tail_bound: f64,
    /// Coordinate bound used for infinite families.
    pub box_limit: Option<u64>,
    /// Whether `tail_bound <= epsilon`.
    pub converged: bool,
}

impl LinearConstraintSystem {
    pub fn new(coefficients: Vec<i64>, target: i64) -> Self {
        Self {
            coefficients,
            target,
            less_than: Vec::new(),
            distinct: false,
            profile: ProbabilityProfile::default(),
            epsilon: 1e-9,
            max_box: None,
        }
    }

    pub fn with_distinct(mut self, distinct: bool) -> Self {
        self.distinct = distinct;
        self
    }

    pub fn with_less_than(mut self, i: usize, j: usize) -> Self {
        self.less_than.push((i, j));
        self
    }

    pub fn with_profile(mut self, profile: ProbabilityProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_box(mut self, max_box: u64) -> Self {
        self.max_box = Some(max_box);
        self
    }

    pub fn variables(&self) -> usize {
        self.coefficients.len()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.variables();
        if v == 0 || v > 4 {
            return Err(Error::domain(format!("need 1 to 4 unknowns, got {v}")));
        }
        if let Some(i) = self.coefficients.iter().position(|&a| a == 0) {
            return Err(Error::domain(format!("coefficient a_{} is zero", i + 1)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for &(i, j) in &self.less_than {
            if i >= v || j >= v || i == j {
                return Err(Error::domain(format!("invalid order constraint y_{i} < y_{j}")));
            }
        }
        if self.max_box == Some(0) {
            return Err(Error::domain("max_box must be positive"));
        }
        Ok(())
    }

    fn is_mixed(&self) -> bool {
        let pos = self.coefficients.iter().any(|&a| a > 0);
        let neg = self.coefficients.iter().any(|&a| a < 0);
        pos && neg
    }

    fn admissible(&self, y: &[u64]) -> bool {
        if !self.less_than.iter().all(|&(i, j)| y[i] < y[j]) {
            return false;
        }
        if self.distinct {
            for i in 0..y.len() {
                if y[i + 1..].contains(&y[i]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Default coordinate budget for infinite families, by number of unknowns.
fn default_box(v: usize) -> u64 {
    match v {
        1 | 2 => 10_000_000,
        3 => 4096,
        _ => 256,
    }
}

/// Evaluates the sum. Same-sign equations have finitely many solutions and
/// are summed exactly. Mixed-sign equations are enumerated inside the box
/// `[1, Y]^v`; the remaining mass is estimated by fitting the last half of
/// the max-coordinate shells to `K·M^(-p)` and integrating.
pub fn constrained_expectation(system: &LinearConstraintSystem) -> Result<ConstrainedSum> {
    system.validate()?;
    if system.is_mixed() {
        mixed(system)
    } else {
        Ok(same_sign(system))
    }
}

fn same_sign(system: &LinearConstraintSystem) -> ConstrainedSum {
    // Normalize to positive coefficients.
    let flip = system.coefficients[0] < 0;
    let coeffs: Vec<u64> = system.coefficients.iter().map(|a| a.unsigned_abs()).collect();
    let target = if flip { -system.target } else { system.target };
    let mut total = CompensatedSum::new();
    let min_rest: i64 = coeffs.iter().map(|&a| a as i64).sum();
    if target >= min_rest {
        let target = target as u64;
        let theta = system.profile.thetas(target);
        let mut y = vec![0u64; coeffs.len()];
        enumerate_positive(&coeffs, target, 0, &mut y, &mut |y| {
            if system.admissible(y) {
                total.add(y.iter().map(|&t| theta[t as usize]).product());
            }
        });
    }
    ConstrainedSum {
        value: total.value(),
        tail_bound: 0.0,
        box_limit: None,
        converged: true,
    }
}

/// All positive solutions of `Σ coeffs[i]·y[i] = remaining`, lexicographically.
fn enumerate_positive(coeffs: &[u64], remaining: u64, at: usize, y: &mut [u64], visit: &mut impl FnMut(&[u64])) {
    let a = coeffs[at];
    if at + 1 == coeffs.len() {
        if remaining > 0 && remaining.is_multiple_of(a) {
            y[at] = remaining / a;
            visit(y);
        }
        return;
    }
    let rest: u64 = coeffs[at + 1..].iter().sum();
    let mut value = 1;
    while a * value + rest <= remaining {
        y[at] = value;
        enumerate_positive(coeffs, remaining - a * value, at + 1, y, visit);
        value += 1;
    }
}

fn mixed(system: &LinearConstraintSystem) -> Result<ConstrainedSum> {
    let v = system.variables();
    let c = system.profile.exponent();
    // A shell of maximal coordinate M carries about M^(v-2) solutions, each
    // of weight at most about M^(-c) times bounded factors.
    let decay = v as f64 * c - (v as f64 - 2.0);
    if c <= 0.0 || decay <= 1.0 {
        return Err(Error::Divergent(format!(
            "shell mass decays like M^(-{decay:.4}) for {v} unknowns at exponent {}; the sum does not converge",
            system.profile
        )));
    }
    let y_max = system.max_box.unwrap_or_else(|| default_box(v));
    let (last, free) = system.coefficients.split_last().expect("validated nonempty");
    let last = *last;

    let theta = |n: u64| system.profile.theta(n);
    // Only the outer half of the shells enters the tail estimate.
    let half = y_max / 2;
    let mut shells = vec![0.0f64; (y_max - half) as usize];
    let mut total = CompensatedSum::new();
    let mut y = vec![0u64; v];

    // Odometer over the free coordinates in [1, Y]; the last one is solved for.
    for slot in y.iter_mut().take(v - 1) {
        *slot = 1;
    }
    loop {
        let partial: i128 = free.iter().zip(&y).map(|(&a, &t)| a as i128 * t as i128).sum();
        let rhs = system.target as i128 - partial;
        if rhs % last as i128 == 0 {
            let solved = rhs / last as i128;
            if solved >= 1 && solved <= y_max as i128 {
                y[v - 1] = solved as u64;
                if system.admissible(&y) {
                    let w: f64 = y.iter().map(|&t| theta(t)).product();
                    total.add(w);
                    let m = *y.iter().max().expect("nonempty");
                    if m > half {
                        shells[(m - half - 1) as usize] += w;
                    }
                }
            }
        }
        // Advance the odometer; the last free coordinate moves fastest.
        let mut k = v - 1;
        loop {
            if k == 0 {
                return Ok(finish(system, total.value(), &shells, y_max, decay));
            }
            k -= 1;
            if y[k] < y_max {
                y[k] += 1;
                break;
            }
            y[k] = 1;
        }
    }
}

fn finish(system: &LinearConstraintSystem, value: f64, shells: &[f64], y_max: u64, decay: f64) -> ConstrainedSum {
    let half = y_max / 2;
    let k = (half + 1..=y_max)
        .map(|m| shells[(m - half - 1) as usize] * (m as f64).powf(decay))
        .fold(0.0f64, f64::max);
    let tail_bound = k * (y_max as f64).powf(1.0 - decay) / (decay - 1.0);
    ConstrainedSum {
        value,
        tail_bound,
        box_limit: Some(y_max),
        converged: tail_bound <= system.epsilon,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(n: u64) -> f64 {
        ProbabilityProfile::default().membership_probability(n).unwrap()
    }

    #[test]
    fn single_forced_solution() {
        let s = constrained_expectation(&LinearConstraintSystem::new(vec![1], 77)).unwrap();
        assert_eq!(s.value, theta(77));
        assert!(s.converged && s.tail_bound == 0.0);
        let s = constrained_expectation(&LinearConstraintSystem::new(vec![3], 77)).unwrap();
        assert_eq!(s.value, 0.0);
        let s = constrained_expectation(&LinearConstraintSystem::new(vec![-2], -14)).unwrap();
        assert_eq!(s.value, theta(7));
    }

    #[test]
    fn distinct_pairs() {
        let sys = LinearConstraintSystem::new(vec![1, 1], 2).with_distinct(true);
        assert_eq!(constrained_expectation(&sys).unwrap().value, 0.0);
        let sys = LinearConstraintSystem::new(vec![1, 1], 3).with_distinct(true);
        let v = constrained_expectation(&sys).unwrap().value;
        let expected = 2.0 * 2f64.powf(-5.0 / 7.0);
        assert!((v - expected).abs() <= 2.0 * f64::EPSILON * expected);
    }

    #[test]
    fn order_constraints_select_tuples() {
        let all = LinearConstraintSystem::new(vec![1, 1, 1], 12).with_distinct(true);
        let ordered = all.clone().with_less_than(0, 1).with_less_than(1, 2);
        let a = constrained_expectation(&all).unwrap().value;
        let o = constrained_expectation(&ordered).unwrap().value;
        assert!((a - 6.0 * o).abs() < 1e-14);
    }

    #[test]
    fn positive_coefficients_match_brute_force() {
        let cases: &[(&[i64], i64)] = &[(&[1, 2], 30), (&[2, 3, 1], 41), (&[1, 1, 1, 1], 25), (&[-1, -3], -20)];
        for &(a, m) in cases {
            for distinct in [false, true] {
                let sys = LinearConstraintSystem::new(a.to_vec(), m).with_distinct(distinct);
                let got = constrained_expectation(&sys).unwrap().value;
                let bound = m.unsigned_abs();
                let mut brute = 0.0;
                let mut y = vec![1u64; a.len()];
                'outer: loop {
                    let s: i64 = a.iter().zip(&y).map(|(&c, &t)| c * t as i64).sum();
                    let distinct_ok = !distinct || (0..y.len()).all(|i| !y[i + 1..].contains(&y[i]));
                    if s == m && distinct_ok {
                        brute += y.iter().map(|&t| theta(t)).product::<f64>();
                    }
                    for k in (0..y.len()).rev() {
                        if y[k] < bound {
                            y[k] += 1;
                            continue 'outer;
                        }
                        y[k] = 1;
                    }
                    break;
                }
                assert!((got - brute).abs() <= 1e-13 * brute.max(1e-300), "{a:?} {m} {distinct}");
            }
        }
    }

    #[test]
    fn mixed_two_variables_has_decaying_tail() {
        // y1 - y2 = 1: Σ θ_{k+1} θ_k, tail ~ Y^(-3/7).
        let small = LinearConstraintSystem::new(vec![1, -1], 1).with_max_box(1_000);
        let large = small.clone().with_max_box(100_000);
        let a = constrained_expectation(&small).unwrap();
        let b = constrained_expectation(&large).unwrap();
        assert!(b.value > a.value);
        assert!(b.tail_bound < a.tail_bound);
        // The first tail estimate covers the mass found between the boxes.
        assert!(b.value - a.value <= a.tail_bound);
        assert!(!a.converged);
    }

    #[test]
    fn mixed_with_empty_shells_converges() {
        // y1 = y2 with distinct coordinates has no solutions.
        let sys = LinearConstraintSystem::new(vec![1, -1], 0).with_distinct(true).with_max_box(100);
        let s = constrained_expectation(&sys).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.converged);
    }

    #[test]
    fn three_variable_sum_matches_direct() {
        // y1 + y2 = y3 inside the box: Σ_{s ≤ Y} θ_s Σ_{a+b=s} θ_a θ_b.
        let y_max = 300u64;
        let sys = LinearConstraintSystem::new(vec![1, 1, -1], 0).with_max_box(y_max);
        let s = constrained_expectation(&sys).unwrap();
        let mut direct = 0.0;
        for t in 2..=y_max {
            for a in 1..t {
                direct += theta(t) * theta(a) * theta(t - a);
            }
        }
        assert!((s.value - direct).abs() < 1e-12 * direct);
        assert!(s.tail_bound > 0.0);
    }

    #[test]
    fn four_mixed_variables_diverge() {
        let sys = LinearConstraintSystem::new(vec![1, 1, -1, -1], 0);
        assert!(matches!(constrained_expectation(&sys), Err(Error::Divergent(_))));
        let flat = LinearConstraintSystem::new(vec![1, -1], 1).with_profile(ProbabilityProfile::full());
        assert!(matches!(constrained_expectation(&flat), Err(Error::Divergent(_))));
    }

    #[test]
    fn validation() {
        let bad = |s: LinearConstraintSystem| matches!(constrained_expectation(&s), Err(Error::Domain(_)));
        assert!(bad(LinearConstraintSystem::new(vec![], 1)));
        assert!(bad(LinearConstraintSystem::new(vec![1, 0], 1)));
        assert!(bad(LinearConstraintSystem::new(vec![1; 5], 10)));
        assert!(bad(LinearConstraintSystem::new(vec![1, 1], 4).with_epsilon(0.0)));
        assert!(bad(LinearConstraintSystem::new(vec![1, 1], 4).with_less_than(0, 2)));
        assert!(bad(LinearConstraintSystem::new(vec![1, 1], 4).with_less_than(1, 1)));
    }
}
