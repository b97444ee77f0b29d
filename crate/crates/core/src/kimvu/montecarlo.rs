use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::polynomial::{expectation, MultilinearPolynomial, VariableSpace};

/// Empirical distribution of `Y` over independent assignments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub trials: u64,
    pub seed: u64,
    /// Exact `E(Y)`.
    pub expectation: f64,
    pub mean: f64,
    /// Sample standard deviation.
    pub std_dev: f64,
    /// Quantiles of `|Y - E(Y)|` at 50%, 90%, 99% (nearest rank) and the maximum.
    pub deviation_median: f64,
    pub deviation_p90: f64,
    pub deviation_p99: f64,
    pub deviation_max: f64,
    pub threshold: Option<f64>,
    /// Trials with `|Y - E(Y)| >= threshold`.
    pub tail_count: Option<u64>,
    pub tail_frequency: Option<f64>,
}

/// Samples `Y` on `trials` independent assignments. Trial `i` draws its
/// variables, in increasing index order, from the ChaCha8 stream `i` of
/// `seed`, so results do not depend on thread scheduling.
pub fn monte_carlo_deviation(
    poly: &MultilinearPolynomial,
    space: &impl VariableSpace,
    trials: u64,
    seed: u64,
    threshold: Option<f64>,
) -> Result<DeviationSummary> {
    if trials == 0 {
        return Err(Error::domain("trials must be at least 1"));
    }
    let expected = expectation(poly, space)?;
    let vars = poly.variables();
    let probs: Vec<f64> = vars.iter().map(|&v| space.require(v)).collect::<Result<_>>()?;

    // Monomials rewritten over variable positions and bucketed by their
    // least likely variable, which is checked first.
    let position = |v: u32| vars.binary_search(&v).expect("variable listed");
    let mut buckets: Vec<Vec<(Vec<usize>, f64)>> = vec![Vec::new(); vars.len()];
    let mut constant = 0.0;
    for m in poly.monomials() {
        let mut idx: Vec<usize> = m.vars.iter().map(|&v| position(v)).collect();
        match idx.iter().enumerate().min_by(|a, b| probs[*a.1].total_cmp(&probs[*b.1])) {
            None => constant += m.coefficient,
            Some((k, &pivot)) => {
                idx.swap_remove(k);
                buckets[pivot].push((idx, m.coefficient));
            }
        }
    }

    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![false; vars.len()],
            |present, trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                for (slot, &p) in present.iter_mut().zip(&probs) {
                    *slot = ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p;
                }
                let mut y = constant;
                for (pivot, bucket) in buckets.iter().enumerate() {
                    if present[pivot] {
                        for (rest, c) in bucket {
                            if rest.iter().all(|&i| present[i]) {
                                y += c;
                            }
                        }
                    }
                }
                y
            },
        )
        .collect();

    let t = trials as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = if trials > 1 {
        values.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let mut dev: Vec<f64> = values.iter().map(|y| (y - expected).abs()).collect();
    dev.sort_by(f64::total_cmp);
    let rank = |q: f64| dev[((q * t).ceil() as usize).clamp(1, dev.len()) - 1];
    let tail_count = threshold.map(|h| dev.iter().filter(|&&d| d >= h).count() as u64);

    Ok(DeviationSummary {
        trials,
        seed,
        expectation: expected,
        mean,
        std_dev: var.sqrt(),
        deviation_median: rank(0.5),
        deviation_p90: rank(0.9),
        deviation_p99: rank(0.99),
        deviation_max: *dev.last().expect("trials >= 1"),
        threshold,
        tail_count,
        tail_frequency: tail_count.map(|c| c as f64 / t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kimvu::{build_r4_polynomial, ExplicitSpace, ProfileSpace};
    use crate::sampler::ProbabilityProfile;

    #[test]
    fn certain_variable_never_deviates() {
        let y = MultilinearPolynomial::from_terms([([1u32], 1.0)]).unwrap();
        let s = ExplicitSpace::uniform([1], 1.0).unwrap();
        let r = monte_carlo_deviation(&y, &s, 1000, 5, Some(0.5)).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.deviation_max, 0.0);
        assert_eq!(r.tail_count, Some(0));
    }

    #[test]
    fn fair_coin_mean() {
        let y = MultilinearPolynomial::from_terms([([1u32], 1.0)]).unwrap();
        let s = ExplicitSpace::uniform([1], 0.5).unwrap();
        let r = monte_carlo_deviation(&y, &s, 100_000, 11, None).unwrap();
        assert!((r.mean - 0.5).abs() < 0.01);
        assert_eq!(r.deviation_max, 0.5);
        assert_eq!(r.tail_frequency, None);
    }

    #[test]
    fn deterministic_and_consistent_with_expectation() {
        let p = ProbabilityProfile::default();
        let poly = build_r4_polynomial(120);
        let space = ProfileSpace(p);
        let a = monte_carlo_deviation(&poly, &space, 2000, 42, Some(3.0)).unwrap();
        let b = monte_carlo_deviation(&poly, &space, 2000, 42, Some(3.0)).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_deviation(&poly, &space, 2000, 43, Some(3.0)).unwrap();
        assert_ne!(a.mean, c.mean);
        let se = a.std_dev / (a.trials as f64).sqrt();
        assert!((a.mean - a.expectation).abs() <= 4.0 * se, "{a:?}");
    }

    #[test]
    fn zero_trials_rejected() {
        let y = MultilinearPolynomial::from_terms([([1u32], 1.0)]).unwrap();
        let s = ExplicitSpace::uniform([1], 0.5).unwrap();
        assert!(monte_carlo_deviation(&y, &s, 0, 0, None).is_err());
    }
}
