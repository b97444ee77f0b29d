//! Expectations of the counting sums over the random set `A`.
//!
//! Every quantity here is a deterministic sum of products of membership
//! probabilities `θ_y`; nothing is sampled.

mod constrained;
mod coupled;

pub use constrained::{constrained_expectation, ConstrainedSum, LinearConstraintSystem};
pub use coupled::{coupled_case, coupled_case_distinct, CoupledCase, DISTINCT_VARIANT_CAP};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, convolve, product_coefficient, CompensatedSum};
use crate::sampler::ProbabilityProfile;

/// `Σ_{n=1}^{N-1} n^α (N-n)^β`, summed in ascending `n`.
pub fn power_convolution_sum(big_n: u64, alpha: f64, beta: f64) -> Result<f64> {
    if big_n < 3 {
        return Err(Error::domain(format!("N must be at least 3, got {big_n}")));
    }
    if !(alpha > -1.0) || !(beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::domain(format!(
            "exponents must exceed -1 (got alpha = {alpha}, beta = {beta}); the sum diverges relative to N^(alpha+beta+1)"
        )));
    }
    let nf = big_n as f64;
    Ok(compensated_sum((1..big_n).map(|n| {
        let x = n as f64;
        x.powf(alpha) * (nf - x).powf(beta)
    })))
}

/// One grid point of the normalized power-convolution sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaRatioSample {
    #[serde(rename = "N")]
    pub big_n: u64,
    pub alpha: f64,
    pub beta: f64,
    pub sum: f64,
    /// `sum / N^(alpha + beta + 1)`.
    pub ratio: f64,
}

impl ThetaRatioSample {
    pub fn new(big_n: u64, alpha: f64, beta: f64) -> Result<Self> {
        let sum = power_convolution_sum(big_n, alpha, beta)?;
        let ratio = sum / (big_n as f64).powf(alpha + beta + 1.0);
        Ok(Self { big_n, alpha, beta, sum, ratio })
    }
}

/// Ratios over the grid `alphas × betas × ns`, in that nesting order.
pub fn ratio_profile(alphas: &[f64], betas: &[f64], ns: &[u64]) -> Result<Vec<ThetaRatioSample>> {
    let grid: Vec<(f64, f64, u64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().flat_map(move |&b| ns.iter().map(move |&n| (a, b, n))))
        .collect();
    grid.into_par_iter()
        .map(|(a, b, n)| ThetaRatioSample::new(n, a, b))
        .collect()
}

/// Relative change between consecutive ratios: `|r_{i+1} - r_i| / r_i`.
pub fn successive_drifts(samples: &[ThetaRatioSample]) -> Vec<f64> {
    samples
        .windows(2)
        .map(|w| (w[1].ratio - w[0].ratio).abs() / w[0].ratio)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum R4Method {
    /// Direct summation over `x_1 < x_2 < x_3 < x_4`.
    Enumerate,
    /// Inclusion–exclusion over equal-coordinate patterns of ordered tuples.
    Convolution,
}

impl std::str::FromStr for R4Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(R4Method::Enumerate),
            "convolution" => Ok(R4Method::Convolution),
            other => Err(Error::Parse(format!(
                "unknown method {other:?} (expected enumerate or convolution)"
            ))),
        }
    }
}

/// Largest `n` accepted by [`R4Method::Enumerate`] unless a cap is given.
pub const ENUMERATE_CAP: u64 = 2000;

/// `E(r_4(A, n))` with the default enumeration cap.
pub fn expected_r4(profile: &ProbabilityProfile, n: u64, method: R4Method) -> Result<f64> {
    expected_r4_capped(profile, n, method, ENUMERATE_CAP)
}

pub fn expected_r4_capped(
    profile: &ProbabilityProfile,
    n: u64,
    method: R4Method,
    enumerate_cap: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    match method {
        R4Method::Enumerate if n > enumerate_cap => Err(Error::CapExceeded {
            what: format!("direct enumeration at n = {n}"),
            cap: enumerate_cap,
            hint: "use --method convolution for large n".into(),
        }),
        R4Method::Enumerate => Ok(r4_enumerate(profile, n)),
        R4Method::Convolution => Ok(r4_convolution(profile, n)),
    }
}

fn r4_enumerate(profile: &ProbabilityProfile, n: u64) -> f64 {
    if n < 10 {
        return 0.0;
    }
    let theta = profile.thetas(n);
    let mut total = CompensatedSum::new();
    // x1 < x2 < x3 < x4 = n - x1 - x2 - x3.
    let mut x1 = 1;
    while 4 * x1 + 6 <= n {
        let mut x2 = x1 + 1;
        while x1 + 3 * x2 + 3 <= n {
            let head = theta[x1 as usize] * theta[x2 as usize];
            let mut x3 = x2 + 1;
            while x1 + x2 + 2 * x3 < n {
                let x4 = n - x1 - x2 - x3;
                total.add(head * theta[x3 as usize] * theta[x4 as usize]);
                x3 += 1;
            }
            x2 += 1;
        }
        x1 += 1;
    }
    total.value()
}

/// `p_k[j] = θ_{j/k}^k` when `k | j`, else 0.
fn diagonal_series(theta: &[f64], k: usize, limit: usize) -> Vec<f64> {
    let mut s = vec![0.0; limit + 1];
    for (y, &t) in theta.iter().enumerate().skip(1) {
        if k * y > limit {
            break;
        }
        s[k * y] = t.powi(k as i32);
    }
    s
}

/// Ordered-tuple counts with all four coordinates distinct, by Möbius
/// inversion over the set partitions of `{1, 2, 3, 4}` grouped by block type:
/// `1111: +1 (×1)`, `211: -1 (×6)`, `22: +1 (×3)`, `31: +2 (×4)`, `4: -6 (×1)`.
fn r4_convolution(profile: &ProbabilityProfile, n: u64) -> f64 {
    if n < 10 {
        return 0.0;
    }
    let limit = n as usize;
    let theta = profile.thetas(n);
    let p1 = diagonal_series(&theta, 1, limit);
    let p2 = diagonal_series(&theta, 2, limit);
    let p3 = diagonal_series(&theta, 3, limit);
    let p4 = diagonal_series(&theta, 4, limit);
    let pairs = convolve(&p1, &p1, limit);

    let t1111 = product_coefficient(&pairs, &pairs, limit);
    let t211 = product_coefficient(&p2, &pairs, limit);
    let t22 = product_coefficient(&p2, &p2, limit);
    let t31 = product_coefficient(&p3, &p1, limit);
    let t4 = p4[limit];

    compensated_sum([t1111, -6.0 * t211, 3.0 * t22, 8.0 * t31, -6.0 * t4]) / 24.0
}

/// `E(r_4(A, n))` for every `n ≤ limit` (index 0 is 0), via full series products.
pub fn expected_r4_series(profile: &ProbabilityProfile, limit: u64) -> Vec<f64> {
    let l = limit as usize;
    let theta = profile.thetas(limit);
    let p1 = diagonal_series(&theta, 1, l);
    let p2 = diagonal_series(&theta, 2, l);
    let p3 = diagonal_series(&theta, 3, l);
    let p4 = diagonal_series(&theta, 4, l);
    let pairs = convolve(&p1, &p1, l);
    let t1111 = convolve(&pairs, &pairs, l);
    let t211 = convolve(&p2, &pairs, l);
    let t22 = convolve(&p2, &p2, l);
    let t31 = convolve(&p3, &p1, l);
    (0..=l)
        .map(|m| {
            if m < 10 {
                return 0.0;
            }
            let v = compensated_sum([t1111[m], -6.0 * t211[m], 3.0 * t22[m], 8.0 * t31[m], -6.0 * p4[m]]);
            // FFT round-off can leave tiny negative residues near the start.
            (v / 24.0).max(0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_sum_examples() {
        assert_eq!(power_convolution_sum(10, 0.0, 0.0).unwrap(), 9.0);
        assert_eq!(power_convolution_sum(4, 1.0, 1.0).unwrap(), 10.0);
        for n in [3, 17, 1000, 123_457] {
            assert_eq!(power_convolution_sum(n, 0.0, 0.0).unwrap(), (n - 1) as f64);
        }
        let s = power_convolution_sum(10_000, -5.0 / 7.0, -3.0 / 7.0).unwrap();
        assert!(s.is_finite() && s > 0.0);
    }

    #[test]
    fn power_sum_domain() {
        assert!(matches!(power_convolution_sum(2, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(power_convolution_sum(10, -1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(power_convolution_sum(10, 0.0, -1.5), Err(Error::Domain(_))));
        assert!(matches!(power_convolution_sum(10, f64::NAN, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ratio_of_constant_sum() {
        let p = ratio_profile(&[0.0], &[0.0], &[10, 100, 1000]).unwrap();
        for s in &p {
            assert!((s.ratio - (s.big_n - 1) as f64 / s.big_n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn ratios_approach_beta_integral() {
        // B(2/7, 2/7) = Γ(2/7)² / Γ(4/7), computed with mpmath.
        let limit = 6.362_791_420_883_864;
        let a = -5.0 / 7.0;
        let p = ratio_profile(&[a], &[a], &[1_000, 10_000, 100_000, 1_000_000]).unwrap();
        let gaps: Vec<f64> = p.iter().map(|s| (limit - s.ratio).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(successive_drifts(&p).iter().all(|&d| d < 0.10));
    }

    #[test]
    fn r4_small_cases() {
        let p = ProbabilityProfile::default();
        for method in [R4Method::Enumerate, R4Method::Convolution] {
            for n in 1..10 {
                assert_eq!(expected_r4(&p, n, method).unwrap(), 0.0);
            }
            let v = expected_r4(&p, 10, method).unwrap();
            let exact = 0.103_308_207_780_468_06_f64;
            assert!((v - exact).abs() <= 4.0 * f64::EPSILON * exact, "{method:?}: {v}");
        }
        // With θ ≡ 1 the value counts partitions into 4 distinct parts.
        let full = ProbabilityProfile::full();
        assert_eq!(expected_r4(&full, 20, R4Method::Enumerate).unwrap(), 23.0);
        assert!((expected_r4(&full, 20, R4Method::Convolution).unwrap() - 23.0).abs() < 1e-9);
    }

    #[test]
    fn enumerate_cap_is_enforced() {
        let p = ProbabilityProfile::default();
        let err = expected_r4(&p, 2001, R4Method::Enumerate).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { cap: 2000, .. }));
        assert!(err.to_string().contains("convolution"));
        assert!(expected_r4_capped(&p, 2001, R4Method::Enumerate, 3000).is_ok());
        assert!(matches!(expected_r4(&p, 0, R4Method::Convolution), Err(Error::Domain(_))));
    }

    #[test]
    fn methods_agree() {
        let p = ProbabilityProfile::default();
        for n in [10u64, 11, 57, 200, 777, 1500, 2000] {
            let e = expected_r4(&p, n, R4Method::Enumerate).unwrap();
            let c = expected_r4(&p, n, R4Method::Convolution).unwrap();
            assert!((e - c).abs() / e < 1e-9, "n={n}: {e} vs {c}");
        }
    }

    #[test]
    fn series_matches_pointwise() {
        let p = ProbabilityProfile::default();
        let s = expected_r4_series(&p, 600);
        for n in [1u64, 9, 10, 33, 250, 600] {
            let c = expected_r4(&p, n, R4Method::Convolution).unwrap();
            assert!((s[n as usize] - c).abs() <= 1e-12 * c.max(1.0), "n={n}");
        }
    }

    #[test]
    fn method_parses() {
        assert_eq!("enumerate".parse::<R4Method>().unwrap(), R4Method::Enumerate);
        assert_eq!("convolution".parse::<R4Method>().unwrap(), R4Method::Convolution);
        assert!("fft".parse::<R4Method>().is_err());
    }

    proptest! {
        #[test]
        fn power_sum_is_symmetric(n in 3u64..3000, a in -0.99f64..3.0, b in -0.99f64..3.0) {
            let x = power_convolution_sum(n, a, b).unwrap();
            let y = power_convolution_sum(n, b, a).unwrap();
            prop_assert!((x - y).abs() <= 1e-12 * x.abs());
        }

        #[test]
        // Exponents in [0, 1]; much steeper profiles cancel catastrophically
        // in the inclusion–exclusion.
        fn methods_agree_for_other_profiles(den in 1u64..12, frac in 0.0f64..=1.0, n in 10u64..300) {
            let num = (frac * den as f64).round() as i64;
            let p = ProbabilityProfile::new(num, den).unwrap();
            let e = expected_r4(&p, n, R4Method::Enumerate).unwrap();
            let c = expected_r4(&p, n, R4Method::Convolution).unwrap();
            prop_assert!((e - c).abs() <= 1e-9 * e, "{} vs {}", e, c);
        }
    }
}
