//! Seeded realizations of the random set in which every positive integer `n`
//! is included independently with probability `θ_n = min(1, n^(-p/q))`.
//!
//! Randomness is counter based: the draw that decides membership of `n` is
//! the `n`-th 64-bit word of a ChaCha8 stream keyed by the seed. A set sampled
//! up to `N` is therefore a prefix of the set sampled up to any `M > N` with
//! the same seed, and disjoint ranges can be generated independently.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Membership-probability law `θ_n = min(1, n^(-exponent_num/exponent_den))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbabilityProfile {
    exponent_num: i64,
    exponent_den: u64,
}

impl Default for ProbabilityProfile {
    /// The `n^(-5/7)` law.
    fn default() -> Self {
        ProbabilityProfile {
            exponent_num: 5,
            exponent_den: 7,
        }
    }
}

impl ProbabilityProfile {
    pub fn new(exponent_num: i64, exponent_den: u64) -> Result<Self> {
        if exponent_den == 0 {
            return Err(Error::domain("exponent denominator must be positive"));
        }
        Ok(ProbabilityProfile {
            exponent_num,
            exponent_den,
        })
    }

    /// The full set: every integer is included.
    pub fn full() -> Self {
        ProbabilityProfile {
            exponent_num: 0,
            exponent_den: 1,
        }
    }

    pub fn exponent_num(&self) -> i64 {
        self.exponent_num
    }

    pub fn exponent_den(&self) -> u64 {
        self.exponent_den
    }

    pub fn exponent(&self) -> f64 {
        self.exponent_num as f64 / self.exponent_den as f64
    }

    /// `θ_n`, rounded to nearest by `powf`.
    pub fn membership_probability(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("membership probability needs n >= 1"));
        }
        Ok(self.theta(n))
    }

    /// Unchecked `θ_n`; callers guarantee `n >= 1`.
    #[inline]
    pub(crate) fn theta(&self, n: u64) -> f64 {
        if self.exponent_num <= 0 {
            return 1.0;
        }
        (n as f64).powf(-self.exponent()).min(1.0)
    }

    /// `θ_0, θ_1, ..., θ_limit` with the placeholder `θ_0 = 0`.
    pub fn thetas(&self, limit: u64) -> Vec<f64> {
        let mut out = Vec::with_capacity(limit as usize + 1);
        out.push(0.0);
        out.extend((1..=limit).map(|n| self.theta(n)));
        out
    }
}

impl fmt::Display for ProbabilityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.exponent_num, self.exponent_den)
    }
}

impl FromStr for ProbabilityProfile {
    type Err = Error;

    /// Accepts `p/q` or a bare integer `p`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let num = num
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("exponent numerator {num:?}: {e}")))?;
        let den = den
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("exponent denominator {den:?}: {e}")))?;
        ProbabilityProfile::new(num, den)
    }
}

/// A finite realization `A ∩ [1, bound]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledSet {
    pub profile: ProbabilityProfile,
    pub seed: u64,
    pub bound: u64,
    pub elements: Vec<u64>,
}

impl SampledSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.elements
    }

    /// The realization truncated to `[1, bound]`; identical to resampling
    /// with the smaller bound.
    pub fn restrict(&self, bound: u64) -> SampledSet {
        let bound = bound.min(self.bound);
        let end = self.elements.partition_point(|&x| x <= bound);
        SampledSet {
            profile: self.profile,
            seed: self.seed,
            bound,
            elements: self.elements[..end].to_vec(),
        }
    }
}

#[inline]
fn unit_interval(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Members of the realization inside `[lo, hi]`.
pub fn sample_range(profile: &ProbabilityProfile, seed: u64, lo: u64, hi: u64) -> Result<Vec<u64>> {
    if lo == 0 {
        return Err(Error::domain("sample range must start at n >= 1"));
    }
    let mut out = Vec::new();
    if hi < lo {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Each u64 draw consumes two 32-bit words of the stream.
    rng.set_word_pos(2 * u128::from(lo - 1));
    for n in lo..=hi {
        let u = unit_interval(rng.next_u64());
        if u < profile.theta(n) {
            out.push(n);
        }
    }
    Ok(out)
}

/// Samples `A ∩ [1, bound]`.
pub fn sample_set(profile: &ProbabilityProfile, bound: u64, seed: u64) -> Result<SampledSet> {
    if bound == 0 {
        return Err(Error::domain("sample bound N must be >= 1"));
    }
    Ok(SampledSet {
        profile: *profile,
        seed,
        bound,
        elements: sample_range(profile, seed, 1, bound)?,
    })
}

/// Same result as [`sample_set`], generated in parallel chunks.
pub fn sample_set_parallel(
    profile: &ProbabilityProfile,
    bound: u64,
    seed: u64,
    chunk: u64,
) -> Result<SampledSet> {
    if bound == 0 {
        return Err(Error::domain("sample bound N must be >= 1"));
    }
    let chunk = chunk.max(1);
    let starts: Vec<u64> = (0..bound.div_ceil(chunk)).map(|i| 1 + i * chunk).collect();
    let parts = starts
        .par_iter()
        .map(|&lo| sample_range(profile, seed, lo, (lo + chunk - 1).min(bound)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledSet {
        profile: *profile,
        seed,
        bound,
        elements: parts.concat(),
    })
}

/// `Σ_{n=1}^{N} θ_n`, summed in ascending `n` with compensation.
pub fn expected_size(profile: &ProbabilityProfile, bound: u64) -> Result<f64> {
    if bound == 0 {
        return Err(Error::domain("expected size needs N >= 1"));
    }
    let mut sum = CompensatedSum::new();
    for n in 1..=bound {
        sum.add(profile.theta(n));
    }
    Ok(sum.value())
}

/// `Σ_{n=1}^{N} θ_n (1 - θ_n)`, the variance of the sample size.
pub fn size_variance(profile: &ProbabilityProfile, bound: u64) -> Result<f64> {
    if bound == 0 {
        return Err(Error::domain("size variance needs N >= 1"));
    }
    let mut sum = CompensatedSum::new();
    for n in 1..=bound {
        let t = profile.theta(n);
        sum.add(t * (1.0 - t));
    }
    Ok(sum.value())
}
