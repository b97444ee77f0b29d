//! Totally positive multilinear polynomials in independent boolean
//! variables, the expectations of their partial derivatives, and the
//! Kim–Vu concentration bound
//!
//! `P(|Y - E(Y)| > C_k λ^(k-1/2) sqrt(E_{≥0}(Y) E_{≥1}(Y))) = O(exp(-λ/4 + (k-1) ln n))`.

mod builders;
mod montecarlo;
mod polynomial;

pub use builders::{build_r4_polynomial, build_violation_polynomial, VIOLATION_DEFAULT_CAP};
pub use montecarlo::{monte_carlo_deviation, DeviationSummary};
pub use polynomial::{
    derivative, expectation, DerivativeIndex, ExplicitSpace, Monomial, MultilinearPolynomial, ProfileSpace, VarSet,
    VariableSpace,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default bound on the number of distinct derivative supports examined per order.
pub const DEFAULT_CANDIDATE_CAP: usize = 1_000_000;

/// `E_d(Y) = max_{|α| = d} E(∂^α Y)` with the default candidate cap.
pub fn e_d(poly: &MultilinearPolynomial, space: &impl VariableSpace, d: usize) -> Result<f64> {
    e_d_capped(poly, space, d, DEFAULT_CANDIDATE_CAP)
}

/// `E_d(Y)`. Only square-free `α` supported inside some monomial can give a
/// nonzero derivative, so the maximum runs over the size-`d` subsets `S` of
/// monomials, with `E(∂^S Y) = Σ_{Γ ⊇ S} e_Γ Π_{j ∈ Γ \ S} p_j`.
pub fn e_d_capped(poly: &MultilinearPolynomial, space: &impl VariableSpace, d: usize, cap: usize) -> Result<f64> {
    if d == 0 {
        return expectation(poly, space);
    }
    if d > poly.degree() {
        return Ok(0.0);
    }
    let max_var = poly.variables().last().copied().unwrap_or(0) as u64;
    let bits = (64 - max_var.leading_zeros()).max(1);
    let contributions = if bits as usize * d <= 64 {
        accumulate(poly, space, d, cap, |s| pack(s, bits))?
    } else {
        accumulate(poly, space, d, cap, VarSet::from_slice)?
    };
    Ok(contributions.into_iter().fold(0.0, f64::max))
}

fn pack(vars: &[u32], bits: u32) -> u64 {
    vars.iter().fold(0u64, |k, &v| (k << bits) | v as u64)
}

/// Per-support sums of `E(∂^S Y)`, in ascending support order.
fn accumulate<K: Ord>(
    poly: &MultilinearPolynomial,
    space: &impl VariableSpace,
    d: usize,
    cap: usize,
    key: impl Fn(&[u32]) -> K,
) -> Result<Vec<f64>> {
    let mut entries: Vec<(K, f64)> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut subset: Vec<usize> = Vec::with_capacity(d);
    let mut chosen: Vec<u32> = Vec::with_capacity(d);
    for m in poly.monomials() {
        let len = m.vars.len();
        if len < d {
            continue;
        }
        probs.clear();
        for &v in &m.vars {
            probs.push(space.require(v)?);
        }
        // Lexicographic walk over the d-subsets of positions.
        subset.clear();
        subset.extend(0..d);
        loop {
            chosen.clear();
            chosen.extend(subset.iter().map(|&i| m.vars[i]));
            let mut w = m.coefficient;
            let mut next = 0;
            for (i, &p) in probs.iter().enumerate() {
                if next < d && subset[next] == i {
                    next += 1;
                } else {
                    w *= p;
                }
            }
            entries.push((key(&chosen), w));

            let mut i = d;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if subset[i] < len - d + i {
                    subset[i] += 1;
                    for j in i + 1..d {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    // Stable sort keeps monomial order within a support, so the sums are reproducible.
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut sums: Vec<f64> = Vec::new();
    let mut iter = entries.into_iter().peekable();
    while let Some((k, w)) = iter.next() {
        let mut total = w;
        while iter.peek().is_some_and(|(k2, _)| *k2 == k) {
            total += iter.next().expect("peeked").1;
        }
        sums.push(total);
        if sums.len() > cap {
            return Err(Error::CapExceeded {
                what: format!("the number of order-{d} derivative supports"),
                cap: cap as u64,
                hint: "raise the candidate cap".into(),
            });
        }
    }
    Ok(sums)
}

/// `E_0(Y), …, E_k(Y)` for `k = degree(Y)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeProfile {
    pub by_order: Vec<f64>,
}

impl DerivativeProfile {
    pub fn compute(poly: &MultilinearPolynomial, space: &impl VariableSpace, cap: usize) -> Result<Self> {
        let by_order = (0..=poly.degree())
            .map(|d| e_d_capped(poly, space, d, cap))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { by_order })
    }

    pub fn e_d(&self, d: usize) -> f64 {
        self.by_order.get(d).copied().unwrap_or(0.0)
    }

    /// `E_{≥d}(Y) = max_{d' ≥ d} E_{d'}(Y)`.
    pub fn e_ge(&self, d: usize) -> f64 {
        self.by_order.iter().skip(d).copied().fold(0.0, f64::max)
    }
}

/// `E_{≥d}(Y)` with the default candidate cap.
pub fn e_ge_d(poly: &MultilinearPolynomial, space: &impl VariableSpace, d: usize) -> Result<f64> {
    let mut best = 0.0f64;
    for d2 in d..=poly.degree() {
        best = best.max(e_d(poly, space, d2)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum LambdaMode {
    /// `λ = 20 ln n`.
    TwentyLogN,
    /// `λ = 32 ln n`.
    ThirtyTwoLogN,
    Value(f64),
}

impl LambdaMode {
    pub fn lambda(self, n: u64) -> f64 {
        let ln = (n as f64).ln();
        match self {
            LambdaMode::TwentyLogN => 20.0 * ln,
            LambdaMode::ThirtyTwoLogN => 32.0 * ln,
            LambdaMode::Value(v) => v,
        }
    }
}

impl std::str::FromStr for LambdaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "20logn" => Ok(LambdaMode::TwentyLogN),
            "32logn" => Ok(LambdaMode::ThirtyTwoLogN),
            other => other
                .parse::<f64>()
                .map(LambdaMode::Value)
                .map_err(|_| Error::Parse(format!("lambda mode {other:?}: expected 20logn, 32logn or a number"))),
        }
    }
}

/// Parameters of the concentration bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationQuery {
    pub lambda: f64,
    /// Degree of the polynomial.
    pub k: u32,
    pub c_k: f64,
    /// Size of the variable universe.
    pub n: u64,
}

impl ConcentrationQuery {
    pub fn new(lambda: f64, k: u32, c_k: f64, n: u64) -> Result<Self> {
        let q = Self { lambda, k, c_k, n };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::domain(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.k < 1 {
            return Err(Error::domain("degree k must be at least 1"));
        }
        if !(self.c_k > 0.0) {
            return Err(Error::domain(format!("C_k must be positive, got {}", self.c_k)));
        }
        if self.n < 1 {
            return Err(Error::domain("n must be at least 1"));
        }
        Ok(())
    }

    /// `C_k λ^(k - 1/2) sqrt(e_ge0 · e_ge1)`.
    pub fn threshold(&self, e_ge0: f64, e_ge1: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.c_k * self.lambda.powf(self.k as f64 - 0.5) * (e_ge0 * e_ge1).sqrt())
    }

    /// `exp(-λ/4 + (k - 1) ln n)`.
    pub fn tail_bound(&self) -> Result<f64> {
        self.validate()?;
        Ok((-self.lambda / 4.0 + (self.k as f64 - 1.0) * (self.n as f64).ln()).exp())
    }
}

/// Threshold for `poly`, computing `E_{≥0}` and `E_{≥1}` with the given cap.
pub fn kimvu_threshold(
    poly: &MultilinearPolynomial,
    space: &impl VariableSpace,
    query: &ConcentrationQuery,
    cap: usize,
) -> Result<f64> {
    let profile = DerivativeProfile::compute(poly, space, cap)?;
    query.threshold(profile.e_ge(0), profile.e_ge(1))
}
