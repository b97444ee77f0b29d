use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::sampler::ProbabilityProfile;

/// Sorted, repeat-free variable indices of one monomial.
pub type VarSet = SmallVec<[u32; 8]>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monomial {
    pub vars: VarSet,
    pub coefficient: f64,
}

/// `Σ e_i Γ_i` with `e_i > 0` and each `Γ_i` a product of distinct boolean
/// variables. Monomials are kept sorted by variable set and merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MultilinearPolynomial {
    monomials: Vec<Monomial>,
}

impl MultilinearPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a polynomial from arbitrary terms: repeated variables inside a
    /// term collapse (`t² = t`) and terms with equal variable sets merge.
    pub fn from_terms<I, V>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: IntoIterator<Item = u32>,
    {
        let mut merged: HashMap<VarSet, f64> = HashMap::new();
        for (vars, c) in terms {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidPolynomial(format!(
                    "coefficients must be positive and finite, got {c}"
                )));
            }
            let mut set: VarSet = vars.into_iter().collect();
            set.sort_unstable();
            set.dedup();
            *merged.entry(set).or_insert(0.0) += c;
        }
        Ok(Self::from_merged(merged))
    }

    fn from_merged(merged: HashMap<VarSet, f64>) -> Self {
        let mut monomials: Vec<Monomial> = merged
            .into_iter()
            .map(|(vars, coefficient)| Monomial { vars, coefficient })
            .collect();
        monomials.sort_unstable_by(|a, b| a.vars.cmp(&b.vars));
        Self { monomials }
    }

    /// Trusted constructor: sets must already be sorted, repeat-free and unique.
    pub(crate) fn from_sorted_unique(monomials: Vec<Monomial>) -> Self {
        debug_assert!(monomials.windows(2).all(|w| w[0].vars < w[1].vars));
        debug_assert!(monomials.iter().all(|m| m.vars.windows(2).all(|w| w[0] < w[1])));
        Self { monomials }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(|m| m.vars.len()).max().unwrap_or(0)
    }

    /// All coefficients at most 1.
    pub fn is_regular(&self) -> bool {
        self.monomials.iter().all(|m| m.coefficient <= 1.0)
    }

    pub fn variables(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.monomials.iter().flat_map(|m| m.vars.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Value at the assignment where exactly the variables in `present` are 1.
    pub fn evaluate(&self, present: impl Fn(u32) -> bool) -> f64 {
        self.monomials
            .iter()
            .filter(|m| m.vars.iter().all(|&v| present(v)))
            .map(|m| m.coefficient)
            .sum()
    }

    /// `Y_1 + Y_2`.
    pub fn add(&self, other: &Self) -> Self {
        let mut merged: HashMap<VarSet, f64> = HashMap::new();
        for m in self.monomials.iter().chain(&other.monomials) {
            *merged.entry(m.vars.clone()).or_insert(0.0) += m.coefficient;
        }
        Self::from_merged(merged)
    }
}

/// Probabilities of the boolean variables.
pub trait VariableSpace: Sync {
    fn probability(&self, var: u32) -> Option<f64>;

    fn require(&self, var: u32) -> Result<f64> {
        self.probability(var).ok_or(Error::UnpricedVariable(var))
    }
}

/// Explicit variable → probability table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplicitSpace {
    probabilities: HashMap<u32, f64>,
}

impl ExplicitSpace {
    pub fn new(probabilities: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let probabilities: HashMap<u32, f64> = probabilities.into_iter().collect();
        if let Some((v, p)) = probabilities.iter().find(|(_, &p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::domain(format!("probability of t_{v} is {p}, outside [0, 1]")));
        }
        Ok(Self { probabilities })
    }

    /// Every variable in `vars` gets probability `p`.
    pub fn uniform(vars: impl IntoIterator<Item = u32>, p: f64) -> Result<Self> {
        Self::new(vars.into_iter().map(|v| (v, p)))
    }
}

impl VariableSpace for ExplicitSpace {
    fn probability(&self, var: u32) -> Option<f64> {
        self.probabilities.get(&var).copied()
    }
}

/// `t_i` is the indicator of `i ∈ A`, priced by the membership law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpace(pub ProbabilityProfile);

impl VariableSpace for ProfileSpace {
    fn probability(&self, var: u32) -> Option<f64> {
        (var >= 1).then(|| self.0.theta(var as u64))
    }
}

/// Multi-index `α`: variable → derivative order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DerivativeIndex(pub BTreeMap<u32, u32>);

impl DerivativeIndex {
    pub fn new(entries: impl IntoIterator<Item = (u32, u32)>) -> Self {
        Self(entries.into_iter().filter(|&(_, k)| k > 0).collect())
    }

    /// First-order derivative in each listed variable.
    pub fn of_set(vars: impl IntoIterator<Item = u32>) -> Self {
        Self::new(vars.into_iter().map(|v| (v, 1)))
    }

    pub fn order(&self) -> u32 {
        self.0.values().sum()
    }
}

/// `∂^α Y`. Any `α_i ≥ 2` gives zero; otherwise the monomials containing the
/// support of `α` survive with the support removed.
pub fn derivative(poly: &MultilinearPolynomial, alpha: &DerivativeIndex) -> MultilinearPolynomial {
    if alpha.0.values().any(|&k| k >= 2) {
        return MultilinearPolynomial::zero();
    }
    let support: Vec<u32> = alpha.0.keys().copied().collect();
    let mut merged: HashMap<VarSet, f64> = HashMap::new();
    for m in &poly.monomials {
        if support.iter().all(|v| m.vars.binary_search(v).is_ok()) {
            let rest: VarSet = m.vars.iter().copied().filter(|v| support.binary_search(v).is_err()).collect();
            *merged.entry(rest).or_insert(0.0) += m.coefficient;
        }
    }
    MultilinearPolynomial::from_merged(merged)
}

/// `E(Y) = Σ e_i Π_{j ∈ Γ_i} p_j`.
pub fn expectation(poly: &MultilinearPolynomial, space: &impl VariableSpace) -> Result<f64> {
    let mut total = crate::numeric::CompensatedSum::new();
    for m in &poly.monomials {
        let mut w = m.coefficient;
        for &v in &m.vars {
            w *= space.require(v)?;
        }
        total.add(w);
    }
    Ok(total.value())
}
