use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repcount::{count_distinct, Order};
use crate::sampler::sample_set;
use crate::sidon::prune_with_violations;

use super::fit::{fit_bins, Bin, GrowthFit};
use super::{DifferenceStatistic, ExperimentConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Per-seed results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    /// `|A ∩ [1, N]|`.
    pub set_size: usize,
    /// `|B|`.
    pub violation_count: usize,
    /// `|A \ B|`.
    pub pruned_size: usize,
    /// Number of `n` in the window with `r_4(A \ B, n) = 0`.
    pub zero_count: u64,
    /// The first zeros, in increasing order.
    pub zeros: Vec<u64>,
    pub zeros_truncated: bool,
    pub last_zero: Option<u64>,
    /// Smallest `n_0` in the window with no zero in `[n_0, hi]`.
    pub n0: u64,
    pub zeros_revalidated: bool,
    pub difference: DifferenceStatistic,
    /// `d(n) ≤ (ln n)^e` on the whole window.
    pub envelope_holds: bool,
    /// Octave-binned growth fit of `r_4(A, ·)` for this seed alone.
    pub growth_fit: Option<GrowthFit>,
}

/// Cross-seed summary, computed in seed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds: usize,
    pub mean_set_size: f64,
    pub mean_violation_count: f64,
    pub mean_pruned_size: f64,
    /// Octave means of `r_4(A, n)` averaged over seeds.
    pub growth_bins: Vec<Bin>,
    pub growth_fit: Option<GrowthFit>,
    /// Octave means of `E r_4(A, n)`.
    pub expected_bins: Vec<Bin>,
    pub expected_fit: Option<GrowthFit>,
    /// Fraction of seeds with no zero in the window.
    pub zero_free_fraction: f64,
    /// Lower median of `n_0`.
    pub median_n0: u64,
    pub max_n0: u64,
    pub envelope_fraction: f64,
    pub max_envelope_constant: f64,
    pub max_difference: u64,
    pub all_zeros_revalidated: bool,
}

impl Aggregate {
    pub(crate) fn from_records(records: &[&SeedRecord], growth_bins: Vec<Bin>, expected_bins: Vec<Bin>) -> Self {
        let s = records.len() as f64;
        let mean = |f: fn(&SeedRecord) -> usize| records.iter().map(|r| f(r) as f64).sum::<f64>() / s;
        let mut n0: Vec<u64> = records.iter().map(|r| r.n0).collect();
        n0.sort_unstable();
        Aggregate {
            seeds: records.len(),
            mean_set_size: mean(|r| r.set_size),
            mean_violation_count: mean(|r| r.violation_count),
            mean_pruned_size: mean(|r| r.pruned_size),
            growth_fit: fit_bins(&growth_bins).ok(),
            growth_bins,
            expected_fit: fit_bins(&expected_bins).ok(),
            expected_bins,
            zero_free_fraction: records.iter().filter(|r| r.zero_count == 0).count() as f64 / s,
            median_n0: n0[(n0.len() - 1) / 2],
            max_n0: *n0.last().expect("at least one seed"),
            envelope_fraction: records.iter().filter(|r| r.envelope_holds).count() as f64 / s,
            max_envelope_constant: records.iter().map(|r| r.difference.envelope_constant).fold(0.0, f64::max),
            max_difference: records.iter().map(|r| r.difference.max).max().unwrap_or(0),
            all_zeros_revalidated: records.iter().all(|r| r.zeros_revalidated),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

/// The JSON document written by `verify-theorem`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    /// Base of every logarithm in the report.
    pub log_base: String,
    pub config: ExperimentConfig,
    /// One record per seed, in the order of `config.seeds`.
    pub records: Vec<SeedRecord>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub(crate) fn new(config: ExperimentConfig, records: Vec<SeedRecord>, aggregate: Aggregate) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
            log_base: "natural".into(),
            config,
            records,
            aggregate,
        }
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "report schema version {} is not supported (expected {SCHEMA_VERSION})",
                report.schema_version
            )));
        }
        Ok(report)
    }
}

/// Resamples every seed of a report and checks the set sizes and every
/// listed zero against a fresh count.
pub fn revalidate_report(report: &ExperimentReport) -> Result<()> {
    let config = &report.config;
    config.validate()?;
    if report.records.len() != config.seeds.len() {
        return Err(Error::Revalidation(format!(
            "{} records for {} seeds",
            report.records.len(),
            config.seeds.len()
        )));
    }
    for (record, &seed) in report.records.iter().zip(&config.seeds) {
        let fail = |msg: String| Err(Error::Revalidation(format!("seed {seed}: {msg}")));
        if record.seed != seed {
            return fail(format!("record carries seed {}", record.seed));
        }
        let a = sample_set(&config.profile, config.limit, seed)?;
        let (kept, b) = prune_with_violations(a.as_slice());
        if (a.len(), b.len(), kept.len()) != (record.set_size, record.violation_count, record.pruned_size) {
            return fail("set sizes differ from a fresh sample".into());
        }
        if record.zeros.windows(2).any(|w| w[0] >= w[1]) {
            return fail("zeros are not strictly increasing".into());
        }
        let (lo, hi) = config.window;
        for &n in record.zeros.iter().chain(record.last_zero.iter()) {
            if n < lo || n > hi {
                return fail(format!("zero {n} lies outside the window"));
            }
            if count_distinct(&kept, n, Order::FOUR)? != 0 {
                return fail(format!("r_4(A \\ B, {n}) is not zero"));
            }
        }
        if record.n0 != record.last_zero.map_or(lo, |z| z + 1) {
            return fail("n0 does not follow the last zero".into());
        }
    }
    Ok(())
}
