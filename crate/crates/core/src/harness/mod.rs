//! End-to-end experiment: sample `A`, prune it to the Sidon set `A \ B`,
//! and measure how `r_4(A, ·)` grows, where `r_4(A \ B, ·)` vanishes, and how
//! much pruning costs.

mod fit;
mod report;
mod setfile;

pub use fit::{fit_bins, fit_growth_exponent, octave_bins, octave_ranges, Bin, GrowthFit};
pub use setfile::{format_set, parse_set, read_set_file};
pub use report::{revalidate_report, Aggregate, ExperimentReport, SeedRecord, ToolInfo, SCHEMA_VERSION};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repcount::{count_distinct, rep_table, Order};
use crate::sampler::{sample_set, ProbabilityProfile};
use crate::sidon::{prune, prune_with_violations};

/// Parameters of one experiment. The report is a pure function of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub profile: ProbabilityProfile,
    /// Sample bound `N`.
    pub limit: u64,
    pub seeds: Vec<u64>,
    /// Analysis window `[lo, hi]`, `hi ≤ N`.
    pub window: (u64, u64),
    /// Order of the representation function; only 4 is supported.
    pub order: u32,
    /// Exponent `e` of the envelope `C (ln n)^e` for the pruning loss.
    pub envelope_exponent: f64,
    /// Zero locations listed per seed; the rest are only counted.
    pub max_reported_zeros: usize,
}

impl ExperimentConfig {
    pub fn new(limit: u64, seeds: Vec<u64>, window: (u64, u64)) -> Self {
        Self {
            profile: ProbabilityProfile::default(),
            limit,
            seeds,
            window,
            order: 4,
            envelope_exponent: 6.5,
            max_reported_zeros: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seed list is empty".into()));
        }
        if lo < 1 || hi < lo {
            return Err(Error::InvalidConfig(format!("window [{lo}, {hi}] must satisfy 1 <= lo <= hi")));
        }
        if hi > self.limit {
            return Err(Error::InvalidConfig(format!("window end {hi} exceeds the sample bound {}", self.limit)));
        }
        if self.order != 4 {
            return Err(Error::InvalidConfig(format!("only order 4 is supported, got {}", self.order)));
        }
        if !self.envelope_exponent.is_finite() {
            return Err(Error::InvalidConfig("envelope exponent must be finite".into()));
        }
        if self.profile.exponent_den() == 0 {
            return Err(Error::InvalidConfig("profile denominator must be positive".into()));
        }
        Ok(())
    }
}

/// Pruning loss `d(n) = r_4(A, n) - r_4(A \ B, n)` over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceStatistic {
    pub max: u64,
    /// Smallest `n` attaining the maximum, if the window is nonempty.
    pub argmax: Option<u64>,
    /// Smallest `C` with `d(n) ≤ C (ln n)^e` on the window.
    pub envelope_constant: f64,
    /// Whether `d(n) ≥ 0` everywhere.
    pub nonnegative: bool,
}

/// Computes the loss from two count series indexed by `n` (index 0 unused).
pub fn difference_from_counts(full: &[u64], pruned: &[u64], window: (u64, u64), exponent: f64) -> DifferenceStatistic {
    let mut stat = DifferenceStatistic { max: 0, argmax: None, envelope_constant: 0.0, nonnegative: true };
    for n in window.0..=window.1 {
        let (f, p) = (full[n as usize], pruned[n as usize]);
        if p > f {
            stat.nonnegative = false;
            continue;
        }
        let d = f - p;
        if stat.argmax.is_none() || d > stat.max {
            stat.max = d;
            stat.argmax = Some(n);
        }
        if d > 0 {
            let scale = (n as f64).ln().powf(exponent);
            let c = if scale > 0.0 { d as f64 / scale } else { f64::INFINITY };
            stat.envelope_constant = stat.envelope_constant.max(c);
        }
    }
    stat
}

/// `d(n)` for the set `A` (strictly increasing) on `window`.
pub fn difference_statistic(set: &[u64], window: (u64, u64), exponent: f64) -> Result<DifferenceStatistic> {
    if window.0 < 1 || window.1 < window.0 {
        return Err(Error::InvalidConfig(format!("invalid window [{}, {}]", window.0, window.1)));
    }
    let kept = prune(set);
    let full = rep_table(set, Order::FOUR, window.1)?;
    let pruned = rep_table(&kept, Order::FOUR, window.1)?;
    Ok(difference_from_counts(full.distincts(), pruned.distincts(), window, exponent))
}

/// Everything computed for one seed; `full` and `pruned` are `r_4` indexed by `n ≤ N`.
pub struct SeedOutcome {
    pub record: SeedRecord,
    pub full: Vec<u64>,
    pub pruned: Vec<u64>,
}

/// Runs the pipeline for a single seed.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    config.validate()?;
    let (lo, hi) = config.window;
    let a = sample_set(&config.profile, config.limit, seed)?;
    let (kept, b) = prune_with_violations(a.as_slice());
    let full = rep_table(a.as_slice(), Order::FOUR, config.limit)?.into_distincts();
    let pruned = rep_table(&kept, Order::FOUR, config.limit)?.into_distincts();

    let mut zero_count = 0u64;
    let mut zeros = Vec::new();
    let mut last_zero = None;
    for n in lo..=hi {
        if pruned[n as usize] == 0 {
            zero_count += 1;
            last_zero = Some(n);
            if zeros.len() < config.max_reported_zeros {
                zeros.push(n);
            }
        }
    }
    // Independent recount of every listed zero and of the last one.
    let mut recheck: Vec<u64> = zeros.clone();
    recheck.extend(last_zero);
    let zeros_revalidated = recheck
        .iter()
        .map(|&n| count_distinct(&kept, n, Order::FOUR).map(|c| c == 0))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|ok| ok);

    let difference = difference_from_counts(&full, &pruned, config.window, config.envelope_exponent);
    let growth = octave_bins(lo, hi, |n| full[n as usize] as f64);
    let growth_fit = fit_bins(&growth).ok();

    let record = SeedRecord {
        seed,
        set_size: a.len(),
        violation_count: b.len(),
        pruned_size: kept.len(),
        zero_count,
        zeros,
        zeros_truncated: zero_count as usize > config.max_reported_zeros,
        last_zero,
        n0: last_zero.map_or(lo, |z| z + 1),
        zeros_revalidated,
        difference,
        envelope_holds: difference.nonnegative && difference.envelope_constant <= 1.0,
        growth_fit,
    };
    Ok(SeedOutcome { record, full, pruned })
}

/// Runs every seed (in parallel) and aggregates. `series` receives each
/// seed's full count series; it may be called concurrently.
pub fn run_theorem_experiment_with(
    config: &ExperimentConfig,
    series: impl Fn(&SeedOutcome) -> Result<()> + Sync,
) -> Result<ExperimentReport> {
    config.validate()?;
    let records = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let outcome = run_seed(config, seed)?;
            series(&outcome)?;
            Ok((outcome.record, outcome.full))
        })
        .collect::<Result<Vec<(SeedRecord, Vec<u64>)>>>()?;
    let (records, fulls): (Vec<SeedRecord>, Vec<Vec<u64>>) = records.into_iter().unzip();

    // Seed-sorted order for everything aggregated, so the seed list order
    // only affects the order of the records.
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| (records[i].seed, i));
    let sorted_records: Vec<&SeedRecord> = order.iter().map(|&i| &records[i]).collect();

    let mut total = vec![0u64; config.window.1 as usize + 1];
    for full in &fulls {
        for (t, &x) in total.iter_mut().zip(full.iter()) {
            *t += x;
        }
    }
    let (bins, expected_bins) = mean_bins(&config.profile, config.window, &total, fulls.len());
    let aggregate = Aggregate::from_records(&sorted_records, bins, expected_bins);
    Ok(ExperimentReport::new(config.clone(), records, aggregate))
}

/// Octave bins of the seed mean of `r_4(A, ·)` and of `E r_4(A, ·)`.
/// `total[n]` is the sum of `r_4(A, n)` over `seeds` samples.
fn mean_bins(profile: &ProbabilityProfile, window: (u64, u64), total: &[u64], seeds: usize) -> (Vec<Bin>, Vec<Bin>) {
    let (lo, hi) = window;
    let bins = octave_bins(lo, hi, |n| total[n as usize] as f64 / seeds as f64);
    let expected = crate::expectations::expected_r4_series(profile, hi);
    (bins, octave_bins(lo, hi, |n| expected[n as usize]))
}

/// Seed-averaged growth of `r_4(A, n)` without pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthExperiment {
    pub seeds: usize,
    pub window: (u64, u64),
    pub bins: Vec<Bin>,
    pub fit: Option<GrowthFit>,
    /// The same bins for `E r_4(A, n)`.
    pub expected_bins: Vec<Bin>,
    pub expected_fit: Option<GrowthFit>,
}

/// Averages `r_4(A, n)` over `A ∩ [1, hi]` for each seed and fits the
/// octave means. Sums are exact integers, so the result does not depend on
/// scheduling or seed order.
pub fn growth_experiment(profile: &ProbabilityProfile, seeds: &[u64], window: (u64, u64)) -> Result<GrowthExperiment> {
    let (lo, hi) = window;
    if seeds.is_empty() || lo < 1 || hi < lo {
        return Err(Error::InvalidConfig(format!("need seeds and 1 <= lo <= hi, got window [{lo}, {hi}]")));
    }
    let total = seeds
        .par_iter()
        .map(|&seed| {
            let a = sample_set(profile, hi, seed)?;
            Ok::<_, Error>(rep_table(a.as_slice(), Order::FOUR, hi)?.into_distincts())
        })
        .try_reduce_with(|mut acc, next| {
            for (x, y) in acc.iter_mut().zip(next) {
                *x += y;
            }
            Ok(acc)
        })
        .expect("seed list is nonempty")?;
    let (bins, expected_bins) = mean_bins(profile, window, &total, seeds.len());
    Ok(GrowthExperiment {
        seeds: seeds.len(),
        window,
        fit: fit_bins(&bins).ok(),
        bins,
        expected_fit: fit_bins(&expected_bins).ok(),
        expected_bins,
    })
}

pub fn run_theorem_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_theorem_experiment_with(config, |_| Ok(()))
}

/// Writes `n,r4_full,r4_pruned,diff` rows for the window.
pub fn write_series_csv(out: impl Write, outcome: &SeedOutcome, window: (u64, u64)) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "r4_full", "r4_pruned", "diff"]).map_err(csv_error)?;
    for n in window.0..=window.1 {
        let (f, p) = (outcome.full[n as usize], outcome.pruned[n as usize]);
        w.serialize((n, f, p, f as i64 - p as i64)).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}
