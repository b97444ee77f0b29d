//! Log–log least squares and octave binning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `ln value = intercept + slope · ln n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope, `sqrt(SSE / (k - 2) / S_xx)`.
    pub stderr: f64,
    pub points_used: usize,
    /// Points dropped because the value was not positive.
    pub zeros_excluded: usize,
}

/// Fits the growth exponent of `(n, value)` pairs. Non-positive values
/// cannot be logged and are excluded; at least 3 points must remain.
pub fn fit_growth_exponent(series: &[(f64, f64)]) -> Result<GrowthFit> {
    if let Some(&(n, _)) = series.iter().find(|(n, _)| !(*n > 0.0)) {
        return Err(Error::domain(format!("abscissa must be positive, got {n}")));
    }
    let points: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(n, v)| (n.ln(), v.ln()))
        .collect();
    let zeros_excluded = series.len() - points.len();
    let k = points.len();
    if k < 3 {
        return Err(Error::domain(format!(
            "need at least 3 positive points for a growth fit, got {k} ({zeros_excluded} excluded)"
        )));
    }
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("growth fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(GrowthFit {
        slope,
        intercept,
        stderr: (sse / (kf - 2.0) / sxx).sqrt(),
        points_used: k,
        zeros_excluded,
    })
}

/// A range of `n` and the mean of a series over it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: u64,
    pub hi: u64,
    /// Geometric centre `sqrt(lo · hi)`.
    pub center: f64,
    pub mean: f64,
}

/// Octaves `[2^k, 2^(k+1) - 1]` clipped to `[lo, hi]`; a clipped octave is
/// kept if it still covers at least half of its length.
pub fn octave_ranges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if lo == 0 || hi < lo {
        return out;
    }
    let mut k = 63 - lo.leading_zeros();
    loop {
        let start = 1u64 << k;
        if start > hi {
            break;
        }
        let end = start.saturating_mul(2) - 1;
        let (a, b) = (start.max(lo), end.min(hi));
        if 2 * (b - a + 1) >= start {
            out.push((a, b));
        }
        if k == 63 {
            break;
        }
        k += 1;
    }
    out
}

/// Means of `value(n)` over each octave of `[lo, hi]`.
pub fn octave_bins(lo: u64, hi: u64, value: impl Fn(u64) -> f64) -> Vec<Bin> {
    octave_ranges(lo, hi)
        .into_iter()
        .map(|(a, b)| {
            let mean = crate::numeric::compensated_sum((a..=b).map(&value)) / (b - a + 1) as f64;
            Bin { lo: a, hi: b, center: ((a as f64) * (b as f64)).sqrt(), mean }
        })
        .collect()
}

/// Growth fit through the bin means.
pub fn fit_bins(bins: &[Bin]) -> Result<GrowthFit> {
    let series: Vec<(f64, f64)> = bins.iter().map(|b| (b.center, b.mean)).collect();
    fit_growth_exponent(&series)
}
