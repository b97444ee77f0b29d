//! Small numeric kernels shared by the expectation code: compensated
//! summation and truncated real convolution.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Products below this many multiply-adds use the direct O(n·m) loop.
const DIRECT_CONVOLUTION_WORK: usize = 1 << 24;

/// Coefficients `0..=limit` of the product of two real power series.
///
/// Small inputs are convolved directly (bit-reproducible, exact up to
/// rounding of each product); large ones go through an FFT.
pub fn convolve(a: &[f64], b: &[f64], limit: usize) -> Vec<f64> {
    let a = &a[..a.len().min(limit + 1)];
    let b = &b[..b.len().min(limit + 1)];
    if a.is_empty() || b.is_empty() {
        return vec![0.0; limit + 1];
    }
    if a.len().saturating_mul(b.len()) <= DIRECT_CONVOLUTION_WORK {
        convolve_direct(a, b, limit)
    } else {
        convolve_fft(a, b, limit)
    }
}

fn convolve_direct(a: &[f64], b: &[f64], limit: usize) -> Vec<f64> {
    let mut out = vec![0.0; limit + 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let span = (limit - i + 1).min(b.len());
        for (o, &y) in out[i..i + span].iter_mut().zip(&b[..span]) {
            *o += x * y;
        }
    }
    out
}

fn convolve_fft(a: &[f64], b: &[f64], limit: usize) -> Vec<f64> {
    let len = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);

    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(len, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(len, Complex64::new(0.0, 0.0));
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inverse.process(&mut fa);

    let scale = 1.0 / len as f64;
    let mut out: Vec<f64> = fa.iter().take(limit + 1).map(|c| c.re * scale).collect();
    out.resize(limit + 1, 0.0);
    out
}

/// Coefficient of `x^n` in `a(x)·b(x)`, compensated.
pub fn product_coefficient(a: &[f64], b: &[f64], n: usize) -> f64 {
    let lo = n.saturating_sub(b.len().saturating_sub(1));
    let hi = n.min(a.len().saturating_sub(1));
    if a.is_empty() || b.is_empty() || lo > hi {
        return 0.0;
    }
    compensated_sum((lo..=hi).map(|j| a[j] * b[n - j]))
}
