//! Random Sidon sets that are asymptotic bases of order 4.
//!
//! The crate samples the random set `A` where `n` is present with
//! probability `n^(-5/7)`, counts representations `r_4(A, n)`, prunes `A`
//! to a Sidon set `A \ B`, and checks the probabilistic estimates behind the
//! construction numerically:
//!
//! - [`sampler`]: seeded, prefix-stable realizations of `A`.
//! - [`repcount`]: exact `R_h`, `r_h`, `r*_h` for `h = 2, 3, 4`.
//! - [`sidon`]: the violation set `B`, pruning and Sidon checks.
//! - [`expectations`]: analytic expectations of the counting sums.
//! - [`kimvu`]: totally positive boolean polynomials, their partial
//!   derivatives and the Kim–Vu concentration threshold.
//! - [`harness`]: the end-to-end experiment, growth fits and reports.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expectations;
pub mod harness;
pub mod kimvu;
pub mod numeric;
pub mod repcount;
pub mod sampler;
pub mod sidon;

pub use error::{Error, Result};
pub use repcount::{Order, RepCountTable};
pub use sampler::{ProbabilityProfile, SampledSet};
