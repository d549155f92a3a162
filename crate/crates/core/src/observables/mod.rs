//! Brillouin-zone integrated current and the closed-form predictors it is
//! compared against.
//!
//! All zone integrals are `(2 pi)^{-2} sum_k w_k f(k)` over a [`BZGrid`](crate::lattice::BZGrid),
//! reduced sequentially in grid order with compensated summation, so results do
//! not depend on the number of worker threads.

mod adiabatic;
mod current;
mod dirac;
mod kubo;
mod predictors;

pub use adiabatic::{adiabatic_decomposition, AdiabaticTerms};
pub use current::{current_integrand, current_trace, running_average, trapezoid_running_mean, CurrentTrace, TraceKind};
pub use dirac::dirac_timeavg;
pub use kubo::{kubo_trace, kubo_trace_with, KuboOptions, Refinement};
pub use predictors::{
    ballistic_d, bloch_predictor, bloch_predictor_trace, hall_sigma, semimetal_sigma, BallisticD, HallSigma,
};

use rayon::prelude::*;

use crate::error::Result;

/// `(2 pi)^{-2}`.
pub const INV_TWO_PI_SQ: f64 = 1.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI);

const BLOCK: usize = 1024;

/// Maps `f` over `0..n` in parallel blocks and folds the results sequentially in
/// index order. The first error in index order is returned.
pub(crate) fn ordered_fold<T, F, G>(n: usize, f: F, mut fold: G) -> Result<()>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
    G: FnMut(usize, T),
{
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let chunk: Vec<Result<T>> = (start..end).into_par_iter().map(&f).collect();
        for (off, r) in chunk.into_iter().enumerate() {
            fold(start + off, r?);
        }
        start = end;
    }
    Ok(())
}
