//! Density evolution: message-error recursions and decoding thresholds.
//!
//! Scalar recursions (erasure, Gallager A/B) are evaluated exactly. Ternary
//! decoders track the pair (error, erasure). Belief propagation evolves
//! quantized LLR densities. Thresholds are found by bisection on the channel
//! parameter.

mod bec;
mod bp;
mod scalar;
mod ternary;
mod tree;

use serde::{Deserialize, Serialize};

pub use bec::{
    bec_de_step, bec_iterate, bec_threshold, bec_threshold_regular_closed_form, bec_threshold_value,
};
pub use bp::{
    bp_de_step, bp_initial_density, bp_threshold, error_measure, BpEngine, BpOutcome, GridSpec,
    QuantizedDensity,
};
pub use scalar::{
    gallager_a_de_step, gallager_a_threshold, gallager_b_de_step, gallager_b_threshold,
    irregular_b_de_step, iterate_scalar, optimal_cutoff, optimal_cutoff_irregular,
    optimal_cutoff_schedule, quantized_decoder_threshold, CutoffRule, QuantizedDecoder, SCALAR_TOL,
};
pub use ternary::{
    ternary_biawgn_threshold, ternary_check_step, ternary_variable_step, weighted_de_threshold,
    Ternary, TernarySearch, TernaryTrace, TERNARY_CONVERGED,
};
pub use tree::{tree_root_erased, tree_validate, TreeEstimate};

/// Error measure below which an iteration is declared convergent.
pub const CONVERGED: f64 = 1e-8;
/// Error measure above which a non-decreasing run counts as a stall.
pub const STALL_LEVEL: f64 = 1e-4;
/// Consecutive non-decreasing iterations that declare divergence.
pub const STALL_WINDOW: usize = 50;
/// Iteration cap for density evolution on quantized densities.
pub const MAX_ITER_DENSITY: usize = 2000;
/// Iteration cap for scalar recursions; cheap, and convergence right below a
/// stability-limited threshold is geometric with ratio close to 1.
pub const MAX_ITER_SCALAR: usize = 200_000;

/// Result of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub value: f64,
    /// `(certified good, certified bad)` channel parameters.
    pub bracket: (f64, f64),
    pub iterations_used: usize,
    pub tolerance: f64,
}

/// How an iterated recursion ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Converged { iterations: usize },
    Stalled { iterations: usize, measure: f64 },
    Capped { iterations: usize, measure: f64 },
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }

    pub fn iterations(&self) -> usize {
        match *self {
            Outcome::Converged { iterations }
            | Outcome::Stalled { iterations, .. }
            | Outcome::Capped { iterations, .. } => iterations,
        }
    }
}

/// Drives `step` (which returns the new error measure) until convergence,
/// stall or the iteration cap.
pub(crate) fn run_until<F: FnMut(usize) -> f64>(initial: f64, max_iter: usize, step: F) -> Outcome {
    run_until_below(initial, CONVERGED, max_iter, step)
}

/// [`run_until`] with a custom convergence target.
pub(crate) fn run_until_below<F: FnMut(usize) -> f64>(
    initial: f64,
    target: f64,
    max_iter: usize,
    mut step: F,
) -> Outcome {
    let mut prev = initial;
    if prev < target {
        return Outcome::Converged { iterations: 0 };
    }
    let mut flat = 0;
    for it in 1..=max_iter {
        let m = step(it);
        if m < target {
            return Outcome::Converged { iterations: it };
        }
        // a decrease below 1e-12 is treated as no progress
        if m > STALL_LEVEL && m >= prev - 1e-12 {
            flat += 1;
            if flat >= STALL_WINDOW {
                return Outcome::Stalled {
                    iterations: it,
                    measure: m,
                };
            }
        } else {
            flat = 0;
        }
        prev = m;
    }
    Outcome::Capped {
        iterations: max_iter,
        measure: prev,
    }
}

/// Bisection for the largest good parameter when quality decreases with the
/// parameter (`good(lo)`, `!good(hi)`). `good` returns its verdict and the
/// number of iterations it spent.
pub(crate) fn bisect_decreasing<F: FnMut(f64) -> (bool, usize)>(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut good: F,
) -> ThresholdResult {
    let mut used = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (ok, it) = good(mid);
        used += it;
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ThresholdResult {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
        iterations_used: used,
        tolerance: tol,
    }
}
