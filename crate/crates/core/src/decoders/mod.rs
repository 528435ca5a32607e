//! Message-passing decoders on a [`FactorGraph`](crate::factor_graph::FactorGraph).
//!
//! All iterative decoders use the flooding schedule: one iteration is a check
//! round followed by a variable round, and every outgoing message excludes the
//! incoming message on the same edge. The pure node maps are exported so their
//! symmetry properties can be tested in isolation.

mod bec;
mod bp;
mod gallager;
mod ml;
mod weighted;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;

pub use bec::{
    bec_check_map, bec_variable_map, decode_bec_mp, decode_bec_mp_trace, decode_bec_peeling,
};
pub use bp::{bp_check_map, bp_posteriors, bp_variable_map, decode_bp, BP_LLR_CLAMP};
pub use gallager::{
    decode_gallager_a, decode_gallager_b, gallager_check_map, gallager_variable_map,
};
pub use ml::ml_erasure_decode;
pub use weighted::{decode_weighted_erasure, weighted_check_map, weighted_variable_map};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeStatus {
    Success,
    Stall,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// Decoded ±1 word; `0` marks a position left undetermined.
    pub word: Vec<i8>,
    pub status: DecodeStatus,
    pub iterations: usize,
    /// Unresolved erasures for erasure decoders, unsatisfied checks otherwise.
    pub residual: usize,
}

impl DecodeResult {
    pub fn is_success(&self) -> bool {
        self.status == DecodeStatus::Success
    }

    /// Positions where the decoded word differs from `reference` (erasures count as errors).
    pub fn error_positions(&self, reference: &[i8]) -> Vec<usize> {
        self.word
            .iter()
            .zip(reference)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Flip cutoffs `b(i, j)` for iteration `i ≥ 1` and variable degree `j`.
///
/// Row `i - 1` holds the cutoffs of iteration `i`, indexed by degree; the last
/// row is reused for all later iterations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffSchedule {
    rows: Vec<Vec<usize>>,
}

impl CutoffSchedule {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("empty cutoff schedule".into()));
        }
        for row in &rows {
            for (j, &b) in row.iter().enumerate().skip(2) {
                if 2 * b < j || b > j - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "cutoff {b} for degree {j} outside ((j-1)/2, j-1]"
                    )));
                }
            }
        }
        Ok(Self { rows })
    }

    /// `b(i, j) = j - 1` for every degree up to `max_degree`: Gallager's Algorithm A.
    pub fn unanimous(max_degree: usize) -> Self {
        Self {
            rows: vec![(0..=max_degree).map(|j| j.saturating_sub(1)).collect()],
        }
    }

    /// The same cutoff `b` at every iteration for degree-`dv` variables.
    pub fn constant(dv: usize, b: usize) -> Result<Self> {
        let mut row: Vec<usize> = (0..=dv).map(|j| j.saturating_sub(1)).collect();
        row[dv] = b;
        Self::new(vec![row])
    }

    /// One cutoff per iteration for a left-regular graph of degree `dv`.
    pub fn per_iteration(dv: usize, cutoffs: &[usize]) -> Result<Self> {
        let rows = cutoffs
            .iter()
            .map(|&b| {
                let mut row: Vec<usize> = (0..=dv).map(|j| j.saturating_sub(1)).collect();
                row[dv] = b;
                row
            })
            .collect();
        Self::new(rows)
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Cutoff at iteration `iter` (1-based) for degree `degree`; unanimity if unspecified.
    pub fn cutoff(&self, iter: usize, degree: usize) -> usize {
        let row = &self.rows[(iter.max(1) - 1).min(self.rows.len() - 1)];
        row.get(degree).copied().unwrap_or(degree.saturating_sub(1))
    }

    /// Checks every degree present in `g` against the admissible range.
    pub fn validate_for(&self, g: &FactorGraph) -> Result<()> {
        let mut seen = g.var_degrees();
        seen.sort_unstable();
        seen.dedup();
        for i in 1..=self.rows.len() {
            for &j in seen.iter().filter(|&&j| j >= 2) {
                let b = self.cutoff(i, j);
                if 2 * b < j || b > j - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "cutoff {b} for degree {j} outside ((j-1)/2, j-1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Received-value weights `w(i)` for iteration `i ≥ 1`; the last entry is reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSchedule {
    weights: Vec<f64>,
}

impl WeightSchedule {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "weights must be a non-empty list of non-negative reals".into(),
            ));
        }
        Ok(Self { weights })
    }

    pub fn constant(w: f64) -> Result<Self> {
        Self::new(vec![w])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, iter: usize) -> f64 {
        self.weights[(iter.max(1) - 1).min(self.weights.len() - 1)]
    }
}

pub(crate) fn check_len(g: &FactorGraph, len: usize) -> Result<()> {
    if len != g.n_var() {
        return Err(Error::LengthMismatch {
            expected: g.n_var(),
            actual: len,
        });
    }
    Ok(())
}

/// Product of ±1/0 values, excluding position `skip`; zero absorbs.
#[inline]
pub(crate) fn extrinsic_product(zeros: usize, product: i8, own: i8) -> i8 {
    match (own == 0, zeros) {
        (true, 1) => product,
        (false, 0) => product * own,
        _ => 0,
    }
}

/// Check round for ternary alphabets: `c2v[e]` is the product of the other `v2c` on the check.
pub(crate) fn ternary_check_round(g: &FactorGraph, v2c: &[i8], c2v: &mut [i8]) {
    for c in 0..g.n_chk() {
        let r = g.chk_edges(c);
        let mut zeros = 0;
        let mut product = 1i8;
        for &m in &v2c[r.clone()] {
            if m == 0 {
                zeros += 1;
            } else {
                product *= m;
            }
        }
        for e in r {
            c2v[e] = extrinsic_product(zeros, product, v2c[e]);
        }
    }
}
