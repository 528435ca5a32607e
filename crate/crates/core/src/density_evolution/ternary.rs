use serde::{Deserialize, Serialize};

use super::scalar::SCALAR_TOL;
use super::{
    bisect_decreasing, run_until_below, Outcome, ThresholdResult, MAX_ITER_DENSITY, MAX_ITER_SCALAR,
};
use crate::channels::{q_function, ternary_probabilities, ChannelFamily};
use crate::decoders::WeightSchedule;
use crate::degree_dist::EdgePerspective;
use crate::error::{Error, Result};

/// Error plus erasure probability below which ternary recursions are declared convergent.
pub const TERNARY_CONVERGED: f64 = 1e-10;

/// Distribution of a message over `{+1, 0, -1}` when `+1` was sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ternary {
    pub plus: f64,
    pub zero: f64,
    pub minus: f64,
}

impl Ternary {
    pub fn new(plus: f64, zero: f64, minus: f64) -> Self {
        Self { plus, zero, minus }
    }

    /// Hard-decision channel with crossover `p`.
    pub fn bsc(p: f64) -> Self {
        Self::new(1.0 - p, 0.0, p)
    }

    pub fn bec(alpha: f64) -> Self {
        Self::new(1.0 - alpha, alpha, 0.0)
    }

    /// BIAWGN output quantized with threshold `τ`.
    pub fn quantized(sigma: f64, tau: f64) -> Self {
        let (plus, zero, minus) = ternary_probabilities(sigma, tau);
        Self::new(plus, zero, minus)
    }

    /// `P(-1) + P(0)`: the probability the message is not correct.
    pub fn not_correct(&self) -> f64 {
        self.minus + self.zero
    }

    /// Bhattacharyya functional `P(0) + 2√(P(+1)P(-1))`.
    pub fn bhattacharyya(&self) -> f64 {
        self.zero + 2.0 * (self.plus * self.minus).sqrt()
    }
}

/// Check-node output: the product of `k = d - 1` independent messages, averaged over `ρ`.
///
/// Parities are tracked with non-negative recursions so small error
/// probabilities are not lost to cancellation.
pub fn ternary_check_step(msg: Ternary, ep: &EdgePerspective) -> Ternary {
    let (mut even, mut odd, mut zero) = (1.0, 0.0, 0.0);
    let mut out = Ternary::new(0.0, 0.0, 0.0);
    let rho = ep.rho().coeffs();
    for (k, &r) in rho.iter().enumerate() {
        if k > 0 {
            zero += (even + odd) * msg.zero;
            (even, odd) = (
                even * msg.plus + odd * msg.minus,
                odd * msg.plus + even * msg.minus,
            );
        }
        if r > 0.0 {
            out.minus += r * odd;
            out.zero += r * zero;
        }
    }
    // the complement keeps the total at exactly 1; errors would otherwise
    // compound through the powers taken at each node
    out.plus = (1.0 - out.minus - out.zero).max(0.0);
    out
}

/// Distribution of `#plus - #minus` over `n` independent check messages,
/// indexed by `d + n`.
fn vote_margin(check: Ternary, n: usize) -> Vec<f64> {
    let mut dist = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; dist.len() + 2];
        for (i, &p) in dist.iter().enumerate() {
            next[i] += p * check.minus;
            next[i + 1] += p * check.zero;
            next[i + 2] += p * check.plus;
        }
        dist = next;
    }
    dist
}

/// Margin distributions for every variable degree present in `ep`, with weights `λ_j`.
fn margins(check: Ternary, ep: &EdgePerspective) -> Vec<(f64, Vec<f64>)> {
    ep.var_degrees()
        .map(|(j, l)| (l, vote_margin(check, j - 1)))
        .collect()
}

fn variable_from_margins(margins: &[(f64, Vec<f64>)], channel: Ternary, w: f64) -> Ternary {
    let mut out = Ternary::new(0.0, 0.0, 0.0);
    for (l, dist) in margins {
        let n = (dist.len() - 1) / 2;
        for (i, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let d = i as f64 - n as f64;
            for (r, c) in [
                (1.0, channel.plus),
                (0.0, channel.zero),
                (-1.0, channel.minus),
            ] {
                let s = w * r + d;
                let mass = l * p * c;
                if s > 0.0 {
                    continue;
                } else if s < 0.0 {
                    out.minus += mass;
                } else {
                    out.zero += mass;
                }
            }
        }
    }
    out.plus = (1.0 - out.minus - out.zero).max(0.0);
    out
}

/// Variable-node output `sgn(w·r + Σ m)` over the `j - 1` other check messages,
/// averaged over `λ`.
pub fn ternary_variable_step(
    check: Ternary,
    channel: Ternary,
    ep: &EdgePerspective,
    w: f64,
) -> Ternary {
    variable_from_margins(&margins(check, ep), channel, w)
}

fn channel_at(family: ChannelFamily, param: f64) -> Ternary {
    match family {
        ChannelFamily::Bsc => Ternary::bsc(param),
        ChannelFamily::Bec => Ternary::bec(param),
        ChannelFamily::Biawgn => Ternary::bsc(q_function(1.0 / param)),
    }
}

/// Threshold of the weighted erasure decoder with a fixed weight schedule.
/// BIAWGN is hard-quantized; BEC erasures enter as `0`.
pub fn weighted_de_threshold(
    ep: &EdgePerspective,
    weights: &WeightSchedule,
    family: ChannelFamily,
) -> Result<ThresholdResult> {
    let good = |param: f64| {
        let ch = channel_at(family, param);
        let mut x = ch;
        let out = run_until_below(x.not_correct(), TERNARY_CONVERGED, MAX_ITER_SCALAR, |i| {
            x = ternary_variable_step(ternary_check_step(x, ep), ch, ep, weights.weight(i));
            x.not_correct()
        });
        (out.converged(), out.iterations())
    };
    let (lo, hi) = match family {
        ChannelFamily::Bsc => (0.0, 0.5),
        ChannelFamily::Bec => (0.0, 1.0),
        ChannelFamily::Biawgn => (0.05, 3.0),
    };
    Ok(bisect_decreasing(lo, hi, SCALAR_TOL, good))
}

/// Grids for the per-iteration choice of quantization threshold `τ` and channel
/// weight `w`. Each iteration greedily picks the pair minimizing the
/// Bhattacharyya functional of the outgoing variable message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TernarySearch {
    pub taus: Vec<f64>,
    pub weights: Vec<f64>,
    pub max_iter: usize,
    pub tolerance: f64,
    /// Bisection bracket on `σ`.
    pub bracket: (f64, f64),
}

impl Default for TernarySearch {
    fn default() -> Self {
        Self {
            taus: (0..=100).map(|i| i as f64 * 0.02).collect(),
            weights: (1..=6).map(|i| i as f64 * 0.5).collect(),
            max_iter: MAX_ITER_DENSITY,
            tolerance: 1e-3,
            bracket: (0.3, 1.2),
        }
    }
}

/// Per-iteration choices and error measures of one ternary evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryTrace {
    pub sigma: f64,
    /// Threshold used for the initial messages.
    pub initial_tau: f64,
    /// `(τ_i, w_i)` for iterations `i = 1, 2, ...`.
    pub choices: Vec<(f64, f64)>,
    /// `P(-1) + P(0)` of the variable messages; index 0 is the channel.
    pub measures: Vec<f64>,
    pub outcome: Outcome,
}

impl TernarySearch {
    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty() || self.weights.is_empty() {
            return Err(Error::InvalidParameter(
                "ternary search grids must be non-empty".into(),
            ));
        }
        if self
            .taus
            .iter()
            .chain(&self.weights)
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "ternary search grids must be non-negative".into(),
            ));
        }
        if !(self.bracket.0 > 0.0 && self.bracket.0 < self.bracket.1) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "invalid ternary search bracket or tolerance".into(),
            ));
        }
        Ok(())
    }

    /// Evolves the ternary messages at noise level `sigma`.
    pub fn run(&self, sigma: f64, ep: &EdgePerspective) -> TernaryTrace {
        let channels: Vec<(f64, Ternary)> = self
            .taus
            .iter()
            .map(|&t| (t, Ternary::quantized(sigma, t)))
            .collect();
        let (initial_tau, mut x) = channels
            .iter()
            .copied()
            .min_by(|a, b| a.1.bhattacharyya().total_cmp(&b.1.bhattacharyya()))
            .expect("non-empty tau grid");
        let mut measures = vec![x.not_correct()];
        let mut choices = Vec::new();
        let outcome = run_until_below(x.not_correct(), TERNARY_CONVERGED, self.max_iter, |_| {
            let m = margins(ternary_check_step(x, ep), ep);
            let mut best = (f64::INFINITY, 0.0, 0.0, x);
            for &(tau, ch) in &channels {
                for &w in &self.weights {
                    let out = variable_from_margins(&m, ch, w);
                    let b = out.bhattacharyya();
                    if b < best.0 {
                        best = (b, tau, w, out);
                    }
                }
            }
            x = best.3;
            choices.push((best.1, best.2));
            measures.push(x.not_correct());
            x.not_correct()
        });
        TernaryTrace {
            sigma,
            initial_tau,
            choices,
            measures,
            outcome,
        }
    }
}

/// Noise threshold of the ternary-quantized BIAWGN decoder.
pub fn ternary_biawgn_threshold(
    ep: &EdgePerspective,
    search: &TernarySearch,
) -> Result<ThresholdResult> {
    search.validate()?;
    let (lo, hi) = search.bracket;
    Ok(bisect_decreasing(lo, hi, search.tolerance, |sigma| {
        let t = search.run(sigma, ep);
        (t.outcome.converged(), t.outcome.iterations())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_evolution::gallager_a_de_step;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    /// Brute-force enumeration of all incoming message tuples.
    fn brute_check(msg: Ternary, k: usize) -> Ternary {
        let vals = [(1i8, msg.plus), (0, msg.zero), (-1, msg.minus)];
        let mut out = Ternary::new(0.0, 0.0, 0.0);
        for code in 0..3usize.pow(k as u32) {
            let (mut prod, mut p, mut c) = (1i8, 1.0, code);
            for _ in 0..k {
                let (v, q) = vals[c % 3];
                c /= 3;
                prod *= v;
                p *= q;
            }
            match prod {
                1 => out.plus += p,
                -1 => out.minus += p,
                _ => out.zero += p,
            }
        }
        out
    }

    #[test]
    fn check_step_matches_enumeration() {
        let ep = EdgePerspective::regular(3, 5).unwrap();
        let msg = Ternary::new(0.7, 0.2, 0.1);
        let got = ternary_check_step(msg, &ep);
        let want = brute_check(msg, 4);
        close(got.plus, want.plus, 1e-15);
        close(got.zero, want.zero, 1e-15);
        close(got.minus, want.minus, 1e-15);
    }

    #[test]
    fn unit_weight_dv3_is_gallager_a() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        for p in [0.01, 0.03, 0.05, 0.2] {
            let ch = Ternary::bsc(p);
            let out = ternary_variable_step(ternary_check_step(ch, &ep), ch, &ep, 1.0);
            close(out.minus, gallager_a_de_step(p, p, 3, 6), 1e-14);
            assert_eq!(out.zero, 0.0);
        }
    }

    #[test]
    fn weighted_threshold_near_reference() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        let ws = WeightSchedule::new(vec![2.0, 1.0]).unwrap();
        let t = weighted_de_threshold(&ep, &ws, ChannelFamily::Bsc).unwrap();
        close(t.value, 0.07, 3e-3);
    }

    #[test]
    fn bhattacharyya_of_clean_message() {
        assert_eq!(Ternary::bsc(0.0).bhattacharyya(), 0.0);
        close(Ternary::bsc(0.5).bhattacharyya(), 1.0, 1e-15);
    }
}
