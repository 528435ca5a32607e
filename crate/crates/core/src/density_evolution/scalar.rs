use super::ternary::{ternary_biawgn_threshold, weighted_de_threshold, TernarySearch};
use super::{bisect_decreasing, Outcome, ThresholdResult, MAX_ITER_SCALAR};
use crate::channels::{q_function, ChannelFamily};
use crate::decoders::{CutoffSchedule, WeightSchedule};
use crate::degree_dist::EdgePerspective;
use crate::error::{Error, Result};

/// Bisection tolerance for the scalar recursions.
pub const SCALAR_TOL: f64 = 1e-4;

/// Probability that a check message is correct / incorrect given incoming error `p`,
/// for `k = dc - 1` other sockets: `((1 ± (1-2p)^k) / 2)`.
fn check_agree(p: f64, k: usize) -> (f64, f64) {
    let wrong = -0.5 * (k as f64 * (-2.0 * p).ln_1p()).exp_m1();
    (1.0 - wrong, wrong)
}

/// `k ln y`, with `0 ln 0 = 0`.
fn xlogy(k: usize, y: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * y.ln()
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// `(Σ_{t=b}^{n} C(n,t) P^t M^{n-t}, Σ_{t=b}^{n} C(n,t) M^t P^{n-t})`.
fn binomial_tails(n: usize, b: usize, agree: f64, wrong: f64) -> (f64, f64) {
    let mut flip_correct = 0.0;
    let mut flip_wrong = 0.0;
    for t in b..=n {
        let c = ln_binomial(n, t);
        flip_correct += (c + xlogy(t, agree) + xlogy(n - t, wrong)).exp();
        flip_wrong += (c + xlogy(t, wrong) + xlogy(n - t, agree)).exp();
    }
    (flip_correct, flip_wrong)
}

/// Contribution `-p0·A + (1-p0)·B` of degree-`j` variables with cutoff `b`.
fn degree_term(j: usize, b: usize, p0: f64, agree: f64, wrong: f64) -> f64 {
    if j <= 1 {
        return 0.0;
    }
    let (a, w) = binomial_tails(j - 1, b, agree, wrong);
    -p0 * a + (1.0 - p0) * w
}

/// `p0 - p0·P^{dv-1} + (1-p0)·M^{dv-1}` with `P, M = (1 ± (1-2p)^{dc-1}) / 2`.
pub fn gallager_a_de_step(p: f64, p0: f64, dv: usize, dc: usize) -> f64 {
    let (agree, wrong) = check_agree(p, dc.saturating_sub(1));
    let n = dv.saturating_sub(1) as i32;
    p0 - p0 * agree.powi(n) + (1.0 - p0) * wrong.powi(n)
}

/// Error probability after one round of Algorithm B with flip cutoff `b`.
pub fn gallager_b_de_step(p: f64, p0: f64, dv: usize, dc: usize, b: usize) -> f64 {
    let (agree, wrong) = check_agree(p, dc.saturating_sub(1));
    p0 + degree_term(dv, b, p0, agree, wrong)
}

/// Smallest `b ∈ ((dv-1)/2, dv-1]` with
/// `(1-p0)/p0 ≤ ((1+s)/(1-s))^{2b-dv+1}`, `s = (1-2p)^{dc-1}`; `dv - 1` if none.
pub fn optimal_cutoff(p: f64, p0: f64, dv: usize, dc: usize) -> usize {
    let (agree, wrong) = check_agree(p, dc.saturating_sub(1));
    cutoff_from_ratio(dv, p0, agree, wrong)
}

fn cutoff_from_ratio(j: usize, p0: f64, agree: f64, wrong: f64) -> usize {
    let top = j.saturating_sub(1);
    let lhs = ((1.0 - p0) / p0).ln();
    let step = agree.ln() - wrong.ln();
    (top / 2 + 1..=top)
        .find(|&b| lhs <= (2 * b + 1 - j) as f64 * step)
        .unwrap_or(top)
}

/// Per-degree optimal cutoffs (indexed by degree) for an irregular ensemble.
pub fn optimal_cutoff_irregular(p: f64, p0: f64, ep: &EdgePerspective) -> Vec<usize> {
    let wrong = 0.5 * ep.one_minus_rho_one_minus(2.0 * p);
    let agree = 1.0 - wrong;
    (0..=ep.max_var_degree())
        .map(|j| cutoff_from_ratio(j, p0, agree, wrong))
        .collect()
}

/// Irregular Algorithm B: each degree `j` is weighted by `λ_j` and uses `cutoffs[j]`
/// (unanimity when missing). Degree-1 variables never flip.
pub fn irregular_b_de_step(p: f64, p0: f64, ep: &EdgePerspective, cutoffs: &[usize]) -> f64 {
    let wrong = 0.5 * ep.one_minus_rho_one_minus(2.0 * p);
    let agree = 1.0 - wrong;
    p0 + ep
        .var_degrees()
        .map(|(j, l)| {
            let b = cutoffs.get(j).copied().unwrap_or(j.saturating_sub(1));
            l * degree_term(j, b, p0, agree, wrong)
        })
        .sum::<f64>()
}

/// Irregular Algorithm B with each degree's cutoff chosen to minimize its term.
/// Per-iteration cutoffs that minimize the next error probability along the
/// density evolution trajectory at crossover `p0`, for use in simulations.
/// Stops early once the error probability vanishes; the last row repeats.
pub fn optimal_cutoff_schedule(
    p0: f64,
    ep: &EdgePerspective,
    iterations: usize,
) -> Result<CutoffSchedule> {
    if !(0.0..=0.5).contains(&p0) {
        return Err(Error::InvalidParameter(format!(
            "crossover {p0} not in [0,1/2]"
        )));
    }
    let mut rows = Vec::new();
    let mut x = p0;
    for _ in 0..iterations.max(1) {
        let wrong = 0.5 * ep.one_minus_rho_one_minus(2.0 * x);
        let agree = 1.0 - wrong;
        let row: Vec<usize> = (0..=ep.max_var_degree())
            .map(|j| {
                let top = j.saturating_sub(1);
                (top / 2 + 1..=top)
                    .min_by(|&a, &b| {
                        degree_term(j, a, p0, agree, wrong)
                            .total_cmp(&degree_term(j, b, p0, agree, wrong))
                    })
                    .unwrap_or(top)
            })
            .collect();
        x = irregular_b_de_step(x, p0, ep, &row);
        rows.push(row);
        if x < 1e-15 {
            break;
        }
    }
    CutoffSchedule::new(rows)
}

fn optimal_b_step(p: f64, p0: f64, ep: &EdgePerspective) -> f64 {
    let wrong = 0.5 * ep.one_minus_rho_one_minus(2.0 * p);
    let agree = 1.0 - wrong;
    p0 + ep
        .var_degrees()
        .map(|(j, l)| {
            if j <= 1 {
                return 0.0;
            }
            let top = j - 1;
            let best = (top / 2 + 1..=top)
                .map(|b| degree_term(j, b, p0, agree, wrong))
                .fold(f64::INFINITY, f64::min);
            l * best
        })
        .sum::<f64>()
}

/// Points of `(0, x_max]` probed by the fixed-point test: 100 per decade down to
/// `x_max·1e-12` plus a uniform grid of 2000 points.
fn probe_points(x_max: f64) -> impl Iterator<Item = f64> {
    (0..=1200)
        .map(move |t| x_max * 10f64.powf(-(t as f64) / 100.0))
        .chain((1..2000).map(move |k| x_max * k as f64 / 2000.0))
}

/// For a non-decreasing map `f` with `f(0) = 0`, iterating from `x_max` reaches 0
/// iff `f(x) < x` on all of `(0, x_max]`. Returns the verdict and the number of
/// evaluations.
fn no_fixed_point_below<F: Fn(f64) -> f64>(x_max: f64, f: F) -> (bool, usize) {
    if x_max <= 0.0 {
        return (true, 0);
    }
    let mut evals = 0;
    for x in probe_points(x_max) {
        evals += 1;
        if f(x) >= x {
            return (false, evals);
        }
    }
    (true, evals)
}

/// Iterates a scalar recursion `x ← step(i, x)` from `x0` with the shared
/// convergence and stall rules, up to [`MAX_ITER_SCALAR`] iterations.
pub fn iterate_scalar<F: FnMut(usize, f64) -> f64>(x0: f64, mut step: F) -> Outcome {
    let mut x = x0;
    super::run_until(x0, MAX_ITER_SCALAR, |i| {
        x = step(i, x);
        x
    })
}

/// Threshold of Gallager's Algorithm A on the BSC.
pub fn gallager_a_threshold(dv: usize, dc: usize) -> Result<ThresholdResult> {
    let ep = EdgePerspective::regular(dv, dc)?;
    quantized_decoder_threshold(&QuantizedDecoder::GallagerA, &ep, ChannelFamily::Bsc)
}

/// Threshold of Algorithm B on the BSC with the per-iteration optimal cutoff.
pub fn gallager_b_threshold(dv: usize, dc: usize) -> Result<ThresholdResult> {
    let ep = EdgePerspective::regular(dv, dc)?;
    quantized_decoder_threshold(
        &QuantizedDecoder::GallagerB(CutoffRule::Optimal),
        &ep,
        ChannelFamily::Bsc,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutoffRule {
    /// Cutoff minimizing the next error probability at every iteration.
    Optimal,
    Fixed(CutoffSchedule),
}

/// Finite-alphabet decoders whose density evolution is exact.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantizedDecoder {
    GallagerA,
    GallagerB(CutoffRule),
    Weighted(WeightSchedule),
    /// Ternary-quantized BIAWGN with `(τ, w)` optimized per iteration.
    TernaryBiawgn(TernarySearch),
}

/// Bisects over a hard-decision channel; BIAWGN is searched in `σ` through the
/// crossover `Q(1/σ)`.
fn crossover_good<F: FnMut(f64) -> (bool, usize)>(
    family: ChannelFamily,
    mut good_bsc: F,
) -> Result<ThresholdResult> {
    match family {
        ChannelFamily::Bsc => Ok(bisect_decreasing(0.0, 0.5, SCALAR_TOL, good_bsc)),
        ChannelFamily::Biawgn => Ok(bisect_decreasing(0.05, 3.0, SCALAR_TOL, |sigma| {
            good_bsc(q_function(1.0 / sigma))
        })),
        ChannelFamily::Bec => Err(Error::WrongChannel(
            "Gallager decoders need hard decisions; use bsc or biawgn".into(),
        )),
    }
}

/// Threshold of a finite-alphabet decoder over `family`. BIAWGN is hard-quantized
/// for the binary decoders, so the result is then a noise level `σ`.
pub fn quantized_decoder_threshold(
    decoder: &QuantizedDecoder,
    ep: &EdgePerspective,
    family: ChannelFamily,
) -> Result<ThresholdResult> {
    match decoder {
        QuantizedDecoder::GallagerA => {
            let cutoffs: Vec<usize> = (0..=ep.max_var_degree())
                .map(|j| j.saturating_sub(1))
                .collect();
            crossover_good(family, |p0| {
                no_fixed_point_below(p0, |x| irregular_b_de_step(x, p0, ep, &cutoffs))
            })
        }
        QuantizedDecoder::GallagerB(CutoffRule::Optimal) => crossover_good(family, |p0| {
            no_fixed_point_below(p0, |x| optimal_b_step(x, p0, ep))
        }),
        QuantizedDecoder::GallagerB(CutoffRule::Fixed(schedule)) => {
            let rows = schedule.rows().len();
            crossover_good(family, |p0| {
                // run the time-varying prefix, then test the stationary tail
                let mut x = p0;
                for i in 1..rows {
                    x = irregular_b_de_step(x, p0, ep, &schedule.rows()[i - 1]);
                }
                let last = &schedule.rows()[rows - 1];
                let (ok, evals) = no_fixed_point_below(x, |y| irregular_b_de_step(y, p0, ep, last));
                (ok, evals + rows - 1)
            })
        }
        QuantizedDecoder::Weighted(ws) => weighted_de_threshold(ep, ws, family),
        QuantizedDecoder::TernaryBiawgn(search) => {
            if family != ChannelFamily::Biawgn {
                return Err(Error::WrongChannel(format!(
                    "ternary quantization needs biawgn, got {family}"
                )));
            }
            ternary_biawgn_threshold(ep, search)
        }
    }
}
