//! Irregular repeat-accumulate codes on the erasure channel.
//!
//! Information bits `u_1..u_k` are repeated into a random bipartite graph `G`;
//! check `i` computes the parity `v_i` of its information neighbours and the
//! transmitted word is the running parity `w_j = v_1 ⋯ v_j` (±1 convention).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::channels::ReceivedWord;
use crate::decoders::{DecodeResult, DecodeStatus};
use crate::degree_dist::{edge_to_node, EdgePerspective, Polynomial};
use crate::error::{Error, Result};
use crate::factor_graph::{sample_ensemble, FactorGraph};

/// The repeat graph `G` between `k` information nodes and `n` check nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct IraGraph {
    graph: FactorGraph,
}

impl IraGraph {
    /// Socket-model sample with `k` information nodes; the number of checks
    /// follows from `(λ, ρ)`.
    pub fn sample(k: usize, ep: &EdgePerspective, seed: u64) -> Result<Self> {
        let np = edge_to_node(k, ep)?;
        Self::from_graph(sample_ensemble(&np, seed)?)
    }

    /// Checks listed by their information neighbours (0-based).
    pub fn from_checks(k: usize, checks: &[Vec<usize>]) -> Result<Self> {
        let edges = checks
            .iter()
            .enumerate()
            .flat_map(|(c, nb)| nb.iter().map(move |&u| (u, c)))
            .collect();
        Self::from_graph(FactorGraph::from_edges(k, checks.len(), edges)?)
    }

    fn from_graph(graph: FactorGraph) -> Result<Self> {
        if let Some(c) = (0..graph.n_chk()).find(|&c| graph.chk_edges(c).is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "check {c} has no information neighbour"
            )));
        }
        Ok(Self { graph })
    }

    pub fn k(&self) -> usize {
        self.graph.n_var()
    }

    pub fn n(&self) -> usize {
        self.graph.n_chk()
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    /// Information neighbours of check `c` (with multiplicity).
    pub fn check_info(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.graph.chk_edges(c).map(|e| self.graph.edge_var(e))
    }

    /// Empirical fraction of checks with `i` information neighbours, indexed by `i`.
    pub fn check_histogram(&self) -> Vec<f64> {
        let degs = self.graph.chk_degrees();
        let mut h = vec![0.0; degs.iter().max().map_or(1, |d| d + 1)];
        for d in degs {
            h[d] += 1.0 / self.n() as f64;
        }
        h
    }
}

/// `R(x) = ∫₀ˣ ρ / ∫₀¹ ρ`: `R_i` is the fraction of checks with `i` information neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSeries {
    pub r: Polynomial,
}

impl CheckSeries {
    pub fn from_rho(ep: &EdgePerspective) -> Result<Self> {
        let total = ep.rho().integral_to(1.0);
        Ok(Self {
            r: ep.rho().antiderivative().scaled(1.0 / total)?,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.r.eval(x)
    }
}

/// `∫λ / ∫ρ`; above 1 the pair is infeasible.
pub fn ira_rate(ep: &EdgePerspective) -> Result<f64> {
    let rate = ep.lambda().integral_to(1.0) / ep.rho().integral_to(1.0);
    if rate > 1.0 + 1e-12 {
        return Err(Error::InvalidDistribution(format!(
            "IRA rate {rate:.6} exceeds 1"
        )));
    }
    Ok(rate)
}

pub fn ira_encode(g: &IraGraph, message: &[i8]) -> Result<Vec<i8>> {
    if message.len() != g.k() {
        return Err(Error::LengthMismatch {
            expected: g.k(),
            actual: message.len(),
        });
    }
    let mut acc = 1i8;
    Ok((0..g.n())
        .map(|c| {
            acc *= g.check_info(c).map(|u| message[u]).product::<i8>();
            acc
        })
        .collect())
}

/// Outcome of evaluating the erasure decoding condition
/// `λ(1 - [(1-α)/(1-αR(1-x))]² ρ(1-x)) < x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IraCondition {
    /// Strict inequality at every probed interior point.
    pub satisfied: bool,
    /// Minimum of `x - LHS(x)` over the uniform interior grid.
    pub min_slack: f64,
    /// Where that minimum is attained.
    pub worst_x: f64,
    /// `LHS(1) = 1`, so `x = 1` is an equality rather than a strict inequality.
    pub boundary_equality: bool,
}

/// Left-hand side of the condition at `x`.
pub fn ira_condition_lhs(ep: &EdgePerspective, r: &CheckSeries, alpha: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    let ratio = (1.0 - alpha) / (1.0 - alpha * r.eval(y));
    ep.lambda().eval(1.0 - ratio * ratio * ep.rho().eval(y))
}

/// Evaluates the condition on `grid_points` uniform interior points plus
/// geometric refinements `10^{-t}` and `1 - 10^{-t}`, `t = 2..=12`.
pub fn ira_success_condition(
    ep: &EdgePerspective,
    alpha: f64,
    grid_points: usize,
) -> Result<IraCondition> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} not in [0,1)"
        )));
    }
    if grid_points < 2 {
        return Err(Error::InvalidParameter(
            "at least two grid points needed".into(),
        ));
    }
    let r = CheckSeries::from_rho(ep)?;
    let slack = |x: f64| x - ira_condition_lhs(ep, &r, alpha, x);
    let mut min_slack = f64::INFINITY;
    let mut worst_x = 0.0;
    let mut satisfied = true;
    for i in 1..grid_points {
        let x = i as f64 / grid_points as f64;
        let s = slack(x);
        satisfied &= s > 0.0;
        if s < min_slack {
            min_slack = s;
            worst_x = x;
        }
    }
    for t in 2..=12 {
        let h = 10f64.powi(-t);
        satisfied &= slack(h) > 0.0 && slack(1.0 - h) > 0.0;
    }
    Ok(IraCondition {
        satisfied,
        min_slack,
        worst_x,
        boundary_equality: (ira_condition_lhs(ep, &r, alpha, 1.0) - 1.0).abs() < 1e-15,
    })
}

/// Largest `α` (to `tol`) at which the condition holds, by bisection on `[0, 1)`.
pub fn ira_condition_threshold(ep: &EdgePerspective, grid_points: usize, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ira_success_condition(ep, mid, grid_points)?.satisfied {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Erasure decoding on the combined graph: check `i` enforces
/// `Π_{u ∈ N(i)} u · x_{i-1} · x_i = +1` (no `x_0`). Each round resolves, in
/// parallel, every node that is the single unknown of some check. The
/// returned word holds the information bits; it succeeds once all of them
/// are known, even if some code bits remain erased.
///
/// Information bits are never transmitted, so decoding can only start at a
/// check with a single information neighbour. When `ρ(0) = 0` there is none
/// and the decoder stalls immediately; see [`ira_decode_bec_doped`].
pub fn ira_decode_bec(g: &IraGraph, rw: &ReceivedWord, max_iter: usize) -> Result<DecodeResult> {
    ira_decode_bec_doped(g, rw, &[], max_iter)
}

/// [`ira_decode_bec`] with some information bits known to the receiver
/// (`(index, value)` pilots), which lets decoding start when `ρ(0) = 0`.
pub fn ira_decode_bec_doped(
    g: &IraGraph,
    rw: &ReceivedWord,
    pilots: &[(usize, i8)],
    max_iter: usize,
) -> Result<DecodeResult> {
    let r = rw.as_discrete()?;
    if r.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            actual: r.len(),
        });
    }
    let (k, n) = (g.k(), g.n());
    // node ids: information 0..k, code k..k+n
    let sockets: Vec<Vec<usize>> = (0..n)
        .map(|c| {
            let mut s: Vec<usize> = g.check_info(c).collect();
            if c > 0 {
                s.push(k + c - 1);
            }
            s.push(k + c);
            s
        })
        .collect();
    let mut value = vec![0i8; k + n];
    value[k..].copy_from_slice(r);
    for &(u, x) in pilots {
        if u >= k || x.abs() != 1 {
            return Err(Error::InvalidParameter(format!("invalid pilot ({u}, {x})")));
        }
        value[u] = x;
    }
    let mut info_unknown = value[..k].iter().filter(|&&x| x == 0).count();
    let mut iterations = 0;
    let mut frontier: VecDeque<usize> = (0..n).collect();
    let mut status = if info_unknown == 0 {
        DecodeStatus::Success
    } else {
        DecodeStatus::IterationCap
    };
    while status == DecodeStatus::IterationCap && iterations < max_iter {
        iterations += 1;
        let mut resolved = Vec::new();
        for c in frontier.drain(..) {
            let mut unknown = None;
            let mut count = 0;
            let mut parity = 1i8;
            for &u in &sockets[c] {
                match value[u] {
                    0 => {
                        count += 1;
                        unknown = Some(u);
                    }
                    x => parity *= x,
                }
            }
            match (count, unknown) {
                (0, _) if parity != 1 => return Err(Error::Inconsistent { check: c }),
                (1, Some(u)) => resolved.push((u, parity)),
                _ => {}
            }
        }
        if resolved.is_empty() {
            status = DecodeStatus::Stall;
            break;
        }
        let mut touched = Vec::new();
        for (u, x) in resolved {
            if value[u] == 0 {
                value[u] = x;
                if u < k {
                    info_unknown -= 1;
                }
                touched.push(u);
            } else if value[u] != x {
                return Err(Error::ConflictingVotes { variable: u });
            }
        }
        let mut seen = vec![false; n];
        for u in touched {
            let checks: Vec<usize> = if u < k {
                g.graph
                    .var_edges(u)
                    .iter()
                    .map(|&e| g.graph.edge_chk(e))
                    .collect()
            } else {
                let j = u - k;
                if j + 1 < n {
                    vec![j, j + 1]
                } else {
                    vec![j]
                }
            };
            for c in checks {
                if !seen[c] {
                    seen[c] = true;
                    frontier.push_back(c);
                }
            }
        }
        if info_unknown == 0 {
            status = DecodeStatus::Success;
        }
    }
    Ok(DecodeResult {
        word: value[..k].to_vec(),
        status,
        iterations,
        residual: info_unknown,
    })
}
