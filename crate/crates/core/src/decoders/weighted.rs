use super::{check_len, ternary_check_round, DecodeResult, DecodeStatus, WeightSchedule};
use crate::channels::ReceivedWord;
use crate::error::Result;
use crate::factor_graph::FactorGraph;

/// Product of the incoming values; an abstention (0) erases the output.
pub fn weighted_check_map(msgs: &[i8]) -> i8 {
    msgs.iter().product::<i8>().signum()
}

/// `sgn(w·r + Σ m)` with `sgn(0) = 0`.
pub fn weighted_variable_map(received: i8, msgs: &[i8], w: f64) -> i8 {
    let s = w * received as f64 + msgs.iter().map(|&m| m as f64).sum::<f64>();
    sign(s)
}

fn sign(s: f64) -> i8 {
    if s > 0.0 {
        1
    } else if s < 0.0 {
        -1
    } else {
        0
    }
}

/// Decoder over the ternary alphabet in which variables may abstain.
/// The terminal decision breaks ties in favour of the received value.
pub fn decode_weighted_erasure(
    g: &FactorGraph,
    rw: &ReceivedWord,
    weights: &WeightSchedule,
    max_iter: usize,
) -> Result<DecodeResult> {
    let r = rw.as_discrete()?;
    check_len(g, r.len())?;
    let mut v2c: Vec<i8> = g.edges().iter().map(|&(v, _)| r[v]).collect();
    let mut c2v = vec![0i8; g.n_edges()];
    let mut word = r.to_vec();
    let mut iterations = 0;
    let mut status = if g.is_codeword(&word) {
        DecodeStatus::Success
    } else {
        DecodeStatus::IterationCap
    };
    while status == DecodeStatus::IterationCap && iterations < max_iter {
        iterations += 1;
        ternary_check_round(g, &v2c, &mut c2v);
        let w = weights.weight(iterations);
        let mut changed = false;
        for v in 0..g.n_var() {
            let edges = g.var_edges(v);
            let total = w * r[v] as f64 + edges.iter().map(|&e| c2v[e] as f64).sum::<f64>();
            for &e in edges {
                let out = sign(total - c2v[e] as f64);
                changed |= out != v2c[e];
                v2c[e] = out;
            }
            word[v] = match sign(total) {
                0 => r[v],
                s => s,
            };
        }
        if g.is_codeword(&word) {
            status = DecodeStatus::Success;
        } else if !changed {
            status = DecodeStatus::Stall;
        }
    }
    let residual = g.unsatisfied_checks(&word);
    Ok(DecodeResult {
        word,
        status,
        iterations,
        residual,
    })
}
