use super::{check_len, CutoffSchedule, DecodeResult, DecodeStatus};
use crate::channels::ReceivedWord;
use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;

/// Product of the incoming ±1 messages.
pub fn gallager_check_map(msgs: &[i8]) -> i8 {
    msgs.iter().product()
}

/// Send `-received` when at least `b` of the incoming messages disagree with it.
pub fn gallager_variable_map(received: i8, msgs: &[i8], b: usize) -> i8 {
    let disagree = msgs.iter().filter(|&&m| m == -received).count();
    if !msgs.is_empty() && disagree >= b {
        -received
    } else {
        received
    }
}

/// Gallager's Algorithm A: flip only on unanimous disagreement.
pub fn decode_gallager_a(
    g: &FactorGraph,
    rw: &ReceivedWord,
    max_iter: usize,
) -> Result<DecodeResult> {
    let max_deg = g.var_degrees().into_iter().max().unwrap_or(0);
    run(g, rw, &CutoffSchedule::unanimous(max_deg), max_iter)
}

/// Gallager's Algorithm B with iteration- and degree-dependent cutoffs.
pub fn decode_gallager_b(
    g: &FactorGraph,
    rw: &ReceivedWord,
    cutoffs: &CutoffSchedule,
    max_iter: usize,
) -> Result<DecodeResult> {
    cutoffs.validate_for(g)?;
    run(g, rw, cutoffs, max_iter)
}

fn run(
    g: &FactorGraph,
    rw: &ReceivedWord,
    cutoffs: &CutoffSchedule,
    max_iter: usize,
) -> Result<DecodeResult> {
    let r = rw.as_discrete()?;
    check_len(g, r.len())?;
    if let Some(i) = r.iter().position(|&x| x != 1 && x != -1) {
        return Err(Error::WrongChannel(format!(
            "hard-decision decoder got an erasure at {i}"
        )));
    }
    let mut v2c: Vec<i8> = g.edges().iter().map(|&(v, _)| r[v]).collect();
    let mut c2v = vec![1i8; g.n_edges()];
    let mut word = r.to_vec();
    let mut iterations = 0;
    let mut status = if g.unsatisfied_checks(&word) == 0 {
        DecodeStatus::Success
    } else {
        DecodeStatus::IterationCap
    };
    while status == DecodeStatus::IterationCap && iterations < max_iter {
        iterations += 1;
        for c in 0..g.n_chk() {
            let range = g.chk_edges(c);
            let p: i8 = v2c[range.clone()].iter().product();
            for e in range {
                c2v[e] = p * v2c[e];
            }
        }
        let mut changed = false;
        for v in 0..g.n_var() {
            let edges = g.var_edges(v);
            let rv = r[v];
            let b = cutoffs.cutoff(iterations, edges.len());
            let disagree = edges.iter().filter(|&&e| c2v[e] == -rv).count();
            for &e in edges {
                let others = disagree - usize::from(c2v[e] == -rv);
                let out = if edges.len() > 1 && others >= b {
                    -rv
                } else {
                    rv
                };
                changed |= out != v2c[e];
                v2c[e] = out;
            }
            let sum: i32 = rv as i32 + edges.iter().map(|&e| c2v[e] as i32).sum::<i32>();
            word[v] = if sum == 0 { rv } else { sum.signum() as i8 };
        }
        if g.unsatisfied_checks(&word) == 0 {
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
