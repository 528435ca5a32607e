use std::collections::VecDeque;

use super::{check_len, ternary_check_round, DecodeResult, DecodeStatus};
use crate::channels::ReceivedWord;
use crate::error::{Error, Result};
use crate::factor_graph::FactorGraph;

/// Product of the incoming values; any erasure erases the output.
pub fn bec_check_map(msgs: &[i8]) -> i8 {
    msgs.iter().product::<i8>().signum()
}

/// Known value if the received symbol or any incoming message carries one.
pub fn bec_variable_map(received: i8, msgs: &[i8]) -> Result<i8> {
    let mut known = received;
    for &m in msgs {
        if m != 0 {
            if known != 0 && known != m {
                return Err(Error::ConflictingVotes { variable: 0 });
            }
            known = m;
        }
    }
    Ok(known)
}

/// Sequential erasure decoder: resolve any check with a single unknown socket.
/// `iterations` counts the resolved variables.
pub fn decode_bec_peeling(g: &FactorGraph, rw: &ReceivedWord) -> Result<DecodeResult> {
    let r = rw.as_discrete()?;
    check_len(g, r.len())?;
    let mut word = r.to_vec();
    let mut unknown = vec![0usize; g.n_chk()];
    let mut parity = vec![1i8; g.n_chk()];
    for c in 0..g.n_chk() {
        for e in g.chk_edges(c) {
            match word[g.edge_var(e)] {
                0 => unknown[c] += 1,
                x => parity[c] *= x,
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..g.n_chk()).filter(|&c| unknown[c] == 1).collect();
    let mut peels = 0;
    while let Some(c) = queue.pop_front() {
        if unknown[c] != 1 {
            continue;
        }
        let v = g
            .chk_edges(c)
            .map(|e| g.edge_var(e))
            .find(|&v| word[v] == 0)
            .expect("check with one unknown socket");
        let x = parity[c];
        word[v] = x;
        peels += 1;
        for &e in g.var_edges(v) {
            let c2 = g.edge_chk(e);
            unknown[c2] -= 1;
            parity[c2] *= x;
            if unknown[c2] == 1 {
                queue.push_back(c2);
            }
        }
    }
    if let Some(c) = (0..g.n_chk()).find(|&c| unknown[c] == 0 && parity[c] != 1) {
        return Err(Error::Inconsistent { check: c });
    }
    let residual = word.iter().filter(|&&x| x == 0).count();
    Ok(DecodeResult {
        word,
        status: if residual == 0 {
            DecodeStatus::Success
        } else {
            DecodeStatus::Stall
        },
        iterations: peels,
        residual,
    })
}

/// Parallel erasure message passing.
pub fn decode_bec_mp(g: &FactorGraph, rw: &ReceivedWord, max_iter: usize) -> Result<DecodeResult> {
    Ok(run_bec_mp(g, rw, max_iter, false)?.0)
}

/// Runs exactly `iterations` rounds (no early exit) and returns the number of
/// erased bit estimates after each round; index 0 is the received word.
pub fn decode_bec_mp_trace(
    g: &FactorGraph,
    rw: &ReceivedWord,
    iterations: usize,
) -> Result<Vec<usize>> {
    Ok(run_bec_mp(g, rw, iterations, true)?.1)
}

fn run_bec_mp(
    g: &FactorGraph,
    rw: &ReceivedWord,
    max_iter: usize,
    full_trace: bool,
) -> Result<(DecodeResult, Vec<usize>)> {
    let r = rw.as_discrete()?;
    check_len(g, r.len())?;
    let mut v2c: Vec<i8> = g.edges().iter().map(|&(v, _)| r[v]).collect();
    let mut c2v = vec![0i8; g.n_edges()];
    let mut word = r.to_vec();
    let mut trace = vec![word.iter().filter(|&&x| x == 0).count()];
    let mut iterations = 0;
    let mut status = DecodeStatus::IterationCap;
    if trace[0] == 0 && !full_trace {
        status = DecodeStatus::Success;
    }
    while status == DecodeStatus::IterationCap && iterations < max_iter {
        iterations += 1;
        ternary_check_round(g, &v2c, &mut c2v);
        let mut changed = false;
        for v in 0..g.n_var() {
            let edges = g.var_edges(v);
            let mut known = r[v];
            let mut votes = 0;
            for &e in edges {
                let m = c2v[e];
                if m != 0 {
                    if known != 0 && known != m {
                        return Err(Error::ConflictingVotes { variable: v });
                    }
                    known = m;
                    votes += 1;
                }
            }
            for &e in edges {
                let out = if r[v] != 0 {
                    r[v]
                } else if votes > usize::from(c2v[e] != 0) {
                    known
                } else {
                    0
                };
                if out != v2c[e] {
                    changed = true;
                    v2c[e] = out;
                }
            }
            word[v] = known;
        }
        let erased = word.iter().filter(|&&x| x == 0).count();
        trace.push(erased);
        if full_trace {
            continue;
        }
        if erased == 0 {
            status = DecodeStatus::Success;
        } else if !changed {
            status = DecodeStatus::Stall;
        }
    }
    let residual = word.iter().filter(|&&x| x == 0).count();
    if full_trace {
        status = if residual == 0 {
            DecodeStatus::Success
        } else {
            DecodeStatus::IterationCap
        };
    }
    Ok((
        DecodeResult {
            word,
            status,
            iterations,
            residual,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelModel;

    fn path_graph() -> FactorGraph {
        // c0 = {v0, v1}, c1 = {v1, v2}
        FactorGraph::from_edges(3, 2, vec![(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap()
    }

    #[test]
    fn peels_single_erasure() {
        let rw = ReceivedWord::discrete(vec![1, 0, 1], ChannelModel::Bec(0.3));
        let d = decode_bec_peeling(&path_graph(), &rw).unwrap();
        assert_eq!(d.word, vec![1, 1, 1]);
        assert_eq!(
            (d.status, d.iterations, d.residual),
            (DecodeStatus::Success, 1, 0)
        );
    }

    #[test]
    fn peeling_edge_cases() {
        let g = path_graph();
        let rw = ReceivedWord::discrete(vec![-1, -1, -1], ChannelModel::Bec(0.3));
        let d = decode_bec_peeling(&g, &rw).unwrap();
        assert_eq!((d.status, d.iterations), (DecodeStatus::Success, 0));
        let rw = ReceivedWord::discrete(vec![0, 0, 0], ChannelModel::Bec(0.3));
        let d = decode_bec_peeling(&g, &rw).unwrap();
        assert_eq!((d.status, d.residual), (DecodeStatus::Stall, 3));
        let rw = ReceivedWord::discrete(vec![1, -1, 1], ChannelModel::Bec(0.3));
        assert!(matches!(
            decode_bec_peeling(&g, &rw),
            Err(Error::Inconsistent { .. })
        ));
        let rw = ReceivedWord::discrete(vec![1, 1], ChannelModel::Bec(0.3));
        assert!(matches!(
            decode_bec_peeling(&g, &rw),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mp_matches_small_cases() {
        let g = path_graph();
        let rw = ReceivedWord::discrete(vec![1, 0, 1], ChannelModel::Bec(0.3));
        let d = decode_bec_mp(&g, &rw, 10).unwrap();
        assert_eq!(
            (d.word.clone(), d.status),
            (vec![1, 1, 1], DecodeStatus::Success)
        );
        let rw = ReceivedWord::discrete(vec![-1, 1, 1], ChannelModel::Bec(0.3));
        let d = decode_bec_mp(&g, &rw, 10).unwrap();
        assert_eq!((d.iterations, d.word), (0, vec![-1, 1, 1]));
        let rw = ReceivedWord::discrete(vec![1, 0, -1], ChannelModel::Bec(0.3));
        assert!(matches!(
            decode_bec_mp(&g, &rw, 10),
            Err(Error::ConflictingVotes { variable: 1 })
        ));
    }

    #[test]
    fn tree_root_erasure() {
        // depth-2 tree: root v0 with checks c0 = {v0, v1, v2}, c1 = {v0, v3, v4}
        let g = FactorGraph::from_edges(5, 2, vec![(0, 0), (1, 0), (2, 0), (0, 1), (3, 1), (4, 1)])
            .unwrap();
        let rw = ReceivedWord::discrete(vec![0, -1, 1, -1, 1], ChannelModel::Bec(0.3));
        let d = decode_bec_mp(&g, &rw, 1).unwrap();
        assert_eq!(d.word, vec![-1, -1, 1, -1, 1]);
        assert!(d.is_success());
    }

    #[test]
    fn trace_counts() {
        let g = path_graph();
        let rw = ReceivedWord::discrete(vec![1, 0, 0], ChannelModel::Bec(0.3));
        assert_eq!(decode_bec_mp_trace(&g, &rw, 3).unwrap(), vec![2, 1, 0, 0]);
    }

    #[test]
    fn maps() {
        assert_eq!(bec_check_map(&[1, -1, -1]), 1);
        assert_eq!(bec_check_map(&[1, 0, -1]), 0);
        assert_eq!(bec_variable_map(0, &[0, -1]).unwrap(), -1);
        assert_eq!(bec_variable_map(0, &[0, 0]).unwrap(), 0);
        assert!(bec_variable_map(1, &[-1]).is_err());
    }
}
