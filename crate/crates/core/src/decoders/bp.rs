use super::{check_len, DecodeResult, DecodeStatus};
use crate::channels::LlrWord;
use crate::error::Result;
use crate::factor_graph::FactorGraph;

/// Magnitude limit applied to LLRs before taking `tanh`.
pub const BP_LLR_CLAMP: f64 = 35.0;
const ATANH_LIMIT: f64 = 1.0 - 1e-15;

/// `m0 + Σ msgs`, where opposite infinities cancel to 0.
pub fn bp_variable_map(m0: f64, msgs: &[f64]) -> f64 {
    let mut acc = LlrSum::default();
    acc.add(m0);
    for &m in msgs {
        acc.add(m);
    }
    acc.value()
}

/// `2 atanh(Π tanh(m_i / 2))`, with clamped arguments.
pub fn bp_check_map(msgs: &[f64]) -> f64 {
    let p: f64 = msgs.iter().map(|&m| half_tanh(m)).product();
    inverse_half_tanh(p)
}

#[inline]
fn half_tanh(m: f64) -> f64 {
    (m.clamp(-BP_LLR_CLAMP, BP_LLR_CLAMP) / 2.0).tanh()
}

/// `libm::atanh` is odd; `f64::atanh` is not near ±1.
#[inline]
fn inverse_half_tanh(p: f64) -> f64 {
    2.0 * libm::atanh(p.clamp(-ATANH_LIMIT, ATANH_LIMIT))
}

/// Running LLR sum that keeps infinite contributions separate.
#[derive(Debug, Default, Clone, Copy)]
struct LlrSum {
    finite: f64,
    pos_inf: u32,
    neg_inf: u32,
}

impl LlrSum {
    fn add(&mut self, m: f64) {
        if m == f64::INFINITY {
            self.pos_inf += 1;
        } else if m == f64::NEG_INFINITY {
            self.neg_inf += 1;
        } else {
            self.finite += m;
        }
    }

    fn without(mut self, m: f64) -> Self {
        if m == f64::INFINITY {
            self.pos_inf -= 1;
        } else if m == f64::NEG_INFINITY {
            self.neg_inf -= 1;
        } else {
            self.finite -= m;
        }
        self
    }

    fn value(&self) -> f64 {
        match (self.pos_inf > 0, self.neg_inf > 0) {
            (true, true) => 0.0,
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            _ => self.finite,
        }
    }
}

struct BpState {
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    tanh_buf: Vec<f64>,
    suffix: Vec<f64>,
}

impl BpState {
    fn new(g: &FactorGraph, llr: &[f64]) -> Self {
        let max_dc = g.chk_degrees().into_iter().max().unwrap_or(0);
        Self {
            v2c: g.edges().iter().map(|&(v, _)| llr[v]).collect(),
            c2v: vec![0.0; g.n_edges()],
            tanh_buf: vec![0.0; max_dc],
            suffix: vec![0.0; max_dc + 1],
        }
    }

    fn check_round(&mut self, g: &FactorGraph) {
        for c in 0..g.n_chk() {
            let range = g.chk_edges(c);
            let d = range.len();
            let base = range.start;
            for k in 0..d {
                self.tanh_buf[k] = half_tanh(self.v2c[base + k]);
            }
            self.suffix[d] = 1.0;
            for k in (0..d).rev() {
                self.suffix[k] = self.suffix[k + 1] * self.tanh_buf[k];
            }
            let mut prefix = 1.0;
            for k in 0..d {
                self.c2v[base + k] = inverse_half_tanh(prefix * self.suffix[k + 1]);
                prefix *= self.tanh_buf[k];
            }
        }
    }

    /// Variable round; returns the posterior LLR of every bit.
    fn variable_round(&mut self, g: &FactorGraph, llr: &[f64], post: &mut [f64]) {
        for v in 0..g.n_var() {
            let edges = g.var_edges(v);
            let mut total = LlrSum::default();
            total.add(llr[v]);
            for &e in edges {
                total.add(self.c2v[e]);
            }
            for &e in edges {
                self.v2c[e] = total.without(self.c2v[e]).value();
            }
            post[v] = total.value();
        }
    }
}

fn hard_decision(post: &[f64], word: &mut [i8]) {
    for (w, &p) in word.iter_mut().zip(post) {
        *w = if p > 0.0 {
            1
        } else if p < 0.0 {
            -1
        } else {
            0
        };
    }
}

/// Sum-product decoding with the flooding schedule and early exit on a codeword.
pub fn decode_bp(g: &FactorGraph, llr: &LlrWord, max_iter: usize) -> Result<DecodeResult> {
    let m0 = &llr.values;
    check_len(g, m0.len())?;
    let mut state = BpState::new(g, m0);
    let mut post = m0.clone();
    let mut word = vec![0i8; g.n_var()];
    hard_decision(&post, &mut word);
    let mut iterations = 0;
    let mut status = if g.is_codeword(&word) {
        DecodeStatus::Success
    } else {
        DecodeStatus::IterationCap
    };
    while status == DecodeStatus::IterationCap && iterations < max_iter {
        iterations += 1;
        state.check_round(g);
        state.variable_round(g, m0, &mut post);
        hard_decision(&post, &mut word);
        if g.is_codeword(&word) {
            status = DecodeStatus::Success;
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

/// Posterior LLRs after exactly `iterations` rounds, without early exit.
pub fn bp_posteriors(g: &FactorGraph, llr: &LlrWord, iterations: usize) -> Result<Vec<f64>> {
    let m0 = &llr.values;
    check_len(g, m0.len())?;
    let mut state = BpState::new(g, m0);
    let mut post = m0.clone();
    for _ in 0..iterations {
        state.check_round(g);
        state.variable_round(g, m0, &mut post);
    }
    Ok(post)
}
