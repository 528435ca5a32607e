//! Factor graphs of LDPC ensembles, parity-check matrices and systematic encoding.
//!
//! A [`FactorGraph`] is a bipartite multigraph stored edge by edge. Edge ids
//! follow check-socket order, so the edges of check `c` are the contiguous
//! range [`FactorGraph::chk_edges`]; decoders keep one message per edge id.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::ops::Range;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree_dist::{EdgePerspective, NodePerspective};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    n_var: usize,
    n_chk: usize,
    edges: Vec<(usize, usize)>,
    chk_ptr: Vec<usize>,
    var_ptr: Vec<usize>,
    var_adj: Vec<usize>,
    seed: Option<u64>,
}

impl FactorGraph {
    /// Builds a graph from `(variable, check)` pairs; duplicates are kept.
    pub fn from_edges(n_var: usize, n_chk: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(v, c)) = edges.iter().find(|&&(v, c)| v >= n_var || c >= n_chk) {
            return Err(Error::InvalidParameter(format!(
                "edge ({v}, {c}) out of range for {n_var} variables and {n_chk} checks"
            )));
        }
        edges.sort_by_key(|&(_, c)| c);
        let mut chk_ptr = vec![0; n_chk + 1];
        let mut var_ptr = vec![0; n_var + 1];
        for &(v, c) in &edges {
            chk_ptr[c + 1] += 1;
            var_ptr[v + 1] += 1;
        }
        for i in 0..n_chk {
            chk_ptr[i + 1] += chk_ptr[i];
        }
        for i in 0..n_var {
            var_ptr[i + 1] += var_ptr[i];
        }
        let mut fill = var_ptr.clone();
        let mut var_adj = vec![0; edges.len()];
        for (e, &(v, _)) in edges.iter().enumerate() {
            var_adj[fill[v]] = e;
            fill[v] += 1;
        }
        Ok(Self {
            n_var,
            n_chk,
            edges,
            chk_ptr,
            var_ptr,
            var_adj,
            seed: None,
        })
    }

    pub fn from_parity_check(h: &ParityCheckMatrix) -> Self {
        let edges = h.entries().map(|(r, c)| (c, r)).collect();
        Self::from_edges(h.cols, h.rows, edges).expect("matrix entries are in range")
    }

    pub fn n_var(&self) -> usize {
        self.n_var
    }

    pub fn n_chk(&self) -> usize {
        self.n_chk
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// All `(variable, check)` socket pairs in edge-id order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edges[e].0
    }

    #[inline]
    pub fn edge_chk(&self, e: usize) -> usize {
        self.edges[e].1
    }

    #[inline]
    pub fn chk_edges(&self, c: usize) -> Range<usize> {
        self.chk_ptr[c]..self.chk_ptr[c + 1]
    }

    #[inline]
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_adj[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    pub fn var_degrees(&self) -> Vec<usize> {
        self.var_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn chk_degrees(&self) -> Vec<usize> {
        self.chk_ptr.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Number of checks violated by a ±1 word. Parallel edges cancel in pairs.
    pub fn unsatisfied_checks(&self, word: &[i8]) -> usize {
        (0..self.n_chk)
            .filter(|&c| {
                self.chk_edges(c)
                    .map(|e| word[self.edges[e].0])
                    .fold(1i8, |a, b| a * b.signum())
                    != 1
            })
            .count()
    }

    pub fn is_codeword(&self, word: &[i8]) -> bool {
        word.iter().all(|&x| x == 1 || x == -1) && self.unsatisfied_checks(word) == 0
    }

    /// Serializable form carrying the edge list and the generating seed.
    pub fn to_file(&self, degree_pair: Option<crate::degree_dist::DegreePairFile>) -> GraphFile {
        GraphFile {
            n_var: self.n_var,
            n_chk: self.n_chk,
            seed: self.seed,
            degree_pair,
            edges: self.edges.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n_var: usize,
    pub n_chk: usize,
    pub seed: Option<u64>,
    pub degree_pair: Option<crate::degree_dist::DegreePairFile>,
    pub edges: Vec<(usize, usize)>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<FactorGraph> {
        let mut g = FactorGraph::from_edges(self.n_var, self.n_chk, self.edges.clone())?;
        g.seed = self.seed;
        Ok(g)
    }
}

/// Uniform random matching between variable and check sockets.
///
/// Sockets are handed to nodes in index order; the randomness is a single
/// Fisher–Yates shuffle of the variable sockets.
pub fn sample_ensemble(np: &NodePerspective, seed: u64) -> Result<FactorGraph> {
    let var_deg = np.var_degree_sequence();
    let chk_deg = np.chk_degree_sequence();
    let var_sockets: Vec<usize> = var_deg
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    let chk_sockets: Vec<usize> = chk_deg
        .iter()
        .enumerate()
        .flat_map(|(c, &d)| std::iter::repeat_n(c, d))
        .collect();
    if var_sockets.len() != chk_sockets.len() {
        return Err(Error::InvalidDistribution(format!(
            "{} variable sockets but {} check sockets",
            var_sockets.len(),
            chk_sockets.len()
        )));
    }
    let mut perm = var_sockets;
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let edges = perm.into_iter().zip(chk_sockets).collect();
    let mut g = FactorGraph::from_edges(var_deg.len(), chk_deg.len(), edges)?;
    g.seed = Some(seed);
    Ok(g)
}

pub fn sample_regular(n: usize, dv: usize, dc: usize, seed: u64) -> Result<FactorGraph> {
    sample_ensemble(&NodePerspective::regular(n, dv, dc)?, seed)
}

/// Samples from the ensemble and removes every double edge and 4-cycle by
/// degree-preserving edge swaps, so the result has girth at least 6.
///
/// Plain rejection sampling is hopeless here: for a (3,6) ensemble the number
/// of 4-cycles is roughly Poisson with mean 25 at any block length.
pub fn sample_ensemble_girth6(np: &NodePerspective, seed: u64) -> Result<FactorGraph> {
    let g = sample_ensemble(np, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut edges = g.edges.clone();
    let var_eids: Vec<Vec<usize>> = (0..g.n_var).map(|v| g.var_edges(v).to_vec()).collect();
    let mut chk_eids: Vec<Vec<usize>> = (0..g.n_chk).map(|c| g.chk_edges(c).collect()).collect();
    let budget = 100 * edges.len() + 1000;
    let mut swaps = 0;
    loop {
        let mut changed = false;
        for v in 0..g.n_var {
            while let Some(bad) = short_cycle_edge(v, &edges, &var_eids, &chk_eids) {
                let other = rng.gen_range(0..edges.len());
                let (v1, c1) = edges[bad];
                let (v2, c2) = edges[other];
                if c1 == c2 || v1 == v2 {
                    continue;
                }
                edges[bad] = (v1, c2);
                edges[other] = (v2, c1);
                replace(&mut chk_eids[c1], bad, other);
                replace(&mut chk_eids[c2], other, bad);
                swaps += 1;
                changed = true;
                if swaps > budget {
                    return Err(Error::InvalidDistribution(
                        "could not remove short cycles; ensemble too dense for girth 6".into(),
                    ));
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = FactorGraph::from_edges(g.n_var, g.n_chk, edges)?;
    out.seed = Some(seed);
    Ok(out)
}

fn replace(list: &mut [usize], from: usize, to: usize) {
    if let Some(x) = list.iter_mut().find(|x| **x == from) {
        *x = to;
    }
}

/// An edge at `v` lying on a cycle of length 2 or 4, if any.
fn short_cycle_edge(
    v: usize,
    edges: &[(usize, usize)],
    var_eids: &[Vec<usize>],
    chk_eids: &[Vec<usize>],
) -> Option<usize> {
    let mine = &var_eids[v];
    for (i, &ei) in mine.iter().enumerate() {
        let ci = edges[ei].1;
        for &ej in &mine[i + 1..] {
            let cj = edges[ej].1;
            if ci == cj {
                return Some(ej);
            }
            for &f in &chk_eids[ci] {
                let w = edges[f].0;
                if w != v && var_eids[w].iter().any(|&g| edges[g].1 == cj) {
                    return Some(ej);
                }
            }
        }
    }
    None
}

/// Length of the shortest cycle, `None` for forests. Parallel edges count as
/// cycles of length 2.
pub fn girth(g: &FactorGraph) -> Option<usize> {
    // Node ids: variables first, then checks.
    let n = g.n_var + g.n_chk;
    let neighbours = |u: usize| -> Vec<(usize, usize)> {
        if u < g.n_var {
            g.var_edges(u)
                .iter()
                .map(|&e| (g.n_var + g.edge_chk(e), e))
                .collect()
        } else {
            g.chk_edges(u - g.n_var)
                .map(|e| (g.edge_var(e), e))
                .collect()
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut touched = Vec::new();
    for start in 0..g.n_var {
        for &t in &touched {
            dist[t] = usize::MAX;
        }
        touched.clear();
        dist[start] = 0;
        touched.push(start);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for (w, e) in neighbours(u) {
                if e == parent_edge[u] && dist[u] > 0 {
                    continue;
                }
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent_edge[w] = e;
                    touched.push(w);
                    queue.push_back(w);
                } else {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

/// Sparse parity-check matrix; rows are checks, columns are variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    rows: usize,
    cols: usize,
    row_entries: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    pub fn from_rows(rows: usize, cols: usize, mut row_entries: Vec<Vec<usize>>) -> Result<Self> {
        if row_entries.len() != rows {
            return Err(Error::LengthMismatch {
                expected: rows,
                actual: row_entries.len(),
            });
        }
        for r in &mut row_entries {
            r.sort_unstable();
            r.dedup();
            if r.last().is_some_and(|&c| c >= cols) {
                return Err(Error::InvalidParameter("column index out of range".into()));
            }
        }
        Ok(Self {
            rows,
            cols,
            row_entries,
        })
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let entries = rows
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b & 1 == 1)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self::from_rows(rows.len(), cols, entries)
    }

    pub fn from_bitmatrix(m: &BitMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_entries: (0..m.rows()).map(|r| m.row_ones(r)).collect(),
        }
    }

    pub fn to_bitmatrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows, self.cols);
        for (r, c) in self.entries() {
            m.set(r, c, true);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_entries[r]
    }

    pub fn n_entries(&self) -> usize {
        self.row_entries.iter().map(Vec::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_entries
            .iter()
            .enumerate()
            .flat_map(|(r, cs)| cs.iter().map(move |&c| (r, c)))
    }

    pub fn col_entries(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (r, c) in self.entries() {
            cols[c].push(r);
        }
        cols
    }

    /// `H · bits = 0` for a 0/1 vector.
    pub fn syndrome_is_zero(&self, bits: &[u8]) -> bool {
        self.row_entries
            .iter()
            .all(|r| r.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)) == 0)
    }

    /// Codeword test for a ±1 word.
    pub fn is_codeword_pm(&self, word: &[i8]) -> bool {
        let bits: Vec<u8> = word.iter().map(|&x| u8::from(x == -1)).collect();
        self.syndrome_is_zero(&bits)
    }

    pub fn rank(&self) -> usize {
        self.to_bitmatrix().rank()
    }

    /// MacKay alist text: dimensions, maximum weights, weights, then 1-indexed
    /// neighbour lists zero-padded to the maximum weight.
    pub fn to_alist(&self) -> String {
        let cols = self.col_entries();
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.row_entries.iter().map(Vec::len).max().unwrap_or(0);
        let mut s = String::new();
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        writeln!(s, "{} {}", self.cols, self.rows).unwrap();
        writeln!(s, "{max_col} {max_row}").unwrap();
        writeln!(s, "{}", join(&mut cols.iter().map(Vec::len))).unwrap();
        writeln!(s, "{}", join(&mut self.row_entries.iter().map(Vec::len))).unwrap();
        for c in &cols {
            let mut it = c
                .iter()
                .map(|r| r + 1)
                .chain(std::iter::repeat(0))
                .take(max_col);
            writeln!(s, "{}", join(&mut it)).unwrap();
        }
        for r in &self.row_entries {
            let mut it = r
                .iter()
                .map(|c| c + 1)
                .chain(std::iter::repeat(0))
                .take(max_row);
            writeln!(s, "{}", join(&mut it)).unwrap();
        }
        s
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        let mut nums = text.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("non-integer token '{t}' in alist")))
        });
        let mut next = || {
            nums.next()
                .unwrap_or_else(|| Err(Error::Parse("alist ended early".into())))
        };
        let cols = next()?;
        let rows = next()?;
        let max_col = next()?;
        let max_row = next()?;
        let col_w = (0..cols).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let row_w = (0..rows).map(|_| next()).collect::<Result<Vec<_>>>()?;
        let mut col_lists = Vec::with_capacity(cols);
        for &w in &col_w {
            let list = (0..max_col).map(|_| next()).collect::<Result<Vec<_>>>()?;
            col_lists.push(read_list(list, w, rows)?);
        }
        let mut row_lists = Vec::with_capacity(rows);
        for &w in &row_w {
            let list = (0..max_row).map(|_| next()).collect::<Result<Vec<_>>>()?;
            row_lists.push(read_list(list, w, cols)?);
        }
        let h = Self::from_rows(rows, cols, row_lists)?;
        let mut from_cols: Vec<Vec<usize>> = h.col_entries();
        for (c, list) in col_lists.iter_mut().enumerate() {
            list.sort_unstable();
            from_cols[c].sort_unstable();
            if *list != from_cols[c] {
                return Err(Error::Parse(format!(
                    "alist column {} disagrees with row lists",
                    c + 1
                )));
            }
        }
        Ok(h)
    }
}

fn read_list(raw: Vec<usize>, weight: usize, bound: usize) -> Result<Vec<usize>> {
    let list: Vec<usize> = raw.into_iter().filter(|&x| x != 0).collect();
    if list.len() != weight || list.iter().any(|&x| x > bound) {
        return Err(Error::Parse(
            "alist neighbour list does not match its weight".into(),
        ));
    }
    Ok(list.into_iter().map(|x| x - 1).collect())
}

/// Entry `(c, v)` is set iff `v` and `c` are joined an odd number of times.
pub fn to_parity_check(g: &FactorGraph) -> ParityCheckMatrix {
    let rows = (0..g.n_chk)
        .map(|c| {
            let mut vs: Vec<usize> = g.chk_edges(c).map(|e| g.edge_var(e)).collect();
            vs.sort_unstable();
            let mut out = Vec::with_capacity(vs.len());
            let mut i = 0;
            while i < vs.len() {
                let j = vs[i..].iter().take_while(|&&x| x == vs[i]).count();
                if j % 2 == 1 {
                    out.push(vs[i]);
                }
                i += j;
            }
            out
        })
        .collect();
    ParityCheckMatrix {
        rows: g.n_chk,
        cols: g.n_var,
        row_entries: rows,
    }
}

/// `H` with permuted columns whose last `rank` columns are lower triangular with unit diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularForm {
    /// `rank` rows over the permuted column order.
    pub h_tilde: ParityCheckMatrix,
    /// `col_perm[j]` is the original column placed at position `j`.
    pub col_perm: Vec<usize>,
    pub rank: usize,
}

impl TriangularForm {
    pub fn n(&self) -> usize {
        self.col_perm.len()
    }

    /// Number of message bits, `n - rank`.
    pub fn k(&self) -> usize {
        self.n() - self.rank
    }
}

/// Gaussian elimination scanning columns from right to left; dependent rows are dropped.
pub fn triangularize(h: &ParityCheckMatrix) -> TriangularForm {
    let mut m = h.to_bitmatrix();
    let (rows, n) = (h.rows, h.cols);
    let mut used = vec![false; rows];
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in (0..n).rev() {
        let Some(p) = (0..rows).find(|&r| !used[r] && m.get(r, col)) else {
            continue;
        };
        used[p] = true;
        for r in 0..rows {
            if !used[r] && m.get(r, col) {
                m.xor_row(p, r);
            }
        }
        pivots.push((p, col));
    }
    let rank = pivots.len();
    let mut is_pivot = vec![false; n];
    for &(_, c) in &pivots {
        is_pivot[c] = true;
    }
    let mut col_perm: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    col_perm.extend(pivots.iter().rev().map(|&(_, c)| c));
    let mut pos = vec![0; n];
    for (j, &c) in col_perm.iter().enumerate() {
        pos[c] = j;
    }
    let row_entries = pivots
        .iter()
        .rev()
        .map(|&(r, _)| {
            let mut e: Vec<usize> = m.row_ones(r).into_iter().map(|c| pos[c]).collect();
            e.sort_unstable();
            e
        })
        .collect();
    TriangularForm {
        h_tilde: ParityCheckMatrix {
            rows: rank,
            cols: n,
            row_entries,
        },
        col_perm,
        rank,
    }
}

/// Places `message` (0/1 bits) in the first `n - rank` permuted positions and
/// solves for the parity bits by forward substitution. Output is ±1 in the
/// original column order.
pub fn encode_systematic(tf: &TriangularForm, message: &[u8]) -> Result<Vec<i8>> {
    let (n, k) = (tf.n(), tf.k());
    if message.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: message.len(),
        });
    }
    let mut y = vec![0u8; n];
    y[..k].copy_from_slice(message);
    for t in 0..tf.rank {
        let diag = k + t;
        y[diag] = tf
            .h_tilde
            .row(t)
            .iter()
            .filter(|&&j| j != diag)
            .fold(0, |acc, &j| acc ^ (y[j] & 1));
    }
    let mut out = vec![1i8; n];
    for (j, &c) in tf.col_perm.iter().enumerate() {
        out[c] = if y[j] & 1 == 1 { -1 } else { 1 };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Variable,
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub depth: usize,
    pub children: Vec<usize>,
}

/// A draw from the depth-`2ℓ` tree ensemble; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSample {
    pub nodes: Vec<TreeNode>,
}

impl TreeSample {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn count_at_depth(&self, depth: usize) -> usize {
        self.nodes.iter().filter(|n| n.depth == depth).count()
    }
}

/// Categorical sampler for the number of children: index `i` has weight `coeffs[i]`.
pub(crate) fn child_sampler(p: &crate::degree_dist::Polynomial) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(p.coeffs())
        .map_err(|e| Error::InvalidDistribution(format!("cannot sample from distribution: {e}")))
}

/// Variable nodes get `i` check children with probability `λ_{i+1}`, check
/// nodes get `i` variable children with probability `ρ_{i+1}`; variables at
/// depth `2ℓ` are leaves.
pub fn sample_tree(ell: usize, ep: &EdgePerspective, seed: u64) -> Result<TreeSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lam = child_sampler(ep.lambda())?;
    let rho = child_sampler(ep.rho())?;
    let mut nodes = vec![TreeNode {
        kind: NodeKind::Variable,
        depth: 0,
        children: Vec::new(),
    }];
    let mut frontier = VecDeque::from([0usize]);
    while let Some(u) = frontier.pop_front() {
        let (kind, depth) = (nodes[u].kind, nodes[u].depth);
        if depth >= 2 * ell {
            continue;
        }
        let (count, child_kind) = match kind {
            NodeKind::Variable => (lam.sample(&mut rng), NodeKind::Check),
            NodeKind::Check => (rho.sample(&mut rng), NodeKind::Variable),
        };
        for _ in 0..count {
            let id = nodes.len();
            nodes.push(TreeNode {
                kind: child_kind,
                depth: depth + 1,
                children: Vec::new(),
            });
            nodes[u].children.push(id);
            frontier.push_back(id);
        }
    }
    Ok(TreeSample { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n_var: usize, n_chk: usize, edges: &[(usize, usize)]) -> FactorGraph {
        FactorGraph::from_edges(n_var, n_chk, edges.to_vec()).unwrap()
    }

    #[test]
    fn unique_matching() {
        let np = NodePerspective::new(
            crate::degree_dist::Polynomial::monomial(1, 2.0).unwrap(),
            crate::degree_dist::Polynomial::monomial(2, 1.0).unwrap(),
        )
        .unwrap();
        let g = sample_ensemble(&np, 5).unwrap();
        let mut e = g.edges().to_vec();
        e.sort();
        assert_eq!(e, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn regular_sampling_shapes() {
        let g = sample_regular(1000, 3, 6, 1).unwrap();
        assert_eq!(g.n_edges(), 3000);
        assert!(g.var_degrees().iter().all(|&d| d == 3));
        assert!(g.chk_degrees().iter().all(|&d| d == 6));
        let g = sample_regular(6, 3, 6, 1).unwrap();
        assert_eq!((g.n_chk(), g.n_edges()), (3, 18));
        assert!(matches!(
            sample_regular(5, 3, 6, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn seeds_control_sampling() {
        let a = sample_regular(200, 3, 6, 11).unwrap();
        let b = sample_regular(200, 3, 6, 11).unwrap();
        let c = sample_regular(200, 3, 6, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn odd_multiplicity_rule() {
        let g = graph(1, 1, &[(0, 0), (0, 0)]);
        let h = to_parity_check(&g);
        assert!(h.row(0).is_empty());
        let g = graph(1, 1, &[(0, 0), (0, 0), (0, 0)]);
        assert_eq!(to_parity_check(&g).row(0), &[0]);
        let g = graph(3, 2, &[(0, 0), (1, 0), (1, 1), (2, 1)]);
        let h = to_parity_check(&g);
        assert_eq!(h.n_entries(), 4);
        assert_eq!(h.row(1), &[1, 2]);
    }

    #[test]
    fn girth_examples() {
        let four = graph(2, 2, &[(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert_eq!(girth(&four), Some(4));
        let tree = graph(4, 2, &[(0, 0), (1, 0), (1, 1), (2, 1), (3, 1)]);
        assert_eq!(girth(&tree), None);
        // v0-c0-v1-c1-v2-c2-v0
        let six = graph(3, 3, &[(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2)]);
        assert_eq!(girth(&six), Some(6));
        let double = graph(2, 1, &[(0, 0), (0, 0), (1, 0)]);
        assert_eq!(girth(&double), Some(2));
    }

    #[test]
    fn girth_repair() {
        let np = NodePerspective::regular(1000, 3, 6).unwrap();
        let g = sample_ensemble_girth6(&np, 3).unwrap();
        assert!(girth(&g).unwrap() >= 6);
        assert!(g.var_degrees().iter().all(|&d| d == 3));
        assert!(g.chk_degrees().iter().all(|&d| d == 6));
        let plain = sample_ensemble(&np, 3).unwrap();
        assert!(girth(&plain).unwrap() <= 4);
    }

    #[test]
    fn triangularize_small() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let tf = triangularize(&h);
        assert_eq!(tf.rank, 2);
        assert_eq!(tf.col_perm, vec![0, 1, 2]);
        assert_eq!(tf.h_tilde.row(0), &[0, 1]);
        assert_eq!(tf.h_tilde.row(1), &[1, 2]);
        let cw = encode_systematic(&tf, &[1]).unwrap();
        assert_eq!(cw, vec![-1, -1, -1]);
        assert_eq!(encode_systematic(&tf, &[0]).unwrap(), vec![1, 1, 1]);
        assert!(encode_systematic(&tf, &[0, 1]).is_err());
    }

    #[test]
    fn triangularize_repeated_row() {
        let h =
            ParityCheckMatrix::from_dense(&[vec![1, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 1, 0, 1]])
                .unwrap();
        assert_eq!(triangularize(&h).rank, 2);
    }

    #[test]
    fn encode_random_regular() {
        let g = sample_regular(100, 3, 6, 4).unwrap();
        let h = to_parity_check(&g);
        let tf = triangularize(&h);
        assert!(tf.rank <= 50);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let msg: Vec<u8> = (0..tf.k()).map(|_| rng.gen_range(0..2)).collect();
            let cw = encode_systematic(&tf, &msg).unwrap();
            assert!(h.is_codeword_pm(&cw));
            assert!(g.is_codeword(&cw));
        }
    }

    #[test]
    fn alist_round_trip() {
        let g = sample_regular(24, 3, 6, 2).unwrap();
        let h = to_parity_check(&g);
        let text = h.to_alist();
        assert_eq!(ParityCheckMatrix::from_alist(&text).unwrap(), h);
        assert!(ParityCheckMatrix::from_alist("3 2\n1 2\n1 1").is_err());
    }

    #[test]
    fn graph_file_round_trip() {
        let g = sample_regular(12, 3, 6, 2).unwrap();
        let json = serde_json::to_string(&g.to_file(None)).unwrap();
        let back: GraphFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_graph().unwrap(), g);
    }

    #[test]
    fn tree_shapes() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        let t = sample_tree(0, &ep, 1).unwrap();
        assert_eq!(t.nodes.len(), 1);
        let t = sample_tree(1, &ep, 1).unwrap();
        assert_eq!(t.root().children.len(), 2);
        for &c in &t.root().children {
            assert_eq!(t.nodes[c].children.len(), 5);
        }
        assert_eq!(t.count_at_depth(2), 10);
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn tree_mean_leaf_count() {
        // λ = 0.5x + 0.5x², ρ = x³: E[#checks] = 1.5, E[#leaves] = 4.5
        let ep =
            EdgePerspective::normalized(vec![0.0, 0.5, 0.5], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let trials = 20_000;
        let total: usize = (0..trials)
            .map(|s| sample_tree(1, &ep, s).unwrap().count_at_depth(2))
            .sum();
        let mean = total as f64 / trials as f64;
        // standard deviation of the leaf count is 1.5, so the standard error is ~0.011
        assert!((mean - 4.5).abs() < 0.05, "{mean}");
    }
}
