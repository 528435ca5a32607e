use std::collections::HashSet;

use ldpc_core::degree_dist::NodePerspective;
use ldpc_core::factor_graph::*;
use ldpc_core::gf2::BitMatrix;
use proptest::prelude::*;

fn dense_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1..=max_rows, 2..=max_cols)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0u8..2, c), r))
}

/// Rank over GF(2) of the rows of `a` stacked on the rows of `b`.
fn stacked_rank(cols: usize, a: &[Vec<usize>], b: &[Vec<usize>]) -> usize {
    let mut m = BitMatrix::zeros(a.len() + b.len(), cols);
    for (r, row) in a.iter().chain(b).enumerate() {
        for &c in row {
            m.flip(r, c);
        }
    }
    m.rank()
}

proptest! {
    #[test]
    fn parity_check_counts_entries(seed in any::<u64>(), m in 2usize..20) {
        let g = sample_regular(2 * m, 3, 6, seed).unwrap();
        let h = to_parity_check(&g);
        prop_assert!(h.n_entries() <= g.n_edges());
        let distinct: HashSet<_> = g.edges().iter().collect();
        if distinct.len() == g.n_edges() {
            prop_assert_eq!(h.n_entries(), g.n_edges());
        }
    }

    #[test]
    fn systematic_codewords_satisfy_h(rows in dense_matrix(10, 16), msg_seed in any::<u64>()) {
        let h = ParityCheckMatrix::from_dense(&rows).unwrap();
        let tf = triangularize(&h);
        let msg: Vec<u8> = (0..tf.k()).map(|i| ((msg_seed >> (i % 64)) & 1) as u8).collect();
        let cw = encode_systematic(&tf, &msg).unwrap();
        prop_assert!(h.is_codeword_pm(&cw));
    }

    #[test]
    fn triangular_form_spans_the_row_space(rows in dense_matrix(12, 24)) {
        let h = ParityCheckMatrix::from_dense(&rows).unwrap();
        let tf = triangularize(&h);
        let original: Vec<Vec<usize>> = (0..h.rows()).map(|r| h.row(r).to_vec()).collect();
        let unpermuted: Vec<Vec<usize>> = (0..tf.rank)
            .map(|r| tf.h_tilde.row(r).iter().map(|&j| tf.col_perm[j]).collect())
            .collect();
        let rank = h.rank();
        prop_assert_eq!(tf.rank, rank);
        prop_assert_eq!(stacked_rank(h.cols(), &unpermuted, &[]), rank);
        prop_assert_eq!(stacked_rank(h.cols(), &original, &unpermuted), rank);
        // last `rank` columns: unit lower triangular
        let k = tf.k();
        for t in 0..tf.rank {
            let row: HashSet<usize> = tf.h_tilde.row(t).iter().copied().collect();
            prop_assert!(row.contains(&(k + t)));
            prop_assert!(row.iter().all(|&j| j < k || j <= k + t));
        }
    }

    #[test]
    fn sampled_degrees_match_exactly(seed in any::<u64>(), a in 1usize..30, b in 1usize..30) {
        // a degree-2 and b degree-4 variables; checks of degree 3, topped up with degree 2
        let edges = 2 * a + 4 * b;
        let c3 = if edges % 3 == 1 { edges / 3 - 1 } else { edges / 3 };
        let c2 = (edges - 3 * c3) / 2;
        prop_assert_eq!(2 * c2 + 3 * c3, edges);
        let np = NodePerspective::new(
            ldpc_core::degree_dist::Polynomial::new(vec![0.0, 0.0, a as f64, 0.0, b as f64]).unwrap(),
            ldpc_core::degree_dist::Polynomial::new(vec![0.0, 0.0, c2 as f64, c3 as f64]).unwrap(),
        ).unwrap();
        let g = sample_ensemble(&np, seed).unwrap();
        let mut vd = g.var_degrees();
        let mut want = np.var_degree_sequence();
        vd.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(vd, want);
        let mut cd = g.chk_degrees();
        let mut want = np.chk_degree_sequence();
        cd.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(cd, want);
    }
}

#[test]
fn girth_repair_terminates() {
    let np = NodePerspective::regular(1000, 3, 6).unwrap();
    for seed in 0..3 {
        let g = sample_ensemble_girth6(&np, seed).unwrap();
        assert!(girth(&g).is_some_and(|c| c >= 6), "seed {seed}");
        assert!(g.var_degrees().iter().all(|&d| d == 3));
        assert!(g.chk_degrees().iter().all(|&d| d == 6));
    }
}
