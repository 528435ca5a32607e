use ldpc_core::channels::{transmit, ChannelModel, ReceivedWord};
use ldpc_core::degree_dist::EdgePerspective;
use ldpc_core::ira::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn message(k: usize, seed: u64) -> Vec<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| if rng.gen() { 1 } else { -1 }).collect()
}

/// Repeat 3, checks with two or three information neighbours.
fn mixed() -> EdgePerspective {
    EdgePerspective::normalized(vec![0.0, 0.0, 1.0], vec![0.0, 0.5, 0.5]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn accumulator_identity(seed in any::<u64>(), k in 20usize..300) {
        let g = IraGraph::sample(k, &mixed(), seed).unwrap();
        let u = message(k, seed ^ 1);
        let w = ira_encode(&g, &u).unwrap();
        for j in 0..g.n() {
            let v: i8 = g.check_info(j).map(|i| u[i]).product();
            let prev = if j == 0 { 1 } else { w[j - 1] };
            prop_assert_eq!(w[j] * prev, v);
        }
    }

    #[test]
    fn sampled_rate_matches_design(seed in any::<u64>(), k in 100usize..2000) {
        let ep = mixed();
        let g = IraGraph::sample(k, &ep, seed).unwrap();
        let rate = ira_rate(&ep).unwrap();
        prop_assert!((g.k() as f64 / g.n() as f64 - rate).abs() <= 2.0 / g.n() as f64);
    }

    #[test]
    fn more_erasures_never_help(seed in any::<u64>(), a in 0.05f64..0.35, extra in 0.0f64..0.2) {
        let ep = mixed();
        let k = 400;
        let g = IraGraph::sample(k, &ep, seed).unwrap();
        let u = message(k, seed ^ 2);
        let w = ira_encode(&g, &u).unwrap();
        let fewer = transmit(&w, ChannelModel::Bec(a), seed ^ 3);
        let symbols = fewer.as_discrete().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let more: Vec<i8> = symbols.iter().map(|&x| if rng.gen_bool(extra) { 0 } else { x }).collect();
        let more = ReceivedWord::discrete(more, ChannelModel::Bec(a + extra));
        let pilots: Vec<(usize, i8)> = (0..k).step_by(50).map(|i| (i, u[i])).collect();
        let d1 = ira_decode_bec_doped(&g, &fewer, &pilots, 10_000).unwrap();
        let d2 = ira_decode_bec_doped(&g, &more, &pilots, 10_000).unwrap();
        for i in 0..k {
            prop_assert!(d1.word[i] == 0 || d1.word[i] == u[i]);
            if d2.word[i] != 0 {
                prop_assert_eq!(d1.word[i], d2.word[i], "bit {} known with more erasures only", i);
            }
        }
        prop_assert!(d1.residual <= d2.residual);
    }
}

#[test]
fn check_series_is_normalized_and_matches_the_sample() {
    let ep = mixed();
    let r = CheckSeries::from_rho(&ep).unwrap();
    assert!((r.eval(1.0) - 1.0).abs() < 1e-12);
    assert!(r.eval(0.0).abs() < 1e-15);
    for seed in 0..5 {
        let g = IraGraph::sample(3000, &ep, seed).unwrap();
        let h = g.check_histogram();
        let n = g.n() as f64;
        for (i, &want) in r.r.coeffs().iter().enumerate() {
            let got = h.get(i).copied().unwrap_or(0.0);
            assert!((got - want).abs() <= 3.0 / n, "R_{i}: {got} vs {want}");
        }
    }
}

#[test]
fn decoding_condition_is_monotone_in_alpha() {
    let ep = EdgePerspective::normalized(vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0]).unwrap();
    let t = ira_condition_threshold(&ep, 2000, 1e-6).unwrap();
    for i in 1..40 {
        let alpha = i as f64 / 40.0;
        let c = ira_success_condition(&ep, alpha, 2000).unwrap();
        if alpha < t - 1e-3 {
            assert!(c.satisfied, "α = {alpha}");
        } else if alpha > t + 1e-3 {
            assert!(!c.satisfied, "α = {alpha}");
        }
    }
}
