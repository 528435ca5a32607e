use ldpc_core::channels::*;
use proptest::prelude::*;

const N: usize = 100_000;

fn discrete(rw: &ReceivedWord) -> Vec<i8> {
    rw.as_discrete().unwrap().to_vec()
}

#[test]
fn discrete_outputs_are_symmetric() {
    for ch in [ChannelModel::Bsc(0.11), ChannelModel::Bec(0.37)] {
        let plus = discrete(&transmit(&vec![1; N], ch, 5));
        let minus = discrete(&transmit(&vec![-1; N], ch, 5));
        // shared noise: output q under +1 is exactly -q under -1
        assert!(plus.iter().zip(&minus).all(|(a, b)| *a == -b));
        // independent noise: the histograms agree within sampling error
        let other = discrete(&transmit(&vec![-1; N], ch, 6));
        for q in [-1i8, 0, 1] {
            let a = plus.iter().filter(|&&x| x == q).count() as f64 / N as f64;
            let b = other.iter().filter(|&&x| x == -q).count() as f64 / N as f64;
            let se = (a.max(b) * (1.0 - a.min(b)) * 2.0 / N as f64)
                .sqrt()
                .max(1e-9);
            assert!((a - b).abs() < 5.0 * se, "{ch} q={q}: {a} vs {b}");
        }
    }
}

#[test]
fn gaussian_output_is_symmetric() {
    let sigma = 0.8;
    let plus = transmit(&vec![1; N], ChannelModel::Biawgn(sigma), 1);
    let minus = transmit(&vec![-1; N], ChannelModel::Biawgn(sigma), 2);
    let bins = 40;
    let hist = |ys: &[f64], sign: f64| {
        let mut h = vec![0usize; bins];
        for &y in ys {
            let b = ((sign * y + 3.0) / 6.0 * bins as f64).floor();
            if (0.0..bins as f64).contains(&b) {
                h[b as usize] += 1;
            }
        }
        h
    };
    let (a, b) = (
        hist(plus.as_real().unwrap(), 1.0),
        hist(minus.as_real().unwrap(), -1.0),
    );
    for (x, y) in a.iter().zip(&b) {
        let sd = ((x + y) as f64).sqrt().max(1.0);
        assert!((*x as f64 - *y as f64).abs() < 5.0 * sd, "{x} vs {y}");
    }
}

#[test]
fn coordinates_are_independent() {
    let r = discrete(&transmit(&vec![1; N], ChannelModel::Bec(0.5), 9));
    let e: Vec<f64> = r.iter().map(|&x| f64::from(u8::from(x == 0))).collect();
    let mean = e.iter().sum::<f64>() / N as f64;
    let cov = e
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum::<f64>()
        / (N - 1) as f64;
    // correlation of neighbours has standard error 1/√N
    assert!((cov / (mean * (1.0 - mean))).abs() < 5.0 / (N as f64).sqrt());
}

#[test]
fn soft_capacity_exceeds_hard_decisions() {
    for sigma in [0.7, 0.9, 1.1] {
        let hard = 1.0 - binary_entropy(q_function(1.0 / sigma));
        assert!(capacity(ChannelModel::Biawgn(sigma)) > hard, "σ = {sigma}");
    }
}

proptest! {
    #[test]
    fn bsc_and_bec_capacities_coincide(p in 0.0f64..0.5) {
        let h = binary_entropy(p);
        prop_assert!((capacity(ChannelModel::Bsc(p)) - capacity(ChannelModel::Bec(h))).abs() < 1e-12);
        prop_assert!((capacity(ChannelModel::Bsc(p)) - (1.0 - h)).abs() < 1e-12);
    }

    #[test]
    fn transmit_is_deterministic(seed in any::<u64>(), n in 1usize..200, p in 0.0f64..0.5) {
        let cw: Vec<i8> = (0..n).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        for ch in [ChannelModel::Bsc(p), ChannelModel::Bec(p), ChannelModel::Biawgn(p + 0.1)] {
            prop_assert_eq!(transmit(&cw, ch, seed), transmit(&cw, ch, seed));
        }
    }
}
