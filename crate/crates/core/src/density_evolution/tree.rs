use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::degree_dist::EdgePerspective;
use crate::error::{Error, Result};
use crate::factor_graph::{child_sampler, NodeKind, TreeSample};

/// Monte-Carlo estimate of the root-message erasure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Whether the root's outgoing message on a sampled tree is erased, with every
/// variable erased independently with probability `alpha`.
///
/// A variable message is erased iff its received value and all its check
/// children are erased; a check message is erased iff some child is erased.
pub fn tree_root_erased<R: Rng>(tree: &TreeSample, alpha: f64, rng: &mut R) -> bool {
    fn var<R: Rng>(tree: &TreeSample, u: usize, alpha: f64, rng: &mut R) -> bool {
        rng.gen_bool(alpha)
            && tree.nodes[u]
                .children
                .iter()
                .all(|&c| chk(tree, c, alpha, rng))
    }
    fn chk<R: Rng>(tree: &TreeSample, u: usize, alpha: f64, rng: &mut R) -> bool {
        debug_assert_eq!(tree.nodes[u].kind, NodeKind::Check);
        tree.nodes[u]
            .children
            .iter()
            .any(|&v| var(tree, v, alpha, rng))
    }
    var(tree, 0, alpha, rng)
}

struct LazyTree<'a> {
    lam: &'a WeightedIndex<f64>,
    rho: &'a WeightedIndex<f64>,
    alpha: f64,
}

impl LazyTree<'_> {
    /// Samples only as much of the tree as the erasure outcome depends on.
    fn var<R: Rng>(&self, levels: usize, rng: &mut R) -> bool {
        if !rng.gen_bool(self.alpha) {
            return false;
        }
        if levels == 0 {
            return true;
        }
        let checks = self.lam.sample(rng);
        (0..checks).all(|_| self.chk(levels, rng))
    }

    fn chk<R: Rng>(&self, levels: usize, rng: &mut R) -> bool {
        let vars = self.rho.sample(rng);
        (0..vars).any(|_| self.var(levels - 1, rng))
    }
}

/// Estimates `P(ℓ)`, the erasure probability of the root message after `ell`
/// iterations on the tree ensemble. The tree is grown lazily, which has the
/// same distribution as drawing a full `sample_tree` and evaluating it.
pub fn tree_validate(
    ep: &EdgePerspective,
    alpha: f64,
    ell: usize,
    trials: usize,
    seed: u64,
) -> Result<TreeEstimate> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} not in [0,1]"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let lam = child_sampler(ep.lambda())?;
    let rho = child_sampler(ep.rho())?;
    let tree = LazyTree {
        lam: &lam,
        rho: &rho,
        alpha,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..trials).filter(|_| tree.var(ell, &mut rng)).count();
    let mean = hits as f64 / trials as f64;
    Ok(TreeEstimate {
        mean,
        std_error: (mean * (1.0 - mean) / trials as f64).sqrt(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_evolution::bec_iterate;
    use crate::factor_graph::sample_tree;

    #[test]
    fn trivial_cases() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        assert_eq!(tree_validate(&ep, 0.0, 4, 1000, 1).unwrap().mean, 0.0);
        let t = tree_validate(&ep, 0.3, 0, 20_000, 2).unwrap();
        assert!((t.mean - 0.3).abs() < 4.0 * t.std_error);
    }

    #[test]
    fn lazy_and_materialized_agree() {
        let ep = EdgePerspective::regular(3, 4).unwrap();
        let (alpha, ell, trials) = (0.6, 2, 4000);
        let de = bec_iterate(alpha, &ep, ell)[ell];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hits = (0..trials)
            .filter(|&s| {
                tree_root_erased(&sample_tree(ell, &ep, s as u64).unwrap(), alpha, &mut rng)
            })
            .count();
        let full = hits as f64 / trials as f64;
        let se = (de * (1.0 - de) / trials as f64).sqrt();
        assert!((full - de).abs() < 4.0 * se, "{full} vs {de}");
        let lazy = tree_validate(&ep, alpha, ell, trials, 3).unwrap();
        assert!((lazy.mean - de).abs() < 4.0 * se, "{} vs {de}", lazy.mean);
    }
}
