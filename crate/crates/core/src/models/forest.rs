use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, DecisionTree, GrowParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// `None` means ⌈√d⌉.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        ForestHyperparams { n_trees: 100, max_depth: 12, min_leaf: 2, features_per_split: None, bootstrap: true }
    }
}

impl ForestHyperparams {
    pub fn resolved_features_per_split(&self, d: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
}

/// SplitMix64 finalizer; decorrelates per-tree seeds drawn from one master seed.
pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Forest {
    /// Trees are grown in parallel; each has its own pre-derived seed so the
    /// result does not depend on scheduling.
    pub(crate) fn fit(x: &[Vec<f64>], y: &[u8], hp: &ForestHyperparams, seed: u64) -> Forest {
        let n = x.len();
        let params = GrowParams {
            max_depth: hp.max_depth,
            min_leaf: hp.min_leaf,
            features_per_split: hp.resolved_features_per_split(x[0].len()),
        };
        let trees = (0..hp.n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                let rows: Vec<usize> = if hp.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                grow_tree(x, y, &rows, params, &mut rng)
            })
            .collect();
        Forest { trees }
    }

    pub fn votes(&self, x: &[f64]) -> usize {
        self.trees.iter().filter(|t| t.predict_row(x) == 1).count()
    }

    /// Majority vote; a tie goes to class 0.
    pub fn predict_row(&self, x: &[f64]) -> u8 {
        u8::from(2 * self.votes(x) > self.trees.len())
    }
}
