//! CART classification trees with Gini impurity.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gini impurity `1 - Σ p_c²` of a binary label multiset given its class counts.
pub(crate) fn gini_from_counts(zeros: usize, ones: usize) -> f64 {
    let n = (zeros + ones) as f64;
    let p0 = zeros as f64 / n;
    let p1 = ones as f64 / n;
    1.0 - (p0 * p0 + p1 * p1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { label: u8 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Nodes are stored flat; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict_row(&self, x: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Candidate features per split; `>= d` means all features in column order.
    pub features_per_split: usize,
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [u8],
    params: GrowParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn majority(zeros: usize, ones: usize) -> u8 {
    u8::from(ones > zeros)
}

const MIN_GAIN: f64 = 1e-12;

impl<R: Rng> Builder<'_, R> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x[0].len();
        if self.params.features_per_split >= d {
            (0..d).collect()
        } else {
            let mut picked = sample(self.rng, d, self.params.features_per_split).into_vec();
            picked.sort_unstable();
            picked
        }
    }

    fn best_split(&mut self, idx: &mut [usize], zeros: usize, ones: usize) -> Option<BestSplit> {
        let n = idx.len();
        let parent = gini_from_counts(zeros, ones);
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<BestSplit> = None;
        for feature in self.candidate_features() {
            let x = self.x;
            idx.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]).then(a.cmp(&b)));
            let (mut left0, mut left1) = (0usize, 0usize);
            for pos in 0..n - 1 {
                if self.y[idx[pos]] == 1 {
                    left1 += 1;
                } else {
                    left0 += 1;
                }
                let here = x[idx[pos]][feature];
                let next = x[idx[pos + 1]][feature];
                if here == next {
                    continue;
                }
                let n_left = pos + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let weighted = (n_left as f64 * gini_from_counts(left0, left1)
                    + n_right as f64 * gini_from_counts(zeros - left0, ones - left1))
                    / n as f64;
                let gain = parent - weighted;
                if gain > MIN_GAIN && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit { feature, threshold: here + (next - here) / 2.0, gain });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let ones = idx.iter().filter(|&&i| self.y[i] == 1).count();
        let zeros = idx.len() - ones;
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { label: majority(zeros, ones) });
        if zeros == 0 || ones == 0 || depth >= self.params.max_depth || idx.len() < 2 * self.params.min_leaf.max(1) {
            return at;
        }
        let Some(split) = self.best_split(idx, zeros, ones) else {
            return at;
        };
        let feature = split.feature;
        let x = self.x;
        // stable partition keeps child order deterministic
        let (mut left, mut right): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| x[i][feature] <= split.threshold);
        let l = self.grow(&mut left, depth + 1);
        let r = self.grow(&mut right, depth + 1);
        self.nodes[at] = Node::Split { feature, threshold: split.threshold, left: l, right: r };
        at
    }
}

/// Grows a tree on the rows listed in `sample_rows` (repeats allowed).
pub(crate) fn grow_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[u8],
    sample_rows: &[usize],
    params: GrowParams,
    rng: &mut R,
) -> DecisionTree {
    let mut builder = Builder { x, y, params, rng, nodes: Vec::new() };
    let mut idx = sample_rows.to_vec();
    builder.grow(&mut idx, 0);
    DecisionTree { nodes: builder.nodes }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn params() -> GrowParams {
        GrowParams { max_depth: 12, min_leaf: 1, features_per_split: usize::MAX }
    }

    fn fit(x: &[Vec<f64>], y: &[u8], p: GrowParams) -> DecisionTree {
        let rows: Vec<usize> = (0..x.len()).collect();
        grow_tree(x, y, &rows, p, &mut ChaCha8Rng::seed_from_u64(0))
    }

    #[test]
    fn separable_one_dimensional() {
        let x: Vec<Vec<f64>> = [-3.0, -2.0, -0.5, 0.5, 1.0, 4.0].iter().map(|&v| vec![v]).collect();
        let y = [0, 0, 0, 1, 1, 1];
        let tree = fit(&x, &y, params());
        assert_eq!(tree.depth(), 1);
        assert_eq!(tree.nodes[0], Node::Split { feature: 0, threshold: 0.0, left: 1, right: 2 });
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(tree.predict_row(row), label);
        }
    }

    #[test]
    fn pure_node_is_single_leaf() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let tree = fit(&x, &[1, 1, 1], params());
        assert_eq!(tree.nodes, vec![Node::Leaf { label: 1 }]);
    }

    #[test]
    fn constant_features_stop_with_majority() {
        let x = vec![vec![5.0, 1.0]; 5];
        let tree = fit(&x, &[1, 0, 1, 1, 0], params());
        assert_eq!(tree.nodes, vec![Node::Leaf { label: 1 }]);
        let tied = fit(&x[..4], &[1, 0, 1, 0], params());
        assert_eq!(tied.nodes, vec![Node::Leaf { label: 0 }]);
    }

    #[test]
    fn depth_and_leaf_limits() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![f64::from(i)]).collect();
        let y: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let shallow = fit(&x, &y, GrowParams { max_depth: 2, ..params() });
        assert!(shallow.depth() <= 2);
        let stump = fit(&x, &y, GrowParams { min_leaf: 8, ..params() });
        assert!(stump.depth() <= 1);
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini_from_counts(2, 2), 0.5);
        assert_eq!(gini_from_counts(0, 3), 0.0);
        assert_eq!(gini_from_counts(3, 1), 0.375);
    }
}
