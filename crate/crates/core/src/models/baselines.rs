//! Gaussian naive Bayes, Pegasos linear SVM and k-nearest neighbours.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbHyperparams {
    pub var_floor: f64,
}

impl Default for NbHyperparams {
    fn default() -> Self {
        NbHyperparams { var_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    /// Needs both classes present.
    pub(crate) fn fit(x: &[Vec<f64>], y: &[u8], hp: &NbHyperparams) -> GaussianNb {
        let d = x[0].len();
        let mut count = [0usize; 2];
        let mut mean = [vec![0.0; d], vec![0.0; d]];
        for (row, &label) in x.iter().zip(y) {
            let c = usize::from(label);
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
        }
        let mut var = [vec![0.0; d], vec![0.0; d]];
        for (row, &label) in x.iter().zip(y) {
            let c = usize::from(label);
            for j in 0..d {
                let diff = row[j] - mean[c][j];
                var[c][j] += diff * diff;
            }
        }
        for c in 0..2 {
            var[c].iter_mut().for_each(|v| *v = (*v / count[c] as f64).max(hp.var_floor));
        }
        let n = x.len() as f64;
        GaussianNb {
            log_prior: [(count[0] as f64 / n).ln(), (count[1] as f64 / n).ln()],
            mean,
            var,
        }
    }

    fn log_joint(&self, x: &[f64], c: usize) -> f64 {
        let mut acc = self.log_prior[c];
        for ((xi, m), v) in x.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            let diff = xi - m;
            acc -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + diff * diff / v);
        }
        acc
    }

    /// Class posteriors `[P(0|x), P(1|x)]`.
    pub fn posterior(&self, x: &[f64]) -> [f64; 2] {
        let l0 = self.log_joint(x, 0);
        let l1 = self.log_joint(x, 1);
        let top = l0.max(l1);
        let e0 = (l0 - top).exp();
        let e1 = (l1 - top).exp();
        let total = e0 + e1;
        [e0 / total, e1 / total]
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        let [p0, p1] = self.posterior(x);
        u8::from(p1 > p0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmHyperparams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmHyperparams {
    fn default() -> Self {
        SvmHyperparams { lambda: 1e-3, epochs: 50 }
    }
}

/// Linear SVM trained with Pegasos; the bias is an extra always-one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub(crate) fn fit(x: &[Vec<f64>], y: &[u8], hp: &SvmHyperparams, seed: u64) -> LinearSvm {
        let d = x[0].len();
        let mut w = vec![0.0; d + 1];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut t = 0u64;
        for _ in 0..hp.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (hp.lambda * t as f64);
                let target = if y[i] == 1 { 1.0 } else { -1.0 };
                let score = x[i].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + w[d];
                let shrink = 1.0 - eta * hp.lambda;
                w.iter_mut().for_each(|wj| *wj *= shrink);
                if target * score < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(&x[i]) {
                        *wj += eta * target * xj;
                    }
                    w[d] += eta * target;
                }
            }
        }
        let bias = w.pop().expect("bias slot");
        LinearSvm { weights: w, bias }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        u8::from(self.decision(x) > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnHyperparams {
    pub k: usize,
}

impl Default for KnnHyperparams {
    fn default() -> Self {
        KnnHyperparams { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

impl Knn {
    /// Euclidean k-NN; equal distances rank the earlier training row first and a
    /// tied vote goes to class 0.
    pub fn predict_row(&self, q: &[f64]) -> u8 {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, row)| (row.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.clamp(1, dist.len());
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_rank);
        }
        let ones = dist[..k].iter().filter(|(_, i)| self.y[*i] == 1).count();
        u8::from(2 * ones > k)
    }
}
