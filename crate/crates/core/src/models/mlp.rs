//! One-hidden-layer tanh network with a sigmoid output, trained by full-batch
//! gradient descent on mean binary cross-entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gradcheck::Differentiable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpHyperparams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Weights start uniform in `[-init_scale, init_scale]`; biases start at 0.
    pub init_scale: f64,
}

impl Default for MlpHyperparams {
    fn default() -> Self {
        MlpHyperparams { hidden: 16, learning_rate: 0.1, epochs: 200, init_scale: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    /// Row-major `hidden x inputs`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-[y ln σ(z) + (1-y) ln(1-σ(z))]` without forming σ(z).
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

impl Mlp {
    pub fn zeros(inputs: usize, hidden: usize) -> Mlp {
        Mlp { inputs, hidden, w1: vec![0.0; hidden * inputs], b1: vec![0.0; hidden], w2: vec![0.0; hidden], b2: 0.0 }
    }

    pub fn init(inputs: usize, hp: &MlpHyperparams, seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Mlp::zeros(inputs, hp.hidden);
        let s = hp.init_scale;
        for w in net.w1.iter_mut().chain(net.w2.iter_mut()) {
            *w = rng.random_range(-s..=s);
        }
        net
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|h| {
                let row = &self.w1[h * self.inputs..(h + 1) * self.inputs];
                (row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b1[h]).tanh()
            })
            .collect()
    }

    fn logit(&self, hidden: &[f64]) -> f64 {
        hidden.iter().zip(&self.w2).map(|(a, w)| a * w).sum::<f64>() + self.b2
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(&self.hidden_activations(x)))
    }

    pub fn predict_row(&self, x: &[f64]) -> u8 {
        u8::from(self.probability(x) > 0.5)
    }

    pub fn step(&mut self, x: &[Vec<f64>], y: &[u8], learning_rate: f64) {
        let (_, grad) = self.loss_and_gradient(x, y);
        let mut params = self.parameters();
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= learning_rate * g;
        }
        self.set_parameters(&params);
    }

    pub(crate) fn fit(x: &[Vec<f64>], y: &[u8], hp: &MlpHyperparams, seed: u64) -> Mlp {
        let mut net = Mlp::init(x[0].len(), hp, seed);
        for _ in 0..hp.epochs {
            net.step(x, y, hp.learning_rate);
        }
        net
    }
}

impl Differentiable for Mlp {
    /// Layout: w1, b1, w2, b2.
    fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.w1.len() + 2 * self.hidden + 1);
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    fn set_parameters(&mut self, p: &[f64]) {
        let (w1, rest) = p.split_at(self.w1.len());
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        self.w1.copy_from_slice(w1);
        self.b1.copy_from_slice(b1);
        self.w2.copy_from_slice(w2);
        self.b2 = rest[0];
    }

    fn loss(&self, x: &[Vec<f64>], y: &[u8]) -> f64 {
        let total: f64 = x
            .iter()
            .zip(y)
            .map(|(row, &label)| bce_from_logit(self.logit(&self.hidden_activations(row)), f64::from(label)))
            .sum();
        total / x.len() as f64
    }

    fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[u8]) -> (f64, Vec<f64>) {
        let n = x.len() as f64;
        let (d, hsize) = (self.inputs, self.hidden);
        let mut gw1 = vec![0.0; hsize * d];
        let mut gb1 = vec![0.0; hsize];
        let mut gw2 = vec![0.0; hsize];
        let mut gb2 = 0.0;
        let mut loss = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let target = f64::from(label);
            let hidden = self.hidden_activations(row);
            let z = self.logit(&hidden);
            loss += bce_from_logit(z, target);
            let dz = sigmoid(z) - target;
            gb2 += dz;
            for h in 0..hsize {
                gw2[h] += dz * hidden[h];
                let da = dz * self.w2[h] * (1.0 - hidden[h] * hidden[h]);
                gb1[h] += da;
                for (g, v) in gw1[h * d..(h + 1) * d].iter_mut().zip(row) {
                    *g += da * v;
                }
            }
        }
        let mut grad = gw1;
        grad.extend(gb1);
        grad.extend(gw2);
        grad.push(gb2);
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_one_half() {
        let net = Mlp::zeros(3, 4);
        assert_eq!(net.probability(&[1.0, -7.0, 42.0]), 0.5);
        assert_eq!(net.predict_row(&[1.0, -7.0, 42.0]), 0);
    }

    #[test]
    fn stable_cross_entropy() {
        assert!((bce_from_logit(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_from_logit(800.0, 1.0) < 1e-300);
        assert!((bce_from_logit(-800.0, 1.0) - 800.0).abs() < 1e-9);
    }

    #[test]
    fn learns_xor_like_pattern() {
        let x = vec![vec![-1.0, -1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let hp = MlpHyperparams { epochs: 3000, learning_rate: 0.5, ..MlpHyperparams::default() };
        let net = Mlp::fit(&x, &y, &hp, 3);
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(net.predict_row(row), label);
        }
    }

    #[test]
    fn parameter_layout_round_trips() {
        let mut net = Mlp::init(3, &MlpHyperparams { hidden: 2, ..MlpHyperparams::default() }, 9);
        let p = net.parameters();
        assert_eq!(p.len(), 2 * 3 + 2 + 2 + 1);
        let before = net.clone();
        net.set_parameters(&p);
        assert_eq!(net, before);
    }
}
