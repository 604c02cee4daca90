//! Finite-difference verification of analytic gradients.

/// A model whose loss over a batch has an analytic gradient with respect to a
/// flat parameter vector.
pub trait Differentiable: Clone {
    fn parameters(&self) -> Vec<f64>;
    fn set_parameters(&mut self, params: &[f64]);
    fn loss(&self, x: &[Vec<f64>], y: &[u8]) -> f64;
    fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[u8]) -> (f64, Vec<f64>);
}

pub const DEFAULT_STEP: f64 = 1e-5;

/// Largest coordinate-wise relative error between the analytic gradient and
/// central differences `(L(w+h) - L(w-h)) / 2h`, with denominator
/// `max(|analytic|, |numeric|, 1e-12)`.
pub fn gradient_check<M: Differentiable>(model: &M, x: &[Vec<f64>], y: &[u8], h: f64) -> f64 {
    let (_, analytic) = model.loss_and_gradient(x, y);
    let base = model.parameters();
    let mut probe = model.clone();
    let mut params = base.clone();
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        params[i] = base[i] + h;
        probe.set_parameters(&params);
        let up = probe.loss(x, y);
        params[i] = base[i] - h;
        probe.set_parameters(&params);
        let down = probe.loss(x, y);
        params[i] = base[i];
        let numeric = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-12);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}
