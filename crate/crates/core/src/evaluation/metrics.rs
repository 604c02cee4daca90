#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("prediction and truth lengths differ ({pred} vs {truth})")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("no labels to score")]
    EmptyInput,
}

fn check(pred: &[u8], truth: &[u8]) -> Result<(), MetricError> {
    if pred.len() != truth.len() {
        return Err(MetricError::LengthMismatch { pred: pred.len(), truth: truth.len() });
    }
    if pred.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn accuracy(pred: &[u8], truth: &[u8]) -> Result<f64, MetricError> {
    check(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Mean of `|pred - truth|`.
pub fn mean_absolute_error(pred: &[u8], truth: &[u8]) -> Result<f64, MetricError> {
    check(pred, truth)?;
    let total: u64 = pred.iter().zip(truth).map(|(&p, &t)| u64::from(p.abs_diff(t))).sum();
    Ok(total as f64 / pred.len() as f64)
}

/// Positive-class precision, recall and F1; each is 0 when undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn binary_scores(pred: &[u8], truth: &[u8]) -> Result<BinaryScores, MetricError> {
    check(pred, truth)?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (1, 1) => tp += 1,
            (1, _) => fp += 1,
            (_, 1) => fn_ += 1,
            _ => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(BinaryScores { precision, recall, f1 })
}
