use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, binary_scores, mean_absolute_error};
use super::EvalError;
use crate::labeling::{LabeledDataset, SplitSpec};
use crate::models::{fit, FeatureMatrix, Hyperparams, ModelKind, ModelWarning, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub kind: ModelKind,
    pub accuracy: f64,
    pub mae: f64,
}

/// Rows sorted by accuracy descending, ties by kind name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn new(mut rows: Vec<ComparisonRow>) -> Self {
        rows.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then_with(|| a.kind.name().cmp(b.kind.name())));
        ComparisonTable { rows }
    }

    pub fn get(&self, kind: ModelKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierScore {
    pub kind: ModelKind,
    pub accuracy: f64,
    pub mae: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EvalMode {
    Standard,
    Lookahead { horizon: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub country: String,
    pub scores: Vec<ClassifierScore>,
    pub n_train: usize,
    pub n_test: usize,
    pub split: SplitSpec,
    pub seed: u64,
    pub mode: EvalMode,
}

/// Scores a fitted model on a labeled dataset.
pub fn score_model(model: &TrainedModel, test: &LabeledDataset) -> Result<ClassifierScore, EvalError> {
    let data = FeatureMatrix::from_dataset(test);
    let pred = model.predict(&data.rows)?;
    let scores = binary_scores(&pred, &data.labels)?;
    Ok(ClassifierScore {
        kind: model.kind,
        accuracy: accuracy(&pred, &data.labels)?,
        mae: mean_absolute_error(&pred, &data.labels)?,
        precision: scores.precision,
        recall: scores.recall,
        f1: scores.f1,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub table: ComparisonTable,
    pub scores: Vec<ClassifierScore>,
    pub models: Vec<TrainedModel>,
    pub warnings: Vec<(ModelKind, ModelWarning)>,
}

/// Fits each kind on `train` with the shared seed and scores it on `test`.
pub fn compare_classifiers(
    train: &LabeledDataset,
    test: &LabeledDataset,
    kinds: &[ModelKind],
    hp: &Hyperparams,
    seed: u64,
) -> Result<Comparison, EvalError> {
    if train.is_empty() {
        return Err(EvalError::EmptyTrain);
    }
    if test.is_empty() {
        return Err(EvalError::EmptyTest);
    }
    let data = FeatureMatrix::from_dataset(train);
    let mut rows = Vec::new();
    let mut scores = Vec::new();
    let mut models = Vec::new();
    let mut warnings = Vec::new();
    for &kind in kinds {
        let fitted = fit(kind, &data, hp, seed)?;
        warnings.extend(fitted.warnings.iter().map(|w| (kind, *w)));
        let score = score_model(&fitted.model, test)?;
        rows.push(ComparisonRow { kind, accuracy: score.accuracy, mae: score.mae });
        scores.push(score);
        models.push(fitted.model);
    }
    Ok(Comparison { table: ComparisonTable::new(rows), scores, models, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_sort_alphabetically() {
        let table = ComparisonTable::new(vec![
            ComparisonRow { kind: ModelKind::Tree, accuracy: 0.9, mae: 0.1 },
            ComparisonRow { kind: ModelKind::Knn, accuracy: 0.9, mae: 0.1 },
            ComparisonRow { kind: ModelKind::Forest, accuracy: 0.95, mae: 0.05 },
        ]);
        let order: Vec<ModelKind> = table.rows.iter().map(|r| r.kind).collect();
        assert_eq!(order, vec![ModelKind::Forest, ModelKind::Knn, ModelKind::Tree]);
    }
}
