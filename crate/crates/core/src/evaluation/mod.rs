//! Scoring, multi-classifier comparison, look-ahead features and figures.

mod compare;
mod lookahead;
mod metrics;
mod report;

use chrono::NaiveDate;

pub use compare::{
    compare_classifiers, score_model, ClassifierScore, Comparison, ComparisonRow, ComparisonTable, EvalMode,
    EvalReport,
};
pub use lookahead::{build_lookahead_features, lookahead_row};
pub use metrics::{accuracy, binary_scores, mean_absolute_error, BinaryScores, MetricError};
pub use report::{accuracy_svg, parse_report_csv, render_report, report_csv, REPORT_HEADER};

use crate::models::ModelError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("training split is empty")]
    EmptyTrain,
    #[error("test split is empty")]
    EmptyTest,
    #[error("horizon {horizon} exceeds the maximum lag of {max_lag} days")]
    HorizonExceedsMaxLag { horizon: usize, max_lag: usize },
    #[error("row ending {0} is not covered by the daily series")]
    RowOutsideSeries(NaiveDate),
}
