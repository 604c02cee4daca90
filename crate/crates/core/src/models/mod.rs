//! The classifier suite: random forest plus five baselines, all seed-deterministic.

mod baselines;
mod forest;
mod gradcheck;
mod mlp;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use baselines::{GaussianNb, Knn, KnnHyperparams, LinearSvm, NbHyperparams, SvmHyperparams};
pub use forest::{Forest, ForestHyperparams};
pub use gradcheck::{gradient_check, Differentiable, DEFAULT_STEP};
pub use mlp::{Mlp, MlpHyperparams};
pub use tree::{DecisionTree, Node};

use crate::labeling::LabeledDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Forest,
    GaussianNb,
    LinearSvm,
    Knn,
    Tree,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] =
        [ModelKind::Forest, ModelKind::GaussianNb, ModelKind::LinearSvm, ModelKind::Knn, ModelKind::Tree, ModelKind::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Forest => "forest",
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::Knn => "knn",
            ModelKind::Tree => "tree",
            ModelKind::Mlp => "mlp",
        }
    }

    /// Distance- and gradient-based kinds see standardized inputs.
    pub fn standardizes(self) -> bool {
        matches!(self, ModelKind::LinearSvm | ModelKind::Knn | ModelKind::Mlp)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown classifier kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("row {row} has {found} features, model expects {expected}")]
    DimensionMismatch { row: usize, expected: usize, found: usize },
    #[error("label set is empty")]
    EmptySet,
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelWarning {
    /// Only one class in the training labels; the model predicts it everywhere.
    SingleClassTraining { label: u8 },
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelWarning::SingleClassTraining { label } => {
                write!(f, "single-class training data; constant predictor for class {label}")
            }
        }
    }
}

/// Gini impurity of a binary label multiset.
pub fn gini_impurity(labels: &[u8]) -> Result<f64, ModelError> {
    if labels.is_empty() {
        return Err(ModelError::EmptySet);
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    Ok(tree::gini_from_counts(labels.len() - ones, ones))
}

/// Dense design matrix; absent values are NaN until a [`Preprocessor`] imputes them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub column_names: Vec<String>,
}

impl FeatureMatrix {
    /// Columns: mct, mct_bar, mct_bar_comp, theta, lag_1..lag_L, mean_tone,
    /// mean_goldstein, then a one-hot month_1..month_12 block.
    pub fn from_dataset(ds: &LabeledDataset) -> FeatureMatrix {
        let mut column_names: Vec<String> =
            ["mct", "mct_bar", "mct_bar_comp", "theta"].iter().map(|s| s.to_string()).collect();
        column_names.extend((1..=ds.max_lag).map(|j| format!("lag_{j}")));
        column_names.push("mean_tone".into());
        column_names.push("mean_goldstein".into());
        column_names.extend((1..=12).map(|m| format!("month_{m}")));
        let rows = ds
            .rows
            .iter()
            .map(|r| {
                let f = &r.features;
                let mut row = vec![f.mct, f.mct_bar, f.mct_bar_comp, f.theta];
                row.extend(f.lag_counts.iter().map(|&c| f64::from(c)));
                row.push(f.mean_tone.unwrap_or(f64::NAN));
                row.push(f.mean_goldstein.unwrap_or(f64::NAN));
                row.extend((1..=12).map(|m| if f.month == m { 1.0 } else { 0.0 }));
                row
            })
            .collect();
        FeatureMatrix { rows, labels: ds.labels(), column_names }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.column_names.len()
    }
}

pub const STD_FLOOR: f64 = 1e-9;

/// Median imputation then optional z-scoring, with statistics from training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub medians: Vec<f64>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub standardize: bool,
}

fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

impl Preprocessor {
    pub fn fit(train: &[Vec<f64>], standardize: bool) -> Preprocessor {
        let d = train.first().map_or(0, Vec::len);
        let n = train.len() as f64;
        let medians: Vec<f64> = (0..d)
            .map(|j| median(train.iter().map(|r| r[j]).filter(|v| !v.is_nan()).collect()))
            .collect();
        let imputed: Vec<Vec<f64>> = train
            .iter()
            .map(|r| r.iter().zip(&medians).map(|(&v, &m)| if v.is_nan() { m } else { v }).collect())
            .collect();
        let means: Vec<f64> = (0..d).map(|j| imputed.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let stds: Vec<f64> = (0..d)
            .map(|j| {
                let var = imputed.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                var.sqrt().max(STD_FLOOR)
            })
            .collect();
        Preprocessor { medians, means, stds, standardize }
    }

    pub fn dim(&self) -> usize {
        self.medians.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| {
                let v = if v.is_nan() { self.medians[j] } else { v };
                if self.standardize {
                    (v - self.means[j]) / self.stds[j]
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Z-scores `apply_to` with per-column mean and std (floored at 1e-9) of `train`.
pub fn standardize(train: &[Vec<f64>], apply_to: &[Vec<f64>]) -> Vec<Vec<f64>> {
    Preprocessor::fit(train, true).transform(apply_to)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeHyperparams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl TreeHyperparams {
    pub fn defaults() -> Self {
        TreeHyperparams { max_depth: 12, min_leaf: 2 }
    }
}

/// Settings for every kind; each fit reads only its own section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub forest: ForestHyperparams,
    pub tree: TreeHyperparams,
    pub gaussian_nb: NbHyperparams,
    pub linear_svm: SvmHyperparams,
    pub knn: KnnHyperparams,
    pub mlp: MlpHyperparams,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            forest: ForestHyperparams::default(),
            tree: TreeHyperparams::defaults(),
            gaussian_nb: NbHyperparams::default(),
            linear_svm: SvmHyperparams::default(),
            knn: KnnHyperparams::default(),
            mlp: MlpHyperparams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindHyperparams {
    Forest(ForestHyperparams),
    Tree(TreeHyperparams),
    GaussianNb(NbHyperparams),
    LinearSvm(SvmHyperparams),
    Knn(KnnHyperparams),
    Mlp(MlpHyperparams),
}

impl Hyperparams {
    pub fn for_kind(&self, kind: ModelKind) -> KindHyperparams {
        match kind {
            ModelKind::Forest => KindHyperparams::Forest(self.forest.clone()),
            ModelKind::Tree => KindHyperparams::Tree(self.tree.clone()),
            ModelKind::GaussianNb => KindHyperparams::GaussianNb(self.gaussian_nb.clone()),
            ModelKind::LinearSvm => KindHyperparams::LinearSvm(self.linear_svm.clone()),
            ModelKind::Knn => KindHyperparams::Knn(self.knn.clone()),
            ModelKind::Mlp => KindHyperparams::Mlp(self.mlp.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Constant { label: u8 },
    Forest(Forest),
    Tree(DecisionTree),
    GaussianNb(GaussianNb),
    LinearSvm(LinearSvm),
    Knn(Knn),
    Mlp(Mlp),
}

/// A fitted classifier. Immutable after fitting; prediction is a pure function
/// of the stored state and the input row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub seed: u64,
    pub hyperparams: KindHyperparams,
    pub preprocessor: Preprocessor,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub model: TrainedModel,
    pub warnings: Vec<ModelWarning>,
}

fn check_dims(rows: &[Vec<f64>], expected: usize) -> Result<(), ModelError> {
    match rows.iter().position(|r| r.len() != expected) {
        Some(row) => Err(ModelError::DimensionMismatch { row, expected, found: rows[row].len() }),
        None => Ok(()),
    }
}

/// Fits one classifier kind. Training data with a single class yields a
/// constant predictor and a [`ModelWarning::SingleClassTraining`].
pub fn fit(kind: ModelKind, data: &FeatureMatrix, hp: &Hyperparams, seed: u64) -> Result<Fitted, ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyTraining);
    }
    check_dims(&data.rows, data.dim())?;
    let preprocessor = Preprocessor::fit(&data.rows, kind.standardizes());
    let x = preprocessor.transform(&data.rows);
    let y = &data.labels;
    let ones = y.iter().filter(|&&l| l == 1).count();
    let mut warnings = Vec::new();
    let params = if ones == 0 || ones == y.len() {
        let label = u8::from(ones > 0);
        warnings.push(ModelWarning::SingleClassTraining { label });
        ModelParams::Constant { label }
    } else {
        match kind {
            ModelKind::Forest => ModelParams::Forest(Forest::fit(&x, y, &hp.forest, seed)),
            ModelKind::Tree => {
                let rows: Vec<usize> = (0..x.len()).collect();
                let params = tree::GrowParams {
                    max_depth: hp.tree.max_depth,
                    min_leaf: hp.tree.min_leaf,
                    features_per_split: usize::MAX,
                };
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
                ModelParams::Tree(tree::grow_tree(&x, y, &rows, params, &mut rng))
            }
            ModelKind::GaussianNb => ModelParams::GaussianNb(GaussianNb::fit(&x, y, &hp.gaussian_nb)),
            ModelKind::LinearSvm => ModelParams::LinearSvm(LinearSvm::fit(&x, y, &hp.linear_svm, seed)),
            ModelKind::Knn => ModelParams::Knn(Knn { k: hp.knn.k, x, y: y.clone() }),
            ModelKind::Mlp => ModelParams::Mlp(Mlp::fit(&x, y, &hp.mlp, seed)),
        }
    };
    Ok(Fitted {
        model: TrainedModel { kind, seed, hyperparams: hp.for_kind(kind), preprocessor, params },
        warnings,
    })
}

/// CART on all features, no bootstrap.
pub fn fit_tree(data: &FeatureMatrix, hp: &TreeHyperparams, seed: u64) -> Result<Fitted, ModelError> {
    fit(ModelKind::Tree, data, &Hyperparams { tree: hp.clone(), ..Hyperparams::default() }, seed)
}

pub fn fit_random_forest(data: &FeatureMatrix, hp: &ForestHyperparams, seed: u64) -> Result<Fitted, ModelError> {
    fit(ModelKind::Forest, data, &Hyperparams { forest: hp.clone(), ..Hyperparams::default() }, seed)
}

const MODEL_FORMAT: &str = "unrest-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    model: T,
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.preprocessor.dim()
    }

    pub fn predict_row(&self, raw: &[f64]) -> u8 {
        let x = self.preprocessor.transform_row(raw);
        match &self.params {
            ModelParams::Constant { label } => *label,
            ModelParams::Forest(m) => m.predict_row(&x),
            ModelParams::Tree(m) => m.predict_row(&x),
            ModelParams::GaussianNb(m) => m.predict_row(&x),
            ModelParams::LinearSvm(m) => m.predict_row(&x),
            ModelParams::Knn(m) => m.predict_row(&x),
            ModelParams::Mlp(m) => m.predict_row(&x),
        }
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>, ModelError> {
        check_dims(rows, self.dim())?;
        Ok(rows.iter().map(|r| self.predict_row(r)).collect())
    }

    /// Self-describing JSON container: format tag, version, kind, seed,
    /// hyperparameters and fitted state. Floats round-trip exactly.
    pub fn to_json(&self) -> String {
        let envelope = Envelope { format: MODEL_FORMAT.to_string(), version: MODEL_VERSION, model: self };
        serde_json::to_string(&envelope).expect("model state is always serializable")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, ModelError> {
        let envelope: Envelope<TrainedModel> =
            serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if envelope.format != MODEL_FORMAT || envelope.version != MODEL_VERSION {
            return Err(ModelError::Format(format!(
                "unsupported container {} v{}",
                envelope.format, envelope.version
            )));
        }
        Ok(envelope.model)
    }
}

/// Convenience for `fit(...).model.predict(...)`.
pub fn predict(model: &TrainedModel, rows: &[Vec<f64>]) -> Result<Vec<u8>, ModelError> {
    model.predict(rows)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn matrix(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> FeatureMatrix {
        let d = rows[0].len();
        FeatureMatrix { rows, labels, column_names: (0..d).map(|j| format!("x{j}")).collect() }
    }

    /// Two noisy clusters in `d` dimensions, deterministic from `seed`.
    fn blobs(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = (i % 3 == 0) as u8;
            let shift = if label == 1 { 1.5 } else { -0.5 };
            rows.push((0..d).map(|_| shift + rng.random_range(-1.5..1.5)).collect());
            labels.push(label);
        }
        matrix(rows, labels)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini_impurity(&[1, 1, 0, 0]), Ok(0.5));
        assert_eq!(gini_impurity(&[1, 1, 1]), Ok(0.0));
        assert_eq!(gini_impurity(&[1, 0, 0, 0]), Ok(0.375));
        assert_eq!(gini_impurity(&[]), Err(ModelError::EmptySet));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.name().parse::<ModelKind>(), Ok(kind));
        }
        assert!("svm".parse::<ModelKind>().is_err());
    }

    #[test]
    fn standardize_examples() {
        let train = vec![vec![1.0, 4.0], vec![3.0, 4.0]];
        let out = standardize(&train, &train);
        assert_eq!(out, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        // a test row uses the training statistics, not its own
        assert_eq!(standardize(&train, &[vec![5.0, 4.0]]), vec![vec![3.0, 0.0]]);
    }

    #[test]
    fn median_imputation_uses_training_rows() {
        let train = vec![vec![1.0], vec![f64::NAN], vec![5.0], vec![3.0]];
        let pre = Preprocessor::fit(&train, false);
        assert_eq!(pre.medians, vec![3.0]);
        assert_eq!(pre.transform_row(&[f64::NAN]), vec![3.0]);
        let all_missing = Preprocessor::fit(&[vec![f64::NAN]], true);
        assert_eq!(all_missing.transform_row(&[f64::NAN]), vec![0.0]);
    }

    #[test]
    fn forest_with_one_full_tree_equals_tree() {
        let data = blobs(120, 5, 11);
        let forest_hp = ForestHyperparams { n_trees: 1, bootstrap: false, features_per_split: Some(5), ..Default::default() };
        let forest = fit_random_forest(&data, &forest_hp, 99).unwrap().model;
        let tree = fit_tree(&data, &TreeHyperparams::defaults(), 5).unwrap().model;
        let probe = blobs(300, 5, 12);
        assert_eq!(forest.predict(&probe.rows).unwrap(), tree.predict(&probe.rows).unwrap());
        assert_eq!(forest.predict(&data.rows).unwrap(), tree.predict(&data.rows).unwrap());
    }

    #[test]
    fn single_class_training_gives_constant_predictor() {
        let data = matrix(vec![vec![1.0], vec![2.0]], vec![1, 1]);
        for kind in ModelKind::ALL {
            let fitted = fit(kind, &data, &Hyperparams::default(), 0).unwrap();
            assert_eq!(fitted.warnings, vec![ModelWarning::SingleClassTraining { label: 1 }]);
            assert_eq!(fitted.model.kind, kind);
            assert_eq!(fitted.model.predict(&[vec![-100.0], vec![100.0]]).unwrap(), vec![1, 1]);
        }
    }

    #[test]
    fn empty_training_and_dimension_mismatch() {
        let empty = FeatureMatrix { rows: vec![], labels: vec![], column_names: vec!["a".into()] };
        assert_eq!(fit(ModelKind::Tree, &empty, &Hyperparams::default(), 0).unwrap_err(), ModelError::EmptyTraining);
        let model = fit(ModelKind::Knn, &blobs(20, 3, 1), &Hyperparams::default(), 0).unwrap().model;
        assert_eq!(
            model.predict(&[vec![0.0; 3], vec![0.0; 2]]).unwrap_err(),
            ModelError::DimensionMismatch { row: 1, expected: 3, found: 2 }
        );
    }

    #[test]
    fn knn_k1_is_exact_on_training_rows() {
        let data = blobs(60, 4, 3);
        let hp = Hyperparams { knn: KnnHyperparams { k: 1 }, ..Hyperparams::default() };
        let model = fit(ModelKind::Knn, &data, &hp, 0).unwrap().model;
        assert_eq!(model.predict(&data.rows).unwrap(), data.labels);
    }

    #[test]
    fn every_kind_is_deterministic_and_survives_serialization() {
        let data = blobs(90, 4, 21);
        let probe = blobs(50, 4, 22);
        for kind in ModelKind::ALL {
            let a = fit(kind, &data, &Hyperparams::default(), 7).unwrap().model;
            let b = fit(kind, &data, &Hyperparams::default(), 7).unwrap().model;
            assert_eq!(a, b, "{kind}");
            let json = a.to_json();
            assert_eq!(json, b.to_json());
            let loaded = TrainedModel::from_json(&json).unwrap();
            assert_eq!(loaded, a, "{kind}");
            assert_eq!(loaded.predict(&probe.rows).unwrap(), a.predict(&probe.rows).unwrap());
            let acc = a.predict(&probe.rows).unwrap().iter().zip(&probe.labels).filter(|(p, t)| p == t).count();
            assert!(acc as f64 / probe.len() as f64 > 0.7, "{kind} accuracy {acc}/{}", probe.len());
        }
        assert!(TrainedModel::from_json("{\"format\":\"other\",\"version\":1}").is_err());
    }

    #[test]
    fn forest_is_independent_of_thread_count() {
        let data = blobs(150, 6, 5);
        let hp = Hyperparams::default();
        let pool = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let one = pool(1).install(|| fit(ModelKind::Forest, &data, &hp, 13).unwrap().model);
        let four = pool(4).install(|| fit(ModelKind::Forest, &data, &hp, 13).unwrap().model);
        assert_eq!(one, four);
    }

    #[derive(Clone)]
    struct LinearUnit {
        w: Vec<f64>,
    }

    impl Differentiable for LinearUnit {
        fn parameters(&self) -> Vec<f64> {
            self.w.clone()
        }
        fn set_parameters(&mut self, p: &[f64]) {
            self.w = p.to_vec();
        }
        fn loss(&self, x: &[Vec<f64>], y: &[u8]) -> f64 {
            let r: f64 = x[0].iter().zip(&self.w).map(|(a, b)| a * b).sum::<f64>() - f64::from(y[0]);
            0.5 * r * r
        }
        fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[u8]) -> (f64, Vec<f64>) {
            let r: f64 = x[0].iter().zip(&self.w).map(|(a, b)| a * b).sum::<f64>() - f64::from(y[0]);
            (0.5 * r * r, x[0].iter().map(|v| r * v).collect())
        }
    }

    #[test]
    fn gradient_check_linear_unit_is_exact() {
        let unit = LinearUnit { w: vec![0.3, -1.2, 0.7] };
        let err = gradient_check(&unit, &[vec![1.5, 0.5, -2.0]], &[1], DEFAULT_STEP);
        assert!(err < 1e-6, "relative error {err}");
    }

    fn desk_sample(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y = (0..n).map(|i| (i % 2) as u8).collect();
        (x, y)
    }

    #[test]
    fn mlp_gradient_matches_finite_differences() {
        let (x, y) = desk_sample(32, 25, 17);
        let hp = MlpHyperparams::default();
        let mut net = Mlp::init(25, &hp, 4);
        let at_init = gradient_check(&net, &x, &y, DEFAULT_STEP);
        assert!(at_init < 1e-4, "init error {at_init}");
        for _ in 0..10 {
            net.step(&x, &y, hp.learning_rate);
        }
        let trained = gradient_check(&net, &x, &y, DEFAULT_STEP);
        assert!(trained < 1e-4, "after 10 steps error {trained}");
        // a coarse step is a negative control
        assert!(gradient_check(&net, &x, &y, 1e-1) > 1e-4);
    }

    proptest! {
        #[test]
        fn gini_is_bounded(labels in prop::collection::vec(0u8..=1, 1..200)) {
            let g = gini_impurity(&labels).unwrap();
            prop_assert!((0.0..=0.5).contains(&g));
            let pure = labels.iter().all(|&l| l == labels[0]);
            prop_assert_eq!(g == 0.0, pure);
        }

        #[test]
        fn nb_posteriors_sum_to_one(seed in 0u64..500, q in prop::collection::vec(-50.0f64..50.0, 3)) {
            let data = blobs(40, 3, seed);
            let pre = Preprocessor::fit(&data.rows, false);
            let nb = GaussianNb::fit(&pre.transform(&data.rows), &data.labels, &NbHyperparams::default());
            let [p0, p1] = nb.posterior(&q);
            prop_assert!((p0 + p1 - 1.0).abs() < 1e-12);
        }

        #[test]
        fn standardized_columns_are_centered(rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..60)) {
            let z = standardize(&rows, &rows);
            let n = rows.len() as f64;
            for j in 0..4 {
                let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                let spread = col.iter().cloned().fold(f64::MIN, f64::max) - col.iter().cloned().fold(f64::MAX, f64::min);
                if spread < 1e-6 {
                    continue;
                }
                let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
                let std = (z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!((std - 1.0).abs() < 1e-6);
            }
        }
    }
}
