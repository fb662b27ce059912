//! Five binary classifiers behind one fit/predict contract.
//!
//! All of them are implemented here from scratch; none wraps an external
//! learner. Randomized learners (forest, SVM) draw from ChaCha streams keyed
//! on the configured seed, so results do not depend on the thread count.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{FeatureMatrix, LabelVector};

pub mod forest;
pub mod knn;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

pub use forest::ForestParams;
pub use knn::KnnParams;
pub use naive_bayes::NaiveBayesParams;
pub use svm::SvmParams;
pub use tree::TreeParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("invalid hyperparameter for {kind}: {message}")]
    InvalidHyperparameter { kind: &'static str, message: String },
    #[error("training matrix is empty")]
    Empty,
    #[error("{kind} needs both classes in the training labels")]
    SingleClass { kind: &'static str },
    #[error("{features} feature rows but {labels} labels")]
    LabelMismatch { features: usize, labels: usize },
    #[error("columns {found:?} do not match training columns {expected:?}")]
    ColumnMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
}

/// Classifier kind plus its hyperparameters, tagged by `kind` in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Knn(KnnParams),
    NaiveBayes(NaiveBayesParams),
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    Svm(SvmParams),
}

impl ClassifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Knn(_) => "knn",
            ClassifierSpec::NaiveBayes(_) => "naive_bayes",
            ClassifierSpec::DecisionTree(_) => "decision_tree",
            ClassifierSpec::RandomForest(_) => "random_forest",
            ClassifierSpec::Svm(_) => "svm",
        }
    }

    /// Seed driving the learner's randomness; 0 for deterministic learners.
    pub fn seed(&self) -> u64 {
        match self {
            ClassifierSpec::RandomForest(p) => p.seed,
            ClassifierSpec::Svm(p) => p.seed,
            _ => 0,
        }
    }

    /// The five learners with their default settings.
    pub fn defaults() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::RandomForest(ForestParams::default()),
            ClassifierSpec::DecisionTree(TreeParams::default()),
            ClassifierSpec::NaiveBayes(NaiveBayesParams::default()),
            ClassifierSpec::Svm(SvmParams::default()),
            ClassifierSpec::Knn(KnnParams::default()),
        ]
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |message: String| {
            Err(ClassifierError::InvalidHyperparameter {
                kind: self.name(),
                message,
            })
        };
        match self {
            ClassifierSpec::Knn(p) if p.k == 0 => bad("k must be at least 1".into()),
            ClassifierSpec::NaiveBayes(p) if !(p.var_floor > 0.0 && p.var_floor.is_finite()) => {
                bad(format!("var_floor must be positive, got {}", p.var_floor))
            }
            ClassifierSpec::DecisionTree(p) => p.validate().or_else(bad),
            ClassifierSpec::RandomForest(p) => {
                if p.n_trees == 0 {
                    bad("n_trees must be at least 1".into())
                } else {
                    p.tree().validate().or_else(bad)
                }
            }
            ClassifierSpec::Svm(p) if p.epochs == 0 => bad("epochs must be at least 1".into()),
            ClassifierSpec::Svm(p) if !(p.lambda > 0.0 && p.lambda.is_finite()) => {
                bad(format!("lambda must be positive, got {}", p.lambda))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnedParameters {
    Knn(knn::KnnModel),
    NaiveBayes(naive_bayes::NaiveBayesModel),
    DecisionTree(tree::Tree),
    RandomForest(forest::Forest),
    Svm(svm::SvmModel),
}

/// Format version written alongside serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub spec: ClassifierSpec,
    pub parameters: LearnedParameters,
    pub training_columns: Vec<String>,
    pub train_time_s: f64,
}

impl TrainedModel {
    pub fn name(&self) -> &'static str {
        self.spec.name()
    }
}

/// Trains `spec` on `(x, y)` and records the wall time.
pub fn fit(
    spec: &ClassifierSpec,
    x: &FeatureMatrix,
    y: &LabelVector,
) -> Result<TrainedModel, ClassifierError> {
    spec.validate()?;
    if x.n_rows() == 0 || x.n_cols() == 0 {
        return Err(ClassifierError::Empty);
    }
    if x.n_rows() != y.len() {
        return Err(ClassifierError::LabelMismatch {
            features: x.n_rows(),
            labels: y.len(),
        });
    }
    let counts = y.class_counts();
    let one_class = counts[0] == 0 || counts[1] == 0;
    if one_class && !matches!(spec, ClassifierSpec::Knn(_)) {
        return Err(ClassifierError::SingleClass { kind: spec.name() });
    }

    let start = Instant::now();
    let parameters = match spec {
        ClassifierSpec::Knn(p) => LearnedParameters::Knn(knn::fit(p, x, y)),
        ClassifierSpec::NaiveBayes(p) => LearnedParameters::NaiveBayes(naive_bayes::fit(p, x, y)),
        ClassifierSpec::DecisionTree(p) => LearnedParameters::DecisionTree(tree::fit(p, x, y)),
        ClassifierSpec::RandomForest(p) => LearnedParameters::RandomForest(forest::fit(p, x, y)),
        ClassifierSpec::Svm(p) => LearnedParameters::Svm(svm::fit(p, x, y)),
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        parameters,
        training_columns: x.column_names().to_vec(),
        train_time_s: start.elapsed().as_secs_f64(),
    })
}

/// One label per row of `x`.
pub fn predict(model: &TrainedModel, x: &FeatureMatrix) -> Result<LabelVector, ClassifierError> {
    if x.column_names() != model.training_columns.as_slice() {
        return Err(ClassifierError::ColumnMismatch {
            expected: model.training_columns.clone(),
            found: x.column_names().to_vec(),
        });
    }
    let labels = match &model.parameters {
        LearnedParameters::Knn(m) => m.predict(x),
        LearnedParameters::NaiveBayes(m) => m.predict(x),
        LearnedParameters::DecisionTree(m) => m.predict(x),
        LearnedParameters::RandomForest(m) => m.predict(x),
        LearnedParameters::Svm(m) => m.predict(x),
    };
    Ok(LabelVector::new(labels).expect("classifiers emit only 0/1"))
}

/// Majority of a two-class tally; ties go to label 0.
pub(crate) fn majority(ones: usize, total: usize) -> u8 {
    u8::from(2 * ones > total)
}
