//! Confusion counts, detection metrics and timed classifier runs.
//!
//! Attack (label 1) is the positive class throughout.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{self, ClassifierError, ClassifierSpec};
use crate::dataset::{FeatureMatrix, LabelVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvaluationError {
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no classifiers requested")]
    NoClassifiers,
    #[error("timing repeats must be at least 1")]
    NoRepeats,
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("reports are not comparable: {0}")]
    Incomparable(String),
    #[error("{classifier}: accuracy {accuracy} disagrees with class-weighted recall/specificity {expected}")]
    Inconsistent {
        classifier: String,
        accuracy: f64,
        expected: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    /// Counts with the roles of the two classes exchanged.
    pub fn swapped(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tn,
            fn_: self.fp,
            fp: self.fn_,
            tn: self.tp,
        }
    }
}

pub fn confusion(y_true: &LabelVector, y_pred: &LabelVector) -> Result<ConfusionCounts, EvaluationError> {
    if y_true.len() != y_pred.len() {
        return Err(EvaluationError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut c = ConfusionCounts::default();
    for (&t, &p) in y_true.as_slice().iter().zip(y_pred.as_slice()) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (1, _) => c.fn_ += 1,
            (_, 1) => c.fp += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

/// Detection metrics. `None` marks a 0/0 ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub specificity: Option<f64>,
    pub f_score: Option<f64>,
    pub accuracy: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let recall = ratio(c.tp, c.tp + c.fn_);
    let precision = ratio(c.tp, c.tp + c.fp);
    let f_score = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Metrics {
        recall,
        precision,
        specificity: ratio(c.tn, c.tn + c.fp),
        f_score,
        accuracy: ratio(c.tp + c.tn, c.total()),
    }
}

/// Which pipeline variant produced the data a report was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigTag {
    /// All features, original values.
    Baseline,
    /// Correlation-selected features, original values.
    PccOnly,
    /// All features, distorted.
    LsmOnly,
    /// Correlation-selected features, distorted.
    PccLsm,
}

impl ConfigTag {
    pub const ALL: [ConfigTag; 4] = [
        ConfigTag::Baseline,
        ConfigTag::PccOnly,
        ConfigTag::LsmOnly,
        ConfigTag::PccLsm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConfigTag::Baseline => "baseline",
            ConfigTag::PccOnly => "pcc_only",
            ConfigTag::LsmOnly => "lsm_only",
            ConfigTag::PccLsm => "pcc_lsm",
        }
    }

    pub fn selects(&self) -> bool {
        matches!(self, ConfigTag::PccOnly | ConfigTag::PccLsm)
    }

    pub fn distorts(&self) -> bool {
        matches!(self, ConfigTag::LsmOnly | ConfigTag::PccLsm)
    }
}

impl fmt::Display for ConfigTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: String,
    pub spec: ClassifierSpec,
    pub confusion: ConfusionCounts,
    pub metrics: Metrics,
    /// Median over the timing repeats.
    pub train_time_s: f64,
    /// Median over the timing repeats.
    pub test_time_s: f64,
}

impl ClassifierResult {
    pub fn total_time_s(&self) -> f64 {
        self.train_time_s + self.test_time_s
    }

    /// Accuracy must equal `(recall * P + specificity * N) / (P + N)`.
    pub fn check_consistency(&self) -> Result<(), EvaluationError> {
        let c = &self.confusion;
        let (Some(acc), Some(r), Some(s)) =
            (self.metrics.accuracy, self.metrics.recall, self.metrics.specificity)
        else {
            return Ok(());
        };
        let pos = (c.tp + c.fn_) as f64;
        let neg = (c.tn + c.fp) as f64;
        let expected = (r * pos + s * neg) / (pos + neg);
        if (expected - acc).abs() > 1e-12 {
            return Err(EvaluationError::Inconsistent {
                classifier: self.classifier.clone(),
                accuracy: acc,
                expected,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub configuration: ConfigTag,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub timing_repeats: usize,
    pub results: Vec<ClassifierResult>,
}

impl EvaluationReport {
    pub fn result(&self, classifier: &str) -> Option<&ClassifierResult> {
        self.results.iter().find(|r| r.classifier == classifier)
    }

    pub const CSV_HEADER: [&'static str; 14] = [
        "configuration",
        "classifier",
        "tp",
        "fn",
        "fp",
        "tn",
        "recall",
        "precision",
        "specificity",
        "f_score",
        "accuracy",
        "train_time_s",
        "test_time_s",
        "n_features",
    ];

    /// One row per classifier; undefined metrics are written as `NA`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        self.results
            .iter()
            .map(|r| {
                vec![
                    self.configuration.to_string(),
                    r.classifier.clone(),
                    r.confusion.tp.to_string(),
                    r.confusion.fn_.to_string(),
                    r.confusion.fp.to_string(),
                    r.confusion.tn.to_string(),
                    opt(r.metrics.recall),
                    opt(r.metrics.precision),
                    opt(r.metrics.specificity),
                    opt(r.metrics.f_score),
                    opt(r.metrics.accuracy),
                    r.train_time_s.to_string(),
                    r.test_time_s.to_string(),
                    self.n_features.to_string(),
                ]
            })
            .collect()
    }
}

pub(crate) fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Fits and scores every spec, timing fit and predict separately.
///
/// Each classifier is trained and queried `timing_repeats` times and the
/// median wall time is reported; the repeats are identical by construction,
/// so the first run's predictions are scored.
pub fn run_configuration(
    tag: ConfigTag,
    x_train: &FeatureMatrix,
    y_train: &LabelVector,
    x_test: &FeatureMatrix,
    y_test: &LabelVector,
    specs: &[ClassifierSpec],
    timing_repeats: usize,
) -> Result<EvaluationReport, EvaluationError> {
    if specs.is_empty() {
        return Err(EvaluationError::NoClassifiers);
    }
    if timing_repeats == 0 {
        return Err(EvaluationError::NoRepeats);
    }
    let mut results = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut train_times = Vec::with_capacity(timing_repeats);
        let mut test_times = Vec::with_capacity(timing_repeats);
        let mut predictions = None;
        for _ in 0..timing_repeats {
            let model = classifiers::fit(spec, x_train, y_train)?;
            train_times.push(model.train_time_s);
            let start = Instant::now();
            let pred = classifiers::predict(&model, x_test)?;
            test_times.push(start.elapsed().as_secs_f64());
            predictions.get_or_insert(pred);
        }
        let confusion = confusion(y_test, &predictions.expect("at least one repeat"))?;
        let result = ClassifierResult {
            classifier: spec.name().to_string(),
            spec: spec.clone(),
            confusion,
            metrics: metrics(&confusion),
            train_time_s: median(train_times),
            test_time_s: median(test_times),
        };
        result.check_consistency()?;
        results.push(result);
    }
    Ok(EvaluationReport {
        configuration: tag,
        n_train: x_train.n_rows(),
        n_test: x_test.n_rows(),
        n_features: x_train.n_cols(),
        timing_repeats,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyDelta {
    pub classifier: String,
    pub before: Option<f64>,
    pub after: Option<f64>,
    /// `after - before`.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityComparison {
    pub before: ConfigTag,
    pub after: ConfigTag,
    pub deltas: Vec<AccuracyDelta>,
    pub max_abs_delta: Option<f64>,
}

/// Per-classifier accuracy change between two reports over the same
/// classifiers and test split.
pub fn compare_utility(
    before: &EvaluationReport,
    after: &EvaluationReport,
) -> Result<UtilityComparison, EvaluationError> {
    let names = |r: &EvaluationReport| -> Vec<String> {
        r.results.iter().map(|c| c.classifier.clone()).collect()
    };
    if names(before) != names(after) {
        return Err(EvaluationError::Incomparable(format!(
            "classifiers {:?} vs {:?}",
            names(before),
            names(after)
        )));
    }
    if before.n_test != after.n_test {
        return Err(EvaluationError::Incomparable(format!(
            "test sizes {} vs {}",
            before.n_test, after.n_test
        )));
    }
    let deltas: Vec<AccuracyDelta> = before
        .results
        .iter()
        .zip(&after.results)
        .map(|(b, a)| {
            let (before, after) = (b.metrics.accuracy, a.metrics.accuracy);
            AccuracyDelta {
                classifier: b.classifier.clone(),
                before,
                after,
                delta: before.zip(after).map(|(b, a)| a - b),
            }
        })
        .collect();
    let max_abs_delta = deltas
        .iter()
        .filter_map(|d| d.delta)
        .map(f64::abs)
        .reduce(f64::max);
    Ok(UtilityComparison {
        before: before.configuration,
        after: after.configuration,
        deltas,
        max_abs_delta,
    })
}
