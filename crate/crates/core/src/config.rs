//! TOML pipeline configuration.
//!
//! Every section is optional and falls back to the UNSW-NB15 defaults;
//! unknown keys anywhere are rejected.
//!
//! ```toml
//! output_dir = "out"
//! configurations = ["baseline", "pcc_only", "lsm_only", "pcc_lsm"]
//!
//! [dataset]
//! path = "data/UNSW_NB15_training-set.csv"
//! sha256 = "..."            # optional, verified before loading
//!
//! [sample]                  # optional desk-scale run
//! rows = 10000
//! seed = 42
//!
//! [selection]
//! threshold = 0.85
//!
//! [split]
//! test_fraction = 0.3
//! seed = 42
//!
//! [[classifiers]]
//! kind = "knn"
//! k = 5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{ClassifierError, ClassifierSpec};
use crate::dataset::{Categorical, PrepareOptions};
use crate::evaluation::ConfigTag;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub configurations: Vec<ConfigTag>,
    pub dataset: DatasetConfig,
    pub sample: Option<SampleConfig>,
    pub selection: SelectionConfig,
    pub split: SplitConfig,
    pub evaluation: EvaluationConfig,
    pub classifiers: Vec<ClassifierSpec>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("out"),
            configurations: ConfigTag::ALL.to_vec(),
            dataset: DatasetConfig::default(),
            sample: None,
            selection: SelectionConfig::default(),
            split: SplitConfig::default(),
            evaluation: EvaluationConfig::default(),
            classifiers: ClassifierSpec::defaults(),
        }
    }
}

/// Input table. Exactly one of `path` and `surrogate` is used; a
/// configured surrogate wins over the default path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: Option<PathBuf>,
    /// Lowercase hex digest the file must match.
    pub sha256: Option<String>,
    /// Generate a synthetic table with the UNSW-NB15 layout instead of
    /// reading a file.
    pub surrogate: Option<SurrogateConfig>,
    pub drop_columns: Vec<String>,
    pub label_column: String,
    pub category_column: Option<String>,
    /// Names of nominal columns; inferred from the first data row when absent.
    pub categorical: Option<Vec<String>>,
    /// Min-max scale every feature to [0, 1] after encoding.
    pub normalize: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        let unsw = PrepareOptions::unsw_nb15();
        Self {
            path: Some(PathBuf::from("data/UNSW_NB15_training-set.csv")),
            sha256: None,
            surrogate: None,
            drop_columns: unsw.drop_columns,
            label_column: unsw.label_column,
            category_column: unsw.category_column,
            categorical: None,
            normalize: false,
        }
    }
}

impl DatasetConfig {
    pub fn prepare_options(&self) -> PrepareOptions {
        PrepareOptions {
            drop_columns: self.drop_columns.clone(),
            label_column: self.label_column.clone(),
            category_column: self.category_column.clone(),
            categorical: match &self.categorical {
                Some(names) => Categorical::Named(names.clone()),
                None => Categorical::Infer,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateConfig {
    pub rows: usize,
    pub seed: u64,
}

/// Stratified row sample drawn before any other stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub rows: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub threshold: f64,
    /// Leave integer-encoded nominal columns out of the correlation scan
    /// and drop them from the selected set.
    pub drop_nominal: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            threshold: 0.85,
            drop_nominal: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_fraction: 0.3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Each timed section runs this many times; the median is reported.
    pub timing_repeats: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { timing_repeats: 3 }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: PipelineConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let t = self.selection.threshold;
        if !(t > 0.0 && t <= 1.0) {
            return invalid(format!("selection.threshold {t} is outside (0, 1]"));
        }
        let f = self.split.test_fraction;
        if !(f > 0.0 && f < 1.0) {
            return invalid(format!("split.test_fraction {f} is outside (0, 1)"));
        }
        if self.evaluation.timing_repeats == 0 {
            return invalid("evaluation.timing_repeats must be at least 1".into());
        }
        if self.configurations.is_empty() {
            return invalid("configurations is empty".into());
        }
        for (i, tag) in self.configurations.iter().enumerate() {
            if self.configurations[..i].contains(tag) {
                return invalid(format!("configuration {tag} listed twice"));
            }
        }
        if self.classifiers.is_empty() {
            return invalid("classifiers is empty".into());
        }
        for (i, spec) in self.classifiers.iter().enumerate() {
            spec.validate()?;
            if self.classifiers[..i].iter().any(|s| s.name() == spec.name()) {
                return invalid(format!("classifier {} listed twice", spec.name()));
            }
        }
        if self.dataset.path.is_none() && self.dataset.surrogate.is_none() {
            return invalid("dataset needs either path or surrogate".into());
        }
        if let Some(h) = &self.dataset.sha256 {
            if h.len() != 64 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
                return invalid(format!("dataset.sha256 {h:?} is not a 64-digit hex string"));
            }
        }
        if let Some(s) = &self.sample {
            if s.rows < 4 {
                return invalid(format!("sample.rows {} is too small to stratify", s.rows));
            }
        }
        Ok(())
    }

    /// Applies a single seed to every seeded stage.
    pub fn override_seed(&mut self, seed: u64) {
        self.split.seed = seed;
        if let Some(s) = &mut self.sample {
            s.seed = seed;
        }
        for spec in &mut self.classifiers {
            match spec {
                ClassifierSpec::RandomForest(p) => p.seed = seed,
                ClassifierSpec::Svm(p) => p.seed = seed,
                _ => {}
            }
        }
    }
}
