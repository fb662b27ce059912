//! Config-driven runs: select, distort, evaluate, or all three.
//!
//! Every run writes `manifest.json` first with status `incomplete`, then
//! rewrites it as `complete` (or `failed`) once the outputs are written and
//! read back. A killed run therefore leaves an `incomplete` manifest.
//!
//! | file | written by |
//! |---|---|
//! | `correlation.csv`, `ranking.csv`, `selection.json` | select, pipeline |
//! | `distorted_<tag>.csv`, `model_<tag>.json`, `timings.json` | distort, pipeline |
//! | `privacy_<tag>.json`, `privacy.csv`, `evaluation_<tag>.json`, `evaluation.csv`, `utility.json` | evaluate, pipeline |
//!
//! Fields whose key ends in `time_s` (JSON) or columns named `Time` or
//! ending in `time_s` (CSV) hold wall-clock measurements; everything else
//! is a pure function of the config.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifiers::ClassifierError;
use crate::config::{ConfigError, PipelineConfig};
use crate::dataset::{
    load_csv_from_reader, min_max_scale, prepare, stratified_indices, stratified_sample,
    DatasetError, FeatureMatrix, LabelVector, Schema, SplitIndices,
};
use crate::distortion::{distort, Distortion, DistortionError};
use crate::evaluation::{
    compare_utility, median, run_configuration, ConfigTag, EvaluationError, EvaluationReport,
    UtilityComparison,
};
use crate::feature_selection::{
    apply_selection, correlation_matrix, select_excluding, CorrelationMatrix, SelectionError,
    SelectionReport,
};
use crate::privacy_metrics::{privacy_report, PrivacyError, PrivacyReport};
use crate::{par, unsw};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("dataset not found at {}\n\n{}", .0.display(), unsw::ACQUISITION)]
    MissingDataset(PathBuf),
    #[error("{path}: sha256 is {found}, config expects {expected}")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Distortion(#[from] DistortionError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("output {path} failed validation: {reason}")]
    Validation { path: PathBuf, reason: String },
}

impl PipelineError {
    /// 1 usage/config error, 2 data or I/O error, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Usage(_) => 1,
            PipelineError::Evaluation(EvaluationError::Classifier(
                ClassifierError::InvalidHyperparameter { .. },
            )) => 1,
            PipelineError::Selection(SelectionError::BadThreshold(_)) => 1,
            PipelineError::Selection(SelectionError::Undefined)
            | PipelineError::Distortion(
                DistortionError::Singular { .. } | DistortionError::NonFinite(_),
            )
            | PipelineError::Privacy(_)
            | PipelineError::Evaluation(EvaluationError::Inconsistent { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Select,
    Distort,
    Evaluate,
    Pipeline,
}

impl Command {
    fn selects(self) -> bool {
        matches!(self, Command::Select | Command::Pipeline)
    }

    fn distorts(self) -> bool {
        matches!(self, Command::Distort | Command::Pipeline)
    }

    fn evaluates(self) -> bool {
        matches!(self, Command::Evaluate | Command::Pipeline)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Incomplete,
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    /// Digest of the input file; absent for generated tables.
    pub sha256: Option<String>,
    pub rows: usize,
    pub features: usize,
    pub nominal_columns: Vec<String>,
    pub class_counts: [usize; 2],
    /// Rows used after sampling.
    pub rows_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Effective config with every default filled in.
    pub config: PipelineConfig,
    pub parallel: bool,
    pub threads: usize,
    pub dataset: Option<DatasetInfo>,
    pub split: Option<SplitSizes>,
    pub stage_time_s: BTreeMap<String, f64>,
    pub total_time_s: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub test: usize,
}

/// Measured distortion runs for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionTiming {
    pub runs_time_s: Vec<f64>,
    pub median_time_s: f64,
}

/// One configuration's data after selection and distortion.
struct Variant {
    tag: ConfigTag,
    matrix: FeatureMatrix,
    /// Undistorted counterpart, for the privacy measures.
    original: Option<FeatureMatrix>,
    distortion: Option<(Distortion, DistortionTiming)>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub outputs: Vec<PathBuf>,
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), PipelineError> {
        let path = self.path(name);
        fs::write(&path, data).map_err(|source| PipelineError::Output {
            path: path.clone(),
            source,
        })?;
        if !self.written.contains(&path) {
            self.written.push(path);
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    fn csv<H, R>(&mut self, name: &str, header: H, rows: R) -> Result<(), PipelineError>
    where
        H: IntoIterator,
        H::Item: AsRef<[u8]>,
        R: IntoIterator,
        R::Item: IntoIterator,
        <R::Item as IntoIterator>::Item: AsRef<[u8]>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| PipelineError::Output {
            path: self.path(name),
            source: io::Error::other(e),
        };
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let data = w.into_inner().map_err(|e| PipelineError::Output {
            path: self.path(name),
            source: e.into_error(),
        })?;
        self.bytes(name, &data)
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

struct Loaded {
    features: FeatureMatrix,
    labels: LabelVector,
    nominal: Vec<String>,
    info: DatasetInfo,
}

fn load(config: &PipelineConfig) -> Result<Loaded, PipelineError> {
    let ds = &config.dataset;
    let (table, source, sha256) = match (&ds.surrogate, &ds.path) {
        (Some(s), _) => (
            unsw::surrogate(s.rows, s.seed),
            format!("surrogate(rows={}, seed={})", s.rows, s.seed),
            None,
        ),
        (None, Some(path)) => {
            if !path.is_file() {
                return Err(PipelineError::MissingDataset(path.clone()));
            }
            let bytes = fs::read(path).map_err(|source| DatasetError::Io {
                path: path.clone(),
                source,
            })?;
            let digest = sha256_hex(&bytes);
            if let Some(expected) = &ds.sha256 {
                if !expected.eq_ignore_ascii_case(&digest) {
                    return Err(PipelineError::HashMismatch {
                        path: path.clone(),
                        expected: expected.clone(),
                        found: digest,
                    });
                }
            }
            let table = load_csv_from_reader(bytes.as_slice(), path, &Schema::Infer)?;
            (table, path.display().to_string(), Some(digest))
        }
        (None, None) => return Err(PipelineError::Usage("dataset has no path".into())),
    };
    let prepared = prepare(&table, &ds.prepare_options())?;
    let rows = prepared.labels.len();
    let mut features = prepared.features;
    let mut labels = prepared.labels;
    if let Some(s) = &config.sample {
        let idx = stratified_sample(&labels, s.rows, s.seed)?;
        features = features.select_rows(&idx);
        labels = labels.select(&idx);
    }
    if ds.normalize {
        features = min_max_scale(&features);
    }
    let nominal: Vec<String> = prepared
        .encoding
        .columns
        .iter()
        .map(|(name, _)| name.clone())
        .collect();
    let info = DatasetInfo {
        source,
        sha256,
        rows,
        features: features.n_cols(),
        nominal_columns: nominal.clone(),
        class_counts: labels.class_counts(),
        rows_used: labels.len(),
    };
    Ok(Loaded {
        features,
        labels,
        nominal,
        info,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

fn correlation_rows(c: &CorrelationMatrix) -> Vec<Vec<String>> {
    (0..c.dim())
        .map(|i| {
            std::iter::once(c.column_names()[i].clone())
                .chain((0..c.dim()).map(|j| fmt_opt(c.get(i, j))))
                .collect()
        })
        .collect()
}

fn matrix_rows(x: &FeatureMatrix) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..x.n_rows()).map(|i| x.row(i).iter().map(|v| v.to_string()).collect())
}

fn build_variant(
    tag: ConfigTag,
    all: &FeatureMatrix,
    labels: &LabelVector,
    selection: &SelectionReport,
    timing_repeats: usize,
) -> Result<Variant, PipelineError> {
    let base = if tag.selects() {
        apply_selection(all, selection)?
    } else {
        all.clone()
    };
    if !tag.distorts() {
        return Ok(Variant {
            tag,
            matrix: base,
            original: None,
            distortion: None,
        });
    }
    let mut runs = Vec::with_capacity(timing_repeats);
    let mut first: Option<Distortion> = None;
    for _ in 0..timing_repeats {
        let d = distort(&base, labels)?;
        runs.push(d.elapsed.as_secs_f64());
        first.get_or_insert(d);
    }
    let d = first.expect("timing_repeats >= 1");
    let timing = DistortionTiming {
        median_time_s: median(runs.clone()),
        runs_time_s: runs,
    };
    Ok(Variant {
        tag,
        matrix: d.matrix.matrix().clone(),
        original: Some(base),
        distortion: Some((d, timing)),
    })
}

fn execute(
    command: Command,
    config: &PipelineConfig,
    manifest: &mut Manifest,
    out: &mut Writer,
) -> Result<(), PipelineError> {
    let repeats = config.evaluation.timing_repeats;
    let stage = |name: &str, start: Instant, m: &mut Manifest| {
        m.stage_time_s
            .insert(name.to_string(), start.elapsed().as_secs_f64());
    };

    let t = Instant::now();
    let data = load(config)?;
    manifest.dataset = Some(data.info.clone());
    stage("load", t, manifest);

    let t = Instant::now();
    let corr = correlation_matrix(&data.features)?;
    let nominal: &[String] = if config.selection.drop_nominal {
        &data.nominal
    } else {
        &[]
    };
    let selection = select_excluding(&corr, config.selection.threshold, nominal)?;
    stage("select", t, manifest);
    if command.selects() {
        let header: Vec<String> = std::iter::once("feature".to_string())
            .chain(corr.column_names().iter().cloned())
            .collect();
        out.csv("correlation.csv", header, correlation_rows(&corr))?;
        out.csv(
            "ranking.csv",
            ["rank", "feature", "mean_abs_pcc"],
            selection
                .ranking
                .iter()
                .enumerate()
                .map(|(i, s)| vec![(i + 1).to_string(), s.name.clone(), fmt_opt(s.score)]),
        )?;
        out.json("selection.json", &selection)?;
    }
    if command == Command::Select {
        return Ok(());
    }

    let tags: Vec<ConfigTag> = if command == Command::Distort {
        config
            .configurations
            .iter()
            .copied()
            .filter(ConfigTag::distorts)
            .collect()
    } else {
        config.configurations.clone()
    };
    if tags.is_empty() {
        return Err(PipelineError::Usage(
            "distort needs lsm_only or pcc_lsm among the configurations".into(),
        ));
    }

    let t = Instant::now();
    let variants = tags
        .iter()
        .map(|&tag| build_variant(tag, &data.features, &data.labels, &selection, repeats))
        .collect::<Result<Vec<_>, _>>()?;
    stage("distort", t, manifest);

    if command.distorts() {
        let mut timings = BTreeMap::new();
        for v in &variants {
            if let Some((d, timing)) = &v.distortion {
                let m = d.matrix.matrix();
                out.csv(
                    &format!("distorted_{}.csv", v.tag),
                    m.column_names(),
                    matrix_rows(m),
                )?;
                out.json(&format!("model_{}.json", v.tag), &d.model)?;
                timings.insert(v.tag.to_string(), timing.clone());
            }
        }
        out.json(
            "timings.json",
            &BTreeMap::from([("distortion_time_s", timings)]),
        )?;
    }
    if !command.evaluates() {
        return Ok(());
    }

    let t = Instant::now();
    let mut privacy: Vec<(ConfigTag, PrivacyReport)> = Vec::new();
    for v in &variants {
        if let (Some(original), Some((_, timing))) = (&v.original, &v.distortion) {
            let report = privacy_report(original, &v.matrix, timing.median_time_s)?;
            out.json(&format!("privacy_{}.json", v.tag), &report)?;
            privacy.push((v.tag, report));
        }
    }
    if !privacy.is_empty() {
        let header = std::iter::once("configuration").chain(PrivacyReport::CSV_HEADER);
        out.csv(
            "privacy.csv",
            header,
            privacy.iter().map(|(tag, r)| {
                std::iter::once(tag.to_string())
                    .chain(r.csv_row())
                    .collect::<Vec<_>>()
            }),
        )?;
    }
    stage("privacy", t, manifest);

    let t = Instant::now();
    let split = stratified_indices(&data.labels, config.split.test_fraction, config.split.seed)?;
    manifest.split = Some(SplitSizes {
        train: split.train.len(),
        test: split.test.len(),
    });
    let reports = variants
        .iter()
        .map(|v| evaluate_variant(v, &data.labels, &split, config))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        out.json(&format!("evaluation_{}.json", r.configuration), r)?;
    }
    out.csv(
        "evaluation.csv",
        EvaluationReport::CSV_HEADER,
        reports.iter().flat_map(EvaluationReport::csv_rows),
    )?;
    let comparisons: Vec<UtilityComparison> = match reports
        .iter()
        .find(|r| r.configuration == ConfigTag::Baseline)
    {
        Some(base) => reports
            .iter()
            .filter(|r| r.configuration != ConfigTag::Baseline)
            .map(|r| compare_utility(base, r))
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    out.json("utility.json", &comparisons)?;
    stage("evaluate", t, manifest);
    Ok(())
}

fn evaluate_variant(
    v: &Variant,
    labels: &LabelVector,
    split: &SplitIndices,
    config: &PipelineConfig,
) -> Result<EvaluationReport, PipelineError> {
    let report = run_configuration(
        v.tag,
        &v.matrix.select_rows(&split.train),
        &labels.select(&split.train),
        &v.matrix.select_rows(&split.test),
        &labels.select(&split.test),
        &config.classifiers,
        config.evaluation.timing_repeats,
    )?;
    Ok(report)
}

/// Re-reads every output: JSON must parse, CSV must be rectangular with at
/// least one data row.
fn validate_outputs(paths: &[PathBuf]) -> Result<(), PipelineError> {
    for path in paths {
        let fail = |reason: String| PipelineError::Validation {
            path: path.clone(),
            reason,
        };
        let bytes = fs::read(path).map_err(|e| fail(e.to_string()))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                serde_json::from_slice::<serde_json::Value>(&bytes)
                    .map_err(|e| fail(e.to_string()))?;
            }
            Some("csv") => {
                let mut r = csv::Reader::from_reader(bytes.as_slice());
                let width = r.headers().map_err(|e| fail(e.to_string()))?.len();
                let mut rows = 0;
                for rec in r.records() {
                    let rec = rec.map_err(|e| fail(e.to_string()))?;
                    if rec.len() != width {
                        return Err(fail(format!("row {} has {} fields", rows + 1, rec.len())));
                    }
                    rows += 1;
                }
                if rows == 0 {
                    return Err(fail("no data rows".into()));
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), PipelineError> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|source| PipelineError::Output { path, source })
}

/// Runs `command` with `config`, writing into `config.output_dir`.
pub fn run(command: Command, config: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    config.validate()?;
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|source| PipelineError::Output {
        path: dir.clone(),
        source,
    })?;
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        status: RunStatus::Incomplete,
        error: None,
        config: config.clone(),
        parallel: par::is_parallel(),
        threads: par::threads(),
        dataset: None,
        split: None,
        stage_time_s: BTreeMap::new(),
        total_time_s: 0.0,
        outputs: Vec::new(),
    };
    write_manifest(&dir, &manifest)?;

    let start = Instant::now();
    let mut out = Writer {
        dir: dir.clone(),
        written: Vec::new(),
    };
    let result =
        execute(command, config, &mut manifest, &mut out).and_then(|()| validate_outputs(&out.written));
    manifest.total_time_s = start.elapsed().as_secs_f64();
    manifest.outputs = out
        .written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    match result {
        Ok(()) => {
            manifest.status = RunStatus::Complete;
            write_manifest(&dir, &manifest)?;
            Ok(RunOutcome {
                manifest,
                outputs: out.written,
            })
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            // The original error matters more than a failed manifest write.
            let _ = write_manifest(&dir, &manifest);
            Err(e)
        }
    }
}

/// Whether a JSON key or CSV column holds a wall-clock measurement.
pub fn is_timing_field(name: &str) -> bool {
    name == "Time" || name.ends_with("time_s")
}

/// Removes timing fields from a JSON value, recursively.
pub fn strip_timing_json(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| !is_timing_field(k));
            map.values_mut().for_each(strip_timing_json);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing_json),
        _ => {}
    }
}

/// Output file contents with timing fields removed, for comparing runs.
pub fn timing_free_contents(path: &Path) -> io::Result<String> {
    let bytes = fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes)?;
            strip_timing_json(&mut v);
            Ok(v.to_string())
        }
        Some("csv") => {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let header = r.headers().map_err(io::Error::other)?.clone();
            let keep: Vec<usize> = (0..header.len())
                .filter(|&i| !is_timing_field(&header[i]))
                .collect();
            let mut text = String::new();
            let push = |text: &mut String, rec: &csv::StringRecord| {
                let fields: Vec<&str> = keep.iter().map(|&i| &rec[i]).collect();
                text.push_str(&fields.join(","));
                text.push('\n');
            };
            push(&mut text, &header);
            for rec in r.records() {
                push(&mut text, &rec.map_err(io::Error::other)?);
            }
            Ok(text)
        }
        _ => String::from_utf8(bytes).map_err(io::Error::other),
    }
}
