//! CSV ingestion, categorical encoding and train/test partitioning for
//! flow-record tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} has no header row")]
    Empty(PathBuf),
    #[error("duplicate column name {0:?} in header")]
    DuplicateColumn(String),
    #[error("header does not match expected schema: expected {expected:?}, found {found:?}")]
    SchemaMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("row {row} has {fields} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        fields: usize,
        expected: usize,
    },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("label column {column:?} row {row}: value {value:?} is not 0 or 1")]
    BadLabel {
        column: String,
        row: usize,
        value: String,
    },
    #[error("column {column:?} row {row}: cannot parse {value:?} as a finite number")]
    BadNumber {
        column: String,
        row: usize,
        value: String,
    },
    #[error("no feature columns remain after dropping")]
    NoFeatures,
    #[error("class {label} has {count} rows; at least 2 are needed to stratify")]
    ClassTooSmall { label: u8, count: usize },
    #[error("fraction {0} is outside (0, 1)")]
    BadFraction(f64),
    #[error("sample of {requested} rows requested from {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Header check applied by [`load_csv`].
#[derive(Debug, Clone, Default, PartialEq)]
pub enum Schema {
    #[default]
    Infer,
    Expected(Vec<String>),
}

/// Raw string fields exactly as they appeared in the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecordTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub source_path: PathBuf,
}

impl RawRecordTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Keeps only the rows at `indices`, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> RawRecordTable {
        RawRecordTable {
            header: self.header.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            source_path: self.source_path.clone(),
        }
    }
}

/// Dense row-major `n x m` matrix of finite reals with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    column_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        values: Vec<f64>,
        n_rows: usize,
        column_names: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let m = column_names.len();
        if values.len() != n_rows * m {
            return Err(DatasetError::Shape(format!(
                "{} values for {n_rows} x {m}",
                values.len()
            )));
        }
        check_unique(&column_names)?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::BadNumber {
                column: column_names[pos % m.max(1)].clone(),
                row: pos / m.max(1) + 1,
                value: values[pos].to_string(),
            });
        }
        Ok(Self {
            values,
            n_rows,
            column_names,
        })
    }

    /// Builds a matrix from row slices; all rows must have `names.len()` entries.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], names: &[&str]) -> Result<Self, DatasetError> {
        let m = names.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(DatasetError::RaggedRow {
                    row: i + 1,
                    fields: row.len(),
                    expected: m,
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, rows.len(), names.iter().map(|s| s.to_string()).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        let m = self.n_cols();
        &self.values[row * m..(row + 1) * m]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_cols()).map(|j| self.column(j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols());
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            values,
            n_rows: indices.len(),
            column_names: self.column_names.clone(),
        }
    }

    /// Restricts to the named columns, in the order given.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix, DatasetError> {
        let idx = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| DatasetError::UnknownColumn(n.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        check_unique(names)?;
        let mut values = Vec::with_capacity(self.n_rows * idx.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            values.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(FeatureMatrix {
            values,
            n_rows: self.n_rows,
            column_names: names.to_vec(),
        })
    }

    /// Builds a matrix from column vectors.
    pub fn from_columns(columns: &[Vec<f64>], names: Vec<String>) -> Result<Self, DatasetError> {
        let n = columns.first().map_or(0, Vec::len);
        if columns.len() != names.len() || columns.iter().any(|c| c.len() != n) {
            return Err(DatasetError::Shape("columns of unequal length".into()));
        }
        let m = columns.len();
        let mut values = vec![0.0; n * m];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * m + j] = *v;
            }
        }
        Self::new(values, n, names)
    }
}

/// Binary target: 0 normal, 1 attack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct LabelVector(Vec<u8>);

impl LabelVector {
    pub fn new(values: Vec<u8>) -> Result<Self, DatasetError> {
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(DatasetError::BadLabel {
                column: "label".into(),
                row: pos + 1,
                value: values[pos].to_string(),
            });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// (count of 0s, count of 1s)
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.0.iter().filter(|&&v| v == 1).count();
        [self.0.len() - ones, ones]
    }

    pub fn select(&self, indices: &[usize]) -> LabelVector {
        LabelVector(indices.iter().map(|&i| self.0[i]).collect())
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn complement(&self) -> LabelVector {
        LabelVector(self.0.iter().map(|&v| 1 - v).collect())
    }
}

impl TryFrom<Vec<u8>> for LabelVector {
    type Error = DatasetError;
    fn try_from(v: Vec<u8>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<LabelVector> for Vec<u8> {
    fn from(v: LabelVector) -> Self {
        v.0
    }
}

/// Per-column string-to-integer codes, in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingMap {
    /// (column name, distinct values); a value's code is its index.
    pub columns: Vec<(String, Vec<String>)>,
}

impl EncodingMap {
    pub fn levels(&self, column: &str) -> Option<&[String]> {
        self.columns
            .iter()
            .find(|(c, _)| c == column)
            .map(|(_, v)| v.as_slice())
    }

    pub fn decode(&self, column: &str, code: f64) -> Option<&str> {
        if code < 0.0 || code.fract() != 0.0 {
            return None;
        }
        self.levels(column)?
            .get(code as usize)
            .map(String::as_str)
    }

    pub fn is_categorical(&self, column: &str) -> bool {
        self.levels(column).is_some()
    }
}

/// Which columns hold nominal values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Categorical {
    /// A column is nominal when its first data value does not parse as a number.
    #[default]
    Infer,
    Named(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub drop_columns: Vec<String>,
    pub label_column: String,
    pub category_column: Option<String>,
    pub categorical: Categorical,
}

impl PrepareOptions {
    /// Column layout of the partitioned UNSW-NB15 training/testing CSVs.
    pub fn unsw_nb15() -> Self {
        Self {
            drop_columns: vec!["id".into()],
            label_column: "label".into(),
            category_column: Some("attack_cat".into()),
            categorical: Categorical::Infer,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub features: FeatureMatrix,
    pub labels: LabelVector,
    pub encoding: EncodingMap,
}

/// Reads a headed CSV from disk.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<RawRecordTable, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_csv_from_reader(file, path, schema)
}

pub fn load_csv_from_reader<R: Read>(
    reader: R,
    source_path: &Path,
    schema: &Schema,
) -> Result<RawRecordTable, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header: Vec<String> = match records.next() {
        Some(rec) => rec?.iter().map(|s| s.trim().to_string()).collect(),
        None => return Err(DatasetError::Empty(source_path.to_path_buf())),
    };
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(DatasetError::Empty(source_path.to_path_buf()));
    }
    check_unique(&header)?;
    if let Schema::Expected(expected) = schema {
        if *expected != header {
            return Err(DatasetError::SchemaMismatch {
                expected: expected.clone(),
                found: header,
            });
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(DatasetError::RaggedRow {
                row: i + 1,
                fields: rec.len(),
                expected: header.len(),
            });
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(RawRecordTable {
        header,
        rows,
        source_path: source_path.to_path_buf(),
    })
}

/// Drops id/category columns, extracts the label and integer-encodes
/// nominal columns.
pub fn prepare(table: &RawRecordTable, opts: &PrepareOptions) -> Result<Prepared, DatasetError> {
    let label_idx = table
        .column_index(&opts.label_column)
        .ok_or_else(|| DatasetError::UnknownColumn(opts.label_column.clone()))?;
    let mut excluded = vec![false; table.header.len()];
    excluded[label_idx] = true;
    for name in opts.drop_columns.iter().chain(opts.category_column.iter()) {
        let j = table
            .column_index(name)
            .ok_or_else(|| DatasetError::UnknownColumn(name.clone()))?;
        excluded[j] = true;
    }
    let feature_idx: Vec<usize> = (0..table.header.len()).filter(|&j| !excluded[j]).collect();
    if feature_idx.is_empty() {
        return Err(DatasetError::NoFeatures);
    }

    let nominal: Vec<bool> = match &opts.categorical {
        Categorical::Infer => feature_idx
            .iter()
            .map(|&j| {
                table
                    .rows
                    .first()
                    .is_some_and(|r| parse_number(&r[j]).is_none())
            })
            .collect(),
        Categorical::Named(names) => {
            for name in names {
                if !feature_idx.iter().any(|&j| table.header[j] == *name) {
                    return Err(DatasetError::UnknownColumn(name.clone()));
                }
            }
            feature_idx
                .iter()
                .map(|&j| names.contains(&table.header[j]))
                .collect()
        }
    };

    let n = table.rows.len();
    let m = feature_idx.len();
    let mut values = vec![0.0; n * m];
    let mut encoding = EncodingMap::default();
    for (k, &j) in feature_idx.iter().enumerate() {
        let name = &table.header[j];
        if nominal[k] {
            let mut levels: Vec<String> = Vec::new();
            let mut codes: HashMap<&str, usize> = HashMap::new();
            for (i, row) in table.rows.iter().enumerate() {
                let field = row[j].as_str();
                let code = *codes.entry(field).or_insert_with(|| {
                    levels.push(field.to_string());
                    levels.len() - 1
                });
                values[i * m + k] = code as f64;
            }
            encoding.columns.push((name.clone(), levels));
        } else {
            for (i, row) in table.rows.iter().enumerate() {
                values[i * m + k] =
                    parse_number(&row[j]).ok_or_else(|| DatasetError::BadNumber {
                        column: name.clone(),
                        row: i + 1,
                        value: row[j].clone(),
                    })?;
            }
        }
    }

    let labels = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| match parse_number(&row[label_idx]) {
            Some(0.0) => Ok(0),
            Some(1.0) => Ok(1),
            _ => Err(DatasetError::BadLabel {
                column: opts.label_column.clone(),
                row: i + 1,
                value: row[label_idx].clone(),
            }),
        })
        .collect::<Result<Vec<u8>, _>>()?;

    let names = feature_idx.iter().map(|&j| table.header[j].clone()).collect();
    Ok(Prepared {
        features: FeatureMatrix::new(values, n, names)?,
        labels: LabelVector(labels),
        encoding,
    })
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn check_unique(names: &[String]) -> Result<(), DatasetError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(DatasetError::DuplicateColumn(n.clone()));
        }
    }
    Ok(())
}

/// Rescales every column to [0, 1]; constant columns map to 0.
pub fn min_max_scale(x: &FeatureMatrix) -> FeatureMatrix {
    let m = x.n_cols();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for i in 0..x.n_rows() {
        for (j, &v) in x.row(i).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let values = x
        .values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let j = k % m;
            let span = hi[j] - lo[j];
            if span > 0.0 {
                (v - lo[j]) / span
            } else {
                0.0
            }
        })
        .collect();
    FeatureMatrix {
        values,
        n_rows: x.n_rows(),
        column_names: x.column_names().to_vec(),
    }
}

/// Row indices of a stratified two-way partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub x_train: FeatureMatrix,
    pub y_train: LabelVector,
    pub x_test: FeatureMatrix,
    pub y_test: LabelVector,
    pub indices: SplitIndices,
}

/// Per-class test-set size. Rounding is anchored on the smaller of the two
/// fractions so that `f` and `1 - f` produce mirrored partitions.
fn test_quota(count: usize, test_fraction: f64) -> usize {
    let minor = test_fraction.min(1.0 - test_fraction);
    let minor_count = ((minor * count as f64).round() as usize).clamp(1, count - 1);
    if test_fraction <= 0.5 {
        minor_count
    } else {
        count - minor_count
    }
}

fn shuffled_classes(labels: &LabelVector, seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in labels.as_slice().iter().enumerate() {
        by_class[y as usize].push(i);
    }
    for class in by_class.iter_mut() {
        class.shuffle(&mut rng);
    }
    by_class
}

/// Stratified partition of row indices.
///
/// For each class the rows are shuffled with a seeded ChaCha stream; the
/// smaller part is taken from the front of the shuffled order. Calling with
/// `f` and `1 - f` therefore swaps the roles of the two parts exactly.
pub fn stratified_indices(
    labels: &LabelVector,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitIndices, DatasetError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DatasetError::BadFraction(test_fraction));
    }
    let counts = labels.class_counts();
    for (label, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(DatasetError::ClassTooSmall {
                label: label as u8,
                count,
            });
        }
    }
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::new();
    for class in shuffled_classes(labels, seed) {
        let t = test_quota(class.len(), test_fraction);
        if test_fraction <= 0.5 {
            test.extend_from_slice(&class[..t]);
            train.extend_from_slice(&class[t..]);
        } else {
            let r = class.len() - t;
            train.extend_from_slice(&class[..r]);
            test.extend_from_slice(&class[r..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn stratified_split(
    x: &FeatureMatrix,
    y: &LabelVector,
    test_fraction: f64,
    seed: u64,
) -> Result<Split, DatasetError> {
    if x.n_rows() != y.len() {
        return Err(DatasetError::Shape(format!(
            "{} feature rows, {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    let indices = stratified_indices(y, test_fraction, seed)?;
    Ok(Split {
        x_train: x.select_rows(&indices.train),
        y_train: y.select(&indices.train),
        x_test: x.select_rows(&indices.test),
        y_test: y.select(&indices.test),
        indices,
    })
}

/// Draws exactly `rows` row indices with class proportions preserved
/// (largest-remainder apportionment). Output is sorted ascending.
pub fn stratified_sample(
    labels: &LabelVector,
    rows: usize,
    seed: u64,
) -> Result<Vec<usize>, DatasetError> {
    let n = labels.len();
    if rows > n {
        return Err(DatasetError::SampleTooLarge {
            requested: rows,
            available: n,
        });
    }
    let counts = labels.class_counts();
    let exact: Vec<f64> = counts
        .iter()
        .map(|&c| rows as f64 * c as f64 / n as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut short = rows - quota.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if short == 0 {
            break;
        }
        if quota[c] < counts[c] {
            quota[c] += 1;
            short -= 1;
        }
    }
    let mut picked: Vec<usize> = shuffled_classes(labels, seed)
        .into_iter()
        .zip(quota)
        .flat_map(|(class, q)| class.into_iter().take(q))
        .collect();
    picked.sort_unstable();
    Ok(picked)
}
