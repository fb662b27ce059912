//! Binary CART with Gini impurity.

use serde::{Deserialize, Serialize};

use super::majority;
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_samples_split: 2,
        }
    }
}

impl TreeParams {
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.max_depth == 0 {
            return Err("max_depth must be at least 1".into());
        }
        if self.min_samples_split < 2 {
            return Err("min_samples_split must be at least 2".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: u8,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { label } => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<u8> {
        par::map_range(x.n_rows(), |i| self.predict_row(x.row(i)))
    }

    /// Length of the longest root-to-leaf path, counted in splits.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

pub fn fit(params: &TreeParams, x: &FeatureMatrix, y: &LabelVector) -> Tree {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    let all: Vec<usize> = (0..x.n_cols()).collect();
    grow(x, y.as_slice(), rows, params, None, &mut |_| all.clone())
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// `n * gini`, i.e. impurity weighted by node size.
fn weighted_gini(ones: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n_f = n as f64;
    let p1 = ones as f64 / n_f;
    let p0 = 1.0 - p1;
    n_f * (1.0 - p1 * p1 - p0 * p0)
}

/// Lowest weighted impurity over midpoints of consecutive distinct values.
/// Returns `None` when the feature is constant on these rows.
fn best_threshold(
    x: &FeatureMatrix,
    y: &[u8],
    rows: &[usize],
    feature: usize,
    total_ones: usize,
) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, u8)> = rows.iter().map(|&i| (x.get(i, feature), y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut best: Option<(f64, f64)> = None;
    let mut left_ones = 0;
    for i in 0..n - 1 {
        left_ones += usize::from(pairs[i].1);
        let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
        if lo == hi {
            continue;
        }
        let left_n = i + 1;
        let score =
            weighted_gini(left_ones, left_n) + weighted_gini(total_ones - left_ones, n - left_n);
        if best.is_none_or(|(s, _)| score < s) {
            let mut mid = lo + (hi - lo) / 2.0;
            if mid >= hi {
                mid = lo;
            }
            best = Some((score, mid));
        }
    }
    best
}

/// Grows a tree over `rows` (duplicates allowed, as in a bootstrap sample).
///
/// `feature_order` yields the candidate order for each node. With
/// `max_features = Some(k)` the search stops after `k` features that are
/// non-constant on the node; otherwise every listed feature is tried.
pub(crate) fn grow(
    x: &FeatureMatrix,
    y: &[u8],
    rows: Vec<usize>,
    params: &TreeParams,
    max_features: Option<usize>,
    feature_order: &mut dyn FnMut(usize) -> Vec<usize>,
) -> Tree {
    let mut nodes = Vec::new();
    build(x, y, rows, 0, params, max_features, feature_order, &mut nodes);
    Tree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn build(
    x: &FeatureMatrix,
    y: &[u8],
    rows: Vec<usize>,
    depth: usize,
    params: &TreeParams,
    max_features: Option<usize>,
    feature_order: &mut dyn FnMut(usize) -> Vec<usize>,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    let n = rows.len();
    let ones = rows.iter().filter(|&&i| y[i] == 1).count();
    let leaf = Node::Leaf {
        label: majority(ones, n),
    };
    nodes.push(leaf);
    if ones == 0 || ones == n || depth >= params.max_depth || n < params.min_samples_split {
        return id;
    }

    let mut best: Option<BestSplit> = None;
    let mut tried = 0;
    for feature in feature_order(x.n_cols()) {
        if max_features.is_some_and(|k| tried >= k) {
            break;
        }
        let Some((score, threshold)) = best_threshold(x, y, &rows, feature, ones) else {
            continue;
        };
        tried += 1;
        if best.as_ref().is_none_or(|b| score < b.score) {
            best = Some(BestSplit {
                feature,
                threshold,
                score,
            });
        }
    }
    let Some(split) = best else {
        return id;
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&i| x.get(i, split.feature) <= split.threshold);
    let left = build(x, y, left_rows, depth + 1, params, max_features, feature_order, nodes);
    let right = build(x, y, right_rows, depth + 1, params, max_features, feature_order, nodes);
    nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}
