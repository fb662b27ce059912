//! Bagged CART ensemble with per-split feature subsampling.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::majority;
use super::tree::{self, Tree, TreeParams};
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        let t = TreeParams::default();
        Self {
            n_trees: 100,
            max_depth: t.max_depth,
            min_samples_split: t.min_samples_split,
            seed: 42,
        }
    }
}

impl ForestParams {
    pub fn tree(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

/// `ceil(sqrt(m))`, at least 1.
pub fn features_per_split(m: usize) -> usize {
    let mut k = (m as f64).sqrt().floor() as usize;
    while k * k < m {
        k += 1;
    }
    k.max(1)
}

/// Tree `t` draws from stream `t` of a ChaCha generator keyed on the seed,
/// so each tree is reproducible on its own and trees can be grown in any
/// order or in parallel.
pub fn fit(params: &ForestParams, x: &FeatureMatrix, y: &LabelVector) -> Forest {
    let n = x.n_rows();
    let k = features_per_split(x.n_cols());
    let tree_params = params.tree();
    let trees = par::map_range(params.n_trees, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(t as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut order = |m: usize| {
            let mut f: Vec<usize> = (0..m).collect();
            f.shuffle(&mut rng);
            f
        };
        tree::grow(x, y.as_slice(), rows, &tree_params, Some(k), &mut order)
    });
    Forest { trees }
}

impl Forest {
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let ones = self
            .trees
            .iter()
            .filter(|t| t.predict_row(row) == 1)
            .count();
        majority(ones, self.trees.len())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<u8> {
        par::map_range(x.n_rows(), |i| self.predict_row(x.row(i)))
    }
}
