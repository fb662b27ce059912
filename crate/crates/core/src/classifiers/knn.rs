//! Brute-force k-nearest neighbours under Euclidean distance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::majority;
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self { k: 5 }
    }
}

/// The training set, stored verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub points: FeatureMatrix,
    pub labels: LabelVector,
}

pub fn fit(params: &KnnParams, x: &FeatureMatrix, y: &LabelVector) -> KnnModel {
    KnnModel {
        k: params.k,
        points: x.clone(),
        labels: y.clone(),
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KnnModel {
    /// Label for one query. Equal distances prefer the lower training row;
    /// tied votes go to label 0.
    pub fn predict_row(&self, query: &[f64]) -> u8 {
        let n = self.points.n_rows();
        let k = self.k.min(n);
        let mut dist: Vec<(f64, usize)> = (0..n)
            .map(|i| (squared_distance(self.points.row(i), query), i))
            .collect();
        let by_distance =
            |a: &(f64, usize), b: &(f64, usize)| -> Ordering { a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)) };
        if k < n {
            dist.select_nth_unstable_by(k - 1, by_distance);
        }
        let labels = self.labels.as_slice();
        let ones = dist[..k].iter().filter(|&&(_, i)| labels[i] == 1).count();
        majority(ones, k)
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<u8> {
        par::map_range(x.n_rows(), |i| self.predict_row(x.row(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (FeatureMatrix, LabelVector) {
        let x = FeatureMatrix::from_rows(
            &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [10.0, 10.0], [11.0, 10.0]],
            &["a", "b"],
        )
        .unwrap();
        (x, LabelVector::new(vec![0, 0, 1, 1, 1]).unwrap())
    }

    #[test]
    fn k1_stores_training_set_and_recalls_it() {
        let (x, y) = data();
        let model = fit(&KnnParams { k: 1 }, &x, &y);
        assert_eq!(model.points, x);
        assert_eq!(model.predict(&x), y.as_slice());
    }

    #[test]
    fn majority_of_three() {
        let (x, y) = data();
        let model = fit(&KnnParams { k: 3 }, &x, &y);
        assert_eq!(model.predict_row(&[0.2, 0.1]), 0);
        assert_eq!(model.predict_row(&[9.0, 9.0]), 1);
    }

    #[test]
    fn equidistant_neighbours_prefer_lower_row() {
        // Query is at distance 1 from rows 1 (label 0) and 2 (label 1).
        let x = FeatureMatrix::from_rows(&[[5.0], [1.0], [3.0]], &["a"]).unwrap();
        let y = LabelVector::new(vec![1, 0, 1]).unwrap();
        let model = fit(&KnnParams { k: 1 }, &x, &y);
        assert_eq!(model.predict_row(&[2.0]), 0);
    }

    #[test]
    fn tied_vote_goes_to_zero() {
        let x = FeatureMatrix::from_rows(&[[0.0], [2.0]], &["a"]).unwrap();
        let y = LabelVector::new(vec![1, 0]).unwrap();
        let model = fit(&KnnParams { k: 2 }, &x, &y);
        assert_eq!(model.predict_row(&[1.0]), 0);
    }

    #[test]
    fn k_larger_than_training_set_uses_all_points() {
        let (x, y) = data();
        let model = fit(&KnnParams { k: 99 }, &x, &y);
        assert_eq!(model.predict_row(&[0.0, 0.0]), 1);
    }
}
