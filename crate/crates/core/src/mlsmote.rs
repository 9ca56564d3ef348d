//! MLSMOTE baseline with the Ranking label-generation strategy.
//!
//! Unlike MLSOL, a synthetic instance's labels here depend only on the
//! seed's neighborhood: a label is set when it appears in more than half of
//! the seed and its k neighbors, regardless of where the point lands.

use serde::{Deserialize, Serialize};

use crate::dataset::{dataset_stats, MultiLabelDataset};
use crate::error::Result;
use crate::neighbors::build_knn;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlsmoteConfig {
    pub k: usize,
    pub seed: u64,
}

impl MlsmoteConfig {
    pub fn new(k: usize, seed: u64) -> Result<Self> {
        if k < 1 {
            return Err(crate::error::Error::InvalidParameter(
                "k must be >= 1".into(),
            ));
        }
        Ok(Self { k, seed })
    }
}

/// Labels whose imbalance ratio strictly exceeds the dataset mean.
pub fn minority_labels(dataset: &MultiLabelDataset) -> Vec<usize> {
    let stats = dataset_stats(dataset);
    stats
        .per_label_imr
        .iter()
        .enumerate()
        .filter(|&(_, &imr)| imr > stats.mean_imbalance_ratio)
        .map(|(j, _)| j)
        .collect()
}

/// MLSMOTE oversampling: one synthetic instance per (minority label,
/// positive instance) pair. Output size is data-dependent.
pub fn mlsmote(dataset: &MultiLabelDataset, config: &MlsmoteConfig) -> Result<MultiLabelDataset> {
    let index = build_knn(dataset, config.k)?;
    let targets = minority_labels(dataset);
    let mut rng = RandomStream::new(config.seed);
    let half = (config.k + 1) as f64 / 2.0;

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for &j in &targets {
        for seed in 0..dataset.n() {
            if dataset.label(seed, j) != 1 {
                continue;
            }
            let reference = index.neighbors(seed)[rng.below(config.k)];
            let row: Vec<f64> = dataset
                .feature_row(seed)
                .iter()
                .zip(dataset.feature_row(reference).iter())
                .map(|(&s, &r)| s + rng.uniform() * (r - s))
                .collect();
            // Ranking rule over the seed plus its k neighbors.
            let synthetic_labels: Vec<u8> = (0..dataset.num_labels())
                .map(|l| {
                    let count = dataset.label(seed, l) as usize
                        + index
                            .neighbors(seed)
                            .iter()
                            .filter(|&&m| dataset.label(m, l) == 1)
                            .count();
                    u8::from(count as f64 > half)
                })
                .collect();
            features.push(row);
            labels.push(synthetic_labels);
        }
    }
    if features.is_empty() {
        return Ok(dataset.clone());
    }
    dataset.with_appended(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn line(points: &[f64], labels: &[Vec<u8>]) -> MultiLabelDataset {
        let n = points.len();
        let q = labels[0].len();
        MultiLabelDataset::new(
            Array2::from_shape_fn((n, 1), |(i, _)| points[i]),
            Array2::from_shape_fn((n, q), |(i, j)| labels[i][j]),
            vec!["x".into()],
            (0..q).map(|j| format!("l{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn minority_labels_use_strict_mean_cut() {
        // ratios [1, 3], mean 2 -> only label 1
        let ds = line(
            &[0.0, 1.0, 2.0, 3.0],
            &[vec![1, 1], vec![1, 0], vec![0, 0], vec![0, 0]],
        );
        assert_eq!(minority_labels(&ds), vec![1]);

        // uniform ratios -> nothing strictly exceeds the mean
        let ds = line(
            &[0.0, 1.0, 2.0, 3.0],
            &[vec![1, 1], vec![1, 1], vec![0, 0], vec![0, 0]],
        );
        assert!(minority_labels(&ds).is_empty());

        // single label -> its ratio is the mean
        let ds = line(&[0.0, 1.0, 2.0], &[vec![1], vec![0], vec![0]]);
        assert!(minority_labels(&ds).is_empty());
    }

    #[test]
    fn no_minority_labels_returns_the_input() {
        let ds = line(
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            &[vec![1], vec![1], vec![0], vec![0], vec![0], vec![0]],
        );
        let out = mlsmote(&ds, &MlsmoteConfig::new(5, 3).unwrap()).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn ranking_rule_on_the_seed_neighborhood() {
        // seven collinear points, k = 5: instance 0's neighborhood is 1..=5
        // l0 drives generation (only instance 0 positive, imr 6)
        // l1: positive in seed and all 5 neighbors -> 6 of 6 -> 1
        // l2: positive in seed and 2 of 5 neighbors -> 3 of 6, not > 3 -> 0
        // l3/l4: balanced padding keeping the mean imr low
        let ds = line(
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            &[
                vec![1, 1, 1, 1, 1],
                vec![0, 1, 1, 1, 1],
                vec![0, 1, 1, 1, 0],
                vec![0, 1, 0, 0, 1],
                vec![0, 1, 0, 0, 0],
                vec![0, 1, 0, 1, 1],
                vec![0, 0, 0, 1, 0],
            ],
        );
        // imrs: l0 = 6, l1 = 6, l2 = 4/3, l3 = 4/3, l4 = 4/3; mean = 58/15
        assert_eq!(minority_labels(&ds), vec![0, 1]);
        let out = mlsmote(&ds, &MlsmoteConfig::new(5, 3).unwrap()).unwrap();
        // one synthetic per (minority label, positive instance):
        // l0 has 1 positive, l1 has 6
        assert_eq!(out.n(), ds.n() + 7);
        // first synthetic comes from (l0, instance 0)
        let synthetic = out.label_row(ds.n());
        assert_eq!(synthetic[0], 0, "positive only in the seed: 1 of 6");
        assert_eq!(synthetic[1], 1, "unanimous neighborhood: 6 of 6");
        assert_eq!(synthetic[2], 0, "seed plus 2 of 5: 3 of 6, not > 3");
        // its features interpolate between instance 0 and one neighbor
        let x = out.feature_row(ds.n())[0];
        assert!((0.0..=5.0).contains(&x));
    }

    #[test]
    fn labels_do_not_depend_on_the_reference_draw() {
        let ds = line(
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            &[
                vec![1, 1, 0],
                vec![0, 1, 1],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 0, 1],
                vec![0, 1, 0],
                vec![0, 0, 1],
            ],
        );
        let a = mlsmote(&ds, &MlsmoteConfig::new(5, 1).unwrap()).unwrap();
        let b = mlsmote(&ds, &MlsmoteConfig::new(5, 2).unwrap()).unwrap();
        assert_eq!(a.n(), b.n());
        assert_eq!(a.labels(), b.labels());
        assert_ne!(a.features(), b.features());
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let ds = line(
            &[0.0, 1.5, 2.0, 3.5, 4.0, 5.5, 6.0, 7.5],
            &[
                vec![1, 1],
                vec![0, 1],
                vec![0, 0],
                vec![0, 1],
                vec![0, 0],
                vec![0, 1],
                vec![0, 0],
                vec![0, 0],
            ],
        );
        let a = mlsmote(&ds, &MlsmoteConfig::new(5, 8).unwrap()).unwrap();
        let b = mlsmote(&ds, &MlsmoteConfig::new(5, 8).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_k_zero() {
        assert!(MlsmoteConfig::new(0, 1).is_err());
    }
}
