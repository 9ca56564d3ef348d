//! Local label distribution statistics: the opposition matrix, seed
//! selection weights and the per-cell instance type matrix.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::MultiLabelDataset;
use crate::neighbors::NeighborIndex;

/// Category of one instance-label cell, derived from the share of
/// opposite-class values in the instance's neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstanceType {
    /// Minority cell in a region dominated by its own class (C < 0.3).
    Safe,
    /// Minority cell near the decision boundary (0.3 <= C < 0.7).
    Borderline,
    /// Isolated minority cell, kept only if no safe/borderline minority
    /// neighbor exists (0.7 <= C < 1).
    Rare,
    /// Minority cell surrounded entirely by the majority class (C = 1).
    Outlier,
    /// Cell carrying the majority class of its label.
    Majority,
}

impl InstanceType {
    /// Two-letter code used in CSV dumps.
    pub fn code(self) -> &'static str {
        match self {
            InstanceType::Safe => "SF",
            InstanceType::Borderline => "BD",
            InstanceType::Rare => "RR",
            InstanceType::Outlier => "OT",
            InstanceType::Majority => "MJ",
        }
    }
}

/// Per-cell proportion of neighbors carrying the opposite class value.
/// Every cell is an integer multiple of 1/k.
#[derive(Debug, Clone, PartialEq)]
pub struct OppositionMatrix {
    values: Array2<f64>,
    k: usize,
}

impl OppositionMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// Per-instance seed selection weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Cell types for every instance-label pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeMatrix {
    values: Array2<InstanceType>,
}

impl TypeMatrix {
    pub fn values(&self) -> &Array2<InstanceType> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> InstanceType {
        self.values[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<InstanceType> {
        self.values.row(i).to_vec()
    }
}

/// Proportion of each instance's k neighbors disagreeing with it on each
/// label: `C[i][j] = |{m in kNN(i) : y[m][j] != y[i][j]}| / k`.
pub fn compute_opposition(
    dataset: &MultiLabelDataset,
    index: &NeighborIndex,
) -> OppositionMatrix {
    let n = dataset.n();
    let q = dataset.num_labels();
    let k = index.k();
    let mut values = Array2::zeros((n, q));
    for i in 0..n {
        for j in 0..q {
            let own = dataset.label(i, j);
            let opposite = index
                .neighbors(i)
                .iter()
                .filter(|&&m| dataset.label(m, j) != own)
                .count();
            values[(i, j)] = opposite as f64 / k as f64;
        }
    }
    OppositionMatrix { values, k }
}

/// Unnormalized weights: the plain sum of opposition values over an
/// instance's minority cells, outliers included.
pub fn naive_weights(c: &OppositionMatrix, dataset: &MultiLabelDataset) -> WeightVector {
    let n = dataset.n();
    let q = dataset.num_labels();
    let minority: Vec<u8> = (0..q).map(|j| dataset.minority_class(j)).collect();
    let values = (0..n)
        .map(|i| {
            (0..q)
                .filter(|&j| dataset.label(i, j) == minority[j])
                .map(|j| c.get(i, j))
                .sum()
        })
        .collect();
    WeightVector { values }
}

/// Seed selection weights with outlier cells excluded and each label's
/// contributions normalized to sum to one, so scarcer labels weigh more.
/// Labels whose minority cells are all outliers contribute nothing.
pub fn compute_weights(c: &OppositionMatrix, dataset: &MultiLabelDataset) -> WeightVector {
    let n = dataset.n();
    let q = dataset.num_labels();
    let mut values = vec![0.0; n];
    for j in 0..q {
        let minority = dataset.minority_class(j);
        let eligible =
            |i: usize| dataset.label(i, j) == minority && c.get(i, j) < 1.0;
        let z: f64 = (0..n).filter(|&i| eligible(i)).map(|i| c.get(i, j)).sum();
        if z > 0.0 {
            for (i, v) in values.iter_mut().enumerate() {
                if eligible(i) {
                    *v += c.get(i, j) / z;
                }
            }
        }
    }
    WeightVector { values }
}

/// Assign a type to every cell and run the rare-cell re-examination to its
/// fixed point: a rare cell with any safe or borderline minority neighbor
/// on the same label is downgraded to borderline, repeated until stable.
pub fn init_types(
    c: &OppositionMatrix,
    dataset: &MultiLabelDataset,
    index: &NeighborIndex,
) -> TypeMatrix {
    let n = dataset.n();
    let q = dataset.num_labels();
    let mut values = Array2::from_elem((n, q), InstanceType::Majority);
    for i in 0..n {
        for j in 0..q {
            if dataset.label(i, j) != dataset.minority_class(j) {
                continue;
            }
            let cij = c.get(i, j);
            values[(i, j)] = if cij < 0.3 {
                InstanceType::Safe
            } else if cij < 0.7 {
                InstanceType::Borderline
            } else if cij < 1.0 {
                InstanceType::Rare
            } else {
                InstanceType::Outlier
            };
        }
    }
    let mut types = TypeMatrix { values };
    while reexamine_rare(&mut types, index) {}
    types
}

/// One synchronized re-examination pass; returns whether anything changed.
/// Each pass only converts rare cells to borderline, so the loop terminates
/// after at most n*q passes.
pub(crate) fn reexamine_rare(types: &mut TypeMatrix, index: &NeighborIndex) -> bool {
    let (n, q) = types.values.dim();
    let previous = types.values.clone();
    let mut changed = false;
    for i in 0..n {
        for j in 0..q {
            if previous[(i, j)] != InstanceType::Rare {
                continue;
            }
            let promote = index.neighbors(i).iter().any(|&m| {
                matches!(
                    previous[(m, j)],
                    InstanceType::Safe | InstanceType::Borderline
                )
            });
            if promote {
                types.values[(i, j)] = InstanceType::Borderline;
                changed = true;
            }
        }
    }
    changed
}
