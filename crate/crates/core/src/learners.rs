//! Built-in binary-relevance kNN scorer.
//!
//! The pipeline treats base learners as interchangeable: anything
//! implementing [`Learner`] can be plugged into the ensemble and benchmark
//! code. The lazy BR-kNN scorer below is the self-contained default.

use ndarray::ArrayView1;

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};
use crate::neighbors::knn_of_point;

/// A trained multi-label model producing per-label relevance degrees.
pub trait Learner {
    fn num_labels(&self) -> usize;

    /// Per-label scores in [0, 1].
    fn predict_scores(&self, x: ArrayView1<'_, f64>) -> Result<Vec<f64>>;
}

/// Lazy binary-relevance kNN model: stores its training set and scores a
/// query by the fraction of its k nearest training instances positive for
/// each label.
#[derive(Debug, Clone)]
pub struct BrKnnModel {
    training: MultiLabelDataset,
    k: usize,
}

/// Train (store) a BR-kNN model. `k` may equal `n` for prediction-time
/// queries, but not exceed it.
pub fn train_br_knn(dataset: MultiLabelDataset, k: usize) -> Result<BrKnnModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if k > dataset.n() {
        return Err(Error::InvalidParameter(format!(
            "k ({k}) exceeds training size ({})",
            dataset.n()
        )));
    }
    Ok(BrKnnModel {
        training: dataset,
        k,
    })
}

impl BrKnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn training(&self) -> &MultiLabelDataset {
        &self.training
    }

    /// Bipartition with strict per-label thresholds: predicted 1 iff
    /// score > threshold.
    pub fn predict_bipartition(
        &self,
        x: ArrayView1<'_, f64>,
        thresholds: &[f64],
    ) -> Result<Vec<u8>> {
        let scores = self.predict_scores(x)?;
        Ok(bipartition(&scores, thresholds))
    }
}

impl Learner for BrKnnModel {
    fn num_labels(&self) -> usize {
        self.training.num_labels()
    }

    fn predict_scores(&self, x: ArrayView1<'_, f64>) -> Result<Vec<f64>> {
        if x.len() != self.training.num_features() {
            return Err(Error::Shape(format!(
                "query dimension {} != training dimension {}",
                x.len(),
                self.training.num_features()
            )));
        }
        let neighbors = knn_of_point(&self.training, x, self.k)?;
        Ok((0..self.training.num_labels())
            .map(|j| {
                let positives = neighbors
                    .iter()
                    .filter(|&&(m, _)| self.training.label(m, j) == 1)
                    .count();
                positives as f64 / self.k as f64
            })
            .collect())
    }
}

/// Strict-threshold bipartition shared by single models and ensembles.
pub fn bipartition(scores: &[f64], thresholds: &[f64]) -> Vec<u8> {
    scores
        .iter()
        .zip(thresholds.iter())
        .map(|(&s, &t)| u8::from(s > t))
        .collect()
}
