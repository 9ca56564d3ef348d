//! EMLS: an ensemble of models trained on independently resampled data.
//!
//! Member i trains on a dataset resampled with seed `base + i`. One
//! threshold vector is tuned for the whole ensemble by maximizing per-label
//! F1 of the averaged scores on the original training instances; prediction
//! averages member scores and applies the strict thresholds.

use ndarray::{Array2, ArrayView1};

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};
use crate::learners::{bipartition, Learner};

/// M trained relevance models plus per-label bipartition thresholds.
#[derive(Debug, Clone)]
pub struct EnsembleModel<L: Learner> {
    members: Vec<L>,
    thresholds: Vec<f64>,
}

impl<L: Learner> EnsembleModel<L> {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn members(&self) -> &[L] {
        &self.members
    }
}

/// Train an EMLS ensemble.
///
/// `sampler` maps (dataset, seed) to a resampled dataset; `trainer` fits a
/// model on one resampled dataset.
pub fn train_emls<L, S, T>(
    dataset: &MultiLabelDataset,
    sampler: S,
    trainer: T,
    ensemble_size: usize,
    seed: u64,
) -> Result<EnsembleModel<L>>
where
    L: Learner,
    S: Fn(&MultiLabelDataset, u64) -> Result<MultiLabelDataset>,
    T: Fn(MultiLabelDataset) -> Result<L>,
{
    if ensemble_size < 1 {
        return Err(Error::InvalidParameter(
            "ensemble size must be >= 1".into(),
        ));
    }
    let members: Vec<L> = (0..ensemble_size)
        .map(|i| {
            let resampled = sampler(dataset, seed + i as u64)?;
            trainer(resampled)
        })
        .collect::<Result<_>>()?;

    // Tune thresholds on ensemble-averaged scores over the ORIGINAL
    // training instances.
    let q = dataset.num_labels();
    let mut scores = Array2::zeros((dataset.n(), q));
    for i in 0..dataset.n() {
        let averaged = average_scores(&members, dataset.feature_row(i))?;
        for (j, v) in averaged.into_iter().enumerate() {
            scores[(i, j)] = v;
        }
    }
    let thresholds = tune_thresholds(&scores, dataset.labels())?;
    Ok(EnsembleModel {
        members,
        thresholds,
    })
}

/// Per-label threshold maximizing F1 of `score > t` against truth.
///
/// Candidates are the midpoints between consecutive distinct sorted scores
/// plus a below-min and an above-max sentinel. Ties on a positive F1
/// resolve to the smallest candidate; when nothing beats F1 = 0 the
/// above-max sentinel is kept so the label predicts nothing.
pub fn tune_thresholds(scores: &Array2<f64>, truth: &Array2<u8>) -> Result<Vec<f64>> {
    if scores.dim() != (truth.nrows(), truth.ncols()) {
        return Err(Error::Shape(format!(
            "score matrix {:?} vs truth matrix ({}, {})",
            scores.dim(),
            truth.nrows(),
            truth.ncols()
        )));
    }
    Ok((0..scores.ncols())
        .map(|j| {
            let column: Vec<f64> = scores.column(j).to_vec();
            let labels: Vec<u8> = truth.column(j).to_vec();
            tune_one(&column, &labels)
        })
        .collect())
}

fn tune_one(scores: &[f64], truth: &[u8]) -> f64 {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    distinct.dedup();

    let mut candidates = Vec::with_capacity(distinct.len() + 1);
    candidates.push(distinct[0] - 0.5);
    for pair in distinct.windows(2) {
        candidates.push((pair[0] + pair[1]) / 2.0);
    }
    candidates.push(distinct[distinct.len() - 1] + 0.5);

    // Start at the above-max sentinel: when no cut achieves a positive F1
    // (e.g. an all-negative column) the label predicts nothing, rather
    // than everything.
    let mut best = (0.0, *candidates.last().expect("at least two candidates"));
    for &t in &candidates {
        let preds: Vec<u8> = scores.iter().map(|&s| u8::from(s > t)).collect();
        let f = crate::metrics::f1(&preds, truth).expect("equal lengths");
        if f > best.0 {
            best = (f, t);
        }
    }
    best.1
}

/// Averaged relevance scores and the thresholded bipartition for a query.
pub fn predict_ensemble<L: Learner>(
    model: &EnsembleModel<L>,
    x: ArrayView1<'_, f64>,
) -> Result<(Vec<f64>, Vec<u8>)> {
    let scores = average_scores(&model.members, x)?;
    let bits = bipartition(&scores, &model.thresholds);
    Ok((scores, bits))
}

fn average_scores<L: Learner>(members: &[L], x: ArrayView1<'_, f64>) -> Result<Vec<f64>> {
    let q = members[0].num_labels();
    let mut sums = vec![0.0; q];
    for member in members {
        for (acc, s) in sums.iter_mut().zip(member.predict_scores(x)?) {
            *acc += s;
        }
    }
    let m = members.len() as f64;
    Ok(sums.into_iter().map(|s| s / m).collect())
}
