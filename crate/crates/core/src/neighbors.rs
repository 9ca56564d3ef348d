//! Exact brute-force k-nearest-neighbor search under Euclidean distance.
//!
//! Approximate indexes are deliberately absent: the datasets this crate
//! targets stay well under ~12k instances, where a parallel quadratic scan
//! is both fast enough and exactly reproducible.

use ndarray::ArrayView1;
use rayon::prelude::*;

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};

/// Per-instance ordered k-nearest-neighbor lists.
///
/// Rows never contain the instance's own index; distances are ascending,
/// with ties broken by ascending instance index.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    k: usize,
    neighbor_ids: Vec<Vec<usize>>,
    neighbor_dists: Vec<Vec<f64>>,
}

impl NeighborIndex {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.neighbor_ids.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbor_ids[i]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.neighbor_dists[i]
    }
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "vector dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Exact k nearest neighbors of every instance, self excluded.
pub fn build_knn(dataset: &MultiLabelDataset, k: usize) -> Result<NeighborIndex> {
    let n = dataset.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k < n; got k={k}, n={n}"
        )));
    }
    // Row-parallel construction; each row is independent, so worker
    // scheduling cannot affect the result.
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let query = dataset.feature_row(i);
            let mut pairs: Vec<(f64, usize)> = (0..n)
                .filter(|&m| m != i)
                .map(|m| {
                    let d = euclidean(query, dataset.feature_row(m))
                        .expect("rows of one dataset share a dimension");
                    (d, m)
                })
                .collect();
            sort_by_distance_then_index(&mut pairs);
            pairs.truncate(k);
            let ids = pairs.iter().map(|&(_, m)| m).collect();
            let dists = pairs.iter().map(|&(d, _)| d).collect();
            (ids, dists)
        })
        .collect();
    let (neighbor_ids, neighbor_dists) = rows.into_iter().unzip();
    Ok(NeighborIndex {
        k,
        neighbor_ids,
        neighbor_dists,
    })
}

/// Exact k nearest training instances to an arbitrary query point.
pub fn knn_of_point(
    dataset: &MultiLabelDataset,
    x: ArrayView1<'_, f64>,
    k: usize,
) -> Result<Vec<(usize, f64)>> {
    let n = dataset.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= n; got k={k}, n={n}"
        )));
    }
    let mut pairs: Vec<(f64, usize)> = (0..n)
        .map(|m| Ok((euclidean(x, dataset.feature_row(m))?, m)))
        .collect::<Result<_>>()?;
    sort_by_distance_then_index(&mut pairs);
    pairs.truncate(k);
    Ok(pairs.into_iter().map(|(d, m)| (m, d)).collect())
}

fn sort_by_distance_then_index(pairs: &mut [(f64, usize)]) {
    pairs.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("distances are finite")
            .then(a.1.cmp(&b.1))
    });
}
