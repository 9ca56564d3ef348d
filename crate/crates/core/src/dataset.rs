//! Multi-label dataset container, per-label statistics, rare-label
//! filtering and stratified fold assignment.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// A dense multi-label dataset: an `n x d` feature matrix paired with an
/// `n x q` binary label matrix.
///
/// Instances are immutable after construction; cloning is cheap enough at
/// the dataset sizes this crate targets.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    features: Array2<f64>,
    labels: Array2<u8>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
}

impl MultiLabelDataset {
    /// Build a dataset, validating every structural invariant: matching row
    /// counts, finite features, strictly binary labels and name lengths.
    pub fn new(
        features: Array2<f64>,
        labels: Array2<u8>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.nrows() != labels.nrows() {
            return Err(Error::Shape(format!(
                "feature rows ({}) != label rows ({})",
                features.nrows(),
                labels.nrows()
            )));
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::Shape(format!(
                "{} feature names for {} feature columns",
                feature_names.len(),
                features.ncols()
            )));
        }
        if label_names.len() != labels.ncols() {
            return Err(Error::Shape(format!(
                "{} label names for {} label columns",
                label_names.len(),
                labels.ncols()
            )));
        }
        if let Some(bad) = features.iter().find(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite feature value {bad}")));
        }
        if labels.iter().any(|&v| v > 1) {
            return Err(Error::Shape("label value outside {0, 1}".into()));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            label_names,
        })
    }

    /// Number of instances.
    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    /// Number of features.
    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    /// Number of labels.
    pub fn num_labels(&self) -> usize {
        self.labels.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array2<u8> {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature_row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn label_row(&self, i: usize) -> ArrayView1<'_, u8> {
        self.labels.row(i)
    }

    pub fn label(&self, i: usize, j: usize) -> u8 {
        self.labels[(i, j)]
    }

    /// The less frequent bit value of label column `j`; exact ties resolve
    /// to 1.
    pub fn minority_class(&self, j: usize) -> u8 {
        let ones = self
            .labels
            .column(j)
            .iter()
            .filter(|&&v| v == 1)
            .count();
        let zeros = self.n() - ones;
        if ones > zeros {
            0
        } else {
            1
        }
    }

    /// Count of instances carrying the minority class of label `j`.
    pub fn minority_count(&self, j: usize) -> usize {
        let minority = self.minority_class(j);
        self.labels
            .column(j)
            .iter()
            .filter(|&&v| v == minority)
            .count()
    }

    /// Drop every label column whose minority class has at most one
    /// instance. Errors when nothing survives.
    pub fn filter_rare_labels(&self) -> Result<Self> {
        let keep: Vec<usize> = (0..self.num_labels())
            .filter(|&j| {
                let minority = self.minority_class(j);
                let count = self
                    .labels
                    .column(j)
                    .iter()
                    .filter(|&&v| v == minority)
                    .count();
                count >= 2
            })
            .collect();
        if keep.is_empty() {
            return Err(Error::NoUsableLabels);
        }
        let labels = self.labels.select(Axis(1), &keep);
        let label_names = keep
            .iter()
            .map(|&j| self.label_names[j].clone())
            .collect();
        Self::new(
            self.features.clone(),
            labels,
            self.feature_names.clone(),
            label_names,
        )
    }

    /// Row subset, preserving the given order. Indices must be in range.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return Err(Error::Shape(format!("row index {bad} out of range")));
        }
        Self::new(
            self.features.select(Axis(0), indices),
            self.labels.select(Axis(0), indices),
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }

    /// Append synthetic rows; the original instances stay first, unmodified.
    pub fn with_appended(&self, features: Vec<Vec<f64>>, labels: Vec<Vec<u8>>) -> Result<Self> {
        debug_assert_eq!(features.len(), labels.len());
        let extra = features.len();
        let mut f = Array2::zeros((self.n() + extra, self.num_features()));
        let mut l = Array2::zeros((self.n() + extra, self.num_labels()));
        f.slice_mut(ndarray::s![..self.n(), ..]).assign(&self.features);
        l.slice_mut(ndarray::s![..self.n(), ..]).assign(&self.labels);
        for (offset, (row_f, row_l)) in features.into_iter().zip(labels).enumerate() {
            if row_f.len() != self.num_features() || row_l.len() != self.num_labels() {
                return Err(Error::Shape("synthetic row width mismatch".into()));
            }
            let i = self.n() + offset;
            for (j, v) in row_f.into_iter().enumerate() {
                f[(i, j)] = v;
            }
            for (j, v) in row_l.into_iter().enumerate() {
                l[(i, j)] = v;
            }
        }
        Self::new(f, l, self.feature_names.clone(), self.label_names.clone())
    }
}

/// Dataset-level imbalance statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// Mean number of positive labels per instance.
    pub cardinality: f64,
    /// Mean over labels of majority count / minority count.
    pub mean_imbalance_ratio: f64,
    /// Per-label imbalance ratio, each >= 1.
    pub per_label_imr: Vec<f64>,
}

/// Cardinality and imbalance ratios for a (filtered) dataset.
pub fn dataset_stats(dataset: &MultiLabelDataset) -> DatasetStats {
    let n = dataset.n() as f64;
    let cardinality = dataset
        .labels()
        .iter()
        .map(|&v| v as f64)
        .sum::<f64>()
        / n;
    let per_label_imr: Vec<f64> = (0..dataset.num_labels())
        .map(|j| {
            let ones = dataset
                .labels()
                .column(j)
                .iter()
                .filter(|&&v| v == 1)
                .count() as f64;
            let zeros = n - ones;
            let (minority, majority) = if ones <= zeros { (ones, zeros) } else { (zeros, ones) };
            majority / minority
        })
        .collect();
    let mean_imbalance_ratio =
        per_label_imr.iter().sum::<f64>() / per_label_imr.len() as f64;
    DatasetStats {
        cardinality,
        mean_imbalance_ratio,
        per_label_imr,
    }
}

/// One repeat of a cross-validation split: fold id per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub fold_of_instance: Vec<usize>,
    pub repeat_index: usize,
    pub folds: usize,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of_instance.len())
            .filter(|&i| self.fold_of_instance[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of_instance.len())
            .filter(|&i| self.fold_of_instance[i] != fold)
            .collect()
    }
}

/// Iterative-stratification fold assignment.
///
/// The scarcest label (fewest unassigned positives) is distributed first;
/// each of its instances goes to the fold with the greatest remaining desire
/// for that label, ties broken by fewest total remaining slots, then by a
/// seeded random draw. Fold capacities are balanced to within one instance,
/// so the folds always partition the instance set. Deterministic for a
/// fixed seed.
pub fn stratified_folds(
    dataset: &MultiLabelDataset,
    folds: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<FoldAssignment>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "folds must be >= 2, got {folds}"
        )));
    }
    if folds > dataset.n() {
        return Err(Error::InvalidParameter(format!(
            "folds ({folds}) exceeds instance count ({})",
            dataset.n()
        )));
    }
    if repeats < 1 {
        return Err(Error::InvalidParameter("repeats must be >= 1".into()));
    }
    (0..repeats)
        .map(|r| {
            let mut rng = RandomStream::new(crate::rng::derive_seed(seed, &[0x5f01, r as u64]));
            Ok(stratify_once(dataset, folds, r, &mut rng))
        })
        .collect()
}

fn stratify_once(
    dataset: &MultiLabelDataset,
    folds: usize,
    repeat_index: usize,
    rng: &mut RandomStream,
) -> FoldAssignment {
    let n = dataset.n();
    let q = dataset.num_labels();
    // Ideal balanced sizes; used for tie-breaking only, never to exclude a
    // fold (a hard cap could force a later label into a lopsided split).
    let caps: Vec<usize> = (0..folds)
        .map(|f| n / folds + usize::from(f < n % folds))
        .collect();
    let mut sizes = vec![0usize; folds];
    let mut assigned = vec![usize::MAX; n];

    // Remaining desire of each fold for each label's positives.
    let mut desire = vec![vec![0f64; folds]; q];
    for j in 0..q {
        let pos = dataset
            .labels()
            .column(j)
            .iter()
            .filter(|&&v| v == 1)
            .count() as f64;
        for f in 0..folds {
            desire[j][f] = pos / folds as f64;
        }
    }

    loop {
        // Scarcest label with at least one unassigned positive instance.
        let mut pick: Option<(usize, usize)> = None; // (remaining positives, label)
        for j in 0..q {
            let remaining = (0..n)
                .filter(|&i| assigned[i] == usize::MAX && dataset.label(i, j) == 1)
                .count();
            if remaining > 0 && pick.map_or(true, |(best, _)| remaining < best) {
                pick = Some((remaining, j));
            }
        }
        let Some((_, j)) = pick else { break };

        for i in 0..n {
            if assigned[i] != usize::MAX || dataset.label(i, j) != 1 {
                continue;
            }
            let fold = choose_fold(&desire[j], &caps, &sizes, rng);
            assigned[i] = fold;
            sizes[fold] += 1;
            for l in 0..q {
                if dataset.label(i, l) == 1 {
                    desire[l][fold] -= 1.0;
                }
            }
        }
    }

    // Instances with no positive labels: fill the emptiest folds.
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        let max_slots = (0..folds).map(|f| slots(&caps, &sizes, f)).max().unwrap();
        let tied: Vec<usize> = (0..folds)
            .filter(|&f| slots(&caps, &sizes, f) == max_slots)
            .collect();
        let fold = tied[rng.below(tied.len())];
        assigned[i] = fold;
        sizes[fold] += 1;
    }

    // folds <= n, so a non-empty assignment always exists; steal from the
    // largest fold if the greedy pass left one empty.
    for f in 0..folds {
        while sizes[f] == 0 {
            let donor = (0..folds).max_by_key(|&g| sizes[g]).unwrap();
            let moved = (0..n).rfind(|&i| assigned[i] == donor).unwrap();
            assigned[moved] = f;
            sizes[donor] -= 1;
            sizes[f] += 1;
        }
    }

    FoldAssignment {
        fold_of_instance: assigned,
        repeat_index,
        folds,
    }
}

/// Remaining slots relative to the ideal balanced size; may go negative.
fn slots(caps: &[usize], sizes: &[usize], f: usize) -> isize {
    caps[f] as isize - sizes[f] as isize
}

fn choose_fold(
    desire: &[f64],
    caps: &[usize],
    sizes: &[usize],
    rng: &mut RandomStream,
) -> usize {
    let folds = caps.len();
    let best_desire = (0..folds)
        .map(|f| desire[f])
        .fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<usize> = (0..folds).filter(|&f| desire[f] == best_desire).collect();
    let min_slots = candidates
        .iter()
        .map(|&f| slots(caps, sizes, f))
        .min()
        .unwrap();
    let tied: Vec<usize> = candidates
        .into_iter()
        .filter(|&f| slots(caps, sizes, f) == min_slots)
        .collect();
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.below(tied.len())]
    }
}

/// Per-feature min-max scaler fit on one dataset and applied to others.
#[derive(Debug, Clone)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(dataset: &MultiLabelDataset) -> Self {
        let d = dataset.num_features();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for row in dataset.features().rows() {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Self { mins, maxs }
    }

    pub fn transform(&self, dataset: &MultiLabelDataset) -> Result<MultiLabelDataset> {
        if self.mins.len() != dataset.num_features() {
            return Err(Error::Shape("scaler dimension mismatch".into()));
        }
        let mut features = dataset.features().clone();
        for mut row in features.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let span = self.maxs[j] - self.mins[j];
                *v = if span > 0.0 { (*v - self.mins[j]) / span } else { 0.0 };
            }
        }
        MultiLabelDataset::new(
            features,
            dataset.labels().clone(),
            dataset.feature_names().to_vec(),
            dataset.label_names().to_vec(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn dataset(features: Array2<f64>, labels: Array2<u8>) -> MultiLabelDataset {
        let d = features.ncols();
        let q = labels.ncols();
        MultiLabelDataset::new(
            features,
            labels,
            (0..d).map(|i| format!("f{i}")).collect(),
            (0..q).map(|j| format!("l{j}")).collect(),
        )
        .unwrap()
    }

    fn labels_only(labels: Array2<u8>) -> MultiLabelDataset {
        let n = labels.nrows();
        let features =
            Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        dataset(features, labels)
    }

    #[test]
    fn minority_class_counts_and_tie() {
        let ds = labels_only(array![[1, 1, 1], [0, 1, 1], [0, 1, 0], [0, 0, 0]]);
        assert_eq!(ds.minority_class(0), 1); // [1,0,0,0]
        assert_eq!(ds.minority_class(1), 0); // [1,1,1,0]
        assert_eq!(ds.minority_class(2), 1); // [1,1,0,0] tie -> 1
    }

    #[test]
    fn rejects_invalid_matrices() {
        let err = MultiLabelDataset::new(
            array![[1.0], [2.0]],
            array![[1], [2]],
            vec!["f".into()],
            vec!["l".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));

        let err = MultiLabelDataset::new(
            array![[f64::NAN]],
            array![[1]],
            vec!["f".into()],
            vec!["l".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));

        let err = MultiLabelDataset::new(
            Array2::<f64>::zeros((0, 1)),
            Array2::<u8>::zeros((0, 1)),
            vec!["f".into()],
            vec!["l".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn filter_drops_single_minority_labels() {
        let ds = labels_only(array![
            [1, 1],
            [0, 1],
            [0, 0],
            [0, 0],
            [0, 0]
        ]);
        let filtered = ds.filter_rare_labels().unwrap();
        assert_eq!(filtered.num_labels(), 1);
        assert_eq!(filtered.label_names(), ["l1"]);
        assert_eq!(filtered.features(), ds.features());
    }

    #[test]
    fn filter_errors_when_nothing_survives() {
        let ds = labels_only(array![[1], [0], [0], [0]]);
        assert!(matches!(
            ds.filter_rare_labels().unwrap_err(),
            Error::NoUsableLabels
        ));
    }

    #[test]
    fn filter_is_idempotent() {
        let ds = labels_only(array![
            [1, 1, 0],
            [0, 1, 1],
            [1, 0, 0],
            [0, 0, 0],
            [0, 0, 0]
        ]);
        let once = ds.filter_rare_labels().unwrap();
        let twice = once.filter_rare_labels().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn stats_hand_count() {
        let ds = labels_only(array![[1, 0], [1, 0], [0, 0], [0, 1]]);
        let stats = dataset_stats(&ds);
        assert_eq!(stats.cardinality, 0.75);
        assert_eq!(stats.per_label_imr, vec![1.0, 3.0]);
        assert_eq!(stats.mean_imbalance_ratio, 2.0);
        assert!(stats.per_label_imr.iter().all(|&r| r >= 1.0));
    }

    #[test]
    fn stratified_two_folds_split_positives() {
        let ds = labels_only(array![[1], [1], [0], [0]]);
        let assignments = stratified_folds(&ds, 2, 1, 7).unwrap();
        let a = &assignments[0];
        for fold in 0..2 {
            let positives = a
                .test_indices(fold)
                .iter()
                .filter(|&&i| ds.label(i, 0) == 1)
                .count();
            assert_eq!(positives, 1, "fold {fold} must hold one positive");
            assert_eq!(a.test_indices(fold).len(), 2);
        }
    }

    #[test]
    fn stratified_rejects_bad_fold_counts() {
        let ds = labels_only(array![[1], [1], [0], [0]]);
        assert!(stratified_folds(&ds, 1, 1, 0).is_err());
        assert!(stratified_folds(&ds, 5, 1, 0).is_err());
    }

    #[test]
    fn stratified_is_deterministic() {
        let ds = labels_only(array![
            [1, 0],
            [1, 1],
            [0, 1],
            [0, 0],
            [1, 0],
            [0, 1],
            [1, 1],
            [0, 0],
            [1, 0]
        ]);
        let a = stratified_folds(&ds, 3, 2, 42).unwrap();
        let b = stratified_folds(&ds, 3, 2, 42).unwrap();
        assert_eq!(a, b);
        let c = stratified_folds(&ds, 3, 2, 43).unwrap();
        assert!(a != c || a[0].fold_of_instance == c[0].fold_of_instance);
    }

    #[test]
    fn scaler_maps_to_unit_interval() {
        let ds = dataset(array![[0.0, 5.0], [10.0, 5.0], [5.0, 5.0]], array![[1], [0], [1]]);
        let scaler = MinMaxScaler::fit(&ds);
        let scaled = scaler.transform(&ds).unwrap();
        assert_eq!(scaled.features(), &array![[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]]);
    }

    /// Worst per-label positive-count spread over labels with at least
    /// `folds` positives, for an arbitrary two-fold assignment.
    fn max_spread(ds: &MultiLabelDataset, fold_of: &[usize]) -> usize {
        (0..ds.num_labels())
            .filter(|&j| (0..ds.n()).filter(|&i| ds.label(i, j) == 1).count() >= 2)
            .map(|j| {
                let in_fold0 = (0..ds.n())
                    .filter(|&i| fold_of[i] == 0 && ds.label(i, j) == 1)
                    .count();
                let total = (0..ds.n()).filter(|&i| ds.label(i, j) == 1).count();
                (2 * in_fold0).abs_diff(total)
            })
            .max()
            .unwrap_or(0)
    }

    /// Exhaustive two-fold search for the minimal achievable worst spread.
    fn optimal_spread(ds: &MultiLabelDataset) -> usize {
        let n = ds.n();
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize != 0 && (mask.count_ones() as usize) != n)
            .map(|mask| {
                let fold_of: Vec<usize> =
                    (0..n).map(|i| usize::from(mask >> i & 1 == 1)).collect();
                max_spread(ds, &fold_of)
            })
            .min()
            .unwrap()
    }


    // Greedy stratification is a heuristic: with several interacting
    // labels its worst per-label spread can exceed the exhaustive optimum
    // (run with --ignored --nocapture to see the gap distribution).
    #[test]
    #[ignore]
    fn probe_gap_distribution() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut hist = [0usize; 8];
        for _ in 0..20000 {
            let n = rng.random_range(4..13usize);
            let labels = Array2::from_shape_fn((n, 3), |_| rng.random_range(0..2u8));
            let ds = labels_only(labels);
            let seed: u64 = rng.random_range(0..1000);
            let a = &stratified_folds(&ds, 2, 1, seed).unwrap()[0];
            let gap = max_spread(&ds, &a.fold_of_instance).saturating_sub(optimal_spread(&ds));
            hist[gap.min(7)] += 1;
        }
        println!("greedy minus optimal spread histogram: {hist:?}");
    }

    proptest! {
        #[test]
        fn folds_partition_the_dataset(
            rows in proptest::collection::vec(proptest::collection::vec(0u8..2, 3), 4..12),
            seed in 0u64..1000,
        ) {
            let n = rows.len();
            let labels = Array2::from_shape_fn((n, 3), |(i, j)| rows[i][j]);
            let ds = labels_only(labels);
            let folds = 2;
            let a = &stratified_folds(&ds, folds, 1, seed).unwrap()[0];
            let sizes: Vec<usize> = (0..folds).map(|f| a.test_indices(f).len()).collect();
            prop_assert_eq!(sizes.iter().sum::<usize>(), n);
            prop_assert!(sizes.iter().all(|&s| s > 0));
            let mut seen = vec![false; n];
            for f in 0..folds {
                for i in a.test_indices(f) {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
        }

        // With a single label nothing competes for fold capacity, so the
        // greedy pass splits positives perfectly.
        #[test]
        fn single_label_folds_balance_positives(
            bits in proptest::collection::vec(0u8..2, 4..24),
            seed in 0u64..1000,
        ) {
            let n = bits.len();
            let labels = Array2::from_shape_fn((n, 1), |(i, _)| bits[i]);
            let ds = labels_only(labels);
            let a = &stratified_folds(&ds, 2, 1, seed).unwrap()[0];
            prop_assert!(max_spread(&ds, &a.fold_of_instance) <= 1);
        }
    }
}
