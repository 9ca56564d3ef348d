//! MLSOL: synthetic oversampling driven by the local label distribution.
//!
//! Seeds are drawn with probability proportional to their difficulty
//! weights, a reference is drawn uniformly from the seed's k nearest
//! neighbors, features are interpolated per coordinate, and each label is
//! assigned by comparing the synthetic point's relative closeness `cd`
//! against a per-type threshold.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::dataset::MultiLabelDataset;
use crate::error::{Error, Result};
use crate::local_stats::{compute_opposition, compute_weights, init_types, InstanceType, TypeMatrix, WeightVector};
use crate::neighbors::{build_knn, euclidean};
use crate::rng::RandomStream;

/// Per-type cut on `cd` deciding whether the synthetic instance keeps the
/// minority-side label value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaTable {
    pub safe: f64,
    pub borderline: f64,
    pub rare: f64,
    pub outlier: f64,
}

impl Default for ThetaTable {
    fn default() -> Self {
        // rare sits above any reachable cd, outlier below, so rare cells
        // always keep the minority value and outlier cells never do.
        Self {
            safe: 0.5,
            borderline: 0.75,
            rare: 1.0 + 1e-5,
            outlier: 0.0 - 1e-5,
        }
    }
}

impl ThetaTable {
    pub fn for_type(&self, t: InstanceType) -> f64 {
        match t {
            InstanceType::Safe => self.safe,
            InstanceType::Borderline => self.borderline,
            InstanceType::Rare => self.rare,
            InstanceType::Outlier => self.outlier,
            InstanceType::Majority => {
                unreachable!("theta is only consulted for minority-side types")
            }
        }
    }
}

/// MLSOL parameters. Defaults follow the reference experimental setup:
/// k = 5 neighbors and a generation ratio of 0.3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub k: usize,
    pub gen_ratio: f64,
    pub seed: u64,
    pub theta: ThetaTable,
}

impl SamplerConfig {
    pub fn new(k: usize, gen_ratio: f64, seed: u64) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if !(gen_ratio > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "generation ratio must be > 0, got {gen_ratio}"
            )));
        }
        Ok(Self {
            k,
            gen_ratio,
            seed,
            theta: ThetaTable::default(),
        })
    }
}

/// Location of a synthetic point between its seed and reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationContext {
    /// Relative closeness d_s / (d_s + d_r); 0.5 when the two coincide.
    pub cd: f64,
    pub d_seed: f64,
    pub d_ref: f64,
}

/// Which original instance supplied a synthetic label value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    /// Seed and reference agreed; the shared value was copied.
    Copied,
    Seed,
    Reference,
}

/// One synthetic instance plus the bookkeeping needed to audit it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    pub features: Vec<f64>,
    pub labels: Vec<u8>,
    pub context: GenerationContext,
    pub sources: Vec<LabelSource>,
}

/// Replayable record of one generation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub seed: usize,
    pub reference: usize,
    pub context: GenerationContext,
    pub sources: Vec<LabelSource>,
}

/// Draw a seed index with probability proportional to its weight.
/// Sampling is with replacement across calls.
pub fn select_seed(weights: &WeightVector, rng: &mut RandomStream) -> Result<usize> {
    rng.weighted(weights.values())
}

/// Label assignment for one disagreeing label, given the minority-side
/// view. Returns the assigned bit and its source in the original
/// seed/reference orientation.
pub fn assign_label(
    seed_value: u8,
    seed_type: InstanceType,
    ref_value: u8,
    ref_type: InstanceType,
    cd: f64,
    theta: &ThetaTable,
) -> (u8, LabelSource) {
    debug_assert_ne!(seed_value, ref_value);
    // The swap is scoped to this label only: whichever side carries the
    // minority class plays "seed", and cd flips with it.
    let (min_type, cd_view, seed_is_minority) = if seed_type == InstanceType::Majority {
        (ref_type, 1.0 - cd, false)
    } else {
        (seed_type, cd, true)
    };
    let keep_minority = cd_view <= theta.for_type(min_type);
    match (keep_minority, seed_is_minority) {
        (true, true) | (false, false) => (seed_value, LabelSource::Seed),
        (true, false) | (false, true) => (ref_value, LabelSource::Reference),
    }
}

/// Generate one synthetic instance from a seed and one of its neighbors.
///
/// Features interpolate with an independent uniform draw per coordinate;
/// `cd` then uses the actual Euclidean distances of the resulting point.
pub fn generate_instance(
    seed_features: ArrayView1<'_, f64>,
    seed_labels: ArrayView1<'_, u8>,
    seed_types: &[InstanceType],
    ref_features: ArrayView1<'_, f64>,
    ref_labels: ArrayView1<'_, u8>,
    ref_types: &[InstanceType],
    config: &SamplerConfig,
    rng: &mut RandomStream,
) -> SyntheticInstance {
    let features: Vec<f64> = seed_features
        .iter()
        .zip(ref_features.iter())
        .map(|(&s, &r)| s + rng.uniform() * (r - s))
        .collect();
    let synthetic = ndarray::ArrayView1::from(&features);
    let d_seed = euclidean(synthetic, seed_features).expect("equal dims");
    let d_ref = euclidean(synthetic, ref_features).expect("equal dims");
    let cd = if d_seed + d_ref > 0.0 {
        d_seed / (d_seed + d_ref)
    } else {
        0.5
    };
    let context = GenerationContext { cd, d_seed, d_ref };

    let mut labels = Vec::with_capacity(seed_labels.len());
    let mut sources = Vec::with_capacity(seed_labels.len());
    for j in 0..seed_labels.len() {
        let (ys, yr) = (seed_labels[j], ref_labels[j]);
        if ys == yr {
            labels.push(ys);
            sources.push(LabelSource::Copied);
        } else {
            let (value, source) =
                assign_label(ys, seed_types[j], yr, ref_types[j], cd, &config.theta);
            labels.push(value);
            sources.push(source);
        }
    }
    SyntheticInstance {
        features,
        labels,
        context,
        sources,
    }
}

/// Full MLSOL pipeline returning the oversampled dataset together with the
/// generation trace. The original instances are preserved unmodified as a
/// prefix of the output; exactly `floor(n * gen_ratio)` rows are appended.
pub fn mlsol_with_trace(
    dataset: &MultiLabelDataset,
    config: &SamplerConfig,
) -> Result<(MultiLabelDataset, Vec<TraceRecord>)> {
    let n = dataset.n();
    let gen_num = (n as f64 * config.gen_ratio).floor() as usize;
    if gen_num == 0 {
        return Ok((dataset.clone(), Vec::new()));
    }
    let index = build_knn(dataset, config.k)?;
    let c = compute_opposition(dataset, &index);
    let weights = compute_weights(&c, dataset);
    let types = init_types(&c, dataset, &index);

    let mut rng = RandomStream::new(config.seed);
    let mut features = Vec::with_capacity(gen_num);
    let mut labels = Vec::with_capacity(gen_num);
    let mut trace = Vec::with_capacity(gen_num);
    // Seeds are only ever drawn from the original instances, never from
    // previously generated synthetics.
    for _ in 0..gen_num {
        let seed = select_seed(&weights, &mut rng)?;
        let reference = index.neighbors(seed)[rng.below(config.k)];
        let synthetic = generate_instance(
            dataset.feature_row(seed),
            dataset.label_row(seed),
            &types.row(seed),
            dataset.feature_row(reference),
            dataset.label_row(reference),
            &types.row(reference),
            config,
            &mut rng,
        );
        trace.push(TraceRecord {
            seed,
            reference,
            context: synthetic.context,
            sources: synthetic.sources.clone(),
        });
        features.push(synthetic.features);
        labels.push(synthetic.labels);
    }
    let out = dataset.with_appended(features, labels)?;
    Ok((out, trace))
}

/// MLSOL oversampling; see [`mlsol_with_trace`].
pub fn mlsol(dataset: &MultiLabelDataset, config: &SamplerConfig) -> Result<MultiLabelDataset> {
    mlsol_with_trace(dataset, config).map(|(out, _)| out)
}

/// Audit trace of a resampling run, one record per synthetic instance.
pub fn resample_trace(
    dataset: &MultiLabelDataset,
    config: &SamplerConfig,
) -> Result<Vec<TraceRecord>> {
    mlsol_with_trace(dataset, config).map(|(_, trace)| trace)
}

/// Re-derive a synthetic label matrix from a trace against the original
/// dataset. Used to audit that traces fully determine label assignment.
pub fn replay_labels(dataset: &MultiLabelDataset, trace: &[TraceRecord]) -> Vec<Vec<u8>> {
    trace
        .iter()
        .map(|record| {
            record
                .sources
                .iter()
                .enumerate()
                .map(|(j, source)| match source {
                    LabelSource::Copied | LabelSource::Seed => dataset.label(record.seed, j),
                    LabelSource::Reference => dataset.label(record.reference, j),
                })
                .collect()
        })
        .collect()
}

/// Type matrix used by the sampler; exposed for the `inspect` surface.
pub fn sampler_types(dataset: &MultiLabelDataset, k: usize) -> Result<TypeMatrix> {
    let index = build_knn(dataset, k)?;
    let c = compute_opposition(dataset, &index);
    Ok(init_types(&c, dataset, &index))
}
