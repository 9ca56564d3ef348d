//! Synthetic oversampling of imbalanced multi-label data based on the
//! local distribution of labels (MLSOL), an MLSMOTE baseline, a simple
//! ensemble wrapper over resampled datasets, a built-in binary-relevance
//! kNN scorer, imbalance-aware macro metrics and a reproducible
//! cross-validation benchmark harness.

pub mod benchmark;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod learners;
pub mod local_stats;
pub mod metrics;
pub mod mlsmote;
pub mod neighbors;
pub mod rng;
pub mod sampler;
pub mod simulate;

pub use dataset::{dataset_stats, stratified_folds, DatasetStats, FoldAssignment, MultiLabelDataset};
pub use error::{Error, Result};
pub use local_stats::{InstanceType, OppositionMatrix, TypeMatrix, WeightVector};
pub use neighbors::NeighborIndex;
pub use rng::RandomStream;
pub use sampler::{mlsol, SamplerConfig};
