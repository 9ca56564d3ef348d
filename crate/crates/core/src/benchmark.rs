//! Reproducible cross-validation benchmark: resample the training fold
//! only, train a learner (optionally an ensemble), evaluate on the
//! untouched test fold, and log enough provenance to audit the protocol.

use std::cell::RefCell;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{stratified_folds, MinMaxScaler, MultiLabelDataset};
use crate::ensemble::{predict_ensemble, train_emls};
use crate::error::{Error, Result};
use crate::learners::{bipartition, train_br_knn, Learner};
use crate::metrics::{evaluate, MetricsReport};
use crate::mlsmote::{mlsmote, MlsmoteConfig};
use crate::rng::derive_seed;
use crate::sampler::{mlsol_with_trace, SamplerConfig};

/// Resampling method applied to each training fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMethod {
    None,
    Mlsol,
    Mlsmote,
}

impl ResampleMethod {
    pub fn name(self) -> &'static str {
        match self {
            ResampleMethod::None => "none",
            ResampleMethod::Mlsol => "mlsol",
            ResampleMethod::Mlsmote => "mlsmote",
        }
    }
}

impl std::str::FromStr for ResampleMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(ResampleMethod::None),
            "mlsol" => Ok(ResampleMethod::Mlsol),
            "mlsmote" => Ok(ResampleMethod::Mlsmote),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

/// Benchmark grid. Defaults mirror the reference setup: k = 5 neighbors,
/// generation ratio 0.3, ensemble size 5, 5 x 2-fold stratified CV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub methods: Vec<ResampleMethod>,
    /// Ensemble size applied to every method; `None` trains single models.
    pub ensemble: Option<usize>,
    pub sampler_k: usize,
    pub gen_ratio: f64,
    pub learner_k: usize,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Min-max feature scaling fit on each training fold (default off).
    pub scale: bool,
}

impl BenchmarkSpec {
    pub fn new(methods: Vec<ResampleMethod>, seed: u64) -> Result<Self> {
        let spec = Self {
            methods,
            ensemble: None,
            sampler_k: 5,
            gen_ratio: 0.3,
            learner_k: 5,
            folds: 2,
            repeats: 5,
            seed,
            scale: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("at least one method required".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidParameter("folds must be >= 2".into()));
        }
        if self.repeats < 1 {
            return Err(Error::InvalidParameter("repeats must be >= 1".into()));
        }
        if let Some(m) = self.ensemble {
            if m < 1 {
                return Err(Error::InvalidParameter("ensemble size must be >= 1".into()));
            }
        }
        if !(self.gen_ratio > 0.0) {
            return Err(Error::InvalidParameter("generation ratio must be > 0".into()));
        }
        Ok(())
    }
}

/// One (method, repeat, fold) run with its provenance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRun {
    pub method: ResampleMethod,
    pub ensemble: Option<usize>,
    pub repeat: usize,
    pub fold: usize,
    /// Seed of the random stream used for resampling in this run.
    pub run_seed: u64,
    /// Original-dataset ids of the training fold.
    pub train_indices: Vec<usize>,
    /// Original-dataset ids of the test fold; never resampled.
    pub test_indices: Vec<usize>,
    pub train_size: usize,
    pub test_size: usize,
    /// Training-set size after resampling (summed over ensemble members).
    pub resampled_size: usize,
    pub synthetic_count: usize,
    /// (seed, reference) original-dataset ids for every synthetic instance
    /// whose sampler exposes a trace.
    pub synthetic_parents: Vec<(usize, usize)>,
    pub report: MetricsReport,
}

/// Mean macro metrics per method over all fold runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodAverage {
    pub method: ResampleMethod,
    pub ensemble: Option<usize>,
    pub macro_f: f64,
    pub macro_auc_roc: f64,
    pub macro_aucpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub spec: BenchmarkSpec,
    pub runs: Vec<FoldRun>,
    pub averages: Vec<MethodAverage>,
}

/// Run the full benchmark grid over a (filtered) dataset.
pub fn run_benchmark(dataset: &MultiLabelDataset, spec: &BenchmarkSpec) -> Result<BenchmarkReport> {
    spec.validate()?;
    let assignments = stratified_folds(dataset, spec.folds, spec.repeats, spec.seed)?;
    let mut runs = Vec::new();
    for assignment in &assignments {
        for fold in 0..spec.folds {
            let train_indices = assignment.train_indices(fold);
            let test_indices = assignment.test_indices(fold);
            let train = dataset.subset(&train_indices)?;
            let test = dataset.subset(&test_indices)?;
            let (train, test) = if spec.scale {
                let scaler = MinMaxScaler::fit(&train);
                (scaler.transform(&train)?, scaler.transform(&test)?)
            } else {
                (train, test)
            };
            for (mi, &method) in spec.methods.iter().enumerate() {
                let run_seed =
                    derive_seed(spec.seed, &[1, assignment.repeat_index as u64, fold as u64, mi as u64]);
                runs.push(run_one(
                    spec,
                    method,
                    assignment.repeat_index,
                    fold,
                    run_seed,
                    &train,
                    &train_indices,
                    &test,
                    &test_indices,
                )?);
            }
        }
    }
    let averages = summarize(spec, &runs);
    Ok(BenchmarkReport {
        spec: spec.clone(),
        runs,
        averages,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    spec: &BenchmarkSpec,
    method: ResampleMethod,
    repeat: usize,
    fold: usize,
    run_seed: u64,
    train: &MultiLabelDataset,
    train_indices: &[usize],
    test: &MultiLabelDataset,
    test_indices: &[usize],
) -> Result<FoldRun> {
    let q = train.num_labels();
    let parents: RefCell<Vec<(usize, usize)>> = RefCell::new(Vec::new());
    let resampled_size: RefCell<usize> = RefCell::new(0);
    let sampler = |data: &MultiLabelDataset, seed: u64| -> Result<MultiLabelDataset> {
        let out = match method {
            ResampleMethod::None => data.clone(),
            ResampleMethod::Mlsol => {
                let config = SamplerConfig::new(spec.sampler_k, spec.gen_ratio, seed)?;
                let (out, trace) = mlsol_with_trace(data, &config)?;
                parents.borrow_mut().extend(
                    trace
                        .iter()
                        .map(|t| (train_indices[t.seed], train_indices[t.reference])),
                );
                out
            }
            ResampleMethod::Mlsmote => mlsmote(data, &MlsmoteConfig::new(spec.sampler_k, seed)?)?,
        };
        *resampled_size.borrow_mut() += out.n();
        Ok(out)
    };

    let (scores, preds) = match spec.ensemble {
        Some(m) => {
            let model = train_emls(
                train,
                &sampler,
                |data| train_br_knn(data, spec.learner_k),
                m,
                run_seed,
            )?;
            let mut scores = Array2::zeros((test.n(), q));
            let mut preds = Array2::zeros((test.n(), q));
            for i in 0..test.n() {
                let (s, b) = predict_ensemble(&model, test.feature_row(i))?;
                for j in 0..q {
                    scores[(i, j)] = s[j];
                    preds[(i, j)] = b[j];
                }
            }
            (scores, preds)
        }
        None => {
            let resampled = sampler(train, run_seed)?;
            let model = train_br_knn(resampled, spec.learner_k)?;
            // Single models use the base learner's default cut of 0.5.
            let thresholds = vec![0.5; q];
            let mut scores = Array2::zeros((test.n(), q));
            let mut preds = Array2::zeros((test.n(), q));
            for i in 0..test.n() {
                let s = model.predict_scores(test.feature_row(i))?;
                let b = bipartition(&s, &thresholds);
                for j in 0..q {
                    scores[(i, j)] = s[j];
                    preds[(i, j)] = b[j];
                }
            }
            (scores, preds)
        }
    };
    let report = evaluate(&scores, &preds, test.labels())?;
    let members = spec.ensemble.unwrap_or(1);
    let resampled_size = *resampled_size.borrow();
    Ok(FoldRun {
        method,
        ensemble: spec.ensemble,
        repeat,
        fold,
        run_seed,
        train_indices: train_indices.to_vec(),
        test_indices: test_indices.to_vec(),
        train_size: train.n(),
        test_size: test.n(),
        resampled_size,
        synthetic_count: resampled_size - members * train.n(),
        synthetic_parents: parents.into_inner(),
        report,
    })
}

fn summarize(spec: &BenchmarkSpec, runs: &[FoldRun]) -> Vec<MethodAverage> {
    spec.methods
        .iter()
        .map(|&method| {
            let mine: Vec<&FoldRun> = runs.iter().filter(|r| r.method == method).collect();
            let count = mine.len() as f64;
            MethodAverage {
                method,
                ensemble: spec.ensemble,
                macro_f: mine.iter().map(|r| r.report.macro_f).sum::<f64>() / count,
                macro_auc_roc: mine.iter().map(|r| r.report.macro_auc_roc).sum::<f64>() / count,
                macro_aucpr: mine.iter().map(|r| r.report.macro_aucpr).sum::<f64>() / count,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::clustered_overlap;

    fn spec(methods: Vec<ResampleMethod>, ensemble: Option<usize>) -> BenchmarkSpec {
        let mut spec = BenchmarkSpec::new(methods, 77).unwrap();
        spec.ensemble = ensemble;
        spec
    }

    #[test]
    fn validates_grid() {
        assert!(BenchmarkSpec::new(vec![], 0).is_err());
        let mut s = BenchmarkSpec::new(vec![ResampleMethod::None], 0).unwrap();
        s.folds = 1;
        assert!(s.validate().is_err());
        s.folds = 2;
        s.repeats = 0;
        assert!(s.validate().is_err());
        s.repeats = 1;
        s.ensemble = Some(0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn run_counts_and_averages() {
        let ds = clustered_overlap(80, 6);
        let spec = spec(vec![ResampleMethod::None, ResampleMethod::Mlsol], None);
        let report = run_benchmark(&ds, &spec).unwrap();
        // 2 methods x 5 repeats x 2 folds
        assert_eq!(report.runs.len(), 20);
        assert_eq!(report.averages.len(), 2);
        for avg in &report.averages {
            assert!((0.0..=1.0).contains(&avg.macro_f));
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let ds = clustered_overlap(80, 8);
        let mut s = spec(vec![ResampleMethod::Mlsol], Some(2));
        s.repeats = 1;
        let a = run_benchmark(&ds, &s).unwrap();
        let b = run_benchmark(&ds, &s).unwrap();
        assert_eq!(a, b);
        let a_json = serde_json::to_string(&a).unwrap();
        let b_json = serde_json::to_string(&b).unwrap();
        assert_eq!(a_json, b_json);
    }

    #[test]
    fn test_folds_stay_untouched_and_parents_come_from_training() {
        let ds = clustered_overlap(100, 10);
        let mut s = spec(
            vec![ResampleMethod::None, ResampleMethod::Mlsol, ResampleMethod::Mlsmote],
            None,
        );
        s.repeats = 2;
        let report = run_benchmark(&ds, &s).unwrap();
        for run in &report.runs {
            assert_eq!(run.test_size, run.test_indices.len());
            assert_eq!(run.train_size, run.train_indices.len());
            assert_eq!(run.train_size + run.test_size, ds.n());
            assert!(run
                .train_indices
                .iter()
                .all(|i| !run.test_indices.contains(i)));
            match run.method {
                ResampleMethod::None => {
                    assert_eq!(run.synthetic_count, 0);
                    assert!(run.synthetic_parents.is_empty());
                }
                ResampleMethod::Mlsol => {
                    assert_eq!(run.synthetic_count, run.train_size * 3 / 10);
                    assert_eq!(run.synthetic_parents.len(), run.synthetic_count);
                    for &(s, r) in &run.synthetic_parents {
                        assert!(run.train_indices.contains(&s));
                        assert!(run.train_indices.contains(&r));
                        assert!(!run.test_indices.contains(&s));
                        assert!(!run.test_indices.contains(&r));
                    }
                }
                ResampleMethod::Mlsmote => {
                    assert_eq!(
                        run.resampled_size,
                        run.train_size + run.synthetic_count
                    );
                }
            }
        }
    }

    #[test]
    fn ensemble_runs_resample_per_member() {
        let ds = clustered_overlap(60, 12);
        let mut s = spec(vec![ResampleMethod::Mlsol], Some(3));
        s.repeats = 1;
        let report = run_benchmark(&ds, &s).unwrap();
        for run in &report.runs {
            // three members each resampled the training fold once
            assert_eq!(run.resampled_size, 3 * (run.train_size + run.train_size * 3 / 10));
            assert_eq!(run.synthetic_parents.len(), 3 * (run.train_size * 3 / 10));
        }
    }

    #[test]
    fn scaling_flag_changes_features_not_protocol() {
        let ds = clustered_overlap(60, 14);
        let mut s = spec(vec![ResampleMethod::None], None);
        s.repeats = 1;
        s.scale = true;
        let scaled = run_benchmark(&ds, &s).unwrap();
        s.scale = false;
        let plain = run_benchmark(&ds, &s).unwrap();
        assert_eq!(
            scaled.runs[0].train_indices,
            plain.runs[0].train_indices
        );
    }

    #[test]
    fn method_names_round_trip() {
        for method in [ResampleMethod::None, ResampleMethod::Mlsol, ResampleMethod::Mlsmote] {
            assert_eq!(method.name().parse::<ResampleMethod>().unwrap(), method);
        }
        assert!("smote".parse::<ResampleMethod>().is_err());
    }
}
