//! Command-line front door: resample datasets, run benchmark grids with
//! cross-validation, inspect local-distribution statistics, emit reports.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error. Worker count
//! follows rayon's RAYON_NUM_THREADS environment variable.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mlsol::benchmark::{run_benchmark, BenchmarkReport, BenchmarkSpec, ResampleMethod};
use mlsol::dataset::dataset_stats;
use mlsol::io::{load_csv, load_mulan, write_csv};
use mlsol::local_stats::{compute_opposition, compute_weights, init_types};
use mlsol::mlsmote::{mlsmote, MlsmoteConfig};
use mlsol::neighbors::build_knn;
use mlsol::sampler::{mlsol_with_trace, SamplerConfig, TraceRecord};
use mlsol::MultiLabelDataset;

#[derive(Parser)]
#[command(name = "mlsol", version, about = "Multi-label oversampling and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Oversample a dataset and write the result as a CSV pair.
    Resample(ResampleArgs),
    /// Run a cross-validated benchmark grid and write JSON/CSV reports.
    Benchmark(BenchmarkArgs),
    /// Dump opposition, weight and type matrices plus a type histogram.
    Inspect(InspectArgs),
}

/// Feature/label input paths shared by all subcommands. A `.arff` first
/// path switches to the Mulan layout, where the second path is the label
/// XML.
#[derive(Args)]
struct InputArgs {
    /// Feature CSV (or Mulan .arff) path.
    features: PathBuf,
    /// Label CSV (or Mulan label .xml) path.
    labels: PathBuf,
}

impl InputArgs {
    fn load(&self) -> Result<MultiLabelDataset> {
        let ds = if self.features.extension().is_some_and(|e| e == "arff") {
            load_mulan(&self.features, &self.labels)
        } else {
            load_csv(&self.features, &self.labels)
        };
        ds.with_context(|| format!("loading {}", self.features.display()))
    }
}

#[derive(Args)]
struct ResampleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output feature CSV; labels go to a sibling file with `.labels`
    /// inserted before the extension (out.csv -> out.labels.csv).
    out: PathBuf,
    #[arg(long, default_value = "mlsol", value_parser = parse_method)]
    method: ResampleMethod,
    /// Neighborhood size.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Generation ratio P; floor(P * n) instances are generated.
    #[arg(long, default_value_t = 0.3, value_parser = parse_ratio)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the generation trace as CSV (mlsol only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Report stem; writes <out>.json and <out>.csv.
    #[arg(long, default_value = "benchmark_report")]
    out: PathBuf,
    /// Resampling method; repeat the flag to compare several.
    #[arg(long = "method", value_parser = parse_method, default_values = ["none", "mlsol"])]
    methods: Vec<ResampleMethod>,
    /// Ensemble size M; omitted trains single models.
    #[arg(long)]
    ensemble: Option<usize>,
    /// Sampler neighborhood size.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Generation ratio P.
    #[arg(long, default_value_t = 0.3, value_parser = parse_ratio)]
    ratio: f64,
    /// Base learner (only br-knn is implemented).
    #[arg(long, default_value = "br-knn")]
    learner: String,
    /// Base learner neighborhood size.
    #[arg(long, default_value_t = 5)]
    learner_k: usize,
    #[arg(long, default_value_t = 2)]
    folds: usize,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Min-max scale features, fit on each training fold.
    #[arg(long)]
    scale: bool,
    /// Drop labels with fewer positives than folds before running.
    #[arg(long)]
    filter_rare: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Dump stem; writes <out>.opposition.csv, <out>.weights.csv and
    /// <out>.types.csv.
    #[arg(long, default_value = "inspect")]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
}

fn parse_method(s: &str) -> Result<ResampleMethod, String> {
    s.parse()
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let value: f64 = s.parse().map_err(|_| format!("invalid ratio '{s}'"))?;
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err("generation ratio must be > 0".into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Resample(args) => cmd_resample(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
        Command::Inspect(args) => cmd_inspect(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_resample(args: &ResampleArgs) -> Result<()> {
    if args.trace.is_some() && args.method != ResampleMethod::Mlsol {
        bail!("--trace is only available with --method mlsol");
    }
    let dataset = args.input.load()?;
    let n = dataset.n();
    let out = match args.method {
        ResampleMethod::None => dataset.clone(),
        ResampleMethod::Mlsol => {
            let config = SamplerConfig::new(args.k, args.ratio, args.seed)?;
            let (out, trace) = mlsol_with_trace(&dataset, &config)?;
            if let Some(path) = &args.trace {
                write_trace(path, &trace)?;
            }
            out
        }
        ResampleMethod::Mlsmote => mlsmote(&dataset, &MlsmoteConfig::new(args.k, args.seed)?)?,
    };
    let labels_path = labels_sibling(&args.out);
    write_csv(&out, &args.out, &labels_path)?;
    println!(
        "original: {n} instances; generated: {}; wrote {} and {}",
        out.n() - n,
        args.out.display(),
        labels_path.display()
    );
    Ok(())
}

/// out.csv -> out.labels.csv; extensionless paths get ".labels" appended.
fn labels_sibling(out: &Path) -> PathBuf {
    match (out.file_stem(), out.extension()) {
        (Some(stem), Some(ext)) => out.with_file_name(format!(
            "{}.labels.{}",
            stem.to_string_lossy(),
            ext.to_string_lossy()
        )),
        _ => {
            let mut path = out.as_os_str().to_owned();
            path.push(".labels");
            PathBuf::from(path)
        }
    }
}

fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["seed", "reference", "cd", "d_seed", "d_ref", "label_sources"])?;
    for record in trace {
        // one character per label: C copied, S seed, R reference
        let sources: String = record
            .sources
            .iter()
            .map(|s| match s {
                mlsol::sampler::LabelSource::Copied => 'C',
                mlsol::sampler::LabelSource::Seed => 'S',
                mlsol::sampler::LabelSource::Reference => 'R',
            })
            .collect();
        writer.write_record([
            record.seed.to_string(),
            record.reference.to_string(),
            record.context.cd.to_string(),
            record.context.d_seed.to_string(),
            record.context.d_ref.to_string(),
            sources,
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    if args.learner != "br-knn" {
        bail!("unknown learner '{}'; only br-knn is implemented", args.learner);
    }
    let mut dataset = args.input.load()?;
    if args.filter_rare {
        dataset = dataset.filter_rare_labels()?;
    }
    let mut spec = BenchmarkSpec::new(args.methods.clone(), args.seed)?;
    spec.ensemble = args.ensemble;
    spec.sampler_k = args.k;
    spec.gen_ratio = args.ratio;
    spec.learner_k = args.learner_k;
    spec.folds = args.folds;
    spec.repeats = args.repeats;
    spec.scale = args.scale;
    spec.validate()?;

    let report = run_benchmark(&dataset, &spec)?;
    let json_path = args.out.with_extension("json");
    let csv_path = args.out.with_extension("csv");
    std::fs::write(&json_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", json_path.display()))?;
    write_benchmark_csv(&csv_path, &report)?;

    for avg in &report.averages {
        println!(
            "{:<8} macro-F {:.4}  macro-AUC-ROC {:.4}  macro-AUCPR {:.4}",
            avg.method.name(),
            avg.macro_f,
            avg.macro_auc_roc,
            avg.macro_aucpr
        );
    }
    println!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

/// One row per fold run, then one "avg" row per method.
fn write_benchmark_csv(path: &Path, report: &BenchmarkReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "method",
        "ensemble",
        "repeat",
        "fold",
        "run_seed",
        "train_size",
        "test_size",
        "resampled_size",
        "synthetic_count",
        "macro_f",
        "macro_auc_roc",
        "macro_aucpr",
    ])?;
    let ensemble = |e: Option<usize>| e.map_or(String::new(), |m| m.to_string());
    for run in &report.runs {
        writer.write_record([
            run.method.name().to_string(),
            ensemble(run.ensemble),
            run.repeat.to_string(),
            run.fold.to_string(),
            run.run_seed.to_string(),
            run.train_size.to_string(),
            run.test_size.to_string(),
            run.resampled_size.to_string(),
            run.synthetic_count.to_string(),
            run.report.macro_f.to_string(),
            run.report.macro_auc_roc.to_string(),
            run.report.macro_aucpr.to_string(),
        ])?;
    }
    for avg in &report.averages {
        writer.write_record([
            avg.method.name().to_string(),
            ensemble(avg.ensemble),
            "avg".to_string(),
            "avg".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            avg.macro_f.to_string(),
            avg.macro_auc_roc.to_string(),
            avg.macro_aucpr.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_inspect(args: &InspectArgs) -> Result<()> {
    let dataset = args.input.load()?;
    let index = build_knn(&dataset, args.k)?;
    let c = compute_opposition(&dataset, &index);
    let weights = compute_weights(&c, &dataset);
    let types = init_types(&c, &dataset, &index);
    let stats = dataset_stats(&dataset);

    let stem = args.out.to_string_lossy();
    let header: Vec<String> = std::iter::once("instance".to_string())
        .chain(dataset.label_names().iter().cloned())
        .collect();

    let opp_path = PathBuf::from(format!("{stem}.opposition.csv"));
    let mut writer = csv::Writer::from_path(&opp_path)?;
    writer.write_record(&header)?;
    for i in 0..dataset.n() {
        let row: Vec<String> = std::iter::once(i.to_string())
            .chain((0..dataset.num_labels()).map(|j| c.get(i, j).to_string()))
            .collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;

    let weights_path = PathBuf::from(format!("{stem}.weights.csv"));
    let mut writer = csv::Writer::from_path(&weights_path)?;
    writer.write_record(["instance", "weight"])?;
    for (i, w) in weights.values().iter().enumerate() {
        writer.write_record([i.to_string(), w.to_string()])?;
    }
    writer.flush()?;

    let types_path = PathBuf::from(format!("{stem}.types.csv"));
    let mut writer = csv::Writer::from_path(&types_path)?;
    writer.write_record(&header)?;
    for i in 0..dataset.n() {
        let row: Vec<String> = std::iter::once(i.to_string())
            .chain((0..dataset.num_labels()).map(|j| types.get(i, j).code().to_string()))
            .collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;

    println!(
        "n={} d={} q={} mean ImR={:.3}",
        dataset.n(),
        dataset.num_features(),
        dataset.num_labels(),
        stats.mean_imbalance_ratio
    );
    println!("{:<16} {:>6} {:>6} {:>6} {:>6} {:>6}", "label", "SF", "BD", "RR", "OT", "MJ");
    for j in 0..dataset.num_labels() {
        let mut counts = std::collections::BTreeMap::new();
        for i in 0..dataset.n() {
            *counts.entry(types.get(i, j).code()).or_insert(0usize) += 1;
        }
        let get = |code: &str| counts.get(code).copied().unwrap_or(0);
        println!(
            "{:<16} {:>6} {:>6} {:>6} {:>6} {:>6}",
            dataset.label_names()[j],
            get("SF"),
            get("BD"),
            get("RR"),
            get("OT"),
            get("MJ")
        );
    }
    println!(
        "wrote {}, {} and {}",
        opp_path.display(),
        weights_path.display(),
        types_path.display()
    );
    Ok(())
}
