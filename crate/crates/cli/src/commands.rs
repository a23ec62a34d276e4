use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kexpand::dataio::{self, Dataset};
use kexpand::exact_kernel::{kernel_check as run_kernel_check, random_pairs};
use kexpand::fastfood::{next_pow2, FastfoodMap, FeatureMapSpec, KernelKind};
use kexpand::linear_model::{self, Checkpoint, FeatureConfig, FeatureScale, TrainConfig};
use kexpand::wht::{bench_wht as run_bench, check_pow2, BenchConfig, BenchRecord};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::manifest::{now_ms, RunManifest};
use crate::{BenchArgs, EvalArgs, FeaturesArgs, KernelArg, KernelArgs, KernelCheckArgs, ScaleArg, TrainArgs};

/// `lo..hi` expands to the doubling sequence; otherwise a comma list.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let parse = |s: &str| -> Result<usize> {
        let v = s.trim().parse::<usize>().map_err(|_| CliError::Validation(format!("bad size '{}'", s.trim())))?;
        check_pow2(v)?;
        Ok(v)
    };
    let sizes = if let Some((lo, hi)) = text.split_once("..") {
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return Err(CliError::Validation(format!("empty size range {lo}..{hi}")));
        }
        std::iter::successors(Some(lo), |&s| (s < hi).then_some(s * 2)).collect()
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    if sizes.is_empty() {
        return Err(CliError::Validation("no sizes given".into()));
    }
    Ok(sizes)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("in-memory JSON") + "\n"
}

#[derive(Serialize)]
struct KernelCheckReport {
    dims: usize,
    #[serde(rename = "D")]
    d: usize,
    pairs: usize,
    mean_err: f64,
    max_err: f64,
    ref_scale: f64,
    manifest: RunManifest,
}

#[derive(Serialize)]
struct EvalReport {
    samples: usize,
    accuracy: f64,
    mean_loss: f64,
    manifest: RunManifest,
}

pub fn bench_wht(args: &BenchArgs) -> Result<()> {
    let started = now_ms();
    let sizes = parse_sizes(&args.sizes)?;
    let config = BenchConfig { reps: args.reps, naive_cutoff: args.naive_cutoff, ..BenchConfig::default() };
    let records = run_bench(&sizes, &config)?;
    let mut csv = String::from(BenchRecord::CSV_HEADER);
    csv.push('\n');
    for line in records.iter().flat_map(BenchRecord::csv_rows) {
        csv.push_str(&line);
        csv.push('\n');
    }
    write_output(args.out.as_deref(), &csv)?;
    if let Some(out) = &args.out {
        RunManifest::new("bench-wht", args, started).finish(vec![out.clone()]).write_beside(out)?;
    }
    Ok(())
}

pub fn feature_config(args: &KernelArgs, dim: usize) -> Result<FeatureConfig> {
    let kernel = match args.kernel {
        KernelArg::None => return Ok(FeatureConfig::Raw { dim }),
        KernelArg::Rbf => KernelKind::Rbf { sigma: args.sigma },
        KernelArg::Matern => KernelKind::RbfMatern { sigma: args.sigma, t: args.t },
    };
    let scale = match args.feature_scale {
        ScaleArg::Unit => FeatureScale::Unit,
        ScaleArg::Normalized => FeatureScale::Normalized,
    };
    Ok(FeatureConfig::Kernel { spec: FeatureMapSpec::new(dim, args.expansions, kernel, args.seed)?, scale })
}

fn load_pair(images: &Path, labels: &Path, subset: Option<usize>, seed: u64) -> Result<Dataset> {
    let data = dataio::load_idx(images, labels)?;
    Ok(match subset {
        Some(count) => dataio::subset(&data, count, seed)?,
        None => data,
    })
}

pub fn features(args: &FeaturesArgs) -> Result<()> {
    let started = now_ms();
    if args.kernel.kernel == KernelArg::None {
        return Err(CliError::Validation("features needs --kernel rbf or matern".into()));
    }
    let data = match &args.labels {
        Some(labels) => dataio::load_idx(&args.images, labels)?,
        None => {
            let bytes = fs::read(&args.images).map_err(|e| CliError::io(&args.images, e))?;
            let (n, dim, pixels) = dataio::parse_idx_images(&args.images, &bytes)?;
            Dataset::new(pixels, vec![0; n], dim, 1)?
        }
    };
    let data = match args.subset {
        Some(count) => dataio::subset(&data, count, args.kernel.seed)?,
        None => data,
    };
    let config = feature_config(&args.kernel, data.dim())?;
    let source = config.build()?;
    let rows = linear_model::compute_features(source.as_ref(), &data)?;
    let width = config.output_dim();
    if args.labels.is_some() {
        Dataset::new(rows, data.labels().to_vec(), width, data.classes())?.write_dump(&args.out)?;
    } else {
        dataio::write_matrix(&args.out, data.len(), width, &rows)?;
    }
    let mut manifest = RunManifest::new("features", args, started);
    manifest.flags["feature_config"] = Value::String(config.to_string());
    manifest.finish(vec![args.out.clone()]).write_beside(&args.out)?;
    Ok(())
}

pub fn kernel_check(args: &KernelCheckArgs) -> Result<()> {
    let started = now_ms();
    if args.dim == 0 {
        return Err(CliError::Validation("--dim must be >= 1".into()));
    }
    let n = next_pow2(args.dim);
    if args.features == 0 || args.features % n != 0 {
        return Err(CliError::Validation(format!(
            "--features {} must be a positive multiple of the padded dimension {n}",
            args.features
        )));
    }
    let spec = FeatureMapSpec::new(args.dim, args.features / n, KernelKind::Rbf { sigma: args.sigma }, args.seed)?;
    let map = FastfoodMap::new(spec)?;
    let report = run_kernel_check(&map, &random_pairs(args.dim, args.pairs, args.sigma, args.seed))?;
    if !report.mean_err.is_finite() || !report.max_err.is_finite() {
        return Err(CliError::Numeric("kernel error is not finite".into()));
    }
    let outputs: Vec<PathBuf> = args.out.iter().cloned().collect();
    let manifest = RunManifest::new("kernel-check", args, started).finish(outputs);
    let body = KernelCheckReport {
        dims: report.dims,
        d: report.features,
        pairs: report.pairs,
        mean_err: report.mean_err,
        max_err: report.max_err,
        ref_scale: report.ref_scale,
        manifest,
    };
    write_output(args.out.as_deref(), &to_json(&body))
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let started = now_ms();
    let seed = args.kernel.seed;
    let train_set = load_pair(&args.train_images, &args.train_labels, args.subset_train, seed)?;
    let test_set = load_pair(&args.test_images, &args.test_labels, args.subset_test, seed)?;
    if train_set.dim() != test_set.dim() {
        return Err(CliError::Validation(format!(
            "train images have {} pixels, test images {}",
            train_set.dim(),
            test_set.dim()
        )));
    }
    let classes = train_set.classes().max(test_set.classes());
    let train_set = Dataset::new(train_set.features().to_vec(), train_set.labels().to_vec(), train_set.dim(), classes)?;
    let test_set = Dataset::new(test_set.features().to_vec(), test_set.labels().to_vec(), test_set.dim(), classes)?;

    let config = feature_config(&args.kernel, train_set.dim())?;
    let source = config.build()?;
    let mut train_config = TrainConfig::new(args.lr, args.batch, args.epochs, args.l2, args.shuffle_seed.unwrap_or(seed))?;
    train_config.precompute = args.precompute;
    let (model, metrics) = linear_model::train(source.as_ref(), &train_set, &test_set, &train_config)?;

    let csv = metrics.to_csv();
    write_output(args.metrics_out.as_deref(), &csv)?;
    let mut outputs: Vec<PathBuf> = args.metrics_out.iter().cloned().collect();
    if let Some(path) = &args.model_out {
        Checkpoint { features: config.clone(), model }.save(path)?;
        outputs.push(path.clone());
        outputs.push(Checkpoint::config_path(path));
    }
    let mut manifest = RunManifest::new("train", args, started);
    manifest.flags["feature_config"] = Value::String(config.to_string());
    manifest.flags["param_count"] = json!(classes * (config.output_dim() + 1));
    let manifest = manifest.finish(outputs.clone());
    for out in args.metrics_out.iter().chain(&args.model_out) {
        manifest.write_beside(out)?;
    }
    if let Some(last) = metrics.last() {
        eprintln!("epoch {}: train_loss {:.6} test_acc {:.4}", last.epoch, last.train_loss, last.test_acc);
    }
    if metrics.records.iter().any(|r| !r.train_loss.is_finite()) {
        return Err(CliError::Numeric("training loss diverged to a non-finite value".into()));
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let started = now_ms();
    let checkpoint = Checkpoint::load(&args.model)?;
    let test_set = load_pair(&args.test_images, &args.test_labels, args.subset_test, args.seed)?;
    if test_set.dim() != checkpoint.features.input_dim() {
        return Err(CliError::Validation(format!(
            "model expects {} inputs, test images have {}",
            checkpoint.features.input_dim(),
            test_set.dim()
        )));
    }
    let classes = checkpoint.model.classes();
    if test_set.classes() > classes {
        return Err(CliError::Validation(format!("test labels need {} classes, model has {classes}", test_set.classes())));
    }
    let test_set = Dataset::new(test_set.features().to_vec(), test_set.labels().to_vec(), test_set.dim(), classes)?;
    let source = checkpoint.features.build()?;
    let result = linear_model::evaluate(&checkpoint.model, source.as_ref(), &test_set)?;
    if !result.mean_loss.is_finite() {
        return Err(CliError::Numeric("evaluation loss is not finite".into()));
    }
    let outputs: Vec<PathBuf> = args.out.iter().cloned().collect();
    let manifest = RunManifest::new("eval", args, started).finish(outputs);
    let body = EvalReport { samples: test_set.len(), accuracy: result.accuracy, mean_loss: result.mean_loss, manifest };
    write_output(args.out.as_deref(), &to_json(&body))
}
