//! Command-line front end: matching, feature extraction, training,
//! prediction, evaluation, ground-plane clustering, and seeded end-to-end
//! experiments.
//!
//! Defaults resolve in three layers: built-in values, then a `--config`
//! file of `key = value` lines, then explicit flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use scenesent::classifier::{train, Dataset, LinearModel, TrainConfig};
use scenesent::features::PoseletMode;
use scenesent::geometry::{load_annotations, ImageAnnotation, LabelAxis};
use scenesent::grouping::GroupingConfig;
use scenesent::matching::{build_person_records, PersonRecord, DEFAULT_FACE_IOU_THRESHOLD};
use scenesent::orientation::{train_orientation, HogConfig};
use scenesent::pipeline::{
    cluster_annotations, evaluate_predictions, extract_features, labels_for_axis, remap_binary,
    run_experiment, render_confusion, EvalReport, ExperimentConfig, FeatureSet, FeatureTable,
    IntensityMode, PipelineConfig,
};
use scenesent::{Error, Result};

/// Group sentiment analysis over annotated people scenes.
#[derive(Parser)]
#[command(name = "scenesent", version, about)]
struct Cli {
    /// Root random seed (config key `seed`; default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Defaults file of `key = value` lines; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dedupe faces and attach faces/torsos to persons.
    Match(MatchArgs),
    /// Write per-image feature vectors to CSV.
    Features(FeaturesArgs),
    /// Train a sentiment or orientation model.
    Train(TrainArgs),
    /// Predict labels for a feature CSV with a trained model.
    Predict(PredictArgs),
    /// Score a model's predictions against labeled annotations.
    Evaluate(EvaluateArgs),
    /// Cluster people on the ground plane, image by image.
    Cluster(ClusterArgs),
    /// Full extract -> split -> train -> evaluate run with report artifacts.
    Experiment(ExperimentArgs),
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;
    let seed = match cli.seed {
        Some(s) => s,
        None => file.num("seed")?.unwrap_or(0),
    };
    match &cli.command {
        Command::Match(args) => cmd_match(&file, args),
        Command::Features(args) => cmd_features(&file, seed, args),
        Command::Train(args) => cmd_train(&file, seed, args),
        Command::Predict(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(&file, args),
        Command::Cluster(args) => cmd_cluster(&file, seed, args),
        Command::Experiment(args) => cmd_experiment(&file, seed, args),
    }
}

/// Config keys a `--config` file may set; anything else is a typo.
const KNOWN_KEYS: &[&str] = &[
    "seed",
    "test_fraction",
    "axis",
    "intensity_mode",
    "feature_set",
    "lambda",
    "epochs",
    "eta0",
    "face_iou_threshold",
    "poselet_threshold",
    "poselet_mode",
    "bbox_normalized",
    "color_normalized",
    "k_face",
    "grouping_lambda",
    "k_min",
    "k_max",
    "restarts",
    "max_iters",
    "smile_model",
    "orientation_model",
];

/// Parsed `--config` file contents (empty when no file was given).
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::parse(path, i + 1, "expected `key = value`"))?;
                let key = key.trim();
                if !KNOWN_KEYS.contains(&key) {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        format!("unknown config key `{key}`"),
                    ));
                }
                map.insert(key.to_string(), value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.0
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| {
                    Error::InvalidInput(format!("config key `{key}`: invalid value `{v}`: {e}"))
                })
            })
            .transpose()
    }

    fn with<T>(&self, key: &str, parse: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
        self.0.get(key).map(|v| parse(v)).transpose()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.0.get(key).map(PathBuf::from)
    }
}

/// SVM hyperparameters shared by `train` and `experiment`.
#[derive(Args)]
struct SvmArgs {
    /// Hinge-loss regularization strength.
    #[arg(long)]
    lambda: Option<f64>,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Initial learning rate.
    #[arg(long)]
    eta0: Option<f64>,
}

fn train_config(file: &FileConfig, seed: u64, svm: &SvmArgs) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    Ok(TrainConfig {
        lambda: svm.lambda.or(file.num("lambda")?).unwrap_or(d.lambda),
        epochs: svm.epochs.or(file.num("epochs")?).unwrap_or(d.epochs),
        eta0: svm.eta0.or(file.num("eta0")?).unwrap_or(d.eta0),
        seed,
    })
}

/// Ground-plane clustering knobs.
#[derive(Args)]
struct GroupingArgs {
    /// Depth-law constant: depth = k_face / face_height.
    #[arg(long)]
    k_face: Option<f64>,
    /// Distance weight in the K-selection potential.
    #[arg(long)]
    grouping_lambda: Option<f64>,
    /// Smallest K tried.
    #[arg(long)]
    k_min: Option<usize>,
    /// Largest K tried.
    #[arg(long)]
    k_max: Option<usize>,
    /// Independent k-means restarts per K.
    #[arg(long)]
    restarts: Option<usize>,
    /// Iteration cap per restart.
    #[arg(long)]
    max_iters: Option<usize>,
}

fn grouping_config(file: &FileConfig, args: &GroupingArgs) -> Result<GroupingConfig> {
    let d = GroupingConfig::default();
    Ok(GroupingConfig {
        k_face: args.k_face.or(file.num("k_face")?).unwrap_or(d.k_face),
        lambda: args
            .grouping_lambda
            .or(file.num("grouping_lambda")?)
            .unwrap_or(d.lambda),
        k_min: args.k_min.or(file.num("k_min")?).unwrap_or(d.k_min),
        k_max: args.k_max.or(file.num("k_max")?).unwrap_or(d.k_max),
        restarts: args.restarts.or(file.num("restarts")?).unwrap_or(d.restarts),
        max_iters: args
            .max_iters
            .or(file.num("max_iters")?)
            .unwrap_or(d.max_iters),
    })
}

/// Featurization knobs shared by `features` and `experiment`.
#[derive(Args)]
struct PipelineArgs {
    /// Feature set: color_hist|bbox|emotion|poselet|emotion+poselet|full.
    #[arg(long)]
    feature_set: Option<String>,
    /// Smile/neutral face model (needed by emotion-bearing sets).
    #[arg(long)]
    smile_model: Option<PathBuf>,
    /// Direction model for annotations without orientations.
    #[arg(long)]
    orientation_model: Option<PathBuf>,
    /// IoU above which two face boxes count as duplicates.
    #[arg(long)]
    face_iou_threshold: Option<f64>,
    /// Minimum poselet score kept in the histogram.
    #[arg(long)]
    poselet_threshold: Option<f64>,
    /// Poselet vote: count|score.
    #[arg(long)]
    poselet_mode: Option<String>,
    /// Keep raw pixel coordinates in the box baseline.
    #[arg(long)]
    bbox_raw: bool,
    /// Keep raw counts in the color histogram.
    #[arg(long)]
    color_raw: bool,
    #[command(flatten)]
    grouping: GroupingArgs,
}

fn pipeline_config(
    file: &FileConfig,
    seed: u64,
    args: &PipelineArgs,
    default_set: FeatureSet,
) -> Result<PipelineConfig> {
    let d = PipelineConfig::default();
    let feature_set = match &args.feature_set {
        Some(s) => FeatureSet::parse(s)?,
        None => file
            .with("feature_set", FeatureSet::parse)?
            .unwrap_or(default_set),
    };
    let poselet_mode = match &args.poselet_mode {
        Some(s) => PoseletMode::parse(s)?,
        None => file
            .with("poselet_mode", PoseletMode::parse)?
            .unwrap_or(d.poselet_mode),
    };
    Ok(PipelineConfig {
        feature_set,
        seed,
        face_iou_threshold: args
            .face_iou_threshold
            .or(file.num("face_iou_threshold")?)
            .unwrap_or(d.face_iou_threshold),
        poselet_threshold: args
            .poselet_threshold
            .or(file.num("poselet_threshold")?)
            .unwrap_or(d.poselet_threshold),
        poselet_mode,
        bbox_normalized: if args.bbox_raw {
            false
        } else {
            file.num("bbox_normalized")?.unwrap_or(true)
        },
        color_normalized: if args.color_raw {
            false
        } else {
            file.num("color_normalized")?.unwrap_or(true)
        },
        pyramid: d.pyramid,
        hog: d.hog,
        grouping: grouping_config(file, &args.grouping)?,
        smile_model: args
            .smile_model
            .clone()
            .or_else(|| file.path("smile_model")),
        orientation_model: args
            .orientation_model
            .clone()
            .or_else(|| file.path("orientation_model")),
    })
}

fn resolve_axis(file: &FileConfig, flag: Option<&str>) -> Result<LabelAxis> {
    match flag {
        Some(s) => LabelAxis::parse(s),
        None => file.with("axis", LabelAxis::parse)?.ok_or_else(|| {
            Error::InvalidInput(
                "an --axis is required (interaction|activity|happiness|focus)".into(),
            )
        }),
    }
}

fn resolve_intensity(file: &FileConfig, flag: Option<&str>) -> Result<IntensityMode> {
    match flag {
        Some(s) => IntensityMode::parse(s),
        None => Ok(file
            .with("intensity_mode", IntensityMode::parse)?
            .unwrap_or(IntensityMode::FourWay)),
    }
}

/// Pretty JSON to a file, or stdout when no path was given.
fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Model(format!("serializing output: {e}")))?;
    match out {
        Some(path) => fs::write(path, json + "\n").map_err(|e| Error::io(path, e)),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

/// CSV to a file, or stdout when no path was given.
fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .and_then(|_| rows.iter().try_for_each(|r| writer.write_record(r)))
        .map_err(|e| Error::InvalidInput(format!("building csv: {e}")))?;
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidInput(format!("building csv: {e}")))?;
    match out {
        Some(path) => fs::write(path, &bytes).map_err(|e| Error::io(path, e)),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    /// Annotations to process (JSON lines).
    #[arg(long)]
    annotations: PathBuf,
    /// IoU above which two face boxes count as duplicates.
    #[arg(long)]
    face_iou_threshold: Option<f64>,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MatchedImage {
    image: String,
    records: Vec<PersonRecord>,
}

fn cmd_match(file: &FileConfig, args: &MatchArgs) -> Result<()> {
    let threshold = args
        .face_iou_threshold
        .or(file.num("face_iou_threshold")?)
        .unwrap_or(DEFAULT_FACE_IOU_THRESHOLD);
    let annotations = load_annotations(&args.annotations)?;
    let matched: Vec<MatchedImage> = annotations
        .iter()
        .map(|a| {
            Ok(MatchedImage {
                image: a.image.clone(),
                records: build_person_records(a, threshold)?,
            })
        })
        .collect::<Result<_>>()?;
    write_json(args.out.as_deref(), &matched)
}

#[derive(Args)]
struct FeaturesArgs {
    /// Annotations to featurize (JSON lines).
    #[arg(long)]
    annotations: PathBuf,
    /// Directory image paths resolve against.
    #[arg(long)]
    images: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

fn cmd_features(file: &FileConfig, seed: u64, args: &FeaturesArgs) -> Result<()> {
    let cfg = pipeline_config(file, seed, &args.pipeline, FeatureSet::Full)?;
    let annotations = load_annotations(&args.annotations)?;
    let table = extract_features(&annotations, &args.images, &cfg)?;
    table.save_csv(&args.out)?;
    println!(
        "wrote {} rows x {} columns ({}) to {}",
        table.rows.len(),
        table.columns.len(),
        cfg.feature_set,
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct TrainArgs {
    /// Model kind: sentiment|orientation.
    #[arg(long)]
    task: String,
    /// Annotations carrying labels (JSON lines).
    #[arg(long)]
    annotations: PathBuf,
    /// Feature CSV (sentiment task).
    #[arg(long)]
    features: Option<PathBuf>,
    /// Image directory (orientation task).
    #[arg(long)]
    images: Option<PathBuf>,
    /// Sentiment axis: interaction|activity|happiness|focus.
    #[arg(long)]
    axis: Option<String>,
    /// Label granularity: four_way|binary.
    #[arg(long)]
    intensity_mode: Option<String>,
    /// Output model path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    svm: SvmArgs,
}

/// Axis labels for each table row, joined to annotations by image name.
fn table_labels(
    table: &FeatureTable,
    annotations: &[ImageAnnotation],
    axis: LabelAxis,
    mode: IntensityMode,
) -> Result<Vec<i64>> {
    let all = labels_for_axis(annotations, axis)?;
    let by_image: BTreeMap<&str, i64> = annotations
        .iter()
        .zip(&all)
        .map(|(a, &l)| (a.image.as_str(), l))
        .collect();
    let labels = table
        .rows
        .iter()
        .map(|row| {
            by_image.get(row.image.as_str()).copied().ok_or_else(|| {
                Error::InvalidInput(format!("no annotation for feature row `{}`", row.image))
            })
        })
        .collect::<Result<Vec<i64>>>()?;
    match mode {
        IntensityMode::FourWay => Ok(labels),
        IntensityMode::Binary => remap_binary(&labels),
    }
}

fn cmd_train(file: &FileConfig, seed: u64, args: &TrainArgs) -> Result<()> {
    let cfg = train_config(file, seed, &args.svm)?;
    let annotations = load_annotations(&args.annotations)?;
    let model = match args.task.as_str() {
        "sentiment" => {
            let features = args.features.as_ref().ok_or_else(|| {
                Error::InvalidInput("--task sentiment needs --features <csv>".into())
            })?;
            let table = FeatureTable::load_csv(features)?;
            let axis = resolve_axis(file, args.axis.as_deref())?;
            let mode = resolve_intensity(file, args.intensity_mode.as_deref())?;
            let labels = table_labels(&table, &annotations, axis, mode)?;
            let data = Dataset::new(
                table.rows.iter().map(|r| r.values.clone()).collect(),
                labels,
            )?;
            train(&data, &cfg)?
        }
        "orientation" => {
            let images = args.images.as_ref().ok_or_else(|| {
                Error::InvalidInput("--task orientation needs --images <dir>".into())
            })?;
            if args.features.is_some() || args.axis.is_some() || args.intensity_mode.is_some() {
                return Err(Error::InvalidInput(
                    "--features/--axis/--intensity-mode apply to --task sentiment only".into(),
                ));
            }
            train_orientation(&annotations, images, &HogConfig::default(), &cfg)?
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown task `{other}` (expected sentiment|orientation)"
            )))
        }
    };
    model.save(&args.out)?;
    println!(
        "trained {}-class model from {} -> {}",
        model.classes.len(),
        args.annotations.display(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV with an `image` column.
    #[arg(long)]
    features: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = LinearModel::load(&args.model)?;
    let table = FeatureTable::load_csv(&args.features)?;
    let rows = table
        .rows
        .iter()
        .map(|row| {
            let label = model.predict(&row.values)?;
            Ok(vec![
                row.image.clone(),
                label.to_string(),
                model.class_name(label),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(args.out.as_deref(), &["image", "predicted", "name"], &rows)
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV with an `image` column.
    #[arg(long)]
    features: PathBuf,
    /// Annotations carrying ground-truth labels.
    #[arg(long)]
    annotations: PathBuf,
    /// Sentiment axis: interaction|activity|happiness|focus.
    #[arg(long)]
    axis: Option<String>,
    /// Label granularity: four_way|binary.
    #[arg(long)]
    intensity_mode: Option<String>,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_eval(report: &EvalReport) {
    println!("n_test           {}", report.n_test);
    println!("accuracy         {:.4}", report.accuracy);
    println!("error            {:.4}", report.error);
    println!("chance_accuracy  {:.4}", report.chance_accuracy);
    for pc in &report.per_class {
        println!(
            "class {:>2}  precision {:.4}  recall {:.4}  support {}",
            pc.class, pc.precision, pc.recall, pc.support
        );
    }
    print!("{}", render_confusion(report));
}

fn cmd_evaluate(file: &FileConfig, args: &EvaluateArgs) -> Result<()> {
    let model = LinearModel::load(&args.model)?;
    let table = FeatureTable::load_csv(&args.features)?;
    let annotations = load_annotations(&args.annotations)?;
    let axis = resolve_axis(file, args.axis.as_deref())?;
    let mode = resolve_intensity(file, args.intensity_mode.as_deref())?;
    let truth = table_labels(&table, &annotations, axis, mode)?;
    let predicted: Vec<i64> = table
        .rows
        .iter()
        .map(|r| model.predict(&r.values))
        .collect::<Result<_>>()?;
    let report = evaluate_predictions(&truth, &predicted, mode.chance_accuracy())?;
    print_eval(&report);
    if let Some(path) = &args.out {
        write_json(Some(path), &report)?;
    }
    Ok(())
}

#[derive(Args)]
struct ClusterArgs {
    /// Annotations to cluster (JSON lines).
    #[arg(long)]
    annotations: PathBuf,
    /// Image directory (defaults to the annotation file's directory; only
    /// read when orientations must be predicted).
    #[arg(long)]
    images: Option<PathBuf>,
    /// Direction model for annotations without orientations.
    #[arg(long)]
    orientation_model: Option<PathBuf>,
    /// Output JSON (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    grouping: GroupingArgs,
}

fn cmd_cluster(file: &FileConfig, seed: u64, args: &ClusterArgs) -> Result<()> {
    let cfg = PipelineConfig {
        seed,
        grouping: grouping_config(file, &args.grouping)?,
        orientation_model: args
            .orientation_model
            .clone()
            .or_else(|| file.path("orientation_model")),
        ..Default::default()
    };
    let annotations = load_annotations(&args.annotations)?;
    let image_root = args.images.clone().unwrap_or_else(|| {
        args.annotations
            .parent()
            .unwrap_or(Path::new("."))
            .to_path_buf()
    });
    let clusters = cluster_annotations(&annotations, &image_root, &cfg)?;
    write_json(args.out.as_deref(), &clusters)
}

#[derive(Args)]
struct ExperimentArgs {
    /// Annotations with labels (JSON lines).
    #[arg(long)]
    annotations: PathBuf,
    /// Directory image paths resolve against.
    #[arg(long)]
    images: PathBuf,
    /// Directory for features.csv, model.json, report.json, confusion.txt.
    #[arg(long)]
    out_dir: PathBuf,
    /// Sentiment axis: interaction|activity|happiness|focus.
    #[arg(long)]
    axis: Option<String>,
    /// Label granularity: four_way|binary.
    #[arg(long)]
    intensity_mode: Option<String>,
    /// Test share of the stratified split.
    #[arg(long)]
    test_fraction: Option<f64>,
    #[command(flatten)]
    svm: SvmArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

fn cmd_experiment(file: &FileConfig, seed: u64, args: &ExperimentArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        annotations: args.annotations.clone(),
        image_root: args.images.clone(),
        out_dir: args.out_dir.clone(),
        axis: resolve_axis(file, args.axis.as_deref())?,
        intensity_mode: resolve_intensity(file, args.intensity_mode.as_deref())?,
        test_fraction: args
            .test_fraction
            .or(file.num("test_fraction")?)
            .unwrap_or(0.2),
        train: train_config(file, seed, &args.svm)?,
        pipeline: pipeline_config(file, seed, &args.pipeline, FeatureSet::Full)?,
    };
    let report = run_experiment(&cfg)?;
    println!("axis             {}", cfg.axis.name());
    println!("intensity_mode   {}", cfg.intensity_mode.name());
    println!("feature_set      {}", cfg.pipeline.feature_set.name());
    println!("seed             {seed}");
    println!("n_train          {}", report.n_train);
    print_eval(&report.eval);
    println!("artifacts in {}", cfg.out_dir.display());
    Ok(())
}
