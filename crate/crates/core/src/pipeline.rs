//! End-to-end orchestration: per-image featurization over an annotation
//! file, CSV feature tables, label remapping, evaluation reports, and the
//! seeded experiment runner behind the CLI.
//!
//! All derived randomness is documented: per-image operations (box
//! sampling, clustering) use `seed + image_index`; training uses the seed
//! directly through the classifier's stream scheme.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::{
    accuracy, confusion_matrix, split_indices, train, Dataset, LinearModel, TrainConfig,
};
use crate::error::{Error, Result};
use crate::features::{
    assemble_scene, bbox_baseline, emotion_grid, poselet_histogram, PoseletMode, SmileLabel,
    BBOX_BASELINE_LEN, BBOX_BASELINE_MAX_BOXES, EMOTION_GRID_LEN, POSELET_HISTOGRAM_LEN,
    POSELET_SCORE_THRESHOLD, SCENE_FEATURE_LEN,
};
use crate::geometry::{load_annotations, BBox, ImageAnnotation, LabelAxis};
use crate::grouping::{
    back_project, estimate_depth, group_features, select_k, Clustering, GroupingConfig,
    PersonPoint, GROUP_FEATURE_LEN,
};
use crate::imaging::{
    color_histogram, color_histogram_counts, crop_gray, load_ppm, resize_bilinear, to_grayscale,
    GrayImage, COLOR_HISTOGRAM_BINS,
};
use crate::matching::{build_person_records, DEFAULT_FACE_IOU_THRESHOLD};
use crate::orientation::{predict_orientation, HogConfig};
use crate::pyramid::{extract_face_features, PyramidConfig};

/// Which per-image feature vector to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSet {
    /// 512-bin RGB histogram baseline.
    #[serde(rename = "color_hist")]
    ColorHist,
    /// Flattened person-box coordinates baseline (60 values).
    #[serde(rename = "bbox")]
    Bbox,
    /// Emotion grid f₁ alone (32 values).
    #[serde(rename = "emotion")]
    Emotion,
    /// Poselet histogram f₂ alone (150 values).
    #[serde(rename = "poselet")]
    Poselet,
    /// f₁‖f₂ (182 values) — the combination without group features.
    #[serde(rename = "emotion+poselet")]
    EmotionPoselet,
    /// f₁‖f₂‖f₃ (188 values).
    #[serde(rename = "full")]
    Full,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 6] = [
        FeatureSet::ColorHist,
        FeatureSet::Bbox,
        FeatureSet::Emotion,
        FeatureSet::Poselet,
        FeatureSet::EmotionPoselet,
        FeatureSet::Full,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureSet::ColorHist => "color_hist",
            FeatureSet::Bbox => "bbox",
            FeatureSet::Emotion => "emotion",
            FeatureSet::Poselet => "poselet",
            FeatureSet::EmotionPoselet => "emotion+poselet",
            FeatureSet::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown feature set `{s}` (expected one of color_hist|bbox|emotion|poselet|emotion+poselet|full)"
                ))
            })
    }

    /// Length of the per-image feature vector this set produces.
    pub fn feature_len(&self) -> usize {
        match self {
            FeatureSet::ColorHist => COLOR_HISTOGRAM_BINS,
            FeatureSet::Bbox => BBOX_BASELINE_LEN,
            FeatureSet::Emotion => EMOTION_GRID_LEN,
            FeatureSet::Poselet => POSELET_HISTOGRAM_LEN,
            FeatureSet::EmotionPoselet => EMOTION_GRID_LEN + POSELET_HISTOGRAM_LEN,
            FeatureSet::Full => SCENE_FEATURE_LEN,
        }
    }

    /// Whether building this set requires decoding the image pixels.
    fn needs_pixels(&self) -> bool {
        !matches!(self, FeatureSet::Bbox | FeatureSet::Poselet)
    }

    fn needs_smile_model(&self) -> bool {
        matches!(
            self,
            FeatureSet::Emotion | FeatureSet::EmotionPoselet | FeatureSet::Full
        )
    }
}

impl std::fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Keep the four intensity levels or collapse them to low/high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityMode {
    FourWay,
    Binary,
}

impl IntensityMode {
    pub fn name(&self) -> &'static str {
        match self {
            IntensityMode::FourWay => "four_way",
            IntensityMode::Binary => "binary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "four_way" => Ok(IntensityMode::FourWay),
            "binary" => Ok(IntensityMode::Binary),
            other => Err(Error::InvalidInput(format!(
                "unknown intensity mode `{other}` (expected four_way|binary)"
            ))),
        }
    }

    /// Random-guess accuracy used as the reference line in reports.
    pub fn chance_accuracy(&self) -> f64 {
        match self {
            IntensityMode::FourWay => 0.25,
            IntensityMode::Binary => 0.5,
        }
    }
}

impl std::fmt::Display for IntensityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Collapses 1..4 intensity labels: 1,2 → 0 (low), 3,4 → 1 (high).
pub fn remap_binary(labels: &[i64]) -> Result<Vec<i64>> {
    labels
        .iter()
        .map(|&l| match l {
            1 | 2 => Ok(0),
            3 | 4 => Ok(1),
            other => Err(Error::InvalidInput(format!(
                "intensity label must be in [1, 4], got {other}"
            ))),
        })
        .collect()
}

/// Per-axis labels for every annotation; errors name images without labels.
pub fn labels_for_axis(annotations: &[ImageAnnotation], axis: LabelAxis) -> Result<Vec<i64>> {
    let missing: Vec<&str> = annotations
        .iter()
        .filter(|a| a.labels.is_none())
        .map(|a| a.image.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!(
            "annotations lack sentiment labels for: {}",
            missing.join(", ")
        )));
    }
    Ok(annotations
        .iter()
        .map(|a| a.labels.expect("checked above").get(axis) as i64)
        .collect())
}

/// Everything featurization needs besides the annotations themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub feature_set: FeatureSet,
    /// Root seed; per-image operations derive seed + image_index.
    pub seed: u64,
    pub face_iou_threshold: f64,
    pub poselet_threshold: f64,
    pub poselet_mode: PoseletMode,
    /// Normalize box coordinates into [0,1] (raw pixel mode when false).
    pub bbox_normalized: bool,
    /// L1-normalize the color histogram (raw counts when false).
    pub color_normalized: bool,
    pub pyramid: PyramidConfig,
    pub hog: HogConfig,
    pub grouping: GroupingConfig,
    /// Smile/neutral face model; required for emotion-bearing feature sets.
    pub smile_model: Option<PathBuf>,
    /// Fallback direction model for annotations without orientations.
    pub orientation_model: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            feature_set: FeatureSet::Full,
            seed: 0,
            face_iou_threshold: DEFAULT_FACE_IOU_THRESHOLD,
            poselet_threshold: POSELET_SCORE_THRESHOLD,
            poselet_mode: PoseletMode::Count,
            bbox_normalized: true,
            color_normalized: true,
            pyramid: PyramidConfig::default(),
            hog: HogConfig::default(),
            grouping: GroupingConfig::default(),
            smile_model: None,
            orientation_model: None,
        }
    }
}

/// One image's feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub image: String,
    pub values: Vec<f64>,
}

/// Named feature matrix, one row per image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    /// CSV with header `image,<columns...>`; values keep full round-trip
    /// precision.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        let mut header = vec!["image".to_string()];
        header.extend(self.columns.iter().cloned());
        writer
            .write_record(&header)
            .and_then(|_| {
                for row in &self.rows {
                    let mut record = vec![row.image.clone()];
                    record.extend(row.values.iter().map(|v| format!("{v}")));
                    writer.write_record(&record)?;
                }
                writer.flush().map_err(csv::Error::from)
            })
            .map_err(|e| Error::parse(path, 0, e.to_string()))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<FeatureTable> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::parse(path, 0, e.to_string()))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?
            .clone();
        if headers.is_empty() || &headers[0] != "image" {
            return Err(Error::parse(path, 1, "first column must be `image`"));
        }
        let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
            if record.len() != columns.len() + 1 {
                return Err(Error::parse(
                    path,
                    i + 2,
                    format!("expected {} fields, got {}", columns.len() + 1, record.len()),
                ));
            }
            let values: Vec<f64> = record
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::parse(path, i + 2, format!("invalid number `{s}`")))
                })
                .collect::<Result<_>>()?;
            rows.push(FeatureRow {
                image: record[0].to_string(),
                values,
            });
        }
        Ok(FeatureTable { columns, rows })
    }
}

/// Column names for a feature set, in vector order.
pub fn feature_columns(set: FeatureSet) -> Vec<String> {
    let emotion = || -> Vec<String> {
        let mut cols = Vec::with_capacity(EMOTION_GRID_LEN);
        for label in ["smile", "neutral"] {
            for r in 0..4 {
                for c in 0..4 {
                    cols.push(format!("f1_{label}_r{r}c{c}"));
                }
            }
        }
        cols
    };
    let poselet = || -> Vec<String> {
        (0..POSELET_HISTOGRAM_LEN)
            .map(|i| format!("f2_poselet_{i}"))
            .collect()
    };
    let group = || -> Vec<String> {
        [
            "f3_k",
            "f3_mean_size",
            "f3_max_size",
            "f3_singletons",
            "f3_mean_dist",
            "f3_mean_coherence",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    match set {
        FeatureSet::ColorHist => (0..COLOR_HISTOGRAM_BINS).map(|i| format!("color_{i}")).collect(),
        FeatureSet::Bbox => {
            let mut cols = Vec::with_capacity(BBOX_BASELINE_LEN);
            for b in 0..BBOX_BASELINE_MAX_BOXES {
                for coord in ["xmin", "ymin", "xmax", "ymax"] {
                    cols.push(format!("bbox_{b}_{coord}"));
                }
            }
            cols
        }
        FeatureSet::Emotion => emotion(),
        FeatureSet::Poselet => poselet(),
        FeatureSet::EmotionPoselet => {
            let mut cols = emotion();
            cols.extend(poselet());
            cols
        }
        FeatureSet::Full => {
            let mut cols = emotion();
            cols.extend(poselet());
            cols.extend(group());
            cols
        }
    }
}

/// The label the smile model uses for "smile": the class named `smile` when
/// names are present, otherwise the highest label.
pub fn smile_class(model: &LinearModel) -> i64 {
    if let Some(names) = &model.class_names {
        if let Some(pos) = names.iter().position(|n| n == "smile") {
            return model.classes[pos];
        }
    }
    *model.classes.iter().max().expect("non-empty classes")
}

/// Classifies each face crop as smiling or neutral with the face model.
pub fn label_faces(
    gray: &GrayImage,
    faces: &[BBox],
    model: &LinearModel,
    pyramid: &PyramidConfig,
) -> Result<Vec<SmileLabel>> {
    let smile = smile_class(model);
    faces
        .iter()
        .map(|face| {
            let crop = crop_gray(gray, face)?;
            let resized = resize_bilinear(&crop, pyramid.face_size, pyramid.face_size)?;
            let features = extract_face_features(&resized, pyramid)?;
            Ok(if model.predict(&features)? == smile {
                SmileLabel::Smile
            } else {
                SmileLabel::Neutral
            })
        })
        .collect()
}

/// Apparent-face-height divisor used when a person has no assigned face:
/// the face is taken as 1/7 of the person box height.
const FACE_PER_PERSON_HEIGHT: f64 = 7.0;

/// Ground-plane points for every person in the annotation. Orientations
/// come from the annotation when present, else from the direction model
/// applied to each person crop. Depth uses the assigned face height when
/// the matcher found one, else the person-height fallback.
fn person_points(
    annotation: &ImageAnnotation,
    gray: Option<&GrayImage>,
    orientation_model: Option<&LinearModel>,
    cfg: &PipelineConfig,
) -> Result<Vec<PersonPoint>> {
    let records = build_person_records(annotation, cfg.face_iou_threshold)?;
    let mut face_of = vec![None; annotation.persons.len()];
    for record in &records {
        face_of[record.person_index] = record.face;
    }

    let orientations: Vec<(f64, f64)> = match (&annotation.orientations, orientation_model) {
        (Some(directions), _) => directions.iter().map(|d| d.unit_vector()).collect(),
        (None, Some(model)) => {
            let gray = gray.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "image pixels required to predict orientations for {}",
                    annotation.image
                ))
            })?;
            annotation
                .persons
                .iter()
                .map(|person| {
                    let crop = crop_gray(gray, person)?;
                    Ok(predict_orientation(model, &crop, &cfg.hog)?.unit_vector())
                })
                .collect::<Result<_>>()?
        }
        (None, None) => {
            return Err(Error::InvalidInput(format!(
                "{} has no person orientations and no orientation model was given",
                annotation.image
            )))
        }
    };

    annotation
        .persons
        .iter()
        .enumerate()
        .map(|(p, person)| {
            let face_height = match &face_of[p] {
                Some(face) => face.height(),
                None => person.height() / FACE_PER_PERSON_HEIGHT,
            };
            let depth = estimate_depth(face_height, cfg.grouping.k_face)?;
            let position = back_project(person, depth, annotation.width as f64);
            PersonPoint::new(position, orientations[p], p)
        })
        .collect()
}

/// Ground-plane clustering of one image, or `None` when it has no persons.
pub fn cluster_image(
    annotation: &ImageAnnotation,
    image_index: usize,
    gray: Option<&GrayImage>,
    orientation_model: Option<&LinearModel>,
    cfg: &PipelineConfig,
) -> Result<Option<(Vec<PersonPoint>, Clustering)>> {
    if annotation.persons.is_empty() {
        return Ok(None);
    }
    let points = person_points(annotation, gray, orientation_model, cfg)?;
    let clustering = select_k(
        &points,
        &cfg.grouping,
        cfg.seed.wrapping_add(image_index as u64),
    )?;
    Ok(Some((points, clustering)))
}

/// Clustering output for the `cluster` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageClusters {
    pub image: String,
    pub points: Vec<PersonPoint>,
    pub clustering: Option<Clustering>,
}

/// Clusters every annotated image.
pub fn cluster_annotations(
    annotations: &[ImageAnnotation],
    image_root: &Path,
    cfg: &PipelineConfig,
) -> Result<Vec<ImageClusters>> {
    let orientation_model = cfg
        .orientation_model
        .as_ref()
        .map(LinearModel::load)
        .transpose()?;
    annotations
        .iter()
        .enumerate()
        .map(|(i, annotation)| {
            annotation.validate()?;
            // Pixels are only needed when orientations must be predicted.
            let gray = if annotation.orientations.is_none() && orientation_model.is_some() {
                Some(to_grayscale(&load_ppm(image_root.join(&annotation.image))?))
            } else {
                None
            };
            let outcome =
                cluster_image(annotation, i, gray.as_ref(), orientation_model.as_ref(), cfg)?;
            let (points, clustering) = match outcome {
                Some((points, clustering)) => (points, Some(clustering)),
                None => (Vec::new(), None),
            };
            Ok(ImageClusters {
                image: annotation.image.clone(),
                points,
                clustering,
            })
        })
        .collect()
}

fn image_features(
    annotation: &ImageAnnotation,
    image_index: usize,
    image_root: &Path,
    smile_model: Option<&LinearModel>,
    orientation_model: Option<&LinearModel>,
    cfg: &PipelineConfig,
) -> Result<Vec<f64>> {
    annotation.validate()?;
    let sub_seed = cfg.seed.wrapping_add(image_index as u64);

    let rgb = if cfg.feature_set.needs_pixels() {
        Some(load_ppm(image_root.join(&annotation.image))?)
    } else {
        None
    };
    let gray = rgb.as_ref().map(to_grayscale);

    let emotion = |gray: &GrayImage| -> Result<Vec<f64>> {
        let model = smile_model.expect("checked by extract_features");
        let records = build_person_records(annotation, cfg.face_iou_threshold)?;
        let faces: Vec<BBox> = records.iter().filter_map(|r| r.face).collect();
        let labels = label_faces(gray, &faces, model, &cfg.pyramid)?;
        let labeled: Vec<(BBox, SmileLabel)> =
            faces.into_iter().zip(labels).collect();
        Ok(emotion_grid(annotation.width as f64, annotation.height as f64, &labeled).to_vec())
    };
    let poselets = || -> Result<Vec<f64>> {
        poselet_histogram(&annotation.poselets, cfg.poselet_threshold, cfg.poselet_mode)
    };

    match cfg.feature_set {
        FeatureSet::ColorHist => {
            let rgb = rgb.as_ref().expect("pixels loaded for color_hist");
            Ok(if cfg.color_normalized {
                color_histogram(rgb)
            } else {
                color_histogram_counts(rgb)
            })
        }
        FeatureSet::Bbox => Ok(bbox_baseline(
            &annotation.persons,
            annotation.width as f64,
            annotation.height as f64,
            sub_seed,
            cfg.bbox_normalized,
        )),
        FeatureSet::Emotion => emotion(gray.as_ref().expect("pixels loaded for emotion")),
        FeatureSet::Poselet => poselets(),
        FeatureSet::EmotionPoselet => {
            let mut v = emotion(gray.as_ref().expect("pixels loaded"))?;
            v.extend(poselets()?);
            Ok(v)
        }
        FeatureSet::Full => {
            let f1 = emotion(gray.as_ref().expect("pixels loaded"))?;
            let f2 = poselets()?;
            let f3 = match cluster_image(
                annotation,
                image_index,
                gray.as_ref(),
                orientation_model,
                cfg,
            )? {
                Some((points, clustering)) => group_features(&clustering, &points).to_vec(),
                None => vec![0.0; GROUP_FEATURE_LEN],
            };
            Ok(assemble_scene(&f1, &f2, &f3)?.combined)
        }
    }
}

/// Builds the configured feature vector for every annotation.
pub fn extract_features(
    annotations: &[ImageAnnotation],
    image_root: &Path,
    cfg: &PipelineConfig,
) -> Result<FeatureTable> {
    let smile_model = if cfg.feature_set.needs_smile_model() {
        let path = cfg.smile_model.as_ref().ok_or_else(|| {
            Error::InvalidInput(format!(
                "feature set `{}` needs a smile model (--smile-model)",
                cfg.feature_set
            ))
        })?;
        Some(LinearModel::load(path)?)
    } else {
        None
    };
    let orientation_model = cfg
        .orientation_model
        .as_ref()
        .map(LinearModel::load)
        .transpose()?;

    let columns = feature_columns(cfg.feature_set);
    let rows = annotations
        .iter()
        .enumerate()
        .map(|(i, annotation)| {
            let values = image_features(
                annotation,
                i,
                image_root,
                smile_model.as_ref(),
                orientation_model.as_ref(),
                cfg,
            )?;
            debug_assert_eq!(values.len(), columns.len());
            Ok(FeatureRow {
                image: annotation.image.clone(),
                values,
            })
        })
        .collect::<Result<_>>()?;
    Ok(FeatureTable { columns, rows })
}

/// Per-class precision/recall next to the confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub class: i64,
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

/// Evaluation summary; `confusion` rows are true classes, columns predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_test: usize,
    pub accuracy: f64,
    pub error: f64,
    pub chance_accuracy: f64,
    pub classes: Vec<i64>,
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<PerClassMetrics>,
}

/// Scores predictions against ground truth.
pub fn evaluate_predictions(
    truth: &[i64],
    predicted: &[i64],
    chance_accuracy: f64,
) -> Result<EvalReport> {
    if truth.len() != predicted.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels but {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate zero examples".into()));
    }
    let (classes, confusion) = confusion_matrix(truth, predicted);
    let per_class = classes
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let tp = confusion[i][i];
            let predicted_count: usize = confusion.iter().map(|row| row[i]).sum();
            let support: usize = confusion[i].iter().sum();
            PerClassMetrics {
                class,
                precision: if predicted_count > 0 {
                    tp as f64 / predicted_count as f64
                } else {
                    0.0
                },
                recall: if support > 0 {
                    tp as f64 / support as f64
                } else {
                    0.0
                },
                support,
            }
        })
        .collect();
    let acc = accuracy(truth, predicted);
    Ok(EvalReport {
        n_test: truth.len(),
        accuracy: acc,
        error: 1.0 - acc,
        chance_accuracy,
        classes,
        confusion,
        per_class,
    })
}

/// Plain-text confusion grid (rows true, columns predicted).
pub fn render_confusion(report: &EvalReport) -> String {
    let width = report
        .classes
        .iter()
        .map(|c| c.to_string().len())
        .chain(report.confusion.iter().flatten().map(|v| v.to_string().len()))
        .max()
        .unwrap_or(1)
        .max(4);
    let mut out = String::new();
    out.push_str(&format!("{:>w$} |", "t\\p", w = width));
    for c in &report.classes {
        out.push_str(&format!(" {c:>w$}", w = width));
    }
    out.push('\n');
    for (i, row) in report.confusion.iter().enumerate() {
        out.push_str(&format!("{:>w$} |", report.classes[i], w = width));
        for v in row {
            out.push_str(&format!(" {v:>w$}", w = width));
        }
        out.push('\n');
    }
    out
}

/// Full description of one experiment run; echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub annotations: PathBuf,
    pub image_root: PathBuf,
    pub out_dir: PathBuf,
    pub axis: LabelAxis,
    pub intensity_mode: IntensityMode,
    pub test_fraction: f64,
    pub train: TrainConfig,
    pub pipeline: PipelineConfig,
}

/// One test-set row of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPrediction {
    pub image: String,
    pub truth: i64,
    pub predicted: i64,
}

/// The `report.json` payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_train: usize,
    pub eval: EvalReport,
    pub test_predictions: Vec<TestPrediction>,
}

/// Runs extract → split → train → evaluate and writes `features.csv`,
/// `model.json`, `report.json`, and `confusion.txt` into `out_dir`.
/// Deterministic: the same config produces byte-identical artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let annotations = load_annotations(&cfg.annotations)?;
    if annotations.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no annotations in {}",
            cfg.annotations.display()
        )));
    }
    // Fail on missing labels before any heavy work.
    let raw_labels = labels_for_axis(&annotations, cfg.axis)?;
    let labels = match cfg.intensity_mode {
        IntensityMode::FourWay => raw_labels,
        IntensityMode::Binary => remap_binary(&raw_labels)?,
    };

    let table = extract_features(&annotations, &cfg.image_root, &cfg.pipeline)?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    table.save_csv(cfg.out_dir.join("features.csv"))?;

    let dataset = Dataset::new(
        table.rows.iter().map(|r| r.values.clone()).collect(),
        labels,
    )?;
    let (train_idx, test_idx) = split_indices(&dataset.labels, cfg.test_fraction, cfg.train.seed)?;
    let train_set = dataset.select(&train_idx);
    let test_set = dataset.select(&test_idx);

    let model = train(&train_set, &cfg.train)?;
    model.save(cfg.out_dir.join("model.json"))?;

    let predictions = model.predict_all(&test_set)?;
    let eval = evaluate_predictions(
        &test_set.labels,
        &predictions,
        cfg.intensity_mode.chance_accuracy(),
    )?;
    fs::write(cfg.out_dir.join("confusion.txt"), render_confusion(&eval))
        .map_err(|e| Error::io(&cfg.out_dir, e))?;

    let test_predictions = test_idx
        .iter()
        .enumerate()
        .map(|(j, &i)| TestPrediction {
            image: table.rows[i].image.clone(),
            truth: test_set.labels[j],
            predicted: predictions[j],
        })
        .collect();
    let report = ExperimentReport {
        config: cfg.clone(),
        n_train: train_idx.len(),
        eval,
        test_predictions,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Model(format!("serializing report: {e}")))?;
    fs::write(cfg.out_dir.join("report.json"), json + "\n")
        .map_err(|e| Error::io(&cfg.out_dir, e))?;
    Ok(report)
}
