//! Scene-level feature assembly.
//!
//! Three blocks per image: f₁ is a 4×4 grid of smile/neutral face counts
//! (32 values), f₂ a 150-bin poselet histogram, f₃ the 6-value clustering
//! summary. `assemble_scene` concatenates them into the 188-value vector
//! the sentiment classifiers consume. A 512-bin color histogram and a
//! zero-padded bounding-box vector serve as baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{area, BBox, PoseletDetection, POSELET_TYPES};
use crate::grouping::GROUP_FEATURE_LEN;
use crate::rng::DetRng;

/// Smile-vs-neutral verdict for one face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmileLabel {
    Neutral,
    Smile,
}

pub const EMOTION_GRID_LEN: usize = 32;
pub const POSELET_HISTOGRAM_LEN: usize = POSELET_TYPES;
pub const BBOX_BASELINE_LEN: usize = 60;
pub const BBOX_BASELINE_MAX_BOXES: usize = 15;
pub const SCENE_FEATURE_LEN: usize =
    EMOTION_GRID_LEN + POSELET_HISTOGRAM_LEN + GROUP_FEATURE_LEN;

/// Default poselet score cutoff.
pub const POSELET_SCORE_THRESHOLD: f64 = 0.9;

/// 4×4 spatial grid of face counts: 16 smile cells (row-major) followed by
/// 16 neutral cells. A face votes with its box center; centers on the far
/// edge clamp into the last cell.
pub fn emotion_grid(
    image_w: f64,
    image_h: f64,
    faces: &[(BBox, SmileLabel)],
) -> [f64; EMOTION_GRID_LEN] {
    let mut grid = [0.0; EMOTION_GRID_LEN];
    for (bbox, label) in faces {
        let (cx, cy) = bbox.center();
        let col = ((4.0 * cx / image_w).floor() as usize).min(3);
        let row = ((4.0 * cy / image_h).floor() as usize).min(3);
        let cell = row * 4 + col;
        match label {
            SmileLabel::Smile => grid[cell] += 1.0,
            SmileLabel::Neutral => grid[16 + cell] += 1.0,
        }
    }
    grid
}

/// How retained poselet detections vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoseletMode {
    /// Each detection adds 1 to its id's bin.
    Count,
    /// Each detection adds its score.
    Score,
}

impl PoseletMode {
    pub fn name(&self) -> &'static str {
        match self {
            PoseletMode::Count => "count",
            PoseletMode::Score => "score",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(PoseletMode::Count),
            "score" => Ok(PoseletMode::Score),
            other => Err(Error::InvalidInput(format!(
                "unknown poselet mode `{other}` (expected count|score)"
            ))),
        }
    }
}

/// Per-type histogram of detections with score ≥ threshold (equality kept).
pub fn poselet_histogram(
    detections: &[PoseletDetection],
    threshold: f64,
    mode: PoseletMode,
) -> Result<Vec<f64>> {
    let mut hist = vec![0.0; POSELET_HISTOGRAM_LEN];
    for d in detections {
        if d.id as usize >= POSELET_TYPES {
            return Err(Error::InvalidInput(format!(
                "poselet id {} out of range 0..{POSELET_TYPES}",
                d.id
            )));
        }
        if d.score < threshold {
            continue;
        }
        hist[d.id as usize] += match mode {
            PoseletMode::Count => 1.0,
            PoseletMode::Score => d.score,
        };
    }
    Ok(hist)
}

/// Flattened person-box coordinates, at most 15 boxes sorted by area
/// descending, zero-padded to 60 entries. More than 15 boxes are thinned by
/// seeded sampling. With `normalized`, x coordinates divide by the image
/// width and y by the height.
pub fn bbox_baseline(
    persons: &[BBox],
    image_w: f64,
    image_h: f64,
    seed: u64,
    normalized: bool,
) -> Vec<f64> {
    let mut chosen: Vec<BBox> = if persons.len() > BBOX_BASELINE_MAX_BOXES {
        let mut rng = DetRng::from_seed(seed);
        rng.sample_indices(persons.len(), BBOX_BASELINE_MAX_BOXES)
            .into_iter()
            .map(|i| persons[i])
            .collect()
    } else {
        persons.to_vec()
    };
    chosen.sort_by(|a, b| area(b).partial_cmp(&area(a)).expect("finite areas"));

    let (sx, sy) = if normalized {
        (image_w, image_h)
    } else {
        (1.0, 1.0)
    };
    let mut out = Vec::with_capacity(BBOX_BASELINE_LEN);
    for b in &chosen {
        out.push(b.x_min() / sx);
        out.push(b.y_min() / sy);
        out.push(b.x_max() / sx);
        out.push(b.y_max() / sy);
    }
    out.resize(BBOX_BASELINE_LEN, 0.0);
    out
}

/// The concatenated per-image feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFeatures {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    pub combined: Vec<f64>,
}

/// Concatenates f₁ (32), f₂ (150), f₃ (6) into the 188-value scene vector.
pub fn assemble_scene(f1: &[f64], f2: &[f64], f3: &[f64]) -> Result<SceneFeatures> {
    if f1.len() != EMOTION_GRID_LEN
        || f2.len() != POSELET_HISTOGRAM_LEN
        || f3.len() != GROUP_FEATURE_LEN
    {
        return Err(Error::InvalidInput(format!(
            "scene blocks must be {EMOTION_GRID_LEN}/{POSELET_HISTOGRAM_LEN}/{GROUP_FEATURE_LEN}, \
             got {}/{}/{}",
            f1.len(),
            f2.len(),
            f3.len()
        )));
    }
    let mut combined = Vec::with_capacity(SCENE_FEATURE_LEN);
    combined.extend_from_slice(f1);
    combined.extend_from_slice(f2);
    combined.extend_from_slice(f3);
    Ok(SceneFeatures {
        f1: f1.to_vec(),
        f2: f2.to_vec(),
        f3: f3.to_vec(),
        combined,
    })
}
