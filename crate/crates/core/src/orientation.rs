//! Body-orientation classification: HOG descriptors over person crops and
//! an 8-way direction model on top of the linear classifier.
//!
//! Directions live on the ground plane with image-up mapped to North, so
//! N = (0,−1), E = (1,0), and the diagonals are normalized accordingly.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{train, Dataset, LinearModel, TrainConfig};
use crate::error::{Error, Result};
use crate::geometry::ImageAnnotation;
use crate::imaging::{crop_gray, gradients, load_ppm, resize_bilinear, to_grayscale, GrayImage};

/// The eight compass directions in fixed tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "N")]
    North,
    #[serde(rename = "NE")]
    NorthEast,
    #[serde(rename = "E")]
    East,
    #[serde(rename = "SE")]
    SouthEast,
    #[serde(rename = "S")]
    South,
    #[serde(rename = "SW")]
    SouthWest,
    #[serde(rename = "W")]
    West,
    #[serde(rename = "NW")]
    NorthWest,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::North,
        Direction::NorthEast,
        Direction::East,
        Direction::SouthEast,
        Direction::South,
        Direction::SouthWest,
        Direction::West,
        Direction::NorthWest,
    ];

    /// Position in the fixed N, NE, E, SE, S, SW, W, NW order.
    pub fn index(&self) -> usize {
        Direction::ALL.iter().position(|d| d == self).expect("member of ALL")
    }

    pub fn from_index(i: usize) -> Result<Direction> {
        Direction::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("direction index {i} out of range 0..8")))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Direction::North => "N",
            Direction::NorthEast => "NE",
            Direction::East => "E",
            Direction::SouthEast => "SE",
            Direction::South => "S",
            Direction::SouthWest => "SW",
            Direction::West => "W",
            Direction::NorthWest => "NW",
        }
    }

    pub fn parse(s: &str) -> Result<Direction> {
        Direction::ALL
            .iter()
            .copied()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown direction `{s}`")))
    }

    /// Ground-plane unit vector; image-up is North = (0,−1).
    pub fn unit_vector(&self) -> (f64, f64) {
        match self {
            Direction::North => (0.0, -1.0),
            Direction::NorthEast => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
            Direction::East => (1.0, 0.0),
            Direction::SouthEast => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            Direction::South => (0.0, 1.0),
            Direction::SouthWest => (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            Direction::West => (-1.0, 0.0),
            Direction::NorthWest => (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// HOG parameters: the classic 64×128 pedestrian window with 8 px cells,
/// 2×2-cell blocks at stride one cell, and 9 unsigned orientation bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HogConfig {
    pub window_w: usize,
    pub window_h: usize,
    pub cell: usize,
    pub block: usize,
    pub bins: usize,
}

impl Default for HogConfig {
    fn default() -> Self {
        HogConfig {
            window_w: 64,
            window_h: 128,
            cell: 8,
            block: 2,
            bins: 9,
        }
    }
}

impl HogConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cell == 0
            || !self.window_w.is_multiple_of(self.cell)
            || !self.window_h.is_multiple_of(self.cell)
        {
            return Err(Error::InvalidInput(format!(
                "window {}x{} must divide into {}px cells",
                self.window_w, self.window_h, self.cell
            )));
        }
        let (cx, cy) = (self.window_w / self.cell, self.window_h / self.cell);
        if self.block == 0 || self.block > cx || self.block > cy {
            return Err(Error::InvalidInput(format!("block size {} too large", self.block)));
        }
        if self.bins == 0 {
            return Err(Error::InvalidInput("bins must be >= 1".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> (usize, usize) {
        (self.window_w / self.cell, self.window_h / self.cell)
    }

    pub fn blocks(&self) -> (usize, usize) {
        let (cx, cy) = self.cells();
        (cx - self.block + 1, cy - self.block + 1)
    }

    /// Descriptor length: blocks_x · blocks_y · block² · bins (3780 default).
    pub fn feature_len(&self) -> usize {
        let (bx, by) = self.blocks();
        bx * by * self.block * self.block * self.bins
    }
}

/// HOG descriptor of a crop already sized to the configured window.
///
/// Per pixel: central-difference gradient, unsigned orientation folded into
/// [0°, 180°), magnitude split linearly between the two nearest of 9 bins.
/// Cell histograms are grouped into 2×2 blocks (row-major, cells within a
/// block row-major) and each block is scaled by 1/√(‖v‖² + 1e−5).
pub fn extract_hog(crop: &GrayImage, cfg: &HogConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if crop.width != cfg.window_w || crop.height != cfg.window_h {
        return Err(Error::InvalidInput(format!(
            "HOG window must be {}x{}, got {}x{}",
            cfg.window_w, cfg.window_h, crop.width, crop.height
        )));
    }
    let grads = gradients(crop)?;
    let (cells_x, cells_y) = cfg.cells();
    let bin_width = 180.0 / cfg.bins as f64;

    // Magnitude-weighted orientation votes per cell.
    let mut cells = vec![vec![0.0; cfg.bins]; cells_x * cells_y];
    for y in 0..crop.height {
        for x in 0..crop.width {
            let gx = grads.ix.get(x, y);
            let gy = grads.iy.get(x, y);
            let magnitude = (gx * gx + gy * gy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let mut angle = gy.atan2(gx).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            if angle >= 180.0 {
                angle -= 180.0;
            }
            let position = angle / bin_width;
            let lo = (position.floor() as usize).min(cfg.bins - 1);
            let hi = (lo + 1) % cfg.bins;
            let frac = position - lo as f64;
            let cell = (y / cfg.cell) * cells_x + x / cfg.cell;
            cells[cell][lo] += magnitude * (1.0 - frac);
            cells[cell][hi] += magnitude * frac;
        }
    }

    // Block normalization, blocks scanned row-major.
    let (blocks_x, blocks_y) = cfg.blocks();
    let mut out = Vec::with_capacity(cfg.feature_len());
    for by in 0..blocks_y {
        for bx in 0..blocks_x {
            let start = out.len();
            for cy in by..by + cfg.block {
                for cx in bx..bx + cfg.block {
                    out.extend_from_slice(&cells[cy * cells_x + cx]);
                }
            }
            let norm_sq: f64 = out[start..].iter().map(|v| v * v).sum();
            let scale = 1.0 / (norm_sq + 1e-5).sqrt();
            for v in &mut out[start..] {
                *v *= scale;
            }
        }
    }
    debug_assert_eq!(out.len(), cfg.feature_len());
    Ok(out)
}

/// HOG descriptor of one person box: crop from the image, grayscale,
/// resize to the HOG window.
pub fn person_hog(
    image: &crate::imaging::RgbImage,
    person: &crate::geometry::BBox,
    cfg: &HogConfig,
) -> Result<Vec<f64>> {
    let crop = crop_gray(&to_grayscale(image), person)?;
    let resized = resize_bilinear(&crop, cfg.window_w, cfg.window_h)?;
    extract_hog(&resized, cfg)
}

/// Trains the 8-way direction model from annotations that carry per-person
/// orientations. `image_root` resolves each annotation's image path.
pub fn train_orientation(
    annotations: &[ImageAnnotation],
    image_root: &Path,
    hog_cfg: &HogConfig,
    train_cfg: &TrainConfig,
) -> Result<LinearModel> {
    let missing: Vec<&str> = annotations
        .iter()
        .filter(|a| a.orientations.is_none())
        .map(|a| a.image.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!(
            "annotations lack orientations for: {}",
            missing.join(", ")
        )));
    }
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for annotation in annotations {
        let image = load_ppm(image_root.join(&annotation.image))?;
        let orientations = annotation.orientations.as_ref().expect("checked above");
        for (person, direction) in annotation.persons.iter().zip(orientations) {
            features.push(person_hog(&image, person, hog_cfg)?);
            labels.push(direction.index() as i64);
        }
    }
    let data = Dataset::new(features, labels)?;
    let mut model = train(&data, train_cfg)?;
    model.class_names = Some(
        model
            .classes
            .iter()
            .map(|&c| Direction::from_index(c as usize).map(|d| d.name().to_string()))
            .collect::<Result<_>>()?,
    );
    Ok(model)
}

/// Predicts the direction of a person crop (any size; resized internally).
/// Decision ties break toward the earlier direction in N..NW order.
pub fn predict_orientation(
    model: &LinearModel,
    crop: &GrayImage,
    cfg: &HogConfig,
) -> Result<Direction> {
    let resized = resize_bilinear(crop, cfg.window_w, cfg.window_h)?;
    let features = extract_hog(&resized, cfg)?;
    let label = model.predict(&features)?;
    Direction::from_index(label as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::MODEL_FORMAT_VERSION;
    use crate::rng::DetRng;

    #[test]
    fn direction_vectors_are_unit_and_ordered() {
        for (i, d) in Direction::ALL.iter().enumerate() {
            assert_eq!(d.index(), i);
            assert_eq!(Direction::from_index(i).unwrap(), *d);
            let (x, y) = d.unit_vector();
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-9);
            assert_eq!(Direction::parse(d.name()).unwrap(), *d);
        }
        assert_eq!(Direction::North.unit_vector(), (0.0, -1.0));
        assert_eq!(Direction::East.unit_vector(), (1.0, 0.0));
        assert!(Direction::from_index(8).is_err());
        assert!(Direction::parse("NNE").is_err());
    }

    #[test]
    fn direction_serde_uses_short_names() {
        let json = serde_json::to_string(&Direction::NorthWest).unwrap();
        assert_eq!(json, "\"NW\"");
        let parsed: Direction = serde_json::from_str("\"SE\"").unwrap();
        assert_eq!(parsed, Direction::SouthEast);
    }

    #[test]
    fn hog_length_is_3780_and_constant_is_zero() {
        let cfg = HogConfig::default();
        assert_eq!(cfg.feature_len(), 3780);
        let crop = GrayImage::from_fn(64, 128, |_, _| 77.0);
        let hog = extract_hog(&crop, &cfg).unwrap();
        assert_eq!(hog.len(), 3780);
        assert!(hog.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_bars_put_all_energy_in_the_zero_bin() {
        // Width-2 bars (period 4): single-pixel stripes are invisible to
        // central differences, but 2 px bars give |Ix| = s/2 at every pixel
        // and Iy = 0, so the gradient orientation is 0 degrees everywhere.
        // Each 8x8 cell then holds 64 * s/2 = 32s in bin 0, and a block of
        // four such cells normalizes each bin-0 entry to about 1/2.
        let cfg = HogConfig::default();
        let s = 10.0;
        let bar = |x: usize| [0.0, 1.0, 1.0, 0.0][x % 4] * s;
        let crop = GrayImage::from_fn(64, 128, |x, _| bar(x));
        let hog = extract_hog(&crop, &cfg).unwrap();
        // Hand-derived: entry = 32s / sqrt(4 * (32s)^2 + 1e-5).
        let expected = 32.0 * s / (4.0 * (32.0 * s) * (32.0 * s) + 1e-5).sqrt();
        for (i, &v) in hog.iter().enumerate() {
            if i % cfg.bins == 0 {
                assert!((v - expected).abs() < 1e-12, "bin 0 entry {i}: {v}");
            } else {
                assert_eq!(v, 0.0, "entry {i} should be empty");
            }
        }
    }

    #[test]
    fn hog_ignores_constant_intensity_shifts() {
        let cfg = HogConfig::default();
        let mut rng = DetRng::from_seed(61);
        let crop = GrayImage::from_fn(64, 128, |_, _| rng.index(256) as f64);
        let shifted = GrayImage {
            width: 64,
            height: 128,
            values: crop.values.iter().map(|v| v + 25.0).collect(),
        };
        // Integer-valued pixels make the gradient subtraction exact.
        assert_eq!(
            extract_hog(&crop, &cfg).unwrap(),
            extract_hog(&shifted, &cfg).unwrap()
        );
    }

    #[test]
    fn hog_block_norms_bounded_and_scale_invariant() {
        let cfg = HogConfig::default();
        let mut rng = DetRng::from_seed(62);
        let crop = GrayImage::from_fn(64, 128, |_, _| rng.range_f64(0.0, 255.0));
        let hog = extract_hog(&crop, &cfg).unwrap();
        for block in hog.chunks(cfg.block * cfg.block * cfg.bins) {
            let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm <= 1.0 + 1e-9, "block norm {norm}");
        }

        let doubled = GrayImage {
            width: 64,
            height: 128,
            values: crop.values.iter().map(|v| v * 2.0).collect(),
        };
        let hog2 = extract_hog(&doubled, &cfg).unwrap();
        for (a, b) in hog.iter().zip(&hog2) {
            assert!((a - b).abs() < 1e-6, "scale variance: {a} vs {b}");
        }
    }

    #[test]
    fn hog_rejects_wrong_window() {
        let cfg = HogConfig::default();
        let crop = GrayImage::from_fn(64, 64, |_, _| 0.0);
        assert!(extract_hog(&crop, &cfg).is_err());
    }

    #[test]
    fn hog_interpolates_between_neighboring_bins() {
        // A diagonal ramp I = x + y has gradient at 45 degrees away from the
        // clamped borders: position 45/20 = 2.25, so bins 2 and 3 split each
        // pixel's magnitude 75/25. Blocks built purely from interior cells
        // (the borders see halved one-sided differences) show exactly that.
        let cfg = HogConfig::default();
        let crop = GrayImage::from_fn(64, 128, |x, y| (x + y) as f64);
        let hog = extract_hog(&crop, &cfg).unwrap();
        let block_len = cfg.block * cfg.block * cfg.bins;
        let (blocks_x, _) = cfg.blocks();
        for by in 1..14 {
            for bx in 1..6 {
                let block = &hog[(by * blocks_x + bx) * block_len..][..block_len];
                for cell in block.chunks(cfg.bins) {
                    assert!((cell[2] / cell[3] - 3.0).abs() < 1e-9, "vote ratio should be 3:1");
                    for (i, &v) in cell.iter().enumerate() {
                        if i != 2 && i != 3 {
                            assert_eq!(v, 0.0, "bin {i} should be empty");
                        }
                    }
                }
            }
        }
    }

    /// Synthetic person crops with direction-specific stripe textures.
    fn textured_annotation(
        dir: &std::path::Path,
        image_name: &str,
        directions: &[Direction],
        phase: usize,
    ) -> ImageAnnotation {
        use crate::imaging::{write_ppm, RgbImage};
        let width = 40 * directions.len();
        let mut pixels = vec![[0u8; 3]; width * 100];
        for (p, d) in directions.iter().enumerate() {
            for y in 0..100 {
                for x in 40 * p..40 * (p + 1) {
                    // Horizontal bars for mostly-vertical directions (N/S),
                    // vertical bars otherwise.
                    let (ux, uy) = d.unit_vector();
                    let stripe = if ux.abs() < uy.abs() {
                        ((y + phase) / 2) % 2
                    } else {
                        ((x + phase) / 2) % 2
                    };
                    let v = if stripe == 0 { 30 } else { 220 };
                    pixels[y * width + x] = [v, v, v];
                }
            }
        }
        let image = RgbImage::new(width, 100, pixels).unwrap();
        write_ppm(dir.join(image_name), &image).unwrap();
        ImageAnnotation {
            image: image_name.into(),
            width: width as u32,
            height: 100,
            persons: (0..directions.len())
                .map(|p| {
                    crate::geometry::BBox::new(40.0 * p as f64, 0.0, 40.0 * (p + 1) as f64, 100.0)
                        .unwrap()
                })
                .collect(),
            faces: vec![],
            torsos: vec![],
            poselets: vec![],
            labels: None,
            orientations: Some(directions.to_vec()),
        }
    }

    #[test]
    fn orientation_training_separates_synthetic_textures() {
        let dir = tempfile::tempdir().unwrap();
        let annotations: Vec<ImageAnnotation> = (0..4)
            .map(|phase| {
                textured_annotation(
                    dir.path(),
                    &format!("img{phase}.ppm"),
                    &[Direction::North, Direction::East],
                    phase,
                )
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 30,
            ..Default::default()
        };
        let model =
            train_orientation(&annotations, dir.path(), &HogConfig::default(), &cfg).unwrap();
        assert_eq!(
            model.class_names,
            Some(vec!["N".to_string(), "E".to_string()])
        );

        // Training crops classify back to their own labels.
        let image = load_ppm(dir.path().join("img0.ppm")).unwrap();
        let gray = to_grayscale(&image);
        for (p, expected) in [(0usize, Direction::North), (1, Direction::East)] {
            let crop = crop_gray(&gray, &annotations[0].persons[p]).unwrap();
            let predicted = predict_orientation(&model, &crop, &HogConfig::default()).unwrap();
            assert_eq!(predicted, expected);
        }

        let again =
            train_orientation(&annotations, dir.path(), &HogConfig::default(), &cfg).unwrap();
        assert_eq!(again, model);
    }

    #[test]
    fn orientation_training_requires_orientations() {
        let dir = tempfile::tempdir().unwrap();
        let mut annotation =
            textured_annotation(dir.path(), "img.ppm", &[Direction::North, Direction::East], 0);
        annotation.orientations = None;
        let err = train_orientation(
            &[annotation],
            dir.path(),
            &HogConfig::default(),
            &TrainConfig::default(),
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("img.ppm"), "{err}");
    }

    #[test]
    fn orientation_ties_break_north_first() {
        let cfg = HogConfig::default();
        let model = LinearModel {
            format_version: MODEL_FORMAT_VERSION,
            classes: (0..8).collect(),
            class_names: Some(Direction::ALL.iter().map(|d| d.name().into()).collect()),
            mean: vec![0.0; cfg.feature_len()],
            std: vec![1.0; cfg.feature_len()],
            weights: vec![vec![0.0; cfg.feature_len()]; 8],
            bias: vec![0.0; 8],
            config: TrainConfig::default(),
        };
        let crop = GrayImage::from_fn(32, 32, |x, _| x as f64);
        let predicted = predict_orientation(&model, &crop, &cfg).unwrap();
        assert_eq!(predicted, Direction::North);
    }
}
