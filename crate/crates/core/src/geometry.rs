//! Pixel-space rectangles, per-image detection sets, and annotation I/O.
//!
//! Coordinates live in the image frame: origin at the top-left corner,
//! y growing downward, all values non-negative reals. Annotation files are
//! UTF-8 JSON lines, one image per line; boxes serialize as
//! `[x_min, y_min, x_max, y_max]`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orientation::Direction;

/// Closed axis-aligned rectangle. `x_min < x_max`, `y_min < y_max`, all >= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        for (name, v) in [
            ("x_min", x_min),
            ("y_min", y_min),
            ("x_max", x_max),
            ("y_max", y_max),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "box {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if x_min >= x_max {
            return Err(Error::InvalidInput(format!(
                "box requires x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if y_min >= y_max {
            return Err(Error::InvalidInput(format!(
                "box requires y_min < y_max, got [{y_min}, {y_max}]"
            )));
        }
        Ok(BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

impl Serialize for BBox {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = <[f64; 4]>::deserialize(deserializer)?;
        BBox::new(raw[0], raw[1], raw[2], raw[3]).map_err(serde::de::Error::custom)
    }
}

/// One hit from the 150-type poselet detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseletDetection {
    pub id: u32,
    pub score: f64,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

/// Number of poselet types.
pub const POSELET_TYPES: usize = 150;

impl PoseletDetection {
    pub fn new(id: u32, score: f64, bbox: BBox) -> Result<Self> {
        if id as usize >= POSELET_TYPES {
            return Err(Error::InvalidInput(format!(
                "poselet id must be in [0, {}], got {id}",
                POSELET_TYPES - 1
            )));
        }
        if !score.is_finite() || score < 0.0 {
            return Err(Error::InvalidInput(format!(
                "poselet score must be finite and >= 0, got {score}"
            )));
        }
        Ok(PoseletDetection { id, score, bbox })
    }
}

/// Per-image sentiment labels, each on the 1..=4 intensity scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentLabels {
    pub interaction: u8,
    pub activity: u8,
    pub happiness: u8,
    pub focus: u8,
}

impl SentimentLabels {
    pub fn new(interaction: u8, activity: u8, happiness: u8, focus: u8) -> Result<Self> {
        let labels = SentimentLabels {
            interaction,
            activity,
            happiness,
            focus,
        };
        labels.validate()?;
        Ok(labels)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("interaction", self.interaction),
            ("activity", self.activity),
            ("happiness", self.happiness),
            ("focus", self.focus),
        ] {
            if !(1..=4).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "label {name} must be in [1, 4], got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, axis: LabelAxis) -> u8 {
        match axis {
            LabelAxis::Interaction => self.interaction,
            LabelAxis::Activity => self.activity,
            LabelAxis::Happiness => self.happiness,
            LabelAxis::Focus => self.focus,
        }
    }
}

/// The four annotated scene characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelAxis {
    Interaction,
    Activity,
    Happiness,
    Focus,
}

impl LabelAxis {
    pub const ALL: [LabelAxis; 4] = [
        LabelAxis::Interaction,
        LabelAxis::Activity,
        LabelAxis::Happiness,
        LabelAxis::Focus,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LabelAxis::Interaction => "interaction",
            LabelAxis::Activity => "activity",
            LabelAxis::Happiness => "happiness",
            LabelAxis::Focus => "focus",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "interaction" => Ok(LabelAxis::Interaction),
            "activity" => Ok(LabelAxis::Activity),
            "happiness" => Ok(LabelAxis::Happiness),
            "focus" => Ok(LabelAxis::Focus),
            other => Err(Error::InvalidInput(format!(
                "unknown label axis `{other}` (expected interaction|activity|happiness|focus)"
            ))),
        }
    }
}

impl std::fmt::Display for LabelAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything known about one image: detection sets P/F/T, poselets, and
/// optional ground-truth labels and person orientations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageAnnotation {
    pub image: String,
    pub width: u32,
    pub height: u32,
    pub persons: Vec<BBox>,
    pub faces: Vec<BBox>,
    pub torsos: Vec<BBox>,
    pub poselets: Vec<PoseletDetection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<SentimentLabels>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientations: Option<Vec<Direction>>,
}

impl ImageAnnotation {
    /// Checks every invariant: boxes inside the image, poselet ids/scores in
    /// range, labels in 1..=4, orientations parallel to persons.
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::annotation(&self.image, "width and height must be > 0"));
        }
        let check_box = |field: &str, i: usize, b: &BBox| -> Result<()> {
            if b.x_max() > self.width as f64 || b.y_max() > self.height as f64 {
                return Err(Error::annotation(
                    &self.image,
                    format!(
                        "{field}[{i}] = {:?} exceeds image bounds {}x{}",
                        b.as_array(),
                        self.width,
                        self.height
                    ),
                ));
            }
            Ok(())
        };
        for (i, b) in self.persons.iter().enumerate() {
            check_box("persons", i, b)?;
        }
        for (i, b) in self.faces.iter().enumerate() {
            check_box("faces", i, b)?;
        }
        for (i, b) in self.torsos.iter().enumerate() {
            check_box("torsos", i, b)?;
        }
        for (i, p) in self.poselets.iter().enumerate() {
            PoseletDetection::new(p.id, p.score, p.bbox)
                .map_err(|e| Error::annotation(&self.image, format!("poselets[{i}]: {e}")))?;
            check_box("poselets", i, &p.bbox)?;
        }
        if let Some(labels) = &self.labels {
            labels
                .validate()
                .map_err(|e| Error::annotation(&self.image, e.to_string()))?;
        }
        if let Some(orientations) = &self.orientations {
            if orientations.len() != self.persons.len() {
                return Err(Error::annotation(
                    &self.image,
                    format!(
                        "orientations has {} entries but persons has {}",
                        orientations.len(),
                        self.persons.len()
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// True iff `inner` lies entirely within `outer`; boundary contact counts.
pub fn contains(outer: &BBox, inner: &BBox) -> bool {
    inner.x_min() >= outer.x_min()
        && inner.y_min() >= outer.y_min()
        && inner.x_max() <= outer.x_max()
        && inner.y_max() <= outer.y_max()
}

/// Euclidean distance between the midpoints of the two boxes' top edges.
pub fn top_edge_center_distance(face: &BBox, person: &BBox) -> f64 {
    let fx = (face.x_min() + face.x_max()) / 2.0;
    let px = (person.x_min() + person.x_max()) / 2.0;
    let dx = fx - px;
    let dy = face.y_min() - person.y_min();
    (dx * dx + dy * dy).sqrt()
}

/// Intersection area over union area; 0 when disjoint.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let ix = (a.x_max().min(b.x_max()) - a.x_min().max(b.x_min())).max(0.0);
    let iy = (a.y_max().min(b.y_max()) - a.y_min().max(b.y_min())).max(0.0);
    let inter = ix * iy;
    if inter == 0.0 {
        return 0.0;
    }
    inter / (area(a) + area(b) - inter)
}

pub fn area(b: &BBox) -> f64 {
    b.width() * b.height()
}

/// Reads a JSON-lines annotation file, validating every record. Errors name
/// the offending line or image.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<ImageAnnotation>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let annotation: ImageAnnotation = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        annotation.validate()?;
        out.push(annotation);
    }
    Ok(out)
}

/// Writes annotations in the same JSON-lines format `load_annotations` reads.
pub fn save_annotations(path: impl AsRef<Path>, annotations: &[ImageAnnotation]) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for annotation in annotations {
        let line = serde_json::to_string(annotation)
            .map_err(|e| Error::parse(path, 0, e.to_string()))?;
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn contains_basic_cases() {
        let outer = bx(0.0, 0.0, 10.0, 10.0);
        assert!(contains(&outer, &bx(2.0, 2.0, 5.0, 5.0)));
        assert!(contains(&outer, &outer));
        assert!(!contains(&outer, &bx(5.0, 5.0, 12.0, 8.0)));
    }

    #[test]
    fn top_edge_distance_cases() {
        assert_eq!(
            top_edge_center_distance(&bx(4.0, 0.0, 6.0, 2.0), &bx(0.0, 0.0, 10.0, 20.0)),
            0.0
        );
        // 3-4-5 triangle: face top center (1,3), person top center (5,0).
        assert_eq!(
            top_edge_center_distance(&bx(0.0, 3.0, 2.0, 5.0), &bx(0.0, 0.0, 10.0, 20.0)),
            5.0
        );
        let b = bx(4.0, 1.0, 6.0, 3.0);
        assert_eq!(top_edge_center_distance(&b, &b), 0.0);
    }

    #[test]
    fn iou_cases() {
        let a = bx(0.0, 0.0, 4.0, 4.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bx(10.0, 10.0, 12.0, 12.0)), 0.0);
        let third = iou(&a, &bx(2.0, 0.0, 6.0, 4.0));
        assert!((third - 1.0 / 3.0).abs() < 1e-12, "got {third}");
    }

    #[test]
    fn area_cases() {
        assert_eq!(area(&bx(0.0, 0.0, 1.0, 1.0)), 1.0);
        assert_eq!(area(&bx(0.0, 0.0, 10.0, 20.0)), 200.0);
        assert_eq!(area(&bx(2.0, 3.0, 5.0, 7.0)), 12.0);
    }

    #[test]
    fn box_rejects_inverted_and_negative() {
        assert!(BBox::new(5.0, 0.0, 3.0, 4.0).is_err());
        assert!(BBox::new(0.0, 4.0, 3.0, 4.0).is_err());
        assert!(BBox::new(-1.0, 0.0, 3.0, 4.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::NAN, 4.0).is_err());
    }

    fn sample_annotation() -> ImageAnnotation {
        ImageAnnotation {
            image: "a.ppm".into(),
            width: 100,
            height: 80,
            persons: vec![bx(10.0, 5.0, 40.0, 75.0)],
            faces: vec![bx(20.0, 6.0, 30.0, 16.0)],
            torsos: vec![bx(15.0, 20.0, 35.0, 50.0)],
            poselets: vec![PoseletDetection::new(3, 0.95, bx(12.0, 8.0, 38.0, 60.0)).unwrap()],
            labels: Some(SentimentLabels::new(1, 2, 3, 4).unwrap()),
            orientations: Some(vec![Direction::North]),
        }
    }

    #[test]
    fn load_empty_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(load_annotations(&path).unwrap().is_empty());
    }

    #[test]
    fn annotations_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.jsonl");
        let original = vec![sample_annotation()];
        save_annotations(&path, &original).unwrap();
        let loaded = load_annotations(&path).unwrap();
        assert_eq!(loaded, original);

        // Second round trip is byte identical.
        let bytes = std::fs::read(&path).unwrap();
        save_annotations(&path, &loaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), bytes);
    }

    #[test]
    fn load_rejects_inverted_box_with_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            r#"{"image":"x.ppm","width":10,"height":10,"persons":[[5,0,3,4]],"faces":[],"torsos":[],"poselets":[]}"#,
        )
        .unwrap();
        let err = load_annotations(&path).unwrap_err().to_string();
        assert!(err.contains(":1:"), "error should name line 1: {err}");
        assert!(err.contains("x_min < x_max"), "error should name the box: {err}");
    }

    #[test]
    fn load_rejects_malformed_json_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let good = serde_json::to_string(&sample_annotation()).unwrap();
        std::fs::write(&path, format!("{good}\nnot json\n")).unwrap();
        let err = load_annotations(&path).unwrap_err().to_string();
        assert!(err.contains(":2:"), "error should name line 2: {err}");
    }

    #[test]
    fn validate_rejects_out_of_bounds_and_mismatched_orientations() {
        let mut annotation = sample_annotation();
        annotation.faces.push(bx(90.0, 70.0, 110.0, 79.0));
        let err = annotation.validate().unwrap_err().to_string();
        assert!(err.contains("faces[1]"), "{err}");

        let mut annotation = sample_annotation();
        annotation.orientations = Some(vec![]);
        assert!(annotation.validate().is_err());
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (0.0f64..50.0, 0.0f64..50.0, 0.1f64..50.0, 0.1f64..50.0)
            .prop_map(|(x, y, w, h)| bx(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            let ba = iou(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        }

        #[test]
        fn iou_self_is_one(a in arb_box()) {
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn contains_is_reflexive(a in arb_box()) {
            prop_assert!(contains(&a, &a));
        }

        #[test]
        fn mutual_containment_implies_equality(a in arb_box(), b in arb_box()) {
            if contains(&a, &b) && contains(&b, &a) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
