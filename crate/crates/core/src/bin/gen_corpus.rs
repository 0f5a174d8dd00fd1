//! Regenerates the bundled synthetic corpus: 12 annotated 320×240 scenes,
//! a smile/neutral face model trained on procedural patches, and golden
//! face-feature fixtures.
//!
//! Everything derives from one seed through fixed streams (0 = training
//! patches, 1 = golden face, 10+i = scene i), so re-running reproduces the
//! checked-in files byte for byte.

use std::fs;
use std::path::PathBuf;

use clap::Parser;

use scenesent::classifier::{accuracy, train, Dataset, TrainConfig};
use scenesent::geometry::{
    save_annotations, BBox, ImageAnnotation, PoseletDetection, SentimentLabels,
};
use scenesent::grouping::{back_project, estimate_depth, GroupingConfig};
use scenesent::imaging::{
    load_pgm, resize_bilinear, to_grayscale, write_pgm, write_ppm, RgbImage,
};
use scenesent::orientation::Direction;
use scenesent::pyramid::{extract_face_features, PyramidConfig};
use scenesent::rng::DetRng;
use scenesent::{Error, Result};

#[derive(Parser)]
#[command(name = "gen-corpus", about = "Regenerate the bundled synthetic corpus")]
struct Cli {
    /// Directory receiving synthetic/, models/, and golden/.
    #[arg(long, default_value = "data")]
    out_dir: PathBuf,
    /// Corpus seed.
    #[arg(long, default_value_t = 11)]
    seed: u64,
}

const SCENE_W: usize = 320;
const SCENE_H: usize = 240;
const IMAGES: usize = 12;
const TRAIN_PATCHES_PER_CLASS: usize = 80;

const SKIN: [u8; 3] = [224, 186, 152];
const DARK: [u8; 3] = [38, 30, 28];

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let synthetic = cli.out_dir.join("synthetic");
    let models = cli.out_dir.join("models");
    let golden = cli.out_dir.join("golden");
    for dir in [&synthetic, &models, &golden] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    // Scenes + annotations. Each scene also reports which drawn faces smile
    // so the trained model can be sanity-checked against them below.
    let mut annotations = Vec::with_capacity(IMAGES);
    let mut drawn_faces: Vec<(usize, BBox, bool)> = Vec::new();
    for i in 0..IMAGES {
        let mut rng = DetRng::from_seed_stream(cli.seed, 10 + i as u64);
        let (scene, annotation, faces) = draw_scene(i, &mut rng)?;
        write_ppm(synthetic.join(&annotation.image), &scene)?;
        drawn_faces.extend(faces.into_iter().map(|(b, s)| (i, b, s)));
        annotations.push(annotation);
    }
    let annotations_path = synthetic.join("annotations.jsonl");
    save_annotations(&annotations_path, &annotations)?;
    println!("wrote {IMAGES} scenes + {}", annotations_path.display());

    // Smile model over half-octave pyramid features of procedural patches.
    let pyramid = PyramidConfig::default();
    let mut rng = DetRng::from_seed_stream(cli.seed, 0);
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..TRAIN_PATCHES_PER_CLASS {
        for (label, smiling) in [(0i64, false), (1i64, true)] {
            let size = 16 + rng.index(17);
            let patch = draw_face(size, smiling, &mut rng);
            features.push(patch_features(&patch, &pyramid)?);
            labels.push(label);
        }
    }
    let data = Dataset::new(features, labels)?;
    let cfg = TrainConfig {
        seed: cli.seed,
        ..TrainConfig::default()
    };
    let mut model = train(&data, &cfg)?;
    model.class_names = Some(vec!["neutral".into(), "smile".into()]);
    let train_acc = accuracy(&data.labels, &model.predict_all(&data)?);
    let model_path = models.join("smile_model.json");
    model.save(&model_path)?;
    println!(
        "wrote {} (train accuracy {train_acc:.3})",
        model_path.display()
    );

    // Sanity: classify the faces as the pipeline will see them — cropped
    // from the quantized scene files, not from the float buffers.
    let mut correct = 0;
    for (i, bbox, smiling) in &drawn_faces {
        let scene = scenesent::imaging::load_ppm(synthetic.join(&annotations[*i].image))?;
        let gray = to_grayscale(&scene);
        let crop = scenesent::imaging::crop_gray(&gray, bbox)?;
        let resized = resize_bilinear(&crop, pyramid.face_size, pyramid.face_size)?;
        let predicted = model.predict(&extract_face_features(&resized, &pyramid)?)?;
        if (predicted == 1) == *smiling {
            correct += 1;
        }
    }
    println!(
        "scene-face agreement {correct}/{} ({:.3})",
        drawn_faces.len(),
        correct as f64 / drawn_faces.len() as f64
    );

    // Golden fixtures: one 48×48 face written as PGM, and the pyramid
    // features of the *re-loaded* (quantized) file as little-endian f64s.
    let mut rng = DetRng::from_seed_stream(cli.seed, 1);
    let face = to_grayscale(&draw_face(48, true, &mut rng));
    let face_path = golden.join("face.pgm");
    write_pgm(&face_path, &face)?;
    let reloaded = load_pgm(&face_path)?;
    let golden_features = extract_face_features(&reloaded, &pyramid)?;
    let mut bytes = Vec::with_capacity(golden_features.len() * 8);
    for v in &golden_features {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let bin_path = golden.join("face_features.bin");
    fs::write(&bin_path, &bytes).map_err(|e| Error::io(&bin_path, e))?;
    println!(
        "wrote {} + {} ({} values)",
        face_path.display(),
        bin_path.display(),
        golden_features.len()
    );
    Ok(())
}

/// Grayscale 48×48 pyramid input for a raw patch, matching the pipeline's
/// crop → gray → resize path.
fn patch_features(patch: &RgbImage, pyramid: &PyramidConfig) -> Result<Vec<f64>> {
    let gray = to_grayscale(patch);
    let resized = resize_bilinear(&gray, pyramid.face_size, pyramid.face_size)?;
    extract_face_features(&resized, pyramid)
}

/// Square face patch: noisy skin fill, two round eyes, and a mouth that is
/// an upward arc when smiling and a straight bar otherwise. Layout jitters
/// per call so no two faces are pixel-identical.
fn draw_face(size: usize, smiling: bool, rng: &mut DetRng) -> RgbImage {
    let s = size as f64;
    let eye_y = s * (0.33 + 0.04 * (rng.f64() - 0.5));
    let eye_dx = s * (0.20 + 0.03 * (rng.f64() - 0.5));
    let eye_r = (s * 0.08).max(1.2);
    let mouth_y = s * (0.70 + 0.04 * (rng.f64() - 0.5));
    let mouth_half = s * (0.26 + 0.04 * (rng.f64() - 0.5));
    let curve = s * (0.13 + 0.03 * (rng.f64() - 0.5));
    let thick = (s * 0.07).max(1.2);
    let mut pixels = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let noise = (rng.f64() - 0.5) * 12.0;
            let shade = |c: u8| (c as f64 + noise).clamp(0.0, 255.0) as u8;
            let mut px = [shade(SKIN[0]), shade(SKIN[1]), shade(SKIN[2])];
            let (xf, yf) = (x as f64 + 0.5, y as f64 + 0.5);
            for ex in [s * 0.5 - eye_dx, s * 0.5 + eye_dx] {
                let (dx, dy) = (xf - ex, yf - eye_y);
                if dx * dx + dy * dy <= eye_r * eye_r {
                    px = DARK;
                }
            }
            let dx = xf - s * 0.5;
            if dx.abs() <= mouth_half {
                let t = dx / mouth_half;
                // Image y grows downward: a smile's center hangs below its
                // corners, so the arc adds to mouth_y in the middle.
                let target = if smiling {
                    mouth_y + curve * (1.0 - t * t)
                } else {
                    mouth_y
                };
                if (yf - target).abs() <= thick {
                    px = DARK;
                }
            }
            pixels.push(px);
        }
    }
    RgbImage {
        width: size,
        height: size,
        pixels,
    }
}

fn fill_rect(buf: &mut [[u8; 3]], x0: usize, y0: usize, x1: usize, y1: usize, color: [u8; 3]) {
    for y in y0..y1.min(SCENE_H) {
        for x in x0..x1.min(SCENE_W) {
            buf[y * SCENE_W + x] = color;
        }
    }
}

fn blit(buf: &mut [[u8; 3]], patch: &RgbImage, x0: usize, y0: usize) {
    for y in 0..patch.height {
        for x in 0..patch.width {
            let (sx, sy) = (x0 + x, y0 + y);
            if sx < SCENE_W && sy < SCENE_H {
                buf[sy * SCENE_W + sx] = patch.get(x, y);
            }
        }
    }
}

/// Snaps a ground-plane direction vector to the nearest of the 8 compass
/// directions (maximal dot product; earlier direction wins ties).
fn snap_direction(v: (f64, f64)) -> Direction {
    let mut best = Direction::North;
    let mut best_dot = f64::NEG_INFINITY;
    for d in Direction::ALL {
        let u = d.unit_vector();
        let dot = v.0 * u.0 + v.1 * u.1;
        if dot > best_dot {
            best_dot = dot;
            best = d;
        }
    }
    best
}

/// One scene: gradient backdrop and 2–4 drawn people. Label recipe for
/// image i (0-based) gives every class three images per axis:
/// interaction = 1+i/3, activity = 1+(i%4), happiness = 1+((i+1)%4),
/// focus = 1+((i+2)%4). The labels steer the rendering — interaction sets
/// spacing, activity sets poselet ids and backdrop, happiness sets how many
/// faces smile, focus sets how many people face the group's center.
/// Face boxes paired with their smiling flag, kept for the post-render
/// agreement check against the smile model.
type RenderedFaces = Vec<(BBox, bool)>;

fn draw_scene(i: usize, rng: &mut DetRng) -> Result<(RgbImage, ImageAnnotation, RenderedFaces)> {
    let interaction = 1 + (i / 3) as u8;
    let activity = 1 + (i % 4) as u8;
    let happiness = 1 + ((i + 1) % 4) as u8;
    let focus = 1 + ((i + 2) % 4) as u8;

    // Backdrop: vertical gradient tinted by the labels so even the color
    // histogram baseline has some signal.
    let top = [
        60 + 18 * activity,
        90 + 14 * happiness,
        120 + 10 * interaction,
    ];
    let bottom = [top[0] + 50, top[1] + 40, top[2] + 30];
    let mut buf = vec![[0u8; 3]; SCENE_W * SCENE_H];
    for y in 0..SCENE_H {
        let t = y as f64 / (SCENE_H - 1) as f64;
        let mix = |a: u8, b: u8| (a as f64 + t * (b as f64 - a as f64)).round() as u8;
        let row = [
            mix(top[0], bottom[0]),
            mix(top[1], bottom[1]),
            mix(top[2], bottom[2]),
        ];
        for x in 0..SCENE_W {
            buf[y * SCENE_W + x] = row;
        }
    }

    let n = 2 + i % 3;
    // Tighter spacing for higher interaction.
    let spread = 1.0 - 0.25 * (interaction - 1) as f64;
    let spacing = 34.0 + 40.0 * spread;
    let span = spacing * (n - 1) as f64;
    let start = (SCENE_W as f64 - span) / 2.0;

    let smiling_count = ((n as f64) * (happiness - 1) as f64 / 3.0).round() as usize;

    let mut persons = Vec::with_capacity(n);
    let mut faces = Vec::new();
    let mut torsos = Vec::new();
    let mut poselets = Vec::new();
    let mut drawn = Vec::new();
    for p in 0..n {
        let h = 96.0 + 28.0 * ((i + p) % 3) as f64;
        let w = (h / 3.0).round();
        let cx = start + spacing * p as f64 + rng.range_f64(-4.0, 4.0);
        let y1 = 230.0 + rng.range_f64(-4.0, 4.0);
        let y0 = y1 - h;
        let x0 = (cx - w / 2.0).clamp(2.0, (SCENE_W - 2) as f64 - w);
        let person = BBox::new(x0, y0, x0 + w, y1)?;
        persons.push(person);

        // Face: square patch of side ⌊h/7⌉, top-centered in the person box.
        let fsize = (h / 7.0).round() as usize;
        let fx = (x0 + (w - fsize as f64) / 2.0).round() as usize;
        let fy = (y0 + 2.0).round() as usize;
        let smiling = p < smiling_count;
        let patch = draw_face(fsize, smiling, rng);
        let face = BBox::new(
            fx as f64,
            fy as f64,
            (fx + fsize) as f64,
            (fy + fsize) as f64,
        )?;
        faces.push(face);
        drawn.push((face, smiling));

        // Body: shirt under the face, darker legs to the ground line.
        let shirt = [
            70 + rng.index(120) as u8,
            70 + rng.index(120) as u8,
            70 + rng.index(120) as u8,
        ];
        let torso_y0 = fy + fsize + 2;
        let torso_y1 = torso_y0 + (h * 0.45) as usize;
        let torso_x0 = (x0 + w * 0.08) as usize;
        let torso_x1 = (x0 + w * 0.92) as usize;
        fill_rect(&mut buf, torso_x0, torso_y0, torso_x1, torso_y1, shirt);
        fill_rect(
            &mut buf,
            (x0 + w * 0.2) as usize,
            torso_y1,
            (x0 + w * 0.8) as usize,
            y1 as usize,
            [52, 48, 60],
        );
        blit(&mut buf, &patch, fx, fy);
        torsos.push(BBox::new(
            torso_x0 as f64,
            torso_y0 as f64,
            torso_x1 as f64,
            torso_y1 as f64,
        )?);

        // Poselets: ids cluster by activity; the first detection always
        // clears the default 0.9 score threshold, the rest may not.
        for d in 0..2 + rng.index(2) {
            let id = ((activity - 1) as u32) * 30 + rng.index(10) as u32;
            let score = if d == 0 {
                0.9 + 0.1 * rng.f64()
            } else {
                0.5 + 0.5 * rng.f64()
            };
            let py0 = y0 + rng.range_f64(0.0, h * 0.3);
            let py1 = (py0 + h * 0.4).min(y1);
            poselets.push(PoseletDetection::new(
                id,
                score,
                BBox::new(x0, py0, x0 + w, py1)?,
            )?);
        }
    }

    // A near-duplicate of the first face in some images exercises dedupe.
    if i.is_multiple_of(5) {
        let f = faces[0];
        faces.push(BBox::new(
            f.x_min() + 1.0,
            f.y_min() + 1.0,
            f.x_max() - 1.0,
            f.y_max() - 1.0,
        )?);
    }
    // Drop the last torso in some images so a person goes face-only.
    if i % 4 == 1 {
        torsos.pop();
    }

    // Orientations: higher focus turns more people toward the group's
    // ground-plane centroid; the rest look in random directions.
    let grouping = GroupingConfig::default();
    let ground: Vec<(f64, f64)> = persons
        .iter()
        .zip(&faces)
        .map(|(person, face)| {
            let depth = estimate_depth(face.height(), grouping.k_face)?;
            Ok(back_project(person, depth, SCENE_W as f64))
        })
        .collect::<Result<_>>()?;
    let centroid = (
        ground.iter().map(|g| g.0).sum::<f64>() / n as f64,
        ground.iter().map(|g| g.1).sum::<f64>() / n as f64,
    );
    let orientations = ground
        .iter()
        .map(|&(x, z)| {
            let inward = (centroid.0 - x, centroid.1 - z);
            let aligned = rng.f64() < (focus - 1) as f64 / 3.0;
            if aligned && (inward.0 != 0.0 || inward.1 != 0.0) {
                snap_direction(inward)
            } else {
                Direction::ALL[rng.index(8)]
            }
        })
        .collect();

    let scene = RgbImage::new(SCENE_W, SCENE_H, buf)?;
    let annotation = ImageAnnotation {
        image: format!("scene_{i:02}.ppm"),
        width: SCENE_W as u32,
        height: SCENE_H as u32,
        persons,
        faces,
        torsos,
        poselets,
        labels: Some(SentimentLabels::new(interaction, activity, happiness, focus)?),
        orientations: Some(orientations),
    };
    annotation.validate()?;
    Ok((scene, annotation, drawn))
}
