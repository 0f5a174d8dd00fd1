//! Half-octave multi-scale Gaussian derivative features for face crops.
//!
//! Each scale smooths twice — once by σ, once by √2·σ — so the two passes
//! compose to a full octave, and the next scale starts from the result with
//! σ doubled. All three images per scale (the entry image and both smoothed
//! ones) contribute gradient statistics over non-overlapping 4×4 windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{gaussian_convolve, gradients, GrayImage};

/// Pixel width of the square aggregation window.
pub const WINDOW: usize = 4;
/// Level images contributing per scale (entry, σ-smoothed, √2σ-smoothed).
pub const LEVELS_PER_SCALE: usize = 3;
/// Statistics per window: mean and population std of five gradient maps.
pub const STATS_PER_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PyramidConfig {
    /// Side of the square face crop; must divide evenly into 4×4 windows.
    pub face_size: usize,
    /// σ of the first scale; doubles at each subsequent scale.
    pub base_sigma: f64,
    /// Number of half-octave scales.
    pub scales: usize,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig {
            face_size: 48,
            base_sigma: 1.0,
            scales: 3,
        }
    }
}

impl PyramidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.face_size == 0 || !self.face_size.is_multiple_of(WINDOW) {
            return Err(Error::InvalidInput(format!(
                "face_size must be a positive multiple of {WINDOW}, got {}",
                self.face_size
            )));
        }
        if !(self.base_sigma > 0.0) || !self.base_sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "base_sigma must be a positive finite real, got {}",
                self.base_sigma
            )));
        }
        if self.scales == 0 {
            return Err(Error::InvalidInput("scales must be >= 1".into()));
        }
        Ok(())
    }

    /// Windows along one side of the crop.
    pub fn windows_per_side(&self) -> usize {
        self.face_size / WINDOW
    }

    /// Total output length: scales · 3 levels · windows² · 10.
    pub fn feature_len(&self) -> usize {
        self.scales * LEVELS_PER_SCALE * self.windows_per_side().pow(2) * STATS_PER_WINDOW
    }
}

/// Appends, for every row-major 4×4 window, the five gradient-map means
/// followed by the five population standard deviations.
fn window_stats(level: &GrayImage, out: &mut Vec<f64>) -> Result<()> {
    let grads = gradients(level)?;
    let maps = grads.maps();
    let per_side = level.width / WINDOW;
    let n = (WINDOW * WINDOW) as f64;
    for wy in 0..per_side {
        for wx in 0..per_side {
            let mut means = [0.0; 5];
            let mut sq_means = [0.0; 5];
            for (m, map) in maps.iter().enumerate() {
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for y in wy * WINDOW..(wy + 1) * WINDOW {
                    for x in wx * WINDOW..(wx + 1) * WINDOW {
                        let v = map.get(x, y);
                        sum += v;
                        sum_sq += v * v;
                    }
                }
                means[m] = sum / n;
                sq_means[m] = sum_sq / n;
            }
            out.extend_from_slice(&means);
            for m in 0..5 {
                // Population variance; clamp tiny negative rounding away.
                out.push((sq_means[m] - means[m] * means[m]).max(0.0).sqrt());
            }
        }
    }
    Ok(())
}

/// Multi-scale gradient statistics of a face crop already resized to
/// `cfg.face_size` square. Output layout: scale-major, then level, then
/// window row-major, then [mean Ix, mean Iy, mean Ixx, mean Iyy, mean Ixy,
/// std Ix, std Iy, std Ixx, std Iyy, std Ixy].
pub fn extract_face_features(face: &GrayImage, cfg: &PyramidConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if face.width != cfg.face_size || face.height != cfg.face_size {
        return Err(Error::InvalidInput(format!(
            "face crop must be {0}x{0}, got {1}x{2}",
            cfg.face_size, face.width, face.height
        )));
    }
    let mut out = Vec::with_capacity(cfg.feature_len());
    let mut entry = face.clone();
    let mut sigma = cfg.base_sigma;
    for _ in 0..cfg.scales {
        let smoothed = gaussian_convolve(&entry, sigma)?;
        let smoothed_again = gaussian_convolve(&smoothed, std::f64::consts::SQRT_2 * sigma)?;
        for level in [&entry, &smoothed, &smoothed_again] {
            window_stats(level, &mut out)?;
        }
        entry = smoothed_again;
        sigma *= 2.0;
    }
    debug_assert_eq!(out.len(), cfg.feature_len());
    Ok(out)
}
