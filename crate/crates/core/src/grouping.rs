//! Social-group discovery on the ground plane.
//!
//! Persons become 2-D points (lateral offset, depth) via the face-size depth
//! law d = k/f and a pinhole back-projection. A k-means variant weights each
//! point-to-center distance by how much the person faces that center, the
//! number of groups is chosen by maximizing an alignment-minus-distance
//! potential, and a 6-value summary of the chosen clustering feeds the
//! scene classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::rng::DetRng;

/// A person on the ground plane: position (x lateral, z depth > 0) and a
/// unit facing vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonPoint {
    pub position: (f64, f64),
    pub orientation: (f64, f64),
    pub person_index: usize,
}

impl PersonPoint {
    /// Validates depth > 0 and renormalizes `orientation` (rejected when its
    /// norm strays more than 1e−6 from 1).
    pub fn new(position: (f64, f64), orientation: (f64, f64), person_index: usize) -> Result<Self> {
        if !(position.1 > 0.0) || !position.0.is_finite() || !position.1.is_finite() {
            return Err(Error::InvalidInput(format!(
                "person position needs finite x and depth > 0, got {position:?}"
            )));
        }
        let norm = (orientation.0 * orientation.0 + orientation.1 * orientation.1).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "orientation must be a unit vector, got {orientation:?} (norm {norm})"
            )));
        }
        Ok(PersonPoint {
            position,
            orientation: (orientation.0 / norm, orientation.1 / norm),
            person_index,
        })
    }
}

/// Knobs for depth estimation, clustering, and K selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupingConfig {
    /// Numerator of the depth law d = k_face / face_height.
    pub k_face: f64,
    /// Distance weight in the selection potential.
    pub lambda: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        GroupingConfig {
            k_face: 100.0,
            lambda: 0.1,
            k_min: 1,
            k_max: 10,
            restarts: 5,
            max_iters: 100,
        }
    }
}

impl GroupingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_face > 0.0) || !(self.lambda >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "k_face must be > 0 and lambda >= 0, got {self:?}"
            )));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::InvalidInput(format!(
                "need 1 <= k_min <= k_max, got {} ..= {}",
                self.k_min, self.k_max
            )));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidInput("restarts and max_iters must be >= 1".into()));
        }
        Ok(())
    }

    /// Most singleton clusters a candidate clustering may have: ⌊N/3⌋.
    pub fn singleton_cap(n: usize) -> usize {
        n / 3
    }
}

/// One clustering outcome over a fixed point list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster id per point, parallel to the input list.
    pub assignments: Vec<usize>,
    pub centers: Vec<(f64, f64)>,
    pub total_modified_distance: f64,
    pub potential: f64,
}

/// Depth from apparent face height: d = k / f.
pub fn estimate_depth(face_height: f64, k_face: f64) -> Result<f64> {
    if !(face_height > 0.0) || !face_height.is_finite() {
        return Err(Error::InvalidInput(format!(
            "face height must be positive, got {face_height}"
        )));
    }
    if !(k_face > 0.0) || !k_face.is_finite() {
        return Err(Error::InvalidInput(format!("k_face must be positive, got {k_face}")));
    }
    Ok(k_face / face_height)
}

/// Pinhole back-projection of a person box to the ground plane, with focal
/// length = image width and the principal point at the image center:
/// x = (u − W/2)·d/W for the box's horizontal center u, z = d.
pub fn back_project(person: &BBox, depth: f64, image_width: f64) -> (f64, f64) {
    let u = (person.x_min() + person.x_max()) / 2.0;
    ((u - image_width / 2.0) * depth / image_width, depth)
}

#[inline]
fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

#[inline]
fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    (dx * dx + dy * dy).sqrt()
}

/// Facing weight c = 1 − 0.5·(θ̂·φ̂): exactly 0.5 facing the target, 1.5
/// facing directly away, 1.0 perpendicular. The dot product is clamped to
/// [−1, 1] so rounding in unit vectors cannot push c outside its range.
pub fn orientation_coefficient(theta: (f64, f64), phi: (f64, f64)) -> Result<f64> {
    for v in [theta, phi] {
        let norm = (v.0 * v.0 + v.1 * v.1).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "orientation_coefficient needs unit vectors, got {v:?} (norm {norm})"
            )));
        }
    }
    Ok(1.0 - 0.5 * dot(theta, phi).clamp(-1.0, 1.0))
}

/// Same formula without validation, for inner loops over vectors that are
/// unit by construction.
#[inline]
fn coefficient_unchecked(theta: (f64, f64), phi: (f64, f64)) -> f64 {
    1.0 - 0.5 * dot(theta, phi).clamp(-1.0, 1.0)
}

/// Euclidean distance to `center` scaled by the facing weight; 0 when the
/// point sits on the center.
pub fn modified_distance(p: &PersonPoint, center: (f64, f64)) -> f64 {
    let d = euclidean(p.position, center);
    if d == 0.0 {
        return 0.0;
    }
    let phi = ((center.0 - p.position.0) / d, (center.1 - p.position.1) / d);
    coefficient_unchecked(p.orientation, phi) * d
}

/// Assign every point to the center with the smallest modified distance
/// (ties to the lower cluster id).
fn assign(points: &[PersonPoint], centers: &[(f64, f64)]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = modified_distance(p, centers[0]);
            for (j, &c) in centers.iter().enumerate().skip(1) {
                let d = modified_distance(p, c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

fn total_modified_distance(
    points: &[PersonPoint],
    centers: &[(f64, f64)],
    assignments: &[usize],
) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| modified_distance(p, centers[a]))
        .sum()
}

/// Alignment-minus-spread score Σᵢ θ̂ᵢ·φ̂ᵢ − λ·Σᵢ‖pᵢ − cᵢ‖ over all points,
/// where φ̂ᵢ points from person i to its assigned center. A person on its
/// center contributes 1 alignment and 0 distance.
pub fn potential(
    assignments: &[usize],
    centers: &[(f64, f64)],
    points: &[PersonPoint],
    lambda: f64,
) -> f64 {
    let mut alignment = 0.0;
    let mut spread = 0.0;
    for (p, &a) in points.iter().zip(assignments) {
        let c = centers[a];
        let d = euclidean(p.position, c);
        if d == 0.0 {
            alignment += 1.0;
        } else {
            let phi = ((c.0 - p.position.0) / d, (c.1 - p.position.1) / d);
            alignment += dot(p.orientation, phi);
            spread += d;
        }
    }
    alignment - lambda * spread
}

/// Lloyd-style clustering under the modified distance. Centers start at K
/// distinct seeded point positions; updates use the unweighted member mean;
/// a cluster that empties is re-seeded to the point farthest (in modified
/// distance) from its current center. Runs `cfg.restarts` times on derived
/// random streams and keeps the lowest total modified distance (ties to the
/// earliest restart).
pub fn weighted_kmeans(
    points: &[PersonPoint],
    k: usize,
    cfg: &GroupingConfig,
    seed: u64,
) -> Result<Clustering> {
    cfg.validate()?;
    let n = points.len();
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!(
            "cluster count must be in 1..={n}, got {k}"
        )));
    }

    let mut best: Option<Clustering> = None;
    for restart in 0..cfg.restarts {
        // One independent stream per (K, restart) pair.
        let mut rng = DetRng::from_seed_stream(seed, ((k as u64) << 32) | restart as u64);
        let mut centers: Vec<(f64, f64)> = rng
            .sample_indices(n, k)
            .into_iter()
            .map(|i| points[i].position)
            .collect();
        let mut assignments = assign(points, &centers);

        for _ in 0..cfg.max_iters {
            // Means of non-empty clusters.
            let mut sums = vec![(0.0, 0.0); k];
            let mut counts = vec![0usize; k];
            for (p, &a) in points.iter().zip(&assignments) {
                sums[a].0 += p.position.0;
                sums[a].1 += p.position.1;
                counts[a] += 1;
            }
            for j in 0..k {
                if counts[j] > 0 {
                    centers[j] = (sums[j].0 / counts[j] as f64, sums[j].1 / counts[j] as f64);
                }
            }
            // Re-seed empty clusters to the worst-served points.
            let mut claimed = vec![false; n];
            for j in 0..k {
                if counts[j] > 0 {
                    continue;
                }
                let mut farthest = None;
                for (i, (p, &a)) in points.iter().zip(&assignments).enumerate() {
                    if claimed[i] {
                        continue;
                    }
                    let d = modified_distance(p, centers[a]);
                    if farthest.is_none_or(|(_, fd)| d > fd) {
                        farthest = Some((i, d));
                    }
                }
                if let Some((i, _)) = farthest {
                    centers[j] = points[i].position;
                    claimed[i] = true;
                }
            }

            let new_assignments = assign(points, &centers);
            if new_assignments == assignments {
                break;
            }
            assignments = new_assignments;
        }

        let total = total_modified_distance(points, &centers, &assignments);
        if best.as_ref().is_none_or(|b| total < b.total_modified_distance) {
            best = Some(Clustering {
                k,
                potential: potential(&assignments, &centers, points, cfg.lambda),
                assignments,
                centers,
                total_modified_distance: total,
            });
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn singleton_count(clustering: &Clustering) -> usize {
    let mut sizes = vec![0usize; clustering.k];
    for &a in &clustering.assignments {
        sizes[a] += 1;
    }
    sizes.iter().filter(|&&s| s == 1).count()
}

/// Sweeps K over [k_min, min(k_max, N)], drops candidates with more than
/// ⌊N/3⌋ singleton clusters (waived if that would drop everything), and
/// returns the survivor with the highest potential; ties go to smaller K.
pub fn select_k(points: &[PersonPoint], cfg: &GroupingConfig, seed: u64) -> Result<Clustering> {
    cfg.validate()?;
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidInput("select_k needs at least one point".into()));
    }
    let k_hi = cfg.k_max.min(n);
    let k_lo = cfg.k_min.min(k_hi);
    let candidates: Vec<Clustering> = (k_lo..=k_hi)
        .map(|k| weighted_kmeans(points, k, cfg, seed))
        .collect::<Result<_>>()?;

    let cap = GroupingConfig::singleton_cap(n);
    let survivors: Vec<&Clustering> = {
        let within_cap: Vec<&Clustering> = candidates
            .iter()
            .filter(|c| singleton_count(c) <= cap)
            .collect();
        if within_cap.is_empty() {
            candidates.iter().collect()
        } else {
            within_cap
        }
    };
    let mut best = survivors[0];
    for c in &survivors[1..] {
        if c.potential > best.potential {
            best = c;
        }
    }
    Ok(best.clone())
}

/// Six-value clustering summary: [K, mean cluster size, max cluster size,
/// singleton count, mean member-to-center Euclidean distance, mean facing
/// alignment θ̂·φ̂ (1 for a member on its center)].
pub fn group_features(clustering: &Clustering, points: &[PersonPoint]) -> [f64; 6] {
    let n = points.len();
    let mut sizes = vec![0usize; clustering.k];
    for &a in &clustering.assignments {
        sizes[a] += 1;
    }
    let mut dist_sum = 0.0;
    let mut align_sum = 0.0;
    for (p, &a) in points.iter().zip(&clustering.assignments) {
        let c = clustering.centers[a];
        let d = euclidean(p.position, c);
        dist_sum += d;
        if d == 0.0 {
            align_sum += 1.0;
        } else {
            align_sum += dot(
                p.orientation,
                ((c.0 - p.position.0) / d, (c.1 - p.position.1) / d),
            );
        }
    }
    [
        clustering.k as f64,
        n as f64 / clustering.k as f64,
        sizes.iter().max().copied().unwrap_or(0) as f64,
        sizes.iter().filter(|&&s| s == 1).count() as f64,
        dist_sum / n as f64,
        align_sum / n as f64,
    ]
}

/// Number of entries `group_features` produces.
pub const GROUP_FEATURE_LEN: usize = 6;
