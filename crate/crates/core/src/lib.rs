// Validation guards are written `!(x > 0.0)` so NaN fails them; the
// positive comparison clippy suggests would quietly accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Group sentiment classification for images from pre-detected bounding
//! boxes.
//!
//! The pipeline scores an image of several people along four axes —
//! interaction, activity, happiness, focus — each on a 1..4 intensity
//! scale, using only annotation boxes (persons, faces, torsos, poselet
//! detections) plus the pixels:
//!
//! 1. [`matching`] assigns faces and torsos to person boxes greedily.
//! 2. [`pyramid`] turns each 48×48 face crop into 12,960 multi-scale
//!    gradient statistics; a smile model built on them labels faces for the
//!    [`features`] emotion grid.
//! 3. [`orientation`] classifies each person's facing direction from HOG
//!    descriptors; [`grouping`] back-projects persons to the ground plane
//!    and clusters them with an orientation-weighted k-means.
//! 4. [`features`] assembles the per-image vector and [`classifier`] trains
//!    one-vs-rest linear SVMs on it; [`pipeline`] orchestrates experiments.
//!
//! Everything is deterministic for a fixed seed: random choices flow from
//! one seeded ChaCha8 generator through documented derived streams.

pub mod classifier;
pub mod error;
pub mod features;
pub mod geometry;
pub mod grouping;
pub mod imaging;
pub mod matching;
pub mod orientation;
pub mod pipeline;
pub mod pyramid;
pub mod rng;

pub use error::{Error, Result};
