//! Greedy assignment of detected faces and torsos to person boxes.
//!
//! Faces are deduplicated by overlap, then each face claims the closest
//! containing person (by top-edge center distance); torsos are claimed by
//! persons from smallest to largest, each taking the largest contained torso
//! still free. Persons that end up with neither a face nor a torso are
//! dropped.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{area, contains, iou, top_edge_center_distance, BBox, ImageAnnotation};

/// Default IoU above which two face boxes count as duplicates.
pub const DEFAULT_FACE_IOU_THRESHOLD: f64 = 0.3;

/// A person box together with the face and torso assigned to it.
/// `person_index` refers back to the annotation's persons list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonRecord {
    pub person_index: usize,
    pub person: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face: Option<BBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torso: Option<BBox>,
}

/// Greedy duplicate removal: consider faces largest-area first (ties keep
/// input order) and keep one iff its IoU with every kept face stays below
/// the threshold.
pub fn dedupe_faces(faces: &[BBox], iou_threshold: f64) -> Vec<BBox> {
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by(|&a, &b| {
        area(&faces[b])
            .partial_cmp(&area(&faces[a]))
            .expect("box areas are finite")
    });
    let mut kept: Vec<BBox> = Vec::new();
    for i in order {
        if kept.iter().all(|k| iou(k, &faces[i]) < iou_threshold) {
            kept.push(faces[i]);
        }
    }
    kept
}

/// For each face in input order, the index of the assigned person: the
/// still-free person whose box contains the face and whose top-edge center
/// lies closest (ties to the lowest person index). Unmatchable faces get
/// `None`; no person is assigned twice.
pub fn match_faces(faces: &[BBox], persons: &[BBox]) -> Vec<Option<usize>> {
    let mut person_taken = vec![false; persons.len()];
    faces
        .iter()
        .map(|face| {
            let mut best: Option<(usize, f64)> = None;
            for (p, person) in persons.iter().enumerate() {
                if person_taken[p] || !contains(person, face) {
                    continue;
                }
                let d = top_edge_center_distance(face, person);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((p, d));
                }
            }
            best.map(|(p, _)| {
                person_taken[p] = true;
                p
            })
        })
        .collect()
}

/// For each person (by original index), the index of the assigned torso.
/// Persons claim torsos from smallest person area to largest (ties to lower
/// person index); each takes the largest still-free torso its box contains
/// (ties to lower torso index).
pub fn match_torsos(torsos: &[BBox], persons: &[BBox]) -> Vec<Option<usize>> {
    let mut person_order: Vec<usize> = (0..persons.len()).collect();
    person_order.sort_by(|&a, &b| {
        area(&persons[a])
            .partial_cmp(&area(&persons[b]))
            .expect("box areas are finite")
    });
    let mut torso_taken = vec![false; torsos.len()];
    let mut assigned = vec![None; persons.len()];
    for p in person_order {
        let mut best: Option<(usize, f64)> = None;
        for (t, torso) in torsos.iter().enumerate() {
            if torso_taken[t] || !contains(&persons[p], torso) {
                continue;
            }
            let a = area(torso);
            if best.is_none_or(|(_, ba)| a > ba) {
                best = Some((t, a));
            }
        }
        if let Some((t, _)) = best {
            torso_taken[t] = true;
            assigned[p] = Some(t);
        }
    }
    assigned
}

/// Full matching pass over one annotation: dedupe faces, assign faces and
/// torsos, and keep only persons that received at least one of the two.
pub fn build_person_records(
    annotation: &ImageAnnotation,
    iou_threshold: f64,
) -> Result<Vec<PersonRecord>> {
    annotation.validate()?;
    let faces = dedupe_faces(&annotation.faces, iou_threshold);
    let face_to_person = match_faces(&faces, &annotation.persons);
    let torso_of_person = match_torsos(&annotation.torsos, &annotation.persons);

    let mut face_of_person: Vec<Option<BBox>> = vec![None; annotation.persons.len()];
    for (f, assignment) in face_to_person.iter().enumerate() {
        if let Some(p) = assignment {
            face_of_person[*p] = Some(faces[f]);
        }
    }

    Ok(annotation
        .persons
        .iter()
        .enumerate()
        .filter_map(|(p, person)| {
            let face = face_of_person[p];
            let torso = torso_of_person[p].map(|t| annotation.torsos[t]);
            if face.is_none() && torso.is_none() {
                return None;
            }
            Some(PersonRecord {
                person_index: p,
                person: *person,
                face,
                torso,
            })
        })
        .collect())
}
