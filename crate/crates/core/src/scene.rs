//! Scene, person and box types plus scene validation and JSON I/O.
//!
//! Boxes use a top-left origin: `(x, y)` is the top-left corner and
//! `(w, h)` the extent, all in image pixels.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    /// Builds a box from its center point.
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    /// Intersects the box with `[0, w] x [0, h]`.
    fn clamped(&self, image_w: f64, image_h: f64) -> Self {
        let inside = self.x >= 0.0
            && self.y >= 0.0
            && self.x + self.w <= image_w
            && self.y + self.h <= image_h;
        if inside {
            return *self;
        }
        let x0 = self.x.clamp(0.0, image_w);
        let y0 = self.y.clamp(0.0, image_h);
        let x1 = (self.x + self.w).clamp(0.0, image_w);
        let y1 = (self.y + self.h).clamp(0.0, image_h);
        Self::new(x0, y0, x1 - x0, y1 - y0)
    }

    /// Intersection over union with another box.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        let inter = (x1 - x0).max(0.0) * (y1 - y0).max(0.0);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    #[default]
    Face,
    Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonObservation {
    pub id: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    #[serde(default)]
    pub box_kind: BoxKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yaw_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub appearance_embedding: Option<Vec<f64>>,
    #[serde(rename = "gt", default)]
    pub is_ground_truth_important: bool,
}

impl PersonObservation {
    /// A face observation with only geometry filled in.
    pub fn face(id: impl Into<String>, bbox: BoundingBox) -> Self {
        Self {
            id: id.into(),
            bbox,
            box_kind: BoxKind::Face,
            yaw_deg: None,
            sharpness: None,
            detection_confidence: None,
            action_embedding: None,
            appearance_embedding: None,
            is_ground_truth_important: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub id: String,
    pub image_w: f64,
    pub image_h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub persons: Vec<PersonObservation>,
}

impl Scene {
    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    /// Index of the ground-truth important person, if annotated.
    pub fn gt_index(&self) -> Option<usize> {
        self.persons.iter().position(|p| p.is_ground_truth_important)
    }

    pub fn image_center(&self) -> (f64, f64) {
        (self.image_w / 2.0, self.image_h / 2.0)
    }

    pub fn image_diagonal(&self) -> f64 {
        self.image_w.hypot(self.image_h)
    }

    /// Returns a copy with persons reordered so that new index `k` holds old
    /// person `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Scene {
        let mut out = self.clone();
        out.persons = perm.iter().map(|&i| self.persons[i].clone()).collect();
        out
    }
}

/// Checks scene invariants and returns a normalized copy.
///
/// Boxes are clamped to the image frame, yaw is dropped from body boxes and
/// everything else is rejected if it cannot be repaired.
pub fn validate_scene(scene: &Scene) -> Result<Scene> {
    let sid = || scene.id.clone();
    if scene.persons.is_empty() {
        return Err(Error::EmptyScene(sid()));
    }
    if !(scene.image_w.is_finite() && scene.image_h.is_finite())
        || scene.image_w <= 0.0
        || scene.image_h <= 0.0
    {
        return Err(Error::InvalidConfig(format!(
            "scene `{}` has a non-positive image size",
            scene.id
        )));
    }

    let mut seen = HashSet::new();
    let mut out = scene.clone();
    let mut gt_count = 0;
    let mut ac_dim = None;
    let mut ap_dim = None;

    for p in out.persons.iter_mut() {
        if !seen.insert(p.id.clone()) {
            return Err(Error::DuplicatePersonId {
                scene: sid(),
                person: p.id.clone(),
            });
        }
        if !p.bbox.is_finite() {
            return Err(Error::NonFinite {
                scene: sid(),
                what: format!("box of `{}`", p.id),
            });
        }
        if p.bbox.w <= 0.0 || p.bbox.h <= 0.0 {
            return Err(Error::NonPositiveBox {
                scene: sid(),
                person: p.id.clone(),
            });
        }
        p.bbox = p.bbox.clamped(scene.image_w, scene.image_h);
        if p.bbox.w <= 0.0 || p.bbox.h <= 0.0 {
            return Err(Error::NonPositiveBox {
                scene: sid(),
                person: p.id.clone(),
            });
        }

        if p.box_kind == BoxKind::Body {
            p.yaw_deg = None;
        }
        let scalars = [
            ("yaw_deg", p.yaw_deg),
            ("sharpness", p.sharpness),
            ("detection_confidence", p.detection_confidence),
        ];
        for (name, v) in scalars {
            if matches!(v, Some(x) if !x.is_finite()) {
                return Err(Error::NonFinite {
                    scene: sid(),
                    what: format!("{name} of `{}`", p.id),
                });
            }
        }

        for (kind, emb, dim) in [
            ("action", &p.action_embedding, &mut ac_dim),
            ("appearance", &p.appearance_embedding, &mut ap_dim),
        ] {
            let Some(e) = emb else { continue };
            if e.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    scene: sid(),
                    what: format!("{kind} embedding of `{}`", p.id),
                });
            }
            match *dim {
                None => *dim = Some(e.len()),
                Some(d) if d != e.len() => {
                    return Err(Error::EmbeddingDimMismatch { scene: sid(), kind })
                }
                _ => {}
            }
        }

        if p.is_ground_truth_important {
            gt_count += 1;
        }
    }
    if gt_count > 1 {
        return Err(Error::MultipleGroundTruth(sid()));
    }
    Ok(out)
}

/// Reads a scene file holding either one scene object or an array of scenes.
pub fn read_scenes(path: impl AsRef<Path>) -> Result<Vec<Scene>> {
    let text = std::fs::read_to_string(path)?;
    parse_scenes(&text)
}

pub fn parse_scenes(text: &str) -> Result<Vec<Scene>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.is_array() {
        Ok(serde_json::from_value(value)?)
    } else {
        Ok(vec![serde_json::from_value(value)?])
    }
}

pub fn write_scenes(path: impl AsRef<Path>, scenes: &[Scene]) -> Result<()> {
    let text = serde_json::to_string_pretty(scenes)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
