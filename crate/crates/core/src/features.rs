//! Per-person feature extraction.
//!
//! The spatial feature is computed from scene geometry, the attention
//! feature from box position, height and yaw. Action and appearance
//! embeddings arrive precomputed and are passed through.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::message::ChannelId;
use crate::scene::{PersonObservation, Scene};

pub const SPATIAL_DIM: usize = 7;
pub const ATTENTION_DIM: usize = 4;

/// Spatial feature layout.
pub mod spatial {
    pub const AREA: usize = 0;
    pub const SHARPNESS: usize = 1;
    pub const ASPECT: usize = 2;
    pub const CONFIDENCE: usize = 3;
    pub const DIST_IMAGE_CENTER: usize = 4;
    pub const DIST_GROUP_CENTROID: usize = 5;
    pub const DENSITY: usize = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Side of the density window as a fraction of the image width.
    pub density_window_fraction: f64,
    pub standardize: bool,
    /// Floor on the per-coordinate standard deviation.
    pub eps_std: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            density_window_fraction: 0.1,
            standardize: true,
            eps_std: 1e-8,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.density_window_fraction > 0.0 && self.density_window_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "density_window_fraction must be in (0, 1], got {}",
                self.density_window_fraction
            )));
        }
        if !(self.eps_std > 0.0) {
            return Err(Error::InvalidConfig("eps_std must be positive".into()));
        }
        Ok(())
    }
}

/// The four feature vectors of one person. Optional channels are `None`
/// when the channel is inactive for the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub spatial: Vec<f64>,
    pub attention: Option<Vec<f64>>,
    pub action: Option<Vec<f64>>,
    pub appearance: Option<Vec<f64>>,
}

impl FeatureBundle {
    pub fn channel(&self, channel: ChannelId) -> Option<&[f64]> {
        match channel {
            ChannelId::Spatial => Some(&self.spatial),
            ChannelId::Attention => self.attention.as_deref(),
            ChannelId::Action => self.action.as_deref(),
            ChannelId::Appearance => self.appearance.as_deref(),
            ChannelId::Fused => None,
        }
    }
}

/// Feature channels present for every person, in canonical order.
pub fn active_channels(bundles: &[FeatureBundle]) -> Vec<ChannelId> {
    ChannelId::FEATURE_CHANNELS
        .into_iter()
        .filter(|&c| !bundles.is_empty() && bundles.iter().all(|b| b.channel(c).is_some()))
        .collect()
}

/// Raw 7-dim spatial feature of one person:
/// `[area, sharpness, aspect, confidence, d_center, d_centroid, density]`.
///
/// Area is normalized by image area, distances by the image diagonal.
/// Density is the share of box centers falling in an `m x m` window around
/// the person's center, `m = density_window_fraction · image_w`.
pub fn spatial_feature(scene: &Scene, index: usize, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let n = scene.persons.len();
    let p = scene
        .persons
        .get(index)
        .ok_or(Error::IndexOutOfRange { index, len: n })?;

    let (cx, cy) = p.bbox.center();
    let centers: Vec<(f64, f64)> = scene.persons.iter().map(|q| q.bbox.center()).collect();
    let (gx, gy) = centers
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x, sy + y));
    let (gx, gy) = (gx / n as f64, gy / n as f64);
    let (ix, iy) = scene.image_center();
    let diag = scene.image_diagonal();

    let half = cfg.density_window_fraction * scene.image_w / 2.0;
    let inside = centers
        .iter()
        .filter(|(x, y)| (x - cx).abs() <= half && (y - cy).abs() <= half)
        .count();

    Ok(vec![
        p.bbox.area() / (scene.image_w * scene.image_h),
        p.sharpness.unwrap_or(0.0),
        p.bbox.w / p.bbox.h,
        p.detection_confidence.unwrap_or(0.0),
        (cx - ix).hypot(cy - iy) / diag,
        (cx - gx).hypot(cy - gy) / diag,
        inside as f64 / n as f64,
    ])
}

/// Raw attention feature `[x_center, 1/h, sin θ, cos θ]`.
pub fn attention_feature(person: &PersonObservation) -> Result<Vec<f64>> {
    let yaw = person
        .yaw_deg
        .ok_or_else(|| Error::MissingYaw(person.id.clone()))?;
    let theta = yaw.to_radians();
    let (cx, _) = person.bbox.center();
    Ok(vec![cx, 1.0 / person.bbox.h, theta.sin(), theta.cos()])
}

/// Assembles one bundle per person, index-aligned with `scene.persons`.
///
/// A channel missing for any person is dropped for the whole scene. With
/// `cfg.standardize`, each channel is z-scored per coordinate across the
/// scene's persons (sample std, floored at `eps_std`). For attention only the
/// position part is standardized so the gaze vector stays unit length.
pub fn build_bundles(scene: &Scene, cfg: &FeatureConfig) -> Result<Vec<FeatureBundle>> {
    cfg.validate()?;
    let n = scene.persons.len();

    let mut spatial = (0..n)
        .map(|i| spatial_feature(scene, i, cfg))
        .collect::<Result<Vec<_>>>()?;
    impute_missing(
        &mut spatial,
        spatial::SHARPNESS,
        scene.persons.iter().map(|p| p.sharpness.is_some()),
    );
    impute_missing(
        &mut spatial,
        spatial::CONFIDENCE,
        scene.persons.iter().map(|p| p.detection_confidence.is_some()),
    );

    let mut attention: Option<Vec<Vec<f64>>> = scene
        .persons
        .iter()
        .map(|p| attention_feature(p).ok())
        .collect();
    let mut action: Option<Vec<Vec<f64>>> = scene
        .persons
        .iter()
        .map(|p| p.action_embedding.clone())
        .collect();
    let mut appearance: Option<Vec<Vec<f64>>> = scene
        .persons
        .iter()
        .map(|p| p.appearance_embedding.clone())
        .collect();

    if cfg.standardize {
        standardize_columns(&mut spatial, 0..SPATIAL_DIM, cfg.eps_std);
        if let Some(att) = attention.as_mut() {
            standardize_columns(att, 0..2, cfg.eps_std);
        }
        for ch in [action.as_mut(), appearance.as_mut()].into_iter().flatten() {
            let dim = ch.first().map_or(0, Vec::len);
            standardize_columns(ch, 0..dim, cfg.eps_std);
        }
    }

    let mut out = Vec::with_capacity(n);
    for (i, s) in spatial.into_iter().enumerate() {
        out.push(FeatureBundle {
            spatial: s,
            attention: attention.as_ref().map(|a| a[i].clone()),
            action: action.as_ref().map(|a| a[i].clone()),
            appearance: appearance.as_ref().map(|a| a[i].clone()),
        });
    }
    Ok(out)
}

/// Replaces entries of `col` whose source value was missing with the mean of
/// the present ones (or 0 when none are present).
fn impute_missing(rows: &mut [Vec<f64>], col: usize, present: impl Iterator<Item = bool>) {
    let present: Vec<bool> = present.collect();
    let (sum, count) = rows
        .iter()
        .zip(&present)
        .filter(|(_, &p)| p)
        .fold((0.0, 0usize), |(s, c), (r, _)| (s + r[col], c + 1));
    let fill = if count == 0 { 0.0 } else { sum / count as f64 };
    for (r, &p) in rows.iter_mut().zip(&present) {
        if !p {
            r[col] = fill;
        }
    }
}

fn standardize_columns(rows: &mut [Vec<f64>], cols: std::ops::Range<usize>, eps_std: f64) {
    let n = rows.len();
    if n == 0 {
        return;
    }
    for c in cols {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n as f64;
        let var = if n > 1 {
            rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let sd = var.sqrt().max(eps_std);
        for r in rows.iter_mut() {
            r[c] = (r[c] - mean) / sd;
        }
    }
}
