//! Evaluation: average precision, CMC curves, geometric baselines and the
//! batch evaluation report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::PreparedScene;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::rank::{rank_scene, ranking_of, RankConfig};
use crate::scene::{BoundingBox, Scene};
use crate::weights::WeightSet;

/// Category used for scenes without one.
pub const DEFAULT_CATEGORY: &str = "uncategorized";

/// One scene's prediction, as consumed by the AP computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub scene_id: String,
    pub predicted_index: usize,
    /// Confidence used to order detections across scenes.
    pub predicted_score: f64,
    pub gt_index: Option<usize>,
    pub category: Option<String>,
}

impl PredictionRecord {
    pub fn is_correct(&self) -> bool {
        self.gt_index == Some(self.predicted_index)
    }

    pub fn category_name(&self) -> &str {
        self.category.as_deref().unwrap_or(DEFAULT_CATEGORY)
    }
}

/// Orders records by descending score, ties by scene id.
fn sort_records(records: &mut [&PredictionRecord]) {
    records.sort_by(|a, b| {
        b.predicted_score
            .total_cmp(&a.predicted_score)
            .then_with(|| a.scene_id.cmp(&b.scene_id))
    });
}

/// Mean of the precision values at the rank of each correct detection, with
/// detections sorted by descending confidence. Zero when nothing is correct.
pub fn ap_of(records: &[&PredictionRecord]) -> f64 {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut hits = 0usize;
    let mut precision_sum = 0.0;
    for (k, r) in sorted.iter().enumerate() {
        if r.is_correct() {
            hits += 1;
            precision_sum += hits as f64 / (k + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        precision_sum / hits as f64
    }
}

/// Average precision over the records of one category.
pub fn average_precision(records: &[PredictionRecord], category: &str) -> Result<f64> {
    let subset: Vec<&PredictionRecord> = records
        .iter()
        .filter(|r| r.category_name() == category)
        .collect();
    if subset.is_empty() {
        return Err(Error::EmptyCategory(category.to_string()));
    }
    Ok(ap_of(&subset))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub per_category: BTreeMap<String, f64>,
    /// Mean of the per-category APs.
    pub mean_ap: f64,
    /// AP of all records pooled into one list.
    pub pooled_ap: f64,
}

pub fn mean_average_precision(records: &[PredictionRecord]) -> Result<MapSummary> {
    if records.is_empty() {
        return Err(Error::EmptyCategory(DEFAULT_CATEGORY.to_string()));
    }
    let mut per_category = BTreeMap::new();
    for r in records {
        per_category.entry(r.category_name().to_string()).or_insert(0.0);
    }
    for (cat, ap) in per_category.iter_mut() {
        *ap = average_precision(records, cat)?;
    }
    let mean_ap = per_category.values().sum::<f64>() / per_category.len() as f64;
    let all: Vec<&PredictionRecord> = records.iter().collect();
    Ok(MapSummary {
        per_category,
        mean_ap,
        pooled_ap: ap_of(&all),
    })
}

/// `values[k]` is the fraction of scenes whose ground-truth person is ranked
/// within the top `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmcCurve {
    pub values: Vec<f64>,
}

impl CmcCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,match_rate\n");
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", k + 1, v).expect("string write");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmcEntry {
    pub scene_id: String,
    pub ranking: Vec<usize>,
    pub gt_index: Option<usize>,
}

pub fn cmc(entries: &[CmcEntry], k_max: usize) -> Result<CmcCurve> {
    if entries.is_empty() {
        return Err(Error::EmptyCategory(DEFAULT_CATEGORY.to_string()));
    }
    let mut counts = vec![0usize; k_max];
    for e in entries {
        let gt = e
            .gt_index
            .ok_or_else(|| Error::MissingGroundTruth(e.scene_id.clone()))?;
        let rank = e
            .ranking
            .iter()
            .position(|&i| i == gt)
            .ok_or_else(|| Error::MissingGroundTruth(e.scene_id.clone()))?;
        for c in counts.iter_mut().skip(rank) {
            *c += 1;
        }
    }
    Ok(CmcCurve {
        values: counts
            .into_iter()
            .map(|c| c as f64 / entries.len() as f64)
            .collect(),
    })
}

fn center_distance(scene: &Scene, b: &BoundingBox) -> f64 {
    let (cx, cy) = b.center();
    let (ix, iy) = scene.image_center();
    (cx - ix).hypot(cy - iy)
}

/// Person closest to the image center; ties go to the lowest index.
pub fn baseline_most_center(scene: &Scene) -> usize {
    let scores: Vec<f64> = scene
        .persons
        .iter()
        .map(|p| -center_distance(scene, &p.bbox))
        .collect();
    ranking_of(&scores)[0]
}

/// Person with the largest box area; ties go to the lowest index.
pub fn baseline_max_scale(scene: &Scene) -> usize {
    let scores: Vec<f64> = scene.persons.iter().map(|p| p.bbox.area()).collect();
    ranking_of(&scores)[0]
}

/// Marks as ground truth the person whose box best overlaps `gt_box`, if
/// that overlap reaches `min_iou`. Returns the chosen index.
pub fn annotate_ground_truth(scene: &mut Scene, gt_box: &BoundingBox, min_iou: f64) -> Option<usize> {
    let best = scene
        .persons
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.bbox.iou(gt_box)))
        .filter(|&(_, iou)| iou >= min_iou)
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))?
        .0;
    for (i, p) in scene.persons.iter_mut().enumerate() {
        p.is_ground_truth_important = i == best;
    }
    Some(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub features: FeatureConfig,
    pub rank: RankConfig,
    pub baselines: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            features: FeatureConfig::default(),
            rank: RankConfig::default(),
            baselines: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub top1: f64,
    pub map: MapSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePrediction {
    pub scene_id: String,
    pub predicted_index: usize,
    pub predicted_id: String,
    pub score: f64,
    pub gt_index: usize,
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_scenes: usize,
    pub personrank: MethodReport,
    pub cmc: CmcCurve,
    pub baselines: Vec<MethodReport>,
    pub predictions: Vec<ScenePrediction>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

fn method_report(name: &str, records: &[PredictionRecord]) -> Result<MethodReport> {
    let top1 = records.iter().filter(|r| r.is_correct()).count() as f64 / records.len() as f64;
    Ok(MethodReport {
        name: name.to_string(),
        top1,
        map: mean_average_precision(records)?,
    })
}

/// Ranks every scene, scores the predictions and, optionally, the two
/// geometric baselines on the same scenes.
pub fn run_eval(scenes: &[Scene], weights: &WeightSet, cfg: &EvalConfig) -> Result<EvalReport> {
    if scenes.is_empty() {
        return Err(Error::EmptyCategory(DEFAULT_CATEGORY.to_string()));
    }
    let prepared = scenes
        .iter()
        .map(|s| PreparedScene::new(s, &cfg.features))
        .collect::<Result<Vec<_>>>()?;
    evaluate_prepared(&prepared, weights, cfg)
}

pub fn evaluate_prepared(
    prepared: &[PreparedScene],
    weights: &WeightSet,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if prepared.is_empty() {
        return Err(Error::EmptyCategory(DEFAULT_CATEGORY.to_string()));
    }
    let mut records = Vec::with_capacity(prepared.len());
    let mut entries = Vec::with_capacity(prepared.len());
    let mut predictions = Vec::with_capacity(prepared.len());
    let mut center_records = Vec::new();
    let mut scale_records = Vec::new();
    let mut k_max = 0;

    for p in prepared {
        let s = &p.scene;
        let gt = s
            .gt_index()
            .ok_or_else(|| Error::MissingGroundTruth(s.id.clone()))?;
        k_max = k_max.max(s.persons.len());
        let r = rank_scene(s, &p.bundles, weights, &cfg.rank)?;
        let score = r.fused.scores[r.predicted_index];
        records.push(PredictionRecord {
            scene_id: s.id.clone(),
            predicted_index: r.predicted_index,
            predicted_score: score,
            gt_index: Some(gt),
            category: s.category.clone(),
        });
        entries.push(CmcEntry {
            scene_id: s.id.clone(),
            ranking: r.fused.ranking.clone(),
            gt_index: Some(gt),
        });
        predictions.push(ScenePrediction {
            scene_id: s.id.clone(),
            predicted_index: r.predicted_index,
            predicted_id: r.predicted_id.clone(),
            score,
            gt_index: gt,
            ranking: r.fused.ranking,
        });

        if cfg.baselines {
            let c = baseline_most_center(s);
            let half_diag = s.image_diagonal() / 2.0;
            center_records.push(PredictionRecord {
                scene_id: s.id.clone(),
                predicted_index: c,
                predicted_score: 1.0 - center_distance(s, &s.persons[c].bbox) / half_diag,
                gt_index: Some(gt),
                category: s.category.clone(),
            });
            let m = baseline_max_scale(s);
            scale_records.push(PredictionRecord {
                scene_id: s.id.clone(),
                predicted_index: m,
                predicted_score: s.persons[m].bbox.area() / (s.image_w * s.image_h),
                gt_index: Some(gt),
                category: s.category.clone(),
            });
        }
    }

    let mut baselines = Vec::new();
    if cfg.baselines {
        baselines.push(method_report("most-center", &center_records)?);
        baselines.push(method_report("max-scale", &scale_records)?);
    }
    Ok(EvalReport {
        n_scenes: prepared.len(),
        personrank: method_report("personrank", &records)?,
        cmc: cmc(&entries, k_max)?,
        baselines,
        predictions,
    })
}
