//! Learning every linear weight of the model from scenes with a marked
//! important person.
//!
//! Channel weights and hyper-edge weights come from a two-class hinge-loss
//! classifier trained by stochastic subgradient descent (no bias term). The
//! fusion weights are learned from log-score differences, and the attention
//! scale and regularization strength are picked on a validation split.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{common_channels, PreparedScene};
use crate::error::{Error, Result};
use crate::graph::{consensus, partition_regions};
use crate::message::{abs_diff, exp_diff, ChannelId};
use crate::rank::{channel_scores, RankConfig, ScoreVector};
use crate::weights::WeightSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Margin regularizer used when no validation grid is searched.
    pub reg_lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub val_grid_c: Vec<f64>,
    pub val_grid_reg: Vec<f64>,
    /// Factors tried on each channel's learned hyper-edge weights, in order
    /// of preference.
    pub val_grid_hyper_scale: Vec<f64>,
    pub rank: RankConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            reg_lambda: 1e-3,
            epochs: 10,
            seed: 0,
            val_grid_c: vec![0.5, 1.0, 2.0, 4.0],
            val_grid_reg: vec![1e-3, 1e-2],
            val_grid_hyper_scale: vec![1.0, 0.1, 0.0],
            rank: RankConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reg_lambda > 0.0) || self.val_grid_reg.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidConfig("regularization must be positive".into()));
        }
        if self.val_grid_hyper_scale.iter().any(|h| !(*h >= 0.0)) {
            return Err(Error::InvalidConfig("hyper scales must be >= 0".into()));
        }
        if self.val_grid_c.is_empty() || self.val_grid_reg.is_empty() || self.val_grid_hyper_scale.is_empty() {
            return Err(Error::InvalidConfig("validation grids must be non-empty".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        self.rank.solve.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub x: Vec<f64>,
    /// +1 or -1.
    pub label: i8,
}

impl PairSample {
    pub fn new(x: Vec<f64>, label: i8) -> Self {
        Self { x, label }
    }
}

fn require_gt(p: &PreparedScene) -> Result<usize> {
    p.gt_index()
        .ok_or_else(|| Error::MissingGroundTruth(p.scene.id.clone()))
}

fn channel_of(p: &PreparedScene, i: usize, channel: ChannelId) -> Result<&[f64]> {
    p.bundles[i]
        .channel(channel)
        .ok_or(Error::ChannelInactive(channel))
}

/// Samples for a pairwise channel weight.
///
/// Positives are `T(φ_* − φ_i)` for every non-important `i`; negatives are
/// `T(φ_j − φ_i)` for ordered non-important pairs. `T` is elementwise `exp`
/// for spatial and action and `|·|` for appearance, so `wᵀx` is exactly the
/// message value.
pub fn make_channel_samples(scenes: &[PreparedScene], channel: ChannelId) -> Result<Vec<PairSample>> {
    let transform: fn(&[f64], &[f64]) -> Vec<f64> = match channel {
        ChannelId::Spatial | ChannelId::Action => exp_diff,
        ChannelId::Appearance => abs_diff,
        other => return Err(Error::ChannelInactive(other)),
    };
    let mut out = Vec::new();
    for p in scenes {
        let star = require_gt(p)?;
        let n = p.bundles.len();
        let phi_star = channel_of(p, star, channel)?;
        for i in (0..n).filter(|&i| i != star) {
            let phi_i = channel_of(p, i, channel)?;
            out.push(PairSample::new(transform(phi_i, phi_star), 1));
            for j in (0..n).filter(|&j| j != star && j != i) {
                out.push(PairSample::new(transform(phi_i, channel_of(p, j, channel)?), -1));
            }
        }
    }
    Ok(out)
}

/// Samples for a channel's hyper-edge weight: `φ_i − γ_k` for every focal
/// person and non-empty region, labeled by whether the focal person is the
/// important one.
pub fn make_delta_samples(scenes: &[PreparedScene], channel: ChannelId) -> Result<Vec<PairSample>> {
    let mut out = Vec::new();
    for p in scenes {
        let star = require_gt(p)?;
        let feats: Vec<&[f64]> = (0..p.bundles.len())
            .map(|i| channel_of(p, i, channel))
            .collect::<Result<_>>()?;
        for (i, phi) in feats.iter().enumerate() {
            let regions = partition_regions(&p.scene, i)?;
            let label = if i == star { 1 } else { -1 };
            for (_, members) in regions.non_empty() {
                let gamma = consensus(&feats, members).expect("non-empty region");
                let x = phi.iter().zip(&gamma).map(|(a, b)| a - b).collect();
                out.push(PairSample::new(x, label));
            }
        }
    }
    Ok(out)
}

/// Result of [`train_linear`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub w: Vec<f64>,
    /// Regularized objective of the averaged iterate after each epoch.
    pub epoch_objective: Vec<f64>,
    pub diagnostic: Option<String>,
}

/// Regularized mean hinge loss `(λ/2)‖w‖² + mean max(0, 1 − y wᵀx)`.
pub fn hinge_objective(samples: &[PairSample], w: &[f64], reg_lambda: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let hinge: f64 = samples
        .iter()
        .map(|s| (1.0 - s.label as f64 * dot(w, &s.x)).max(0.0))
        .sum::<f64>()
        / samples.len() as f64;
    0.5 * reg_lambda * dot(w, w) + hinge
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear max-margin classifier without bias, trained by stochastic
/// subgradient descent with step `1/(λ t)` and projection onto the ball of
/// radius `1/√λ`. The returned weights are the average of all iterates.
///
/// Each epoch visits every sample of the larger class once and resamples
/// the smaller class with replacement to the same count.
pub fn train_linear(samples: &[PairSample], reg_lambda: f64, epochs: usize, seed: u64) -> LinearFit {
    let dim = samples.first().map_or(0, |s| s.x.len());
    let pos: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label > 0).collect();
    let neg: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label <= 0).collect();
    if pos.is_empty() || neg.is_empty() {
        return LinearFit {
            w: vec![0.0; dim],
            epoch_objective: Vec::new(),
            diagnostic: Some(format!(
                "degenerate data: {} positive and {} negative samples",
                pos.len(),
                neg.len()
            )),
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 1.0 / reg_lambda.sqrt();
    let mut w = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut t: u64 = 0;
    let mut epoch_objective = Vec::with_capacity(epochs);
    let per_class = pos.len().max(neg.len());

    for _ in 0..epochs {
        let mut order = Vec::with_capacity(2 * per_class);
        for class in [&pos, &neg] {
            if class.len() == per_class {
                order.extend_from_slice(class);
            } else {
                order.extend((0..per_class).map(|_| class[rand::Rng::random_range(&mut rng, 0..class.len())]));
            }
        }
        order.shuffle(&mut rng);

        for &idx in &order {
            t += 1;
            let s = &samples[idx];
            let y = s.label as f64;
            let eta = 1.0 / (reg_lambda * t as f64);
            let violated = y * dot(&w, &s.x) < 1.0;
            let shrink = 1.0 - eta * reg_lambda;
            for (k, wk) in w.iter_mut().enumerate() {
                *wk *= shrink;
                if violated {
                    *wk += eta * y * s.x[k];
                }
            }
            let norm = dot(&w, &w).sqrt();
            if norm > radius {
                let f = radius / norm;
                w.iter_mut().for_each(|x| *x *= f);
            }
            let a = 1.0 / t as f64;
            for (m, wk) in avg.iter_mut().zip(&w) {
                *m += a * (wk - *m);
            }
        }
        epoch_objective.push(hinge_objective(samples, &avg, reg_lambda));
    }

    LinearFit {
        w: avg,
        epoch_objective,
        diagnostic: None,
    }
}

/// Samples for the fusion weights: for each scene and non-important `j`,
/// `d = log φ^λ_* − log φ^λ_j` labeled +1 and `−d` labeled −1.
///
/// `d` equals `x_{i,*} − x_{i,j}` for every non-important `i`, so
/// `qᵀd > 0` is the required ordering of important over non-important.
pub fn make_fusion_samples(
    scenes: &[PreparedScene],
    per_channel: &[Vec<ScoreVector>],
) -> Result<Vec<PairSample>> {
    let mut out = Vec::new();
    for (p, channels) in scenes.iter().zip(per_channel) {
        let star = require_gt(p)?;
        let n = p.bundles.len();
        for j in (0..n).filter(|&j| j != star) {
            let d: Vec<f64> = channels
                .iter()
                .map(|s| s.scores[star].ln() - s.scores[j].ln())
                .collect();
            let neg: Vec<f64> = d.iter().map(|x| -x).collect();
            out.push(PairSample::new(d, 1));
            out.push(PairSample::new(neg, -1));
        }
    }
    Ok(out)
}

/// Learns the fusion weights `q` from per-channel scores of training scenes.
pub fn train_fusion_q(
    scenes: &[PreparedScene],
    per_channel: &[Vec<ScoreVector>],
    reg_lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearFit> {
    if scenes.len() != per_channel.len() {
        return Err(Error::ChannelMisalignment(format!(
            "{} scenes with {} score sets",
            scenes.len(),
            per_channel.len()
        )));
    }
    let samples = make_fusion_samples(scenes, per_channel)?;
    Ok(train_linear(&samples, reg_lambda, epochs, seed))
}

/// Number of fusion-constraint violations `qᵀx_{i,*} ≤ qᵀx_{i,j}` over all
/// ordered non-important pairs of the scenes.
pub fn fusion_violations(
    scenes: &[PreparedScene],
    per_channel: &[Vec<ScoreVector>],
    q: &[f64],
) -> Result<usize> {
    let mut count = 0;
    for (p, channels) in scenes.iter().zip(per_channel) {
        let star = require_gt(p)?;
        let logs = |k: usize| -> Vec<f64> { channels.iter().map(|s| s.scores[k].ln()).collect() };
        let l_star = logs(star);
        let n = p.bundles.len();
        for i in (0..n).filter(|&i| i != star) {
            let l_i = logs(i);
            let x_star: Vec<f64> = l_star.iter().zip(&l_i).map(|(a, b)| a - b).collect();
            for j in (0..n).filter(|&j| j != star && j != i) {
                let x_j: Vec<f64> = logs(j).iter().zip(&l_i).map(|(a, b)| a - b).collect();
                if dot(q, &x_star) <= dot(q, &x_j) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Channel and hyper-edge weights trained at one regularization strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFit {
    pub reg_lambda: f64,
    pub channels: Vec<ChannelId>,
    pub pairwise: BTreeMap<ChannelId, Vec<f64>>,
    pub delta: BTreeMap<ChannelId, Vec<f64>>,
    pub diagnostics: Vec<String>,
}

/// Trains pairwise weights (spatial, action, appearance) and one hyper-edge
/// weight per channel over the channels shared by all training scenes.
pub fn fit_channels(
    train: &[PreparedScene],
    reg_lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<ChannelFit> {
    let channels = common_channels(train);
    if channels.is_empty() {
        return Err(Error::NoActiveChannels);
    }
    let mut fit = ChannelFit {
        reg_lambda,
        channels: channels.clone(),
        pairwise: BTreeMap::new(),
        delta: BTreeMap::new(),
        diagnostics: Vec::new(),
    };
    for (k, &c) in channels.iter().enumerate() {
        let seed = seed.wrapping_add(1 + 2 * k as u64);
        if c != ChannelId::Attention {
            let lin = train_linear(&make_channel_samples(train, c)?, reg_lambda, epochs, seed);
            if let Some(d) = lin.diagnostic {
                fit.diagnostics.push(format!("{c} weights: {d}"));
            }
            fit.pairwise.insert(c, lin.w);
        }
        let lin = train_linear(&make_delta_samples(train, c)?, reg_lambda, epochs, seed + 1);
        if let Some(d) = lin.diagnostic {
            fit.diagnostics.push(format!("{c} delta: {d}"));
        }
        let dim = train[0].bundles[0].channel(c).map_or(0, <[f64]>::len);
        let mut delta = lin.w;
        delta.resize(dim, 0.0);
        fit.delta.insert(c, delta);
    }
    Ok(fit)
}

/// Weight set from fitted channels, with unit fusion weights.
pub fn weights_from_fit(fit: &ChannelFit, c_att: f64, alpha: f64) -> WeightSet {
    let mut w = WeightSet {
        w_s: vec![0.0; crate::features::SPATIAL_DIM],
        w_ac: Vec::new(),
        w_ap: Vec::new(),
        c_att,
        delta: fit.delta.clone(),
        channels: fit.channels.clone(),
        q: vec![1.0; fit.channels.len()],
        alpha,
    };
    for (&c, v) in &fit.pairwise {
        if let Some(slot) = w.pairwise_weights_mut(c) {
            *slot = v.clone();
        }
    }
    w
}

/// Per-channel scores of every scene under `weights`.
pub fn all_channel_scores(
    scenes: &[PreparedScene],
    weights: &WeightSet,
    cfg: &RankConfig,
) -> Result<Vec<Vec<ScoreVector>>> {
    scenes
        .iter()
        .map(|p| channel_scores(&p.scene, &p.bundles, weights, cfg))
        .collect()
}

/// Fits the fusion weights on `train` for a weight set whose channel and
/// hyper weights are already set.
pub fn fit_fusion(
    train: &[PreparedScene],
    weights: &mut WeightSet,
    cfg: &TrainConfig,
    reg_lambda: f64,
) -> Result<Option<String>> {
    let scores = all_channel_scores(train, weights, &cfg.rank)?;
    let fit = train_fusion_q(train, &scores, reg_lambda, cfg.epochs, cfg.seed.wrapping_add(97))?;
    weights.q = fit.w;
    Ok(fit.diagnostic)
}

/// Quality of a weight set on held-out scenes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValScore {
    pub top1: f64,
    pub mean_reciprocal_rank: f64,
    /// Mean final score of the ground-truth person.
    pub mean_gt_score: f64,
}

impl ValScore {
    fn key(&self) -> (f64, f64, f64) {
        (self.top1, self.mean_reciprocal_rank, self.mean_gt_score)
    }

    fn better_than(&self, other: &ValScore) -> bool {
        let (a, b) = (self.key(), other.key());
        a.0 > b.0 || (a.0 == b.0 && (a.1 > b.1 || (a.1 == b.1 && a.2 > b.2)))
    }
}

/// Scores a weight set on scenes with ground truth.
pub fn evaluate_weights(
    scenes: &[PreparedScene],
    weights: &WeightSet,
    cfg: &RankConfig,
) -> Result<ValScore> {
    if scenes.is_empty() {
        return Err(Error::EmptyValidation);
    }
    let mut top1 = 0.0;
    let mut mrr = 0.0;
    let mut gt_score = 0.0;
    for p in scenes {
        let star = require_gt(p)?;
        let r = crate::rank::rank_scene(&p.scene, &p.bundles, weights, cfg)?;
        let rank = r.fused.rank_of(star).expect("gt in ranking");
        if rank == 1 {
            top1 += 1.0;
        }
        mrr += 1.0 / rank as f64;
        gt_score += r.fused.scores[star];
    }
    let n = scenes.len() as f64;
    Ok(ValScore {
        top1: top1 / n,
        mean_reciprocal_rank: mrr / n,
        mean_gt_score: gt_score / n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c_att: f64,
    pub reg_lambda: f64,
    pub hyper_scale: BTreeMap<ChannelId, f64>,
    pub val: ValScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub chosen: GridPoint,
    pub grid: Vec<GridPoint>,
    /// Validation top-1 accuracy of each channel on its own.
    pub per_channel_val_top1: BTreeMap<ChannelId, f64>,
    pub diagnostics: Vec<String>,
}

/// Trains on `train` and picks `c_att` and the regularization strength that
/// maximize validation top-1 accuracy (ties broken by mean reciprocal rank,
/// then mean ground-truth score, then grid order).
pub fn tune_validation(
    train: &[PreparedScene],
    val: &[PreparedScene],
    cfg: &TrainConfig,
) -> Result<(WeightSet, TrainReport)> {
    cfg.validate()?;
    if val.is_empty() {
        return Err(Error::EmptyValidation);
    }
    if train.is_empty() {
        return Err(Error::InvalidConfig("training set is empty".into()));
    }

    let mut best: Option<(WeightSet, GridPoint)> = None;
    let mut grid = Vec::new();
    let mut diagnostics = Vec::new();
    for &reg in &cfg.val_grid_reg {
        let fit = fit_channels(train, reg, cfg.epochs, cfg.seed)?;
        diagnostics.extend(fit.diagnostics.iter().cloned());
        let uses_attention = fit.channels.contains(&ChannelId::Attention);
        let c_grid: &[f64] = if uses_attention {
            &cfg.val_grid_c
        } else {
            &cfg.val_grid_c[..1]
        };
        for &c in c_grid {
            let mut weights = weights_from_fit(&fit, c, cfg.rank.solve.alpha);
            let hyper_scale = choose_hyper_scales(val, &mut weights, cfg)?;
            if let Some(d) = fit_fusion(train, &mut weights, cfg, reg)? {
                diagnostics.push(format!("fusion weights: {d}"));
            }
            let point = GridPoint {
                c_att: c,
                reg_lambda: reg,
                hyper_scale,
                val: evaluate_weights(val, &weights, &cfg.rank)?,
            };
            grid.push(point.clone());
            if best.as_ref().is_none_or(|(_, b)| point.val.better_than(&b.val)) {
                best = Some((weights, point));
            }
        }
    }
    let (weights, chosen) = best.expect("non-empty grid");

    let mut per_channel_val_top1 = BTreeMap::new();
    for (k, &c) in weights.channels.iter().enumerate() {
        let mut hits = 0usize;
        for p in val {
            let star = require_gt(p)?;
            let scores = channel_scores(&p.scene, &p.bundles, &weights, &cfg.rank)?;
            if scores.get(k).map(ScoreVector::top) == Some(star) {
                hits += 1;
            }
        }
        per_channel_val_top1.insert(c, hits as f64 / val.len() as f64);
    }

    Ok((
        weights,
        TrainReport {
            chosen,
            grid,
            per_channel_val_top1,
            diagnostics,
        },
    ))
}

/// Rescales each channel's hyper-edge weights by the factor from
/// `cfg.val_grid_hyper_scale` that ranks `val` best with that channel alone.
///
/// The classifier fixes only the direction of the hyper-edge weights; their
/// magnitude sets how strongly the region prior outweighs pairwise messages.
pub fn choose_hyper_scales(
    val: &[PreparedScene],
    weights: &mut WeightSet,
    cfg: &TrainConfig,
) -> Result<BTreeMap<ChannelId, f64>> {
    let mut chosen = BTreeMap::new();
    for c in weights.channels.clone() {
        let base = weights.delta(c).map(<[f64]>::to_vec).unwrap_or_default();
        let mut best: Option<(f64, ValScore)> = None;
        for &h in &cfg.val_grid_hyper_scale {
            let mut single = weights.clone();
            single.channels = vec![c];
            single.q = vec![1.0];
            single.delta.insert(c, base.iter().map(|d| d * h).collect());
            let score = evaluate_weights(val, &single, &cfg.rank)?;
            if best.as_ref().is_none_or(|(_, b)| score.better_than(b)) {
                best = Some((h, score));
            }
        }
        let h = best.expect("non-empty grid").0;
        weights.delta.insert(c, base.iter().map(|d| d * h).collect());
        chosen.insert(c, h);
    }
    Ok(chosen)
}

/// Splits off the last `fraction` of `scenes` (at least one) as a validation
/// set, for when no separate one is given.
pub fn split_validation(
    mut scenes: Vec<PreparedScene>,
    fraction: f64,
) -> Result<(Vec<PreparedScene>, Vec<PreparedScene>)> {
    if scenes.len() < 2 {
        return Err(Error::EmptyValidation);
    }
    let n_val = ((scenes.len() as f64 * fraction).ceil() as usize).clamp(1, scenes.len() - 1);
    let val = scenes.split_off(scenes.len() - n_val);
    Ok((scenes, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureConfig;
    use crate::scene::{BoundingBox, PersonObservation, Scene};

    fn prepared(n: usize, gt: usize, identical: bool) -> PreparedScene {
        let persons = (0..n)
            .map(|k| {
                let size = if identical { 20.0 } else { 20.0 + 7.0 * k as f64 };
                let x = if identical { 500.0 } else { 100.0 + 150.0 * k as f64 };
                let mut p = PersonObservation::face(format!("p{k}"), BoundingBox::from_center(x, if identical { 300.0 } else { 300.0 + 40.0 * (k % 2) as f64 }, size, size));
                p.is_ground_truth_important = k == gt;
                p
            })
            .collect();
        let s = Scene {
            id: format!("s{n}"),
            image_w: 1000.0,
            image_h: 800.0,
            category: None,
            persons,
        };
        PreparedScene::new(&s, &FeatureConfig::default()).unwrap()
    }

    #[test]
    fn channel_sample_counts() {
        let s2 = make_channel_samples(&[prepared(2, 0, false)], ChannelId::Spatial).unwrap();
        assert_eq!(s2.iter().filter(|s| s.label > 0).count(), 1);
        assert_eq!(s2.iter().filter(|s| s.label < 0).count(), 0);
        for n in 3..7 {
            let s = make_channel_samples(&[prepared(n, 1, false)], ChannelId::Spatial).unwrap();
            assert_eq!(s.iter().filter(|s| s.label > 0).count(), n - 1);
            assert_eq!(s.iter().filter(|s| s.label < 0).count(), (n - 1) * (n - 2));
        }
    }

    #[test]
    fn missing_ground_truth_is_an_error() {
        let mut p = prepared(3, 0, false);
        p.scene.persons[0].is_ground_truth_important = false;
        assert!(matches!(
            make_channel_samples(&[p.clone()], ChannelId::Spatial),
            Err(Error::MissingGroundTruth(_))
        ));
        assert!(make_delta_samples(&[p], ChannelId::Spatial).is_err());
    }

    #[test]
    fn identical_persons_give_identical_samples_and_training_terminates() {
        let p = prepared(4, 2, true);
        let s = make_channel_samples(std::slice::from_ref(&p), ChannelId::Spatial).unwrap();
        assert!(s.iter().all(|x| x.x == s[0].x));
        let fit = train_linear(&s, 1e-2, 5, 1);
        assert!(fit.w.iter().all(|x| x.is_finite()));

        let d = make_delta_samples(&[p], ChannelId::Spatial).unwrap();
        assert!(d.iter().all(|x| x.x.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn delta_sample_counts() {
        let single = prepared(1, 0, false);
        assert!(make_delta_samples(&[single], ChannelId::Spatial).unwrap().is_empty());

        // important focal in the middle with one person per quadrant
        let centers = [(500.0, 400.0), (600.0, 500.0), (400.0, 500.0), (400.0, 300.0), (600.0, 300.0)];
        let persons = centers
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| {
                let mut p = PersonObservation::face(format!("p{k}"), BoundingBox::from_center(x, y, 30.0, 30.0));
                p.is_ground_truth_important = k == 0;
                p
            })
            .collect();
        let s = Scene {
            id: "q".into(),
            image_w: 1000.0,
            image_h: 800.0,
            category: None,
            persons,
        };
        let p = PreparedScene::new(&s, &FeatureConfig::default()).unwrap();
        let d = make_delta_samples(&[p], ChannelId::Spatial).unwrap();
        assert_eq!(d.iter().filter(|s| s.label > 0).count(), 4);
    }

    #[test]
    fn separable_one_dim() {
        let samples = vec![PairSample::new(vec![1.0], 1), PairSample::new(vec![-1.0], -1)];
        let short = train_linear(&samples, 1e-2, 2, 0);
        let long = train_linear(&samples, 1e-2, 200, 0);
        assert!(long.w[0] > 0.0);
        let hinge = |w: &[f64]| hinge_objective(&samples, w, 0.0);
        assert!(hinge(&long.w) <= hinge(&short.w));
        assert!(hinge(&long.w) < 1e-9);
    }

    #[test]
    fn zero_samples_give_zero_weights() {
        let samples = vec![PairSample::new(vec![0.0, 0.0], 1), PairSample::new(vec![0.0, 0.0], -1)];
        assert_eq!(train_linear(&samples, 1e-2, 10, 3).w, vec![0.0, 0.0]);
    }

    #[test]
    fn single_label_is_degenerate() {
        let samples = vec![PairSample::new(vec![1.0, 2.0], 1)];
        let fit = train_linear(&samples, 1e-2, 10, 3);
        assert_eq!(fit.w, vec![0.0, 0.0]);
        assert!(fit.diagnostic.is_some());
    }

    #[test]
    fn deterministic_given_seed() {
        let samples: Vec<_> = (0..50)
            .map(|k| {
                let x = (k as f64 * 0.37).sin();
                PairSample::new(vec![x, (k as f64).cos()], if x > 0.1 { 1 } else { -1 })
            })
            .collect();
        assert_eq!(train_linear(&samples, 1e-2, 5, 9), train_linear(&samples, 1e-2, 5, 9));
    }

    #[test]
    fn fusion_single_channel_positive_q() {
        // the channel ranks the ground truth first in every scene
        let scenes: Vec<_> = (3..8).map(|n| prepared(n, n / 2, false)).collect();
        let per_channel: Vec<Vec<ScoreVector>> = scenes
            .iter()
            .map(|p| {
                let n = p.bundles.len();
                let star = p.gt_index().unwrap();
                let mut s: Vec<f64> = (0..n).map(|k| 1.0 + k as f64).collect();
                s[star] = 2.0 * n as f64;
                let z: f64 = s.iter().sum();
                vec![ScoreVector::new(ChannelId::Spatial, s.iter().map(|x| x / z).collect(), 1)]
            })
            .collect();
        let fit = train_fusion_q(&scenes, &per_channel, 1e-2, 20, 0).unwrap();
        assert_eq!(fit.w.len(), 1);
        assert!(fit.w[0] > 0.0);
        assert_eq!(fusion_violations(&scenes, &per_channel, &fit.w).unwrap(), 0);
    }

    #[test]
    fn tune_rejects_empty_validation() {
        let t = vec![prepared(4, 1, false)];
        assert!(matches!(
            tune_validation(&t, &[], &TrainConfig::default()),
            Err(Error::EmptyValidation)
        ));
    }
}
