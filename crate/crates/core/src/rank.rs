//! Modified PageRank over a hybrid interaction graph, multi-channel fusion
//! and end-to-end scene ranking.
//!
//! Per channel, person scores solve
//!
//! ```text
//! λ_i ∝ (1 − α)/N + α Σ_k G^r[k, i] + α Σ_j Ĝ[j, i] λ_j,     Σ λ = 1
//! ```
//!
//! where `Ĝ` is the row-normalized pairwise matrix (rows with no outgoing
//! mass are replaced by the uniform row). With `Σλ = 1` this is exactly the
//! dominant eigenvector of [`build_gbar`], so the power iteration
//! renormalizes after every step.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{active_channels, FeatureBundle};
use crate::graph::{self, rectify, InteractionMatrix, MatrixKind, NUM_REGIONS};
use crate::message::{msg_fused, ChannelId};
use crate::scene::Scene;
use crate::weights::WeightSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub alpha: f64,
    /// Stop when the L1 change between iterates falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub score_floor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            tol: 1e-10,
            max_iter: 1000,
            score_floor: 1e-12,
        }
    }
}

impl SolveConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        if !(self.score_floor >= 0.0) {
            return Err(Error::InvalidConfig("score_floor must be >= 0".into()));
        }
        Ok(())
    }
}

/// Scores for the persons of one scene, with the ranking they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub scene_id: String,
    pub channel: ChannelId,
    pub scores: Vec<f64>,
    /// Person indices by descending score, ties by ascending index.
    pub ranking: Vec<usize>,
    pub iterations: usize,
}

impl ScoreVector {
    pub fn new(channel: ChannelId, scores: Vec<f64>, iterations: usize) -> Self {
        let ranking = ranking_of(&scores);
        Self {
            scene_id: String::new(),
            channel,
            scores,
            ranking,
            iterations,
        }
    }

    pub fn top(&self) -> usize {
        self.ranking[0]
    }

    /// 1-based rank of a person.
    pub fn rank_of(&self, index: usize) -> Option<usize> {
        self.ranking.iter().position(|&i| i == index).map(|r| r + 1)
    }
}

/// Indices sorted by descending score, ties broken by ascending index.
pub fn ranking_of(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

fn check_pair(gp: &InteractionMatrix, gr: &InteractionMatrix) -> Result<usize> {
    gp.check()?;
    gr.check()?;
    if gp.kind != MatrixKind::Pairwise || gr.kind != MatrixKind::Hyper {
        return Err(Error::ShapeMismatch(
            "expected a pairwise and a hyper matrix".into(),
        ));
    }
    if gp.channel != gr.channel {
        return Err(Error::ChannelMismatch(gp.channel, gr.channel));
    }
    let n = gp.rows;
    if n == 0 || gr.cols != n || gr.rows != NUM_REGIONS {
        return Err(Error::ShapeMismatch(format!(
            "pairwise {}x{} with hyper {}x{}",
            gp.rows, gp.cols, gr.rows, gr.cols
        )));
    }
    Ok(n)
}

/// Row-normalized transition matrix; zero rows become uniform.
pub fn transition_matrix(gp: &InteractionMatrix) -> Vec<f64> {
    let n = gp.rows;
    let mut t = vec![0.0; n * n];
    for j in 0..n {
        let row = gp.row(j);
        let c: f64 = row.iter().sum();
        let out = &mut t[j * n..(j + 1) * n];
        if c > 0.0 {
            for (o, &g) in out.iter_mut().zip(row) {
                *o = g / c;
            }
        } else {
            out.fill(1.0 / n as f64);
        }
    }
    t
}

/// Per-person prior `(1 − α)/N + α Σ_k G^r[k, i]`.
pub fn prior(gr: &InteractionMatrix, alpha: f64) -> Vec<f64> {
    let n = gr.cols;
    (0..n)
        .map(|i| {
            let hyper: f64 = (0..gr.rows).map(|k| gr.get(k, i)).sum();
            (1.0 - alpha) / n as f64 + alpha * hyper
        })
        .collect()
}

/// One unnormalized step `prior + α Ĝᵀ λ`.
fn step(t: &[f64], prior: &[f64], alpha: f64, lambda: &[f64], out: &mut [f64]) {
    let n = prior.len();
    out.copy_from_slice(prior);
    for (j, &lj) in lambda.iter().enumerate() {
        let a = alpha * lj;
        if a == 0.0 {
            continue;
        }
        for (o, &tji) in out.iter_mut().zip(&t[j * n..(j + 1) * n]) {
            *o += a * tji;
        }
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// L1 distance between `λ` and one normalized step applied to it.
pub fn fixed_point_residual(
    gp: &InteractionMatrix,
    gr: &InteractionMatrix,
    alpha: f64,
    lambda: &[f64],
) -> f64 {
    let t = transition_matrix(gp);
    let p = prior(gr, alpha);
    let mut next = vec![0.0; lambda.len()];
    step(&t, &p, alpha, lambda, &mut next);
    normalize(&mut next);
    l1(lambda, &next)
}

/// Solves one channel's fixed point by renormalized power iteration.
pub fn solve_channel(
    gp: &InteractionMatrix,
    gr: &InteractionMatrix,
    cfg: &SolveConfig,
) -> Result<ScoreVector> {
    cfg.validate()?;
    let n = check_pair(gp, gr)?;
    let t = transition_matrix(gp);
    let p = prior(gr, cfg.alpha);

    let mut lambda = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        step(&t, &p, cfg.alpha, &lambda, &mut next);
        normalize(&mut next);
        residual = l1(&lambda, &next);
        std::mem::swap(&mut lambda, &mut next);
        if residual < cfg.tol {
            break;
        }
    }
    if residual >= cfg.tol {
        return Err(Error::NoConvergence {
            iterations,
            residual,
        });
    }

    for x in lambda.iter_mut() {
        if *x < cfg.score_floor {
            *x = cfg.score_floor;
        }
    }
    normalize(&mut lambda);
    Ok(ScoreVector::new(gp.channel, lambda, iterations))
}

/// The `N x N` matrix whose dominant eigenvector (sum-normalized) is the
/// channel's score vector:
/// `α Ĝᵀ + α (G^rᵀ 1) 1ᵀ + (1 − α)/N · 1 1ᵀ`.
pub fn build_gbar(
    gp: &InteractionMatrix,
    gr: &InteractionMatrix,
    cfg: &SolveConfig,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let n = check_pair(gp, gr)?;
    let t = transition_matrix(gp);
    let a = cfg.alpha;
    let teleport = (1.0 - a) / n as f64;
    Ok((0..n)
        .map(|i| {
            let hyper: f64 = (0..NUM_REGIONS).map(|k| gr.get(k, i)).sum();
            (0..n)
                .map(|j| a * t[j * n + i] + a * hyper + teleport)
                .collect()
        })
        .collect())
}

/// Dominant eigenvector of a nonnegative square matrix by plain power
/// iteration, normalized to sum 1. Returns the vector and the Rayleigh-style
/// eigenvalue estimate `1ᵀ M v`.
pub fn dominant_eigenvector(m: &[Vec<f64>], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = m.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut eig = 0.0;
    for _ in 0..max_iter {
        let mut w: Vec<f64> = m
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        eig = w.iter().sum();
        normalize(&mut w);
        let d = l1(&v, &w);
        v = w;
        if d < tol {
            break;
        }
    }
    (v, eig)
}

/// Fuses per-channel scores into one ranking.
///
/// A pairwise graph is built from the fused message
/// `max(qᵀ(log λ_j − log λ_i), 0)` and solved with a zero hyper block.
pub fn fuse(per_channel: &[ScoreVector], q: &[f64], cfg: &SolveConfig) -> Result<ScoreVector> {
    let (n, logs) = channel_logs(per_channel, q)?;
    let mut gp = InteractionMatrix::zeros(MatrixKind::Pairwise, n, n, ChannelId::Fused);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                gp.set(i, j, rectify(msg_fused(&logs[i], &logs[j], q)?));
            }
        }
    }
    let gr = InteractionMatrix::zeros(MatrixKind::Hyper, NUM_REGIONS, n, ChannelId::Fused);
    let mut out = solve_channel(&gp, &gr, cfg)?;
    out.scene_id = per_channel[0].scene_id.clone();
    Ok(out)
}

/// Per-person `log R = Σ_z q_z log λ^z`.
pub fn log_fused_scores(per_channel: &[ScoreVector], q: &[f64]) -> Result<Vec<f64>> {
    let (_, logs) = channel_logs(per_channel, q)?;
    Ok(logs
        .iter()
        .map(|l| l.iter().zip(q).map(|(a, b)| a * b).sum())
        .collect())
}

/// Per-person vectors of per-channel log scores.
fn channel_logs(per_channel: &[ScoreVector], q: &[f64]) -> Result<(usize, Vec<Vec<f64>>)> {
    let first = per_channel
        .first()
        .ok_or_else(|| Error::ChannelMisalignment("no channels to fuse".into()))?;
    let n = first.scores.len();
    if per_channel.iter().any(|s| s.scores.len() != n) {
        return Err(Error::ChannelMisalignment(
            "channels score different person counts".into(),
        ));
    }
    if q.len() != per_channel.len() {
        return Err(Error::DimensionMismatch {
            expected: per_channel.len(),
            got: q.len(),
        });
    }
    if per_channel
        .iter()
        .any(|s| s.scores.iter().any(|&x| !(x > 0.0)))
    {
        return Err(Error::ChannelMisalignment(
            "channel scores must be strictly positive".into(),
        ));
    }
    Ok((
        n,
        (0..n)
            .map(|i| per_channel.iter().map(|s| s.scores[i].ln()).collect())
            .collect(),
    ))
}

/// How the final person is selected from the fused channel scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectBy {
    /// Second eigen-analysis on the fused-message graph.
    #[default]
    FusedSolve,
    /// Direct product of channel scores raised to the fusion weights.
    R,
}

impl FromStr for SelectBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fused-solve" => Ok(SelectBy::FusedSolve),
            "R" | "r" => Ok(SelectBy::R),
            other => Err(Error::InvalidConfig(format!("unknown selection `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    pub solve: SolveConfig,
    pub select_by: SelectBy,
    /// When false the hyper block is zeroed, leaving pairwise graphs only.
    pub use_hyper: bool,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            solve: SolveConfig::default(),
            select_by: SelectBy::FusedSolve,
            use_hyper: true,
        }
    }
}

/// Everything computed for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRanking {
    pub scene_id: String,
    pub channels: Vec<ScoreVector>,
    /// Final scores used for selection (fused solve or normalized `R`).
    pub fused: ScoreVector,
    /// `R = Π λ^q`, normalized to sum 1.
    pub r_scores: Vec<f64>,
    pub predicted_index: usize,
    pub predicted_id: String,
}

/// Graphs of one channel, as fed to [`solve_channel`].
pub fn channel_graphs(
    scene: &Scene,
    bundles: &[FeatureBundle],
    channel: ChannelId,
    weights: &WeightSet,
    use_hyper: bool,
) -> Result<(InteractionMatrix, InteractionMatrix)> {
    let gp = graph::build_pairwise(bundles, channel, weights)?;
    let gr = if use_hyper {
        graph::build_hyper(scene, bundles, channel, weights)?
    } else {
        InteractionMatrix::zeros(MatrixKind::Hyper, NUM_REGIONS, bundles.len(), channel)
    };
    Ok((gp, gr))
}

/// Channels usable for a scene under a weight set, with their fusion weights.
pub fn scene_channels(bundles: &[FeatureBundle], weights: &WeightSet) -> Vec<(ChannelId, f64)> {
    active_channels(bundles)
        .into_iter()
        .filter_map(|c| weights.q_for(c).map(|q| (c, q)))
        .collect()
}

/// Per-channel score vectors of one scene.
pub fn channel_scores(
    scene: &Scene,
    bundles: &[FeatureBundle],
    weights: &WeightSet,
    cfg: &RankConfig,
) -> Result<Vec<ScoreVector>> {
    let channels = scene_channels(bundles, weights);
    if channels.is_empty() {
        return Err(Error::NoActiveChannels);
    }
    channels
        .into_iter()
        .map(|(c, _)| {
            let (gp, gr) = channel_graphs(scene, bundles, c, weights, cfg.use_hyper)?;
            let mut sv = solve_channel(&gp, &gr, &cfg.solve)?;
            sv.scene_id = scene.id.clone();
            Ok(sv)
        })
        .collect()
}

/// Ranks the persons of a validated scene end to end.
pub fn rank_scene(
    scene: &Scene,
    bundles: &[FeatureBundle],
    weights: &WeightSet,
    cfg: &RankConfig,
) -> Result<SceneRanking> {
    if bundles.len() != scene.persons.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} bundles for {} persons",
            bundles.len(),
            scene.persons.len()
        )));
    }
    let channels = channel_scores(scene, bundles, weights, cfg)?;
    let q: Vec<f64> = scene_channels(bundles, weights)
        .into_iter()
        .map(|(_, q)| q)
        .collect();

    let log_r = log_fused_scores(&channels, &q)?;
    let max = log_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut r_scores: Vec<f64> = log_r.iter().map(|l| (l - max).exp()).collect();
    normalize(&mut r_scores);

    let mut fused = match cfg.select_by {
        SelectBy::FusedSolve => fuse(&channels, &q, &cfg.solve)?,
        SelectBy::R => ScoreVector::new(ChannelId::Fused, r_scores.clone(), 0),
    };
    fused.scene_id = scene.id.clone();
    let predicted_index = fused.top();
    Ok(SceneRanking {
        scene_id: scene.id.clone(),
        predicted_id: scene.persons[predicted_index].id.clone(),
        predicted_index,
        channels,
        fused,
        r_scores,
    })
}
