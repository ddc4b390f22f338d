//! Synthetic scenes with a planted important person, and brute-force
//! reference solvers used to check the ranking engine.
//!
//! The reference solvers work on plain nested vectors and share no code with
//! [`crate::rank`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::message::ChannelId;
use crate::scene::{BoundingBox, BoxKind, PersonObservation, Scene};

pub const FRAME: f64 = 1000.0;

/// How the planted person stands out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Larger box, gazes of others and offset embeddings all point at the hub.
    #[default]
    Hub,
    /// Only a one-sided embedding signal relative to each spatial region
    /// separates the hub. A decoy at the edge of the crowd has a slightly
    /// higher embedding than the hub, so pairwise messages favor the decoy
    /// while the hub beats every region it is surrounded by.
    LocalConsensus,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hub" => Ok(Scenario::Hub),
            "local-consensus" => Ok(Scenario::LocalConsensus),
            other => Err(Error::InvalidConfig(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_persons: usize,
    /// In `[0, 1]`: how strongly geometry, gaze and embeddings favor the hub.
    pub hub_strength: f64,
    /// Channels to populate; spatial data is always present.
    pub channels: Vec<ChannelId>,
    pub seed: u64,
    pub embedding_dim: usize,
    /// Attention scale under which gazes point exactly at the hub.
    pub attention_c: f64,
    pub scenario: Scenario,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_persons: 6,
            hub_strength: 0.8,
            channels: vec![ChannelId::Spatial, ChannelId::Action, ChannelId::Attention],
            seed: 0,
            embedding_dim: 4,
            attention_c: 1.0,
            scenario: Scenario::Hub,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_persons == 0 {
            return Err(Error::InvalidConfig("n_persons must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.hub_strength) {
            return Err(Error::InvalidConfig("hub_strength must be in [0, 1]".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::InvalidConfig("embedding_dim must be at least 1".into()));
        }
        if !(self.attention_c.is_finite() && self.attention_c > 0.0) {
            return Err(Error::InvalidConfig("attention_c must be positive".into()));
        }
        Ok(())
    }

    fn wants(&self, c: ChannelId) -> bool {
        self.channels.contains(&c)
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Sample mean and std (n − 1, floored like feature standardization).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt().max(1e-8))
}

/// Yaw in degrees under which `from` gazes straight at `to` in the
/// standardized `[x, 1/h]` attention space with scale `c`.
fn yaw_towards(boxes: &[BoundingBox], from: usize, to: usize, c: f64) -> f64 {
    let xs: Vec<f64> = boxes.iter().map(|b| b.center().0).collect();
    let inv_h: Vec<f64> = boxes.iter().map(|b| 1.0 / b.h).collect();
    let (_, sx) = mean_std(&xs);
    let (_, sh) = mean_std(&inv_h);
    let dx = (xs[to] - xs[from]) / sx;
    let dh = c * (inv_h[to] - inv_h[from]) / sh;
    dx.atan2(dh).to_degrees()
}

fn wrap_degrees(d: f64) -> f64 {
    (d + 180.0).rem_euclid(360.0) - 180.0
}

/// One synthetic scene; the hub carries the ground-truth flag.
pub fn generate_scene(spec: &SynthSpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let scene = match spec.scenario {
        Scenario::Hub => hub_scene(spec, &mut rng),
        Scenario::LocalConsensus => local_consensus_scene(spec, &mut rng),
    };
    Ok(scene)
}

fn person(k: usize, bbox: BoundingBox, rng: &mut ChaCha8Rng) -> PersonObservation {
    let mut p = PersonObservation::face(format!("p{k}"), bbox);
    p.box_kind = BoxKind::Face;
    p.sharpness = Some(rng.random_range(0.3..1.0));
    p.detection_confidence = Some(rng.random_range(0.6..1.0));
    p
}

/// Gaze noise in degrees: near-uniform at strength 0, a few degrees at 1.
fn gaze_noise(strength: f64) -> Normal<f64> {
    Normal::new(0.0, 180.0 * (1.0 - strength).powi(2) + 3.0).expect("valid normal")
}

/// Random permutation of the persons with ids renumbered to match.
fn shuffled(mut scene: Scene, rng: &mut ChaCha8Rng) -> Scene {
    let n = scene.persons.len();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    scene = scene.permuted(&order);
    for (k, p) in scene.persons.iter_mut().enumerate() {
        p.id = format!("p{k}");
    }
    scene
}

fn hub_scene(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Scene {
    let n = spec.n_persons;
    let s = spec.hub_strength;
    let hub = rng.random_range(0..n);

    let boxes: Vec<BoundingBox> = (0..n)
        .map(|k| {
            let mut w = log_uniform(rng, 30.0, 120.0);
            if k == hub {
                w *= 1.0 + s;
            }
            let h = w * rng.random_range(1.1..1.4);
            let cx = rng.random_range(w / 2.0..FRAME - w / 2.0);
            let cy = rng.random_range(h / 2.0..FRAME - h / 2.0);
            BoundingBox::from_center(cx, cy, w, h)
        })
        .collect();

    let mut persons: Vec<PersonObservation> =
        boxes.iter().enumerate().map(|(k, b)| person(k, *b, rng)).collect();

    if spec.wants(ChannelId::Attention) {
        let noise = gaze_noise(s);
        for k in 0..n {
            let yaw = if k == hub {
                rng.random_range(-180.0..180.0)
            } else {
                yaw_towards(&boxes, k, hub, spec.attention_c) + noise.sample(rng)
            };
            persons[k].yaw_deg = Some(wrap_degrees(yaw));
        }
    }

    // crowd spread 0.25 per coordinate; the hub sits `s` away on every one
    let d = spec.embedding_dim;
    let embed = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> {
        (0..d)
            .map(|_| 0.25 * gaussian(rng) + if k == hub { s } else { 0.0 })
            .collect()
    };
    for k in 0..n {
        if spec.wants(ChannelId::Action) {
            persons[k].action_embedding = Some(embed(rng, k));
        }
        if spec.wants(ChannelId::Appearance) {
            persons[k].appearance_embedding = Some(embed(rng, k));
        }
    }

    persons[hub].is_ground_truth_important = true;
    Scene {
        id: format!("synth-{}", spec.seed),
        image_w: FRAME,
        image_h: FRAME,
        category: Some("hub".into()),
        persons,
    }
}

/// Quadrant signs in region order.
const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];

fn local_consensus_scene(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Scene {
    let n = spec.n_persons;
    let (hx, hy) = (rng.random_range(350.0..650.0), rng.random_range(350.0..650.0));
    // index 0 is the hub, index 1 the decoy, the rest the crowd
    let decoy_region = rng.random_range(0..4usize);
    let mut centers = vec![(hx, hy)];
    if n > 1 {
        let (sx, sy) = SIGNS[decoy_region];
        centers.push((
            hx + sx * rng.random_range(300.0..330.0),
            hy + sy * rng.random_range(300.0..330.0),
        ));
    }
    let crowd_regions: Vec<usize> = (0..4).filter(|&r| r != decoy_region).collect();
    for k in 2..n {
        // fill the three other regions first, then any region
        let region = if k - 2 < 3 {
            crowd_regions[k - 2]
        } else {
            rng.random_range(0..4)
        };
        let (sx, sy) = SIGNS[region];
        centers.push((
            hx + sx * rng.random_range(20.0..250.0),
            hy + sy * rng.random_range(20.0..250.0),
        ));
    }

    let d = spec.embedding_dim;
    let gap = 1.0 + spec.hub_strength;
    let mut embeds: Vec<Vec<f64>> = vec![Vec::new(); n];
    for e in embeds.iter_mut().skip(2) {
        *e = (0..d).map(|_| gaussian(rng)).collect();
    }
    let crowd_max: Vec<f64> = (0..d)
        .map(|c| {
            embeds
                .iter()
                .skip(2)
                .map(|e| e[c])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .map(|m| if m.is_finite() { m } else { 0.0 })
        .collect();
    embeds[0] = crowd_max.iter().map(|m| m + gap).collect();
    if n > 1 {
        embeds[1] = embeds[0].iter().map(|m| m + 0.25).collect();
    }

    let mut persons: Vec<PersonObservation> = centers
        .iter()
        .enumerate()
        .map(|(k, &(cx, cy))| {
            let w = rng.random_range(40.0..80.0);
            let h = w * rng.random_range(1.1..1.4);
            person(k, BoundingBox::from_center(cx, cy, w, h), rng)
        })
        .collect();
    for (p, e) in persons.iter_mut().zip(&embeds) {
        if spec.wants(ChannelId::Action) {
            p.action_embedding = Some(e.clone());
        }
        if spec.wants(ChannelId::Appearance) {
            p.appearance_embedding = Some(e.clone());
        }
        if spec.wants(ChannelId::Attention) {
            p.yaw_deg = Some(rng.random_range(-180.0..180.0));
        }
    }
    persons[0].is_ground_truth_important = true;

    // shuffle so the hub's index carries no information
    let scene = Scene {
        id: format!("synth-lc-{}", spec.seed),
        image_w: FRAME,
        image_h: FRAME,
        category: Some("local-consensus".into()),
        persons,
    };
    shuffled(scene, rng)
}

/// `count` scenes with person counts drawn uniformly from `n_range`
/// (inclusive). Scene `k` gets its own seed drawn from `spec.seed`.
pub fn generate_dataset(
    spec: &SynthSpec,
    count: usize,
    n_range: (usize, usize),
) -> Result<Vec<Scene>> {
    let (lo, hi) = n_range;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidConfig(format!("bad person range {lo}..={hi}")));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..count)
        .map(|k| {
            let s = SynthSpec {
                n_persons: rng.random_range(lo..=hi),
                seed: rng.random(),
                ..spec.clone()
            };
            let mut scene = generate_scene(&s)?;
            scene.id = format!("{}-{k:04}", scene.id.split('-').next().unwrap_or("synth"));
            Ok(scene)
        })
        .collect()
}

/// Row-normalizes with uniform rows for dangling persons.
fn stochastic_rows(gp: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = gp.len();
    gp.iter()
        .map(|row| {
            let c: f64 = row.iter().sum();
            if c > 0.0 {
                row.iter().map(|g| g / c).collect()
            } else {
                vec![1.0 / n as f64; n]
            }
        })
        .collect()
}

/// Gaussian elimination with partial pivoting. `None` if singular.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Reference fixed point of one channel by a direct dense solve.
///
/// With `Ĝ` the row-normalized pairwise matrix and `p` the prior, the
/// normalized fixed point satisfies `(μ I − α Ĝᵀ) λ = p` with
/// `μ = Σ p + α = 1 + α Σ G^r`. When that system is singular (`α = 1` and no
/// hyper signal) it falls back to 10⁶ steps of power iteration.
pub fn oracle_fixed_point(gp: &[Vec<f64>], gr: &[Vec<f64>], alpha: f64) -> Result<Vec<f64>> {
    let n = gp.len();
    if n == 0 || gp.iter().any(|r| r.len() != n) || gr.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeMismatch("oracle expects N x N and K x N".into()));
    }
    let t = stochastic_rows(gp);
    let p: Vec<f64> = (0..n)
        .map(|i| (1.0 - alpha) / n as f64 + alpha * gr.iter().map(|r| r[i]).sum::<f64>())
        .collect();
    let mu = p.iter().sum::<f64>() + alpha;
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { mu } else { 0.0 } - alpha * t[j][i])
                .collect()
        })
        .collect();
    let x = match dense_solve(a, p.clone()) {
        Some(x) => x,
        None => long_power_iteration(&t, &p, alpha)?,
    };
    let x: Vec<f64> = x.into_iter().map(|v| v.max(0.0)).collect();
    let s: f64 = x.iter().sum();
    Ok(x.into_iter().map(|v| v / s).collect())
}

fn long_power_iteration(t: &[Vec<f64>], p: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n = p.len();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..1_000_000 {
        let mut y: Vec<f64> = (0..n)
            .map(|i| p[i] + alpha * (0..n).map(|j| t[j][i] * x[j]).sum::<f64>())
            .collect();
        let s: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= s);
        let d: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if d < 1e-15 {
            return Ok(x);
        }
    }
    Err(Error::SingularSystem)
}

/// Textbook PageRank with teleport `(1 − α)/N` and uniform dangling rows,
/// iterated until the L1 change is below `1e-15`.
pub fn oracle_pagerank(gp: &[Vec<f64>], alpha: f64) -> Vec<f64> {
    let n = gp.len();
    let t = stochastic_rows(gp);
    let mut pr = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let next: Vec<f64> = (0..n)
            .map(|i| (1.0 - alpha) / n as f64 + alpha * (0..n).map(|j| pr[j] * t[j][i]).sum::<f64>())
            .collect();
        let d: f64 = pr.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        pr = next;
        if d < 1e-15 {
            break;
        }
    }
    pr
}

/// `R_i = Π_z (λ^z_i)^{q_z}` computed directly, ranked descending with ties
/// to the lower index.
pub fn oracle_r_scores(per_channel: &[Vec<f64>], q: &[f64]) -> Vec<f64> {
    let n = per_channel.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            per_channel
                .iter()
                .zip(q)
                .map(|(l, &qz)| l[i].powf(qz))
                .product()
        })
        .collect()
}

pub fn oracle_rank_by_r(per_channel: &[Vec<f64>], q: &[f64]) -> Vec<usize> {
    let r = oracle_r_scores(per_channel, q);
    let mut idx: Vec<usize> = (0..r.len()).collect();
    // insertion sort keeps equal elements in index order
    for k in 1..idx.len() {
        let mut m = k;
        while m > 0 && r[idx[m]] > r[idx[m - 1]] {
            idx.swap(m, m - 1);
            m -= 1;
        }
    }
    idx
}

/// A random nonnegative `(G^p, G^r)` pair for solver cross-checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub gp: Vec<Vec<f64>>,
    pub gr: Vec<Vec<f64>>,
    pub alpha: f64,
}

impl RandomInstance {
    /// `N x N` pairwise matrix with zero diagonal, about a third of entries
    /// zero and occasional dangling rows; `4 x N` hyper matrix. With
    /// `hyper = false`, or never when `alpha = 1`, the hyper block is zero.
    pub fn generate(seed: u64, n: usize, alpha: f64, hyper: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gp = (0..n)
            .map(|i| {
                let dangling = rng.random_bool(0.1);
                (0..n)
                    .map(|j| {
                        if i == j || dangling || rng.random_bool(0.33) {
                            0.0
                        } else {
                            rng.random_range(0.0..3.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let with_hyper = hyper || alpha >= 1.0;
        let mut gr: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        if with_hyper && rng.random_bool(0.5) {
                            rng.random_range(0.0..0.5)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        if with_hyper {
            // keep the damping of the α = 1 iteration away from 1
            let k = rng.random_range(0..4);
            let i = rng.random_range(0..n);
            gr[k][i] += 0.5;
        }
        Self { gp, gr, alpha }
    }
}

/// Direction `(sin θ, cos θ)` of a yaw in degrees.
pub fn gaze_vector(yaw_deg: f64) -> (f64, f64) {
    let t = yaw_deg.to_radians();
    (t.sin(), t.cos())
}
