//! Interaction matrices: the pairwise person graph, the region-to-person
//! hyper graph and their block-structured union.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureBundle;
use crate::message::{self, ChannelId};
use crate::scene::Scene;
use crate::weights::WeightSet;

/// Number of block regions around each focal person.
pub const NUM_REGIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Pairwise,
    Hyper,
    Hybrid,
}

/// Dense row-major nonnegative matrix. Entry `(r, c)` is the interaction
/// sent from node `r` to node `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    pub channel: ChannelId,
    pub data: Vec<f64>,
}

impl InteractionMatrix {
    pub fn zeros(kind: MatrixKind, rows: usize, cols: usize, channel: ChannelId) -> Self {
        Self {
            kind,
            rows,
            cols,
            channel,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(kind: MatrixKind, channel: ChannelId, rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Self {
            kind,
            rows: rows.len(),
            cols,
            channel,
            data: rows.concat(),
        })
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Multiplies every entry by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= k);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// Checks the structural invariants of the matrix kind.
    pub fn check(&self) -> Result<()> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if self.data.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::ShapeMismatch(
                "entries must be finite and nonnegative".into(),
            ));
        }
        match self.kind {
            MatrixKind::Pairwise => {
                if self.rows != self.cols {
                    return Err(Error::ShapeMismatch("pairwise matrix must be square".into()));
                }
                if (0..self.rows).any(|i| self.get(i, i) != 0.0) {
                    return Err(Error::ShapeMismatch(
                        "pairwise matrix must have a zero diagonal".into(),
                    ));
                }
            }
            MatrixKind::Hyper => {
                if self.rows != NUM_REGIONS {
                    return Err(Error::ShapeMismatch(format!(
                        "hyper matrix must have {NUM_REGIONS} rows, has {}",
                        self.rows
                    )));
                }
            }
            MatrixKind::Hybrid => {
                if self.rows != self.cols || self.rows < NUM_REGIONS {
                    return Err(Error::ShapeMismatch("hybrid matrix must be square".into()));
                }
            }
        }
        Ok(())
    }
}

/// `max(x, 0)`; message values are used as transition mass.
#[inline]
pub fn rectify(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Quadrant of `other` relative to `focal`, by sign of the center offset.
/// Exact ties on an axis count as positive.
///
/// | region | dx | dy |
/// |--------|----|----|
/// | 0      | +  | +  |
/// | 1      | -  | +  |
/// | 2      | -  | -  |
/// | 3      | +  | -  |
pub fn quadrant(focal: (f64, f64), other: (f64, f64)) -> usize {
    let right = other.0 >= focal.0;
    let below = other.1 >= focal.1;
    match (right, below) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

/// Members of each block region around one focal person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperRegions {
    pub focal: usize,
    pub members: [Vec<usize>; NUM_REGIONS],
}

impl HyperRegions {
    pub fn non_empty(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_empty())
            .map(|(k, m)| (k, m.as_slice()))
    }
}

/// Splits every other person into one of the four quadrants around
/// `focal_index`.
pub fn partition_regions(scene: &Scene, focal_index: usize) -> Result<HyperRegions> {
    let n = scene.persons.len();
    let focal = scene
        .persons
        .get(focal_index)
        .ok_or(Error::IndexOutOfRange {
            index: focal_index,
            len: n,
        })?
        .bbox
        .center();
    let mut members: [Vec<usize>; NUM_REGIONS] = Default::default();
    for (j, p) in scene.persons.iter().enumerate() {
        if j != focal_index {
            members[quadrant(focal, p.bbox.center())].push(j);
        }
    }
    Ok(HyperRegions {
        focal: focal_index,
        members,
    })
}

/// Elementwise maximum of the members' feature vectors.
pub fn consensus(features: &[&[f64]], members: &[usize]) -> Option<Vec<f64>> {
    let first = features[*members.first()?];
    let mut out = first.to_vec();
    for &m in &members[1..] {
        for (o, &x) in out.iter_mut().zip(features[m]) {
            if x > *o {
                *o = x;
            }
        }
    }
    Some(out)
}

fn channel_features(
    bundles: &[FeatureBundle],
    channel: ChannelId,
) -> Result<Vec<&[f64]>> {
    bundles
        .iter()
        .map(|b| b.channel(channel).ok_or(Error::ChannelInactive(channel)))
        .collect()
}

/// Pairwise interaction matrix for one channel: entry `(i, j)` is the
/// rectified message from person `i` to person `j`.
pub fn build_pairwise(
    bundles: &[FeatureBundle],
    channel: ChannelId,
    weights: &WeightSet,
) -> Result<InteractionMatrix> {
    let feats = channel_features(bundles, channel)?;
    let n = feats.len();
    let mut g = InteractionMatrix::zeros(MatrixKind::Pairwise, n, n, channel);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = match channel {
                ChannelId::Spatial => message::msg_spatial(feats[i], feats[j], &weights.w_s)?,
                ChannelId::Action => message::msg_action(feats[i], feats[j], &weights.w_ac)?,
                ChannelId::Appearance => {
                    message::msg_appearance(feats[i], feats[j], &weights.w_ap)?
                }
                ChannelId::Attention => {
                    message::msg_attention(feats[i], feats[j], weights.c_att)?
                }
                ChannelId::Fused => return Err(Error::ChannelInactive(channel)),
            };
            g.set(i, j, rectify(v));
        }
    }
    Ok(g)
}

/// Region-to-person matrix (`NUM_REGIONS x N`) for one channel: entry
/// `(k, i)` is `max(δᵀ(φ_i − γ_k), 0)` with `γ_k` the consensus of region
/// `k` around focal person `i`. Empty regions contribute 0.
pub fn build_hyper(
    scene: &Scene,
    bundles: &[FeatureBundle],
    channel: ChannelId,
    weights: &WeightSet,
) -> Result<InteractionMatrix> {
    let feats = channel_features(bundles, channel)?;
    let n = feats.len();
    if scene.persons.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{} bundles for {} persons",
            n,
            scene.persons.len()
        )));
    }
    let dim = feats.first().map_or(0, |f| f.len());
    let delta = weights.delta(channel).ok_or(Error::ChannelInactive(channel))?;
    if delta.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: delta.len(),
        });
    }

    let mut g = InteractionMatrix::zeros(MatrixKind::Hyper, NUM_REGIONS, n, channel);
    for i in 0..n {
        let regions = partition_regions(scene, i)?;
        for (k, members) in regions.non_empty() {
            let gamma = consensus(&feats, members).expect("non-empty region");
            let v: f64 = delta
                .iter()
                .zip(feats[i].iter().zip(&gamma))
                .map(|(d, (p, c))| d * (p - c))
                .sum();
            g.set(k, i, rectify(v));
        }
    }
    Ok(g)
}

/// Block matrix `[[G^p, 0], [G^r, 0]]` of size `(N + Q) x (N + Q)`.
pub fn build_hybrid(gp: &InteractionMatrix, gr: &InteractionMatrix) -> Result<InteractionMatrix> {
    if gp.kind != MatrixKind::Pairwise || gr.kind != MatrixKind::Hyper {
        return Err(Error::ShapeMismatch(
            "hybrid needs a pairwise and a hyper matrix".into(),
        ));
    }
    if gp.channel != gr.channel {
        return Err(Error::ChannelMismatch(gp.channel, gr.channel));
    }
    let n = gp.rows;
    if gp.cols != n || gr.cols != n || gr.rows != NUM_REGIONS {
        return Err(Error::ShapeMismatch(format!(
            "pairwise {}x{} with hyper {}x{}",
            gp.rows, gp.cols, gr.rows, gr.cols
        )));
    }
    let size = n + NUM_REGIONS;
    let mut g = InteractionMatrix::zeros(MatrixKind::Hybrid, size, size, gp.channel);
    for r in 0..n {
        g.data[r * size..r * size + n].copy_from_slice(gp.row(r));
    }
    for k in 0..NUM_REGIONS {
        let r = n + k;
        g.data[r * size..r * size + n].copy_from_slice(gr.row(k));
    }
    Ok(g)
}

/// Splits a hybrid matrix back into its pairwise and hyper blocks.
pub fn split_hybrid(g: &InteractionMatrix) -> Result<(InteractionMatrix, InteractionMatrix)> {
    if g.kind != MatrixKind::Hybrid || g.rows != g.cols || g.rows < NUM_REGIONS {
        return Err(Error::ShapeMismatch("not a hybrid matrix".into()));
    }
    let n = g.rows - NUM_REGIONS;
    let mut gp = InteractionMatrix::zeros(MatrixKind::Pairwise, n, n, g.channel);
    let mut gr = InteractionMatrix::zeros(MatrixKind::Hyper, NUM_REGIONS, n, g.channel);
    for r in 0..n {
        gp.data[r * n..(r + 1) * n].copy_from_slice(&g.row(r)[..n]);
    }
    for k in 0..NUM_REGIONS {
        gr.data[k * n..(k + 1) * n].copy_from_slice(&g.row(n + k)[..n]);
    }
    Ok((gp, gr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_bundles, FeatureConfig};
    use crate::scene::{BoundingBox, PersonObservation};

    fn bundle(spatial: Vec<f64>) -> FeatureBundle {
        FeatureBundle {
            spatial,
            attention: None,
            action: None,
            appearance: None,
        }
    }

    fn scene_at(centers: &[(f64, f64)]) -> Scene {
        Scene {
            id: "s".into(),
            image_w: 1000.0,
            image_h: 1000.0,
            category: None,
            persons: centers
                .iter()
                .enumerate()
                .map(|(k, &(x, y))| {
                    PersonObservation::face(format!("p{k}"), BoundingBox::from_center(x, y, 20.0, 20.0))
                })
                .collect(),
        }
    }

    #[test]
    fn single_person_pairwise_is_zero() {
        let g = build_pairwise(&[bundle(vec![0.0; 7])], ChannelId::Spatial, &WeightSet::default())
            .unwrap();
        assert_eq!((g.rows, g.cols), (1, 1));
        assert!(g.is_zero());
    }

    #[test]
    fn pairwise_matches_direct_messages() {
        let bundles: Vec<_> = (0..3)
            .map(|k| bundle((0..7).map(|d| (k * 7 + d) as f64 * 0.1 - 1.0).collect()))
            .collect();
        let mut w = WeightSet::default();
        w.w_s = vec![0.5, -0.2, 1.0, 0.0, 0.3, -1.0, 0.7];
        let g = build_pairwise(&bundles, ChannelId::Spatial, &w).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j {
                    0.0
                } else {
                    message::msg_spatial(&bundles[i].spatial, &bundles[j].spatial, &w.w_s)
                        .unwrap()
                        .max(0.0)
                };
                assert_eq!(g.get(i, j), expect);
            }
        }
        g.check().unwrap();
    }

    #[test]
    fn appearance_graph_is_symmetric() {
        let bundles: Vec<_> = [[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]]
            .iter()
            .map(|a| FeatureBundle {
                appearance: Some(a.to_vec()),
                ..bundle(vec![0.0; 7])
            })
            .collect();
        let w = WeightSet {
            w_ap: vec![1.0, 0.5],
            ..Default::default()
        };
        let g = build_pairwise(&bundles, ChannelId::Appearance, &w).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn inactive_channel_is_an_error() {
        let bundles = vec![bundle(vec![0.0; 7]); 2];
        assert!(matches!(
            build_pairwise(&bundles, ChannelId::Action, &WeightSet::default()),
            Err(Error::ChannelInactive(ChannelId::Action))
        ));
    }

    #[test]
    fn quadrant_sign_rule() {
        let s = scene_at(&[(500.0, 500.0), (600.0, 600.0), (400.0, 600.0), (400.0, 400.0), (600.0, 400.0)]);
        let r = partition_regions(&s, 0).unwrap();
        for k in 0..NUM_REGIONS {
            assert_eq!(r.members[k], vec![k + 1]);
        }
        // ties go to the positive side
        assert_eq!(quadrant((0.0, 0.0), (0.0, 0.0)), 0);
        assert_eq!(quadrant((0.0, 0.0), (-1.0, 0.0)), 1);
        let single = partition_regions(&scene_at(&[(1.0, 1.0)]), 0).unwrap();
        assert!(single.members.iter().all(Vec::is_empty));
    }

    #[test]
    fn hyper_single_person_and_identical_features() {
        let s = scene_at(&[(500.0, 500.0)]);
        let g = build_hyper(&s, &[bundle(vec![1.0; 7])], ChannelId::Spatial, &WeightSet::default())
            .unwrap();
        assert_eq!((g.rows, g.cols), (4, 1));
        assert!(g.is_zero());

        let s = scene_at(&[(100.0, 100.0), (500.0, 500.0), (900.0, 200.0)]);
        let b = vec![bundle(vec![0.3; 7]); 3];
        let g = build_hyper(&s, &b, ChannelId::Spatial, &WeightSet::default()).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn hyper_line_scene_brute_force() {
        // three persons on a horizontal line, delta picks feature 1
        let s = scene_at(&[(100.0, 500.0), (500.0, 500.0), (900.0, 500.0)]);
        let values = [0.2, 1.5, -0.4];
        let b: Vec<_> = values
            .iter()
            .map(|&v| {
                let mut f = vec![0.0; 7];
                f[1] = v;
                f[0] = -v;
                bundle(f)
            })
            .collect();
        let mut w = WeightSet::default();
        let mut delta = vec![0.0; 7];
        delta[1] = 1.0;
        w.delta.insert(ChannelId::Spatial, delta);
        let g = build_hyper(&s, &b, ChannelId::Spatial, &w).unwrap();
        for i in 0..3 {
            for k in 0..NUM_REGIONS {
                let members: Vec<usize> = (0..3)
                    .filter(|&j| {
                        j != i && quadrant(s.persons[i].bbox.center(), s.persons[j].bbox.center()) == k
                    })
                    .collect();
                let expect = members
                    .iter()
                    .map(|&j| values[j])
                    .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
                    .map_or(0.0, |mx| (values[i] - mx).max(0.0));
                assert_eq!(g.get(k, i), expect, "region {k} focal {i}");
            }
        }
        // middle person beats both neighbours
        assert_eq!(g.get(0, 1), 1.5 - (-0.4));
        assert_eq!(g.get(1, 1), 1.5 - 0.2);
    }

    #[test]
    fn hybrid_block_layout() {
        let gp = InteractionMatrix::from_rows(
            MatrixKind::Pairwise,
            ChannelId::Spatial,
            &[vec![0.0, 2.0], vec![3.0, 0.0]],
        )
        .unwrap();
        let gr = InteractionMatrix::from_rows(
            MatrixKind::Hyper,
            ChannelId::Spatial,
            &[vec![1.0, 0.0], vec![0.0, 4.0], vec![5.0, 6.0], vec![0.0, 7.0]],
        )
        .unwrap();
        let g = build_hybrid(&gp, &gr).unwrap();
        assert_eq!((g.rows, g.cols), (6, 6));
        for r in 0..6 {
            for c in 0..6 {
                let expect = match (r < 2, c < 2) {
                    (_, false) => 0.0,
                    (true, true) => gp.get(r, c),
                    (false, true) => gr.get(r - 2, c),
                };
                assert_eq!(g.get(r, c), expect);
            }
        }
        let (p2, r2) = split_hybrid(&g).unwrap();
        assert_eq!(p2, gp);
        assert_eq!(r2, gr);

        let zero = build_hybrid(
            &InteractionMatrix::zeros(MatrixKind::Pairwise, 3, 3, ChannelId::Action),
            &InteractionMatrix::zeros(MatrixKind::Hyper, 4, 3, ChannelId::Action),
        )
        .unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn hybrid_rejects_mismatches() {
        let gp = InteractionMatrix::zeros(MatrixKind::Pairwise, 2, 2, ChannelId::Spatial);
        let gr = InteractionMatrix::zeros(MatrixKind::Hyper, 4, 3, ChannelId::Spatial);
        assert!(matches!(build_hybrid(&gp, &gr), Err(Error::ShapeMismatch(_))));
        let gr = InteractionMatrix::zeros(MatrixKind::Hyper, 4, 2, ChannelId::Action);
        assert!(matches!(build_hybrid(&gp, &gr), Err(Error::ChannelMismatch(..))));
    }

    #[test]
    fn real_scene_graphs_satisfy_invariants() {
        let mut s = scene_at(&[(100.0, 120.0), (480.0, 500.0), (900.0, 260.0), (300.0, 800.0)]);
        for (k, p) in s.persons.iter_mut().enumerate() {
            p.yaw_deg = Some(k as f64 * 40.0 - 60.0);
        }
        let b = build_bundles(&s, &FeatureConfig::default()).unwrap();
        let w = WeightSet::default();
        for ch in [ChannelId::Spatial, ChannelId::Attention] {
            build_pairwise(&b, ch, &w).unwrap().check().unwrap();
            build_hyper(&s, &b, ch, &w).unwrap().check().unwrap();
        }
    }
}
