use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ATTENTION_DIM, SPATIAL_DIM};
use crate::message::ChannelId;

/// All learned parameters of the ranking model.
///
/// `q` is aligned with `channels`, which lists the channels the model was
/// trained on in canonical order. `delta` holds one hyper-edge weight vector
/// per channel, sized like that channel's feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub w_s: Vec<f64>,
    #[serde(default)]
    pub w_ac: Vec<f64>,
    #[serde(default)]
    pub w_ap: Vec<f64>,
    pub c_att: f64,
    pub delta: BTreeMap<ChannelId, Vec<f64>>,
    pub channels: Vec<ChannelId>,
    pub q: Vec<f64>,
    pub alpha: f64,
}

impl Default for WeightSet {
    /// Untrained spatial-plus-attention model with unit weights.
    fn default() -> Self {
        let mut delta = BTreeMap::new();
        delta.insert(ChannelId::Spatial, vec![1.0; SPATIAL_DIM]);
        delta.insert(ChannelId::Attention, vec![0.0; ATTENTION_DIM]);
        Self {
            w_s: vec![1.0; SPATIAL_DIM],
            w_ac: Vec::new(),
            w_ap: Vec::new(),
            c_att: 1.0,
            delta,
            channels: vec![ChannelId::Spatial, ChannelId::Attention],
            q: vec![1.0, 1.0],
            alpha: 0.85,
        }
    }
}

impl WeightSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.q.len() != self.channels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.channels.len(),
                got: self.q.len(),
            });
        }
        if self.q.iter().any(|x| !x.is_finite()) || !self.c_att.is_finite() {
            return Err(Error::InvalidConfig("weights must be finite".into()));
        }
        if self.w_s.len() != SPATIAL_DIM {
            return Err(Error::DimensionMismatch {
                expected: SPATIAL_DIM,
                got: self.w_s.len(),
            });
        }
        let mut sorted = self.channels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != self.channels || self.channels.contains(&ChannelId::Fused) {
            return Err(Error::InvalidConfig(
                "channels must be distinct feature channels in canonical order".into(),
            ));
        }
        Ok(())
    }

    /// Pairwise weight vector for a learned-message channel.
    pub fn pairwise_weights(&self, channel: ChannelId) -> Option<&[f64]> {
        match channel {
            ChannelId::Spatial => Some(&self.w_s),
            ChannelId::Action => Some(&self.w_ac),
            ChannelId::Appearance => Some(&self.w_ap),
            _ => None,
        }
    }

    pub fn pairwise_weights_mut(&mut self, channel: ChannelId) -> Option<&mut Vec<f64>> {
        match channel {
            ChannelId::Spatial => Some(&mut self.w_s),
            ChannelId::Action => Some(&mut self.w_ac),
            ChannelId::Appearance => Some(&mut self.w_ap),
            _ => None,
        }
    }

    pub fn delta(&self, channel: ChannelId) -> Option<&[f64]> {
        self.delta.get(&channel).map(Vec::as_slice)
    }

    /// Fusion weight of a channel, if the model knows it.
    pub fn q_for(&self, channel: ChannelId) -> Option<f64> {
        self.channels
            .iter()
            .position(|&c| c == channel)
            .map(|k| self.q[k])
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let w: WeightSet = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        w.validate()?;
        Ok(w)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
