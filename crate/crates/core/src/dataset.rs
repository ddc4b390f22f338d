use crate::error::Result;
use crate::features::{active_channels, build_bundles, FeatureBundle, FeatureConfig};
use crate::message::ChannelId;
use crate::scene::{validate_scene, Scene};

/// A validated scene together with its feature bundles.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScene {
    pub scene: Scene,
    pub bundles: Vec<FeatureBundle>,
}

impl PreparedScene {
    pub fn new(scene: &Scene, cfg: &FeatureConfig) -> Result<Self> {
        let scene = validate_scene(scene)?;
        let bundles = build_bundles(&scene, cfg)?;
        Ok(Self { scene, bundles })
    }

    pub fn gt_index(&self) -> Option<usize> {
        self.scene.gt_index()
    }
}

pub fn prepare_scenes(scenes: &[Scene], cfg: &FeatureConfig) -> Result<Vec<PreparedScene>> {
    scenes.iter().map(|s| PreparedScene::new(s, cfg)).collect()
}

/// Channels active in every prepared scene, in canonical order.
pub fn common_channels(scenes: &[PreparedScene]) -> Vec<ChannelId> {
    ChannelId::FEATURE_CHANNELS
        .into_iter()
        .filter(|c| {
            !scenes.is_empty()
                && scenes
                    .iter()
                    .all(|s| active_channels(&s.bundles).contains(c))
        })
        .collect()
}
