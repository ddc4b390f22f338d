//! Ranks the people of a scene given as JSON, channel by channel.
//!
//! Run with `cargo run --example rank_scene [scenes.json]`. Without an
//! argument a built-in three-person scene is used.

use personrank::scene::parse_scenes;
use personrank::{prepare_scenes, rank_scene, read_scenes, FeatureConfig, RankConfig, WeightSet};

const SCENE: &str = r#"[{
  "id": "meeting",
  "image_w": 1280, "image_h": 720,
  "persons": [
    {"id": "speaker",  "box": {"x": 560, "y": 180, "w": 150, "h": 190}, "yaw_deg": 180,
     "sharpness": 0.9, "detection_confidence": 0.98},
    {"id": "left",     "box": {"x": 150, "y": 260, "w": 80,  "h": 100}, "yaw_deg": 120,
     "sharpness": 0.5, "detection_confidence": 0.9},
    {"id": "right",    "box": {"x": 1020, "y": 250, "w": 85, "h": 105}, "yaw_deg": -125,
     "sharpness": 0.4, "detection_confidence": 0.85}
  ]
}]"#;

fn main() -> personrank::Result<()> {
    let scenes = match std::env::args().nth(1) {
        Some(path) => read_scenes(path)?,
        None => parse_scenes(SCENE)?,
    };
    let weights = WeightSet::default();
    for p in prepare_scenes(&scenes, &FeatureConfig::default())? {
        let r = rank_scene(&p.scene, &p.bundles, &weights, &RankConfig::default())?;
        println!("scene {}: most important is {}", r.scene_id, r.predicted_id);
        for sv in &r.channels {
            println!("  {:<10} {:?}", sv.channel.as_str(), fmt(&sv.scores));
        }
        println!("  {:<10} {:?}", "fused", fmt(&r.fused.scores));
        println!("  {:<10} {:?}", "product", fmt(&r.r_scores));
    }
    Ok(())
}

fn fmt(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3}")).collect()
}
