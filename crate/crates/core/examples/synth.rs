//! Synthetic scenes with a planted important person, and how visible the
//! plant is to simple heuristics as its strength varies.
//!
//! Run with `cargo run --example synth`.

use personrank::eval::{baseline_max_scale, baseline_most_center};
use personrank::synth::{generate_dataset, generate_scene, Scenario, SynthSpec};
use personrank::ChannelId;

fn main() -> personrank::Result<()> {
    let one = generate_scene(&SynthSpec {
        n_persons: 4,
        channels: vec![ChannelId::Spatial, ChannelId::Attention, ChannelId::Action],
        embedding_dim: 2,
        ..SynthSpec::default()
    })?;
    println!("{}", serde_json::to_string_pretty(&one)?);

    for scenario in [Scenario::Hub, Scenario::LocalConsensus] {
        println!("\n{scenario:?}");
        for strength in [0.0, 0.4, 0.8, 1.0] {
            let spec = SynthSpec {
                hub_strength: strength,
                scenario,
                seed: 7,
                ..SynthSpec::default()
            };
            let scenes = generate_dataset(&spec, 200, (4, 12))?;
            let hit = |f: fn(&personrank::Scene) -> usize| {
                let n = scenes.iter().filter(|s| s.gt_index() == Some(f(s))).count();
                n as f64 / scenes.len() as f64
            };
            println!(
                "  strength {strength:.1}: most-center {:.2}, max-scale {:.2}",
                hit(baseline_most_center),
                hit(baseline_max_scale)
            );
        }
    }
    Ok(())
}
