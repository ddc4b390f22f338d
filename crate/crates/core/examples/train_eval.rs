//! Trains a model on synthetic scenes, then evaluates it against the
//! position and size heuristics on a held-out set.
//!
//! Run with `cargo run --release --example train_eval`.

use personrank::eval::{evaluate_prepared, EvalConfig};
use personrank::synth::{generate_dataset, SynthSpec};
use personrank::trainer::{split_validation, tune_validation, TrainConfig};
use personrank::{prepare_scenes, ChannelId, FeatureConfig};

fn main() -> personrank::Result<()> {
    let spec = |seed| SynthSpec {
        seed,
        hub_strength: 0.7,
        channels: vec![ChannelId::Spatial, ChannelId::Attention, ChannelId::Action],
        ..SynthSpec::default()
    };
    let fcfg = FeatureConfig::default();
    let all = prepare_scenes(&generate_dataset(&spec(1), 200, (4, 12))?, &fcfg)?;
    let test = prepare_scenes(&generate_dataset(&spec(2), 150, (4, 12))?, &fcfg)?;

    let (train, val) = split_validation(all, 0.2)?;
    let (weights, report) = tune_validation(&train, &val, &TrainConfig::default())?;
    println!(
        "chose c = {}, reg = {}, hyper scales {:?}",
        report.chosen.c_att, report.chosen.reg_lambda, report.chosen.hyper_scale
    );
    for (c, q) in weights.channels.iter().zip(&weights.q) {
        println!("  q[{c}] = {q:.3}");
    }

    let eval = evaluate_prepared(&test, &weights, &EvalConfig::default())?;
    println!("\n{:<12} {:>6} {:>6}", "method", "top-1", "mAP");
    for m in std::iter::once(&eval.personrank).chain(&eval.baselines) {
        println!("{:<12} {:>6.3} {:>6.3}", m.name, m.top1, m.map.mean_ap);
    }
    print!("\nCMC\n{}", eval.cmc.to_csv());
    Ok(())
}
