//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use personrank::eval::{average_precision, evaluate_prepared, EvalConfig, PredictionRecord};
use personrank::graph::{InteractionMatrix, MatrixKind};
use personrank::message::{msg_action, msg_appearance, msg_attention, msg_fused, msg_spatial};
use personrank::rank::{build_gbar, dominant_eigenvector, rank_scene, solve_channel, ScoreVector};
use personrank::synth::{
    generate_dataset, oracle_fixed_point, oracle_pagerank, RandomInstance, Scenario, SynthSpec,
};
use personrank::trainer::{
    fusion_violations, split_validation, train_fusion_q, train_linear, tune_validation, PairSample,
    TrainConfig,
};
use personrank::{prepare_scenes, ChannelId, FeatureConfig, PreparedScene, RankConfig, SolveConfig, WeightSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn matrices(inst: &RandomInstance) -> (InteractionMatrix, InteractionMatrix) {
    let gp = InteractionMatrix::from_rows(MatrixKind::Pairwise, ChannelId::Spatial, &inst.gp).unwrap();
    let gr = InteractionMatrix::from_rows(MatrixKind::Hyper, ChannelId::Spatial, &inst.gr).unwrap();
    (gp, gr)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

const ALPHAS: [f64; 3] = [0.3, 0.85, 1.0];
const INSTANCES: u64 = 1200;

fn instance(seed: u64) -> RandomInstance {
    let n = 1 + (seed % 20) as usize;
    let alpha = ALPHAS[(seed / 20 % 3) as usize];
    RandomInstance::generate(seed, n, alpha, seed.is_multiple_of(2))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..INSTANCES {
        let inst = instance(seed);
        let (gp, gr) = matrices(&inst);
        let got = solve_channel(&gp, &gr, &SolveConfig::with_alpha(inst.alpha)).unwrap();
        let want = oracle_fixed_point(&inst.gp, &inst.gr, inst.alpha).unwrap();
        worst = worst.max(linf(&got.scores, &want));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("{INSTANCES} instances, max L-inf {worst:.2e}, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..INSTANCES {
        let inst = instance(seed);
        let (gp, gr) = matrices(&inst);
        let cfg = SolveConfig::with_alpha(inst.alpha);
        let got = solve_channel(&gp, &gr, &cfg).unwrap();
        let (eig, _) = dominant_eigenvector(&build_gbar(&gp, &gr, &cfg).unwrap(), 1e-14, 1_000_000);
        worst = worst.max(linf(&got.scores, &eig));
    }
    outcome(worst <= 1e-8, format!("{INSTANCES} instances, max L-inf {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let alphas = [0.3, 0.5, 0.85, 0.95];
    for seed in 0..500u64 {
        let alpha = alphas[(seed % 4) as usize];
        let inst = RandomInstance::generate(seed, 1 + (seed % 20) as usize, alpha, false);
        let (gp, gr) = matrices(&inst);
        assert!(gr.is_zero());
        let got = solve_channel(&gp, &gr, &SolveConfig::with_alpha(alpha)).unwrap();
        worst = worst.max(linf(&got.scores, &oracle_pagerank(&inst.gp, alpha)));
    }
    outcome(worst <= 1e-8, format!("500 graphs, max L-inf {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let e = std::f64::consts::E;
    let mut unit_w = vec![0.0; 7];
    unit_w[0] = 2.0;
    let mut step = vec![0.0; 7];
    step[0] = 1.0;
    let zeros = vec![0.0; 7];
    let cases: Vec<(&str, f64, f64)> = vec![
        ("spatial equal", msg_spatial(&zeros, &zeros, &[1.0; 7]).unwrap(), 7.0),
        ("spatial zero weights", msg_spatial(&zeros, &step, &[0.0; 7]).unwrap(), 0.0),
        ("spatial 2e", msg_spatial(&zeros, &step, &unit_w).unwrap(), 2.0 * e),
        ("action equal", msg_action(&[0.3; 5], &[0.3; 5], &[1.0; 5]).unwrap(), 5.0),
        ("action zero weights", msg_action(&[0.0, 1.0], &[2.0, 3.0], &[0.0, 0.0]).unwrap(), 0.0),
        (
            "action ln2 ln3",
            msg_action(&[0.0, 0.0], &[2f64.ln(), 3f64.ln()], &[1.0, 1.0]).unwrap(),
            5.0,
        ),
        ("appearance equal", msg_appearance(&[1.0, 2.0], &[1.0, 2.0], &[1.0, 1.0]).unwrap(), 0.0),
        ("appearance", msg_appearance(&[1.0, 0.0], &[0.0, 0.5], &[1.0, 2.0]).unwrap(), 2.0),
        (
            "appearance swapped",
            msg_appearance(&[0.0, 0.5], &[1.0, 0.0], &[1.0, 2.0]).unwrap(),
            2.0,
        ),
        (
            "attention aligned",
            msg_attention(&[0.0, 0.0, 0.6, 0.8], &[3.0, 4.0, 0.0, 1.0], 1.0).unwrap(),
            1.0,
        ),
        (
            "attention antiparallel",
            msg_attention(&[0.0, 0.0, -0.6, -0.8], &[3.0, 4.0, 0.0, 1.0], 1.0).unwrap(),
            (-2.0f64).exp(),
        ),
        (
            "attention [3,4]",
            msg_attention(&[0.0, 0.0, 0.0, 1.0], &[3.0, 4.0, 0.0, 1.0], 1.0).unwrap(),
            (-0.2f64).exp(),
        ),
        ("fused equal", msg_fused(&[-1.0, -2.0], &[-1.0, -2.0], &[1.0, 1.0]).unwrap(), 0.0),
        (
            "fused ln8",
            msg_fused(&[0.0, 0.0], &[2f64.ln(), 4f64.ln()], &[1.0, 1.0]).unwrap(),
            8f64.ln(),
        ),
        (
            "fused swapped",
            msg_fused(&[2f64.ln(), 4f64.ln()], &[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            -(8f64.ln()),
        ),
    ];
    let failed: Vec<&str> = cases
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-10)
        .map(|(name, _, _)| *name)
        .collect();
    outcome(
        failed.is_empty(),
        format!("{} identities, failing: {failed:?}", cases.len()),
    )
}

fn criterion_5() -> Outcome {
    let spec = SynthSpec {
        channels: ChannelId::FEATURE_CHANNELS.to_vec(),
        seed: 5,
        ..Default::default()
    };
    let scenes = generate_dataset(&spec, 200, (1, 12)).unwrap();
    let mut weights = WeightSet::default();
    weights.channels = ChannelId::FEATURE_CHANNELS.to_vec();
    weights.q = vec![1.0, 0.5, 0.7, 1.2];
    weights.w_ac = vec![1.0; spec.embedding_dim];
    weights.w_ap = vec![0.5; spec.embedding_dim];
    weights.delta.insert(ChannelId::Action, vec![0.3; spec.embedding_dim]);
    weights.delta.insert(ChannelId::Appearance, vec![0.1; spec.embedding_dim]);
    weights.delta.insert(ChannelId::Attention, vec![0.2, 0.1, 0.0, 0.0]);
    let cfg = RankConfig::default();
    let fcfg = FeatureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut bad = 0;
    for s in &scenes {
        let n = s.persons.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let a = &prepare_scenes(std::slice::from_ref(s), &fcfg).unwrap()[0];
        let b = &prepare_scenes(&[s.permuted(&perm)], &fcfg).unwrap()[0];
        let ra = rank_scene(&a.scene, &a.bundles, &weights, &cfg).unwrap();
        let rb = rank_scene(&b.scene, &b.bundles, &weights, &cfg).unwrap();
        let same_channels = ra.channels.iter().zip(&rb.channels).all(|(x, y)| {
            perm.iter().enumerate().all(|(k, &old)| (y.scores[k] - x.scores[old]).abs() <= 1e-12)
        });
        let same_fused = perm
            .iter()
            .enumerate()
            .all(|(k, &old)| (rb.fused.scores[k] - ra.fused.scores[old]).abs() <= 1e-12);
        let untied = ra.fused.ranking.windows(2).all(|w| {
            (ra.fused.scores[w[0]] - ra.fused.scores[w[1]]).abs() > 1e-9
        });
        let same_ranking = !untied
            || rb.fused.ranking.iter().map(|&k| perm[k]).collect::<Vec<_>>() == ra.fused.ranking;
        if !(same_channels && same_fused && same_ranking) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("200 scenes, {bad} not equivariant"))
}

struct Trained {
    weights: WeightSet,
    eval_set: Vec<PreparedScene>,
    train_time: Duration,
}

fn hub_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        hub_strength: 0.8,
        seed,
        ..Default::default()
    }
}

fn train_hub_model() -> Trained {
    let start = Instant::now();
    let fcfg = FeatureConfig::default();
    let train = prepare_scenes(&generate_dataset(&hub_spec(1), 300, (4, 12)).unwrap(), &fcfg).unwrap();
    let (train, val) = split_validation(train, 0.2).unwrap();
    let (weights, _) = tune_validation(&train, &val, &TrainConfig::default()).unwrap();
    let eval_set = prepare_scenes(&generate_dataset(&hub_spec(2), 200, (4, 12)).unwrap(), &fcfg).unwrap();
    Trained {
        weights,
        eval_set,
        train_time: start.elapsed(),
    }
}

fn criterion_6(t: &Trained) -> Outcome {
    let start = Instant::now();
    let report = evaluate_prepared(&t.eval_set, &t.weights, &EvalConfig::default()).unwrap();
    let elapsed = t.train_time + start.elapsed();
    let pr = report.personrank.map.mean_ap;
    let base: Vec<(String, f64)> = report
        .baselines
        .iter()
        .map(|b| (b.name.clone(), b.map.mean_ap))
        .collect();
    let pass = report.personrank.top1 >= 0.95
        && base.iter().all(|(_, m)| pr > *m)
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "top-1 {:.3}, mAP {:.4} vs {base:?}, {elapsed:.2?}",
            report.personrank.top1, pr
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = SynthSpec {
        scenario: Scenario::LocalConsensus,
        channels: vec![ChannelId::Spatial, ChannelId::Action],
        hub_strength: 0.8,
        seed: 7,
        ..Default::default()
    };
    let scenes = prepare_scenes(&generate_dataset(&spec, 200, (5, 12)).unwrap(), &FeatureConfig::default()).unwrap();
    let d = spec.embedding_dim;
    let mut weights = WeightSet::default();
    weights.channels = vec![ChannelId::Action];
    weights.q = vec![1.0];
    weights.w_ac = vec![1.0; d];
    weights.delta.insert(ChannelId::Action, vec![1.0; d]);
    let top1 = |use_hyper: bool| {
        let cfg = RankConfig {
            use_hyper,
            ..Default::default()
        };
        let hits = scenes
            .iter()
            .filter(|p| {
                rank_scene(&p.scene, &p.bundles, &weights, &cfg).unwrap().predicted_index
                    == p.gt_index().unwrap()
            })
            .count();
        hits as f64 / scenes.len() as f64
    };
    let (full, pairwise) = (top1(true), top1(false));
    outcome(
        full - pairwise >= 0.05,
        format!("top-1 full {full:.3} vs pairwise-only {pairwise:.3}"),
    )
}

fn criterion_8(t: &Trained) -> Outcome {
    let mut accs = Vec::new();
    for k in 1..=20 {
        let alpha = 0.05 * k as f64;
        let mut cfg = RankConfig::default();
        cfg.solve.alpha = alpha;
        let hits = t
            .eval_set
            .iter()
            .filter(|p| {
                rank_scene(&p.scene, &p.bundles, &t.weights, &cfg).unwrap().predicted_index
                    == p.gt_index().unwrap()
            })
            .count();
        accs.push(hits as f64 / t.eval_set.len() as f64);
    }
    let lo = accs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = accs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        hi - lo <= 0.02 + 1e-12,
        format!("top-1 over alpha 0.05..1.0 in [{lo:.3}, {hi:.3}]"),
    )
}

fn criterion_9(t: &Trained) -> Outcome {
    let rec = |id: &str, score: f64, correct: bool| PredictionRecord {
        scene_id: id.into(),
        predicted_index: 0,
        predicted_score: score,
        gt_index: Some(usize::from(!correct)),
        category: None,
    };
    let hand = vec![
        rec("a", 0.9, true),
        rec("b", 0.7, false),
        rec("c", 0.5, true),
        rec("d", 0.3, false),
    ];
    let ap = average_precision(&hand, personrank::eval::DEFAULT_CATEGORY).unwrap();
    let ap_ok = (ap - 0.8333).abs() < 1e-4;

    let cfg = EvalConfig::default();
    let a = evaluate_prepared(&t.eval_set, &t.weights, &cfg).unwrap();
    let b = evaluate_prepared(&t.eval_set, &t.weights, &cfg).unwrap();
    let v = &a.cmc.values;
    let cmc_ok = v.windows(2).all(|w| w[0] <= w[1]) && v.last() == Some(&1.0);
    let bytes_ok = a.to_json().unwrap() == b.to_json().unwrap();
    outcome(
        ap_ok && cmc_ok && bytes_ok,
        format!("AP {ap:.4}, CMC monotone and ends at 1: {cmc_ok}, deterministic: {bytes_ok}"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let dim = 6;
    let w_true: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut draw = |label: i8| loop {
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let m: f64 = x.iter().zip(&w_true).map(|(a, b)| a * b).sum();
        if m * label as f64 > 0.2 {
            return PairSample::new(x, label);
        }
    };
    let train: Vec<PairSample> = (0..2000).map(|k| draw(if k % 2 == 0 { 1 } else { -1 })).collect();
    let pos: Vec<PairSample> = (0..500).map(|_| draw(1)).collect();
    let neg: Vec<PairSample> = (0..500).map(|_| draw(-1)).collect();
    let fit = train_linear(&train, 1e-3, 20, 0);
    let score = |x: &[f64]| -> f64 { x.iter().zip(&fit.w).map(|(a, b)| a * b).sum() };
    let ordered = pos.iter().zip(&neg).filter(|(p, n)| score(&p.x) > score(&n.x)).count();
    let rate = ordered as f64 / pos.len() as f64;

    // fusion: channel 0 always ranks the important person first, channel 1 is noise
    let scenes = prepare_scenes(&generate_dataset(&hub_spec(11), 60, (3, 10)).unwrap(), &FeatureConfig::default()).unwrap();
    let per_channel: Vec<Vec<ScoreVector>> = scenes
        .iter()
        .map(|p| {
            let n = p.bundles.len();
            let star = p.gt_index().unwrap();
            let mut informative: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.0)).collect();
            informative[star] = 2.0;
            let noise: Vec<f64> = (0..n).map(|_| rng.random_range(0.8..1.25)).collect();
            [informative, noise]
                .into_iter()
                .enumerate()
                .map(|(c, v)| {
                    let z: f64 = v.iter().sum();
                    ScoreVector::new(ChannelId::FEATURE_CHANNELS[c], v.iter().map(|x| x / z).collect(), 1)
                })
                .collect()
        })
        .collect();
    let q = train_fusion_q(&scenes, &per_channel, 1e-3, 50, 0).unwrap().w;
    let violations = fusion_violations(&scenes, &per_channel, &q).unwrap();
    outcome(
        rate >= 0.95 && violations == 0,
        format!("held-out pair ordering {rate:.3}, fusion violations {violations} (q = {q:.3?})"),
    )
}

fn main() -> ExitCode {
    let trained = train_hub_model();
    let results: Vec<(u8, &str, Outcome)> = vec![
        (1, "fixed-point oracle equivalence", criterion_1()),
        (2, "eigen/iteration consistency", criterion_2()),
        (3, "classical PageRank reduction", criterion_3()),
        (4, "message-function identities", criterion_4()),
        (5, "permutation equivariance", criterion_5()),
        (6, "synthetic end-to-end", criterion_6(&trained)),
        (7, "hyper-graph effect", criterion_7()),
        (8, "alpha insensitivity", criterion_8(&trained)),
        (9, "metric correctness", criterion_9(&trained)),
        (10, "trainer margin property", criterion_10()),
    ];
    let mut all = true;
    for (k, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {tag}: {name}: {}", o.detail);
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
