use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use personrank::eval::{evaluate_prepared, EvalConfig};
use personrank::graph::build_hybrid;
use personrank::rank::{channel_graphs, scene_channels};
use personrank::synth::{generate_dataset, Scenario, SynthSpec};
use personrank::trainer::{split_validation, tune_validation, TrainConfig};
use personrank::{
    prepare_scenes, rank_scene, read_scenes, write_scenes, ChannelId, FeatureConfig, RankConfig,
    Result, SelectBy, WeightSet,
};

#[derive(Parser)]
#[command(name = "personrank", version, about = "Rank the people in a scene by importance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic scenes with a planted important person.
    Synth(SynthArgs),
    /// Learn a weight set from annotated scenes.
    Train(TrainArgs),
    /// Rank the persons of every scene.
    Rank(RankArgs),
    /// Score rankings against ground truth, with baselines.
    Eval(EvalArgs),
}

#[derive(Args)]
struct FeatureArgs {
    /// Side of the density window as a fraction of image width.
    #[arg(long, default_value_t = 0.1)]
    density_window_fraction: f64,
    /// Skip per-scene feature standardization.
    #[arg(long)]
    no_standardize: bool,
}

impl FeatureArgs {
    fn config(&self) -> FeatureConfig {
        FeatureConfig {
            density_window_fraction: self.density_window_fraction,
            standardize: !self.no_standardize,
            ..FeatureConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Damping factor; defaults to the one stored with the weights.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// `fused-solve` or `R`.
    #[arg(long, default_value = "fused-solve")]
    select_by: SelectBy,
    /// Zero the region-to-person block.
    #[arg(long)]
    no_hyper: bool,
}

impl SolveArgs {
    fn config(&self, weights: &WeightSet) -> RankConfig {
        let mut cfg = RankConfig {
            select_by: self.select_by,
            use_hyper: !self.no_hyper,
            ..RankConfig::default()
        };
        cfg.solve.alpha = self.alpha.unwrap_or(weights.alpha);
        cfg.solve.tol = self.tol;
        cfg.solve.max_iter = self.max_iter;
        cfg
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Persons per scene (lower bound when --n-max is given).
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = 100)]
    scenes: usize,
    #[arg(long, default_value_t = 0.8)]
    hub_strength: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    embedding_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    attention_c: f64,
    /// `hub` or `local-consensus`.
    #[arg(long, default_value = "hub")]
    scenario: Scenario,
    /// Comma-separated channels to populate.
    #[arg(long, value_delimiter = ',', default_values = ["spatial", "action", "attention"])]
    channels: Vec<ChannelId>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    /// Validation scenes; without it the last 20% of --train is held out.
    #[arg(long)]
    val: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    /// Write the grid-search report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write every hybrid matrix to this directory.
    #[arg(long)]
    dump_graphs: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    features: FeatureArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    scenes: PathBuf,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// JSON report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    cmc_csv: Option<PathBuf>,
    #[arg(long)]
    no_baselines: bool,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    features: FeatureArgs,
}

fn load_weights(path: Option<&Path>) -> Result<WeightSet> {
    match path {
        Some(p) => WeightSet::read(p),
        None => Ok(WeightSet::default()),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        },
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_persons: a.n,
        hub_strength: a.hub_strength,
        channels: a.channels,
        seed: a.seed,
        embedding_dim: a.embedding_dim,
        attention_c: a.attention_c,
        scenario: a.scenario,
    };
    let scenes = generate_dataset(&spec, a.scenes, (a.n, a.n_max.unwrap_or(a.n)))?;
    write_scenes(&a.out, &scenes)
}

fn train(a: TrainArgs) -> Result<()> {
    let fcfg = a.features.config();
    let train = prepare_scenes(&read_scenes(&a.train)?, &fcfg)?;
    let (train, val) = match &a.val {
        Some(v) => (train, prepare_scenes(&read_scenes(v)?, &fcfg)?),
        None => split_validation(train, 0.2)?,
    };
    let mut cfg = TrainConfig {
        seed: a.seed,
        epochs: a.epochs,
        ..TrainConfig::default()
    };
    cfg.rank.solve.alpha = a.alpha;
    let (weights, report) = tune_validation(&train, &val, &cfg)?;
    weights.write(&a.out)?;
    if let Some(p) = &a.report {
        std::fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    eprintln!(
        "trained on {} scenes; validation top-1 {:.3} (c = {}, reg = {})",
        train.len(),
        report.chosen.val.top1,
        report.chosen.c_att,
        report.chosen.reg_lambda
    );
    Ok(())
}

fn rank(a: RankArgs) -> Result<()> {
    let weights = load_weights(a.weights.as_deref())?;
    let cfg = a.solve.config(&weights);
    let prepared = prepare_scenes(&read_scenes(&a.scenes)?, &a.features.config())?;
    if let Some(dir) = &a.dump_graphs {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = Vec::with_capacity(prepared.len());
    for p in &prepared {
        out.push(rank_scene(&p.scene, &p.bundles, &weights, &cfg)?);
        if let Some(dir) = &a.dump_graphs {
            for (c, _) in scene_channels(&p.bundles, &weights) {
                let (gp, gr) = channel_graphs(&p.scene, &p.bundles, c, &weights, cfg.use_hyper)?;
                let hybrid = build_hybrid(&gp, &gr)?;
                let file = dir.join(format!("{}_{c}.json", p.scene.id));
                std::fs::write(file, serde_json::to_string_pretty(&hybrid)? + "\n")?;
            }
        }
    }
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn eval(a: EvalArgs) -> Result<()> {
    let weights = load_weights(a.weights.as_deref())?;
    let cfg = EvalConfig {
        features: a.features.config(),
        rank: a.solve.config(&weights),
        baselines: !a.no_baselines,
    };
    let prepared = prepare_scenes(&read_scenes(&a.scenes)?, &cfg.features)?;
    let report = evaluate_prepared(&prepared, &weights, &cfg)?;
    if let Some(p) = &a.cmc_csv {
        std::fs::write(p, report.cmc.to_csv())?;
    }
    emit(a.report.as_deref(), &report.to_json()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Rank(a) => rank(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
