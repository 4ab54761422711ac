//! Command-line front end: per-node PPR row dumps, core decomposition,
//! row-cache precomputation, training, evaluation, and synthetic dataset
//! generation.
//!
//! Exit codes: 0 on success, 1 on any pipeline error (bad files, numeric
//! failures), 2 on usage errors (unknown or conflicting flags).

mod config;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use coreppr::dataset::{self, Dataset, SbmParams};
use coreppr::diffusion::{DiffusionConfig, InferenceMode, LMode};
use coreppr::graph::Graph;
use coreppr::kcore::CoreScores;
use coreppr::neural;
use coreppr::ppr::{push_appr, PprParams};
use coreppr::trainer::{self, TrainConfig};

use config::{pick, FlatConfig};

const DEFAULT_ALPHA: f64 = 0.25;
const DEFAULT_EPSILON: f64 = 1e-4;
const DEFAULT_TOPL: usize = 32;
const DEFAULT_POWER_ITERS: usize = 50;

#[derive(Parser)]
#[command(
    name = "coreppr",
    version,
    about = "Sparse PPR propagation with CoreRank reweighting for node classification"
)]
struct Cli {
    /// Flat key=value config file; explicit flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel sections [default: hardware count]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump push-approximated PPR rows for the listed source nodes
    Ppr(PprArgs),
    /// Print core number and CoreRank of every node
    Corerank(CorerankArgs),
    /// Build propagation rows and write them to a binary cache
    Precompute(PrecomputeArgs),
    /// Train a model; writes report.json and model.bin
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test split
    Eval(EvalArgs),
    /// Generate a stochastic block model dataset bundle
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct PprArgs {
    /// Edge-list file (lines "u v", '#' comments)
    #[arg(long)]
    graph: PathBuf,
    /// Source node id; repeat or comma-separate for several
    #[arg(long, value_delimiter = ',', required = true)]
    source: Vec<u32>,
    /// Restart probability in (0, 1] [default: 0.25]
    #[arg(long)]
    alpha: Option<f64>,
    /// Forward-push precision [default: 1e-4]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write rows here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CorerankArgs {
    /// Edge-list file
    #[arg(long)]
    graph: PathBuf,
    /// Write lines here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct DiffusionArgs {
    /// Restart probability in (0, 1] [default: 0.25]
    #[arg(long)]
    alpha: Option<f64>,
    /// Forward-push precision [default: 1e-4]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Keep the top-L scores of every row [default: 32]
    #[arg(long, conflicts_with = "dynamic_l")]
    topl: Option<usize>,
    /// Pick each node's neighbor count at the elbow of its score curve
    #[arg(long)]
    dynamic_l: bool,
    /// Power-iteration sweeps for OT inference [default: 50]
    #[arg(long)]
    power_iters: Option<usize>,
}

#[derive(Args, Clone)]
struct PrecomputeArgs {
    /// Edge-list file
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    diffusion: DiffusionArgs,
    /// Comma-separated source ids [default: all nodes]
    #[arg(long, value_delimiter = ',')]
    sources: Option<Vec<u32>>,
    /// Cache file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Gated rows during training only; inference power-iterates logits
    Ot,
    /// Gated rows during training and inference
    Tt,
}

impl From<ModeArg> for InferenceMode {
    fn from(m: ModeArg) -> InferenceMode {
        match m {
            ModeArg::Ot => InferenceMode::Ot,
            ModeArg::Tt => InferenceMode::Tt,
        }
    }
}

#[derive(Args, Clone)]
struct TrainArgs {
    /// Edge-list file
    #[arg(long)]
    graph: PathBuf,
    /// Feature matrix, CPPRF1 binary or headerless CSV
    #[arg(long)]
    features: PathBuf,
    /// Label file, lines "node<TAB>class"
    #[arg(long)]
    labels: PathBuf,
    /// Split file with [train]/[val]/[test] sections, or a directory
    /// holding train.txt, val.txt, test.txt
    #[arg(long)]
    splits: PathBuf,
    #[command(flatten)]
    diffusion: DiffusionArgs,
    /// Inference mode [default: ot]
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Training epochs [default: 200]
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size [default: 512]
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate [default: 0.005]
    #[arg(long)]
    lr: Option<f64>,
    /// Seed feeding all randomness (init, shuffling) [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Hidden layer widths, comma separated [default: 32]
    #[arg(long)]
    hidden: Option<String>,
    /// Early-stop patience in epochs [default: 20]
    #[arg(long)]
    patience: Option<usize>,
    /// Pin the gate at gamma = 0 (pure-PPR baseline)
    #[arg(long)]
    frozen_gamma0: bool,
    /// Output directory for report.json and model.bin
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct EvalArgs {
    /// Edge-list file
    #[arg(long)]
    graph: PathBuf,
    /// Feature matrix, CPPRF1 binary or headerless CSV
    #[arg(long)]
    features: PathBuf,
    /// Label file, lines "node<TAB>class"
    #[arg(long)]
    labels: PathBuf,
    /// Split file or directory
    #[arg(long)]
    splits: PathBuf,
    /// Model checkpoint written by train
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    diffusion: DiffusionArgs,
    /// Inference mode [default: ot]
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Write the result JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SynthArgs {
    /// Node count
    #[arg(long)]
    n: usize,
    /// Planted block count [default: 5]
    #[arg(long)]
    blocks: Option<usize>,
    /// Within-block edge probability [default: 0.05]
    #[arg(long)]
    p_in: Option<f64>,
    /// Cross-block edge probability [default: 0.002]
    #[arg(long)]
    p_out: Option<f64>,
    /// Gaussian feature-noise scale [default: 0.5]
    #[arg(long)]
    noise: Option<f64>,
    /// Generator seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for graph.txt, features.bin, labels.tsv, splits.txt
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg = match &cli.config {
        Some(path) => FlatConfig::load(path)?,
        None => FlatConfig::empty(),
    };
    let threads = pick(cli.threads, file_cfg.get("threads")?, 0);
    // num_threads(0) lets rayon fall back to the hardware count.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();

    match cli.command {
        Command::Ppr(args) => cmd_ppr(args, &file_cfg),
        Command::Corerank(args) => cmd_corerank(args),
        Command::Precompute(args) => cmd_precompute(args, &file_cfg),
        Command::Train(args) => cmd_train(args, &file_cfg),
        Command::Eval(args) => cmd_eval(args, &file_cfg),
        Command::Synth(args) => cmd_synth(args, &file_cfg),
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("opening graph {}", path.display()))?;
    Graph::load_edge_list(BufReader::new(file))
        .with_context(|| format!("parsing graph {}", path.display()))
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file =
                File::create(p).with_context(|| format!("creating output {}", p.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn resolve_ppr_params(
    alpha: Option<f64>,
    epsilon: Option<f64>,
    cfg: &FlatConfig,
) -> Result<PprParams> {
    let alpha = pick(alpha, cfg.get("alpha")?, DEFAULT_ALPHA);
    let epsilon = pick(epsilon, cfg.get("epsilon")?, DEFAULT_EPSILON);
    Ok(PprParams::new(alpha, epsilon)?)
}

fn resolve_diffusion(
    args: &DiffusionArgs,
    mode: InferenceMode,
    cfg: &FlatConfig,
) -> Result<DiffusionConfig> {
    let ppr = resolve_ppr_params(args.alpha, args.epsilon, cfg)?;
    let l_mode = if args.dynamic_l {
        LMode::Dynamic
    } else if let Some(l) = args.topl {
        LMode::Fixed(l)
    } else if cfg.get("dynamic_l")?.unwrap_or(false) {
        LMode::Dynamic
    } else {
        LMode::Fixed(pick(None, cfg.get("topl")?, DEFAULT_TOPL))
    };
    let power_iters = pick(args.power_iters, cfg.get("power_iters")?, DEFAULT_POWER_ITERS);
    Ok(DiffusionConfig::new(ppr, l_mode, mode, power_iters)?)
}

fn resolve_mode(flag: Option<ModeArg>, cfg: &FlatConfig) -> Result<InferenceMode> {
    if let Some(m) = flag {
        return Ok(m.into());
    }
    match cfg.get_raw("mode") {
        None => Ok(InferenceMode::Ot),
        Some("ot") => Ok(InferenceMode::Ot),
        Some("tt") => Ok(InferenceMode::Tt),
        Some(other) => bail!("config key mode={other:?}: expected ot or tt"),
    }
}

fn parse_hidden(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("bad hidden width {tok:?}"))
        })
        .collect()
}

fn load_dataset(
    g: &Graph,
    features: &Path,
    labels: &Path,
    splits: &Path,
) -> Result<Dataset> {
    let features = dataset::load_features(features)?;
    let (labels, n_classes) = dataset::load_labels(labels)?;
    if features.n() != g.n() {
        bail!(
            "feature matrix has {} rows but the graph has {} nodes",
            features.n(),
            g.n()
        );
    }
    if labels.len() != g.n() {
        bail!(
            "label file covers {} nodes but the graph has {}",
            labels.len(),
            g.n()
        );
    }
    let (train, val, test) = dataset::load_splits(splits)?;
    let ds = Dataset {
        features,
        labels,
        n_classes,
        train,
        val,
        test,
    };
    ds.validate()?;
    Ok(ds)
}

fn cmd_ppr(args: PprArgs, cfg: &FlatConfig) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let params = resolve_ppr_params(args.alpha, args.epsilon, cfg)?;
    let mut w = out_writer(args.out.as_deref())?;
    for &source in &args.source {
        let row = push_appr(&g, source, &params)?;
        for &(node, score) in row.entries() {
            // 17 significant digits round-trip f64 exactly.
            writeln!(w, "{source}\t{node}\t{score:.16e}")?;
        }
    }
    Ok(())
}

fn cmd_corerank(args: CorerankArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let scores = CoreScores::compute(&g);
    let mut w = out_writer(args.out.as_deref())?;
    for u in 0..g.n() {
        writeln!(w, "{u} {} {}", scores.core_number[u], scores.corerank[u])?;
    }
    Ok(())
}

fn cmd_precompute(args: PrecomputeArgs, cfg: &FlatConfig) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let cores = CoreScores::compute(&g);
    let dcfg = resolve_diffusion(&args.diffusion, InferenceMode::Ot, cfg)?;
    let sources: Vec<u32> = match args.sources {
        Some(list) => list,
        None => (0..g.n() as u32).collect(),
    };
    let rows = trainer::precompute_rows(&g, &cores, &dcfg, &sources)?;
    let file = File::create(&args.out)
        .with_context(|| format!("creating cache {}", args.out.display()))?;
    coreppr::diffusion::write_row_cache(BufWriter::new(file), &rows)?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_train(args: TrainArgs, cfg: &FlatConfig) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let ds = load_dataset(&g, &args.features, &args.labels, &args.splits)?;
    let cores = CoreScores::compute(&g);

    let mode = resolve_mode(args.mode, cfg)?;
    let diffusion = resolve_diffusion(&args.diffusion, mode, cfg)?;
    let hidden_spec = args
        .hidden
        .or_else(|| cfg.get_raw("hidden").map(str::to_string))
        .unwrap_or_else(|| "32".to_string());

    let mut tcfg = TrainConfig::new(diffusion);
    tcfg.epochs = pick(args.epochs, cfg.get("epochs")?, tcfg.epochs);
    tcfg.batch_size = pick(args.batch_size, cfg.get("batch_size")?, tcfg.batch_size);
    tcfg.lr = pick(args.lr, cfg.get("lr")?, tcfg.lr);
    tcfg.seed = pick(args.seed, cfg.get("seed")?, tcfg.seed);
    tcfg.patience = pick(args.patience, cfg.get("patience")?, tcfg.patience);
    tcfg.hidden = parse_hidden(&hidden_spec)?;
    tcfg.freeze_gamma_zero =
        args.frozen_gamma0 || cfg.get("frozen_gamma0")?.unwrap_or(false);

    let (model, report) = trainer::train(&g, &cores, &ds, &tcfg)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output dir {}", args.out.display()))?;
    let report_path = args.out.join("report.json");
    let json = serde_json::to_string_pretty(&report)?;
    fs::write(&report_path, json)
        .with_context(|| format!("writing {}", report_path.display()))?;
    let model_path = args.out.join("model.bin");
    let file = File::create(&model_path)
        .with_context(|| format!("creating {}", model_path.display()))?;
    neural::save_checkpoint(BufWriter::new(file), &model)?;

    println!(
        "test accuracy {:.2}% | val {:.2}% | gamma {:.4} | mean_l {:.2} | report {}",
        report.accuracy_test,
        report.accuracy_val,
        report.gamma_final,
        report.mean_l,
        report_path.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs, cfg: &FlatConfig) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let ds = load_dataset(&g, &args.features, &args.labels, &args.splits)?;
    let cores = CoreScores::compute(&g);
    let mode = resolve_mode(args.mode, cfg)?;
    let dcfg = resolve_diffusion(&args.diffusion, mode, cfg)?;

    let file = File::open(&args.checkpoint)
        .with_context(|| format!("opening checkpoint {}", args.checkpoint.display()))?;
    let model = neural::load_checkpoint(BufReader::new(file))?;

    let (accuracy, seconds) = trainer::evaluate(&model, &g, &cores, &ds, mode, &dcfg)?;
    let result = serde_json::json!({
        "accuracy_test": accuracy,
        "time_infer_s": seconds,
        "mode": match mode { InferenceMode::Ot => "ot", InferenceMode::Tt => "tt" },
        "gamma": model.gamma(),
    });
    let mut w = out_writer(args.out.as_deref())?;
    writeln!(w, "{}", serde_json::to_string_pretty(&result)?)?;
    Ok(())
}

fn cmd_synth(args: SynthArgs, cfg: &FlatConfig) -> Result<()> {
    let params = SbmParams {
        n: args.n,
        blocks: pick(args.blocks, cfg.get("blocks")?, 5),
        p_in: pick(args.p_in, cfg.get("p_in")?, 0.05),
        p_out: pick(args.p_out, cfg.get("p_out")?, 0.002),
        feature_noise: pick(args.noise, cfg.get("noise")?, 0.5),
        seed: pick(args.seed, cfg.get("seed")?, 0),
    };
    let (g, ds) = dataset::generate_sbm(&params)?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output dir {}", args.out.display()))?;
    fs::write(args.out.join("graph.txt"), g.to_edge_list())?;
    let f = File::create(args.out.join("features.bin"))?;
    dataset::write_features_bin(BufWriter::new(f), &ds.features)?;
    let f = File::create(args.out.join("labels.tsv"))?;
    dataset::write_labels(BufWriter::new(f), &ds.labels)?;
    let f = File::create(args.out.join("splits.txt"))?;
    dataset::write_split_sections(BufWriter::new(f), &ds.train, &ds.val, &ds.test)?;

    println!(
        "wrote SBM bundle: n={} m={} blocks={} to {}",
        g.n(),
        g.m(),
        params.blocks,
        args.out.display()
    );
    Ok(())
}
