//! `genscope`: cluster benchmark instances, compare suites by cluster
//! coverage, and test whether coverage similarity predicts how well
//! performance models transfer between suites.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 internal error.

mod artifacts;
mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use genscope::{ForestConfig, KSelectionMethod, NormalizationScheme, TargetTransform};

use crate::artifacts::ArtifactSet;
use crate::config::{KSelectionConfig, PipelineConfig};

const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "genscope",
    version,
    about = "Benchmark-suite similarity and generalizability analysis"
)]
struct Cli {
    /// Master seed for clustering, forests, and selection runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; created if missing, written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster instances and compare suites by coverage (or ingest a coverage table).
    Similarity(SimilarityArgs),
    /// Cross-suite random-forest evaluation (mdae.csv), or single-cluster-suite evaluation (bs6_eval.csv).
    Evaluate(EvaluateArgs),
    /// Correlate similarity with model error per train suite (report.json).
    Report(ReportArgs),
    /// Generate a synthetic corpus (features.csv, performance.csv) from a JSON spec.
    Synth(SynthArgs),
    /// Build suites as greedy maximal independent sets of the instance similarity graph.
    MisSelect(MisSelectArgs),
    /// Run every stage from a config file; flags override config values.
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct KArgs {
    /// Use exactly this many clusters instead of searching.
    #[arg(long = "k", conflicts_with_all = ["k_min", "k_max"])]
    fixed_k: Option<usize>,
    /// Smallest k searched (default 2).
    #[arg(long)]
    k_min: Option<usize>,
    /// Largest k searched (default min(20, n / 5)).
    #[arg(long)]
    k_max: Option<usize>,
    /// `silhouette` (default) or `elbow-distortion`.
    #[arg(long = "k-method")]
    method: Option<KSelectionMethod>,
}

impl KArgs {
    fn apply(&self, mut base: KSelectionConfig) -> KSelectionConfig {
        if self.fixed_k.is_some() {
            base.fixed_k = self.fixed_k;
            base.k_min = None;
            base.k_max = None;
        }
        if self.k_min.is_some() || self.k_max.is_some() {
            base.fixed_k = None;
            base.k_min = self.k_min.or(base.k_min);
            base.k_max = self.k_max.or(base.k_max);
        }
        base.method = self.method.or(base.method);
        base
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct NormArgs {
    /// Cluster raw feature values.
    #[arg(long)]
    no_normalize: bool,
    /// `z-score` or `min-max`, fitted over every loaded suite.
    #[arg(long, default_value = "z-score")]
    normalization: NormalizationScheme,
}

impl NormArgs {
    fn scheme(&self) -> Option<NormalizationScheme> {
        (!self.no_normalize).then_some(self.normalization)
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct ForestArgs {
    /// Trees per forest (default 100).
    #[arg(long)]
    trees: Option<usize>,
    /// Depth limit per tree (default unlimited).
    #[arg(long)]
    max_depth: Option<usize>,
    /// Fewest training rows in a leaf (default 1).
    #[arg(long)]
    min_samples_leaf: Option<usize>,
    /// Fewest training rows a node needs to split (default 2).
    #[arg(long)]
    min_samples_split: Option<usize>,
    /// Fraction of features tried at each split, in (0, 1].
    #[arg(long)]
    split_fraction: Option<f64>,
    /// Fit every tree on the full training set.
    #[arg(long)]
    no_bootstrap: bool,
}

impl ForestArgs {
    fn apply(&self, mut base: ForestConfig) -> ForestConfig {
        if let Some(v) = self.trees {
            base.tree_count = v;
        }
        if self.max_depth.is_some() {
            base.max_depth = self.max_depth;
        }
        if let Some(v) = self.min_samples_leaf {
            base.min_samples_leaf = v;
        }
        if let Some(v) = self.min_samples_split {
            base.min_samples_split = v;
        }
        if let Some(v) = self.split_fraction {
            base.split_candidate_fraction = v;
        }
        if self.no_bootstrap {
            base.bootstrap = false;
        }
        base
    }
}

#[derive(Args, Debug)]
pub struct SimilarityArgs {
    /// `features.csv`: suite,instance_id,<feature>...
    #[arg(long, required_unless_present = "coverage", conflicts_with = "coverage")]
    features: Option<PathBuf>,
    /// Precomputed `coverage.csv` (suite,C1..Ck); skips clustering.
    #[arg(long)]
    coverage: Option<PathBuf>,
    /// Coverage rows summing to within this of 1 are rescaled (printed tables are rounded).
    #[arg(long, default_value_t = 0.02)]
    coverage_tolerance: f64,
    #[command(flatten)]
    k: KArgs,
    #[command(flatten)]
    normalization: NormArgs,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// `features.csv`: suite,instance_id,<feature>...
    #[arg(long)]
    features: PathBuf,
    /// `performance.csv`: suite,instance_id,algorithm,precision
    #[arg(long)]
    performance: PathBuf,
    /// Algorithm to model. mdae.csv takes one (required when the file has several);
    /// bs6_eval.csv takes any number and defaults to every algorithm in the file.
    #[arg(long)]
    algorithm: Vec<String>,
    /// `raw` or `log10-floored`.
    #[arg(long, default_value = "raw")]
    target_transform: TargetTransform,
    /// `clustering.json` from `similarity`; enables single-cluster-suite mode.
    #[arg(long, requires = "cluster_index")]
    clustering: Option<PathBuf>,
    /// Cluster whose instances form the new suite.
    #[arg(long)]
    cluster_index: Option<usize>,
    /// Label of the new suite.
    #[arg(long, default_value = "BS6")]
    cluster_label: String,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    normalization: NormArgs,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// `similarity.csv` from `similarity` or `pipeline`.
    #[arg(long)]
    similarity: PathBuf,
    /// `mdae.csv` from `evaluate` or `pipeline`.
    #[arg(long)]
    mdae: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Synthetic corpus spec (JSON). `--seed` overrides its seed.
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args, Debug)]
pub struct MisSelectArgs {
    /// `features.csv` holding the candidate instances.
    #[arg(long)]
    features: PathBuf,
    /// Optional `performance.csv` to carry over to the selected suites.
    #[arg(long)]
    performance: Option<PathBuf>,
    /// Instances with feature cosine similarity at or above this are joined by an edge.
    #[arg(long, default_value_t = 0.9)]
    threshold: f64,
    /// Suites to build; each run starts from a different seeded order.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Suites are labeled `<prefix>1`, `<prefix>2`, ...
    #[arg(long, default_value = "MIS")]
    prefix: String,
    #[command(flatten)]
    normalization: NormArgs,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// Pipeline config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// `features.csv`: suite,instance_id,<feature>...
    #[arg(long)]
    features: Option<PathBuf>,
    /// `performance.csv`: suite,instance_id,algorithm,precision
    #[arg(long)]
    performance: Option<PathBuf>,
    /// Algorithm to model; required when the performance file has several.
    #[arg(long)]
    algorithm: Option<String>,
    /// `raw` or `log10-floored`.
    #[arg(long)]
    target_transform: Option<TargetTransform>,
    /// Cluster and model raw feature values.
    #[arg(long)]
    no_normalize: bool,
    /// `z-score` or `min-max`, fitted over every loaded suite.
    #[arg(long)]
    normalization: Option<NormalizationScheme>,
    #[command(flatten)]
    k: KArgs,
    #[command(flatten)]
    forest: ForestArgs,
}

fn pipeline_config(args: &PipelineArgs, cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(p) = &args.features {
        config.features = Some(p.clone());
    }
    if let Some(p) = &args.performance {
        config.performance = Some(p.clone());
    }
    if let Some(a) = &args.algorithm {
        config.algorithm = Some(a.clone());
    }
    if let Some(t) = args.target_transform {
        config.target_transform = t;
    }
    if args.no_normalize {
        config.normalize = false;
    }
    if let Some(s) = args.normalization {
        config.normalization_scheme = s;
    }
    config.k_selection = args.k.apply(config.k_selection);
    config.forest = args.forest.apply(config.forest);
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }
    Ok(config)
}

fn require_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref().context("pass --out <directory>")
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let seed = cli.seed.unwrap_or(0);
    let (set, out): (ArtifactSet, PathBuf) = match &cli.command {
        Command::Similarity(a) => (commands::similarity(a, seed)?, require_out(&cli.out)?.to_path_buf()),
        Command::Evaluate(a) => (commands::evaluate(a, seed)?, require_out(&cli.out)?.to_path_buf()),
        Command::Report(a) => (commands::report(a)?, require_out(&cli.out)?.to_path_buf()),
        Command::Synth(a) => (commands::synth(a, cli.seed)?, require_out(&cli.out)?.to_path_buf()),
        Command::MisSelect(a) => (commands::mis_select(a, seed)?, require_out(&cli.out)?.to_path_buf()),
        Command::Pipeline(a) => {
            let config = pipeline_config(a, cli)?;
            let set = commands::pipeline(&config)?;
            (set, config.output_dir.expect("validated"))
        }
    };
    for path in set.commit(&out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err
        .chain()
        .filter_map(|e| e.downcast_ref::<genscope::Error>())
        .any(genscope::Error::is_internal);
    if internal {
        EXIT_INTERNAL
    } else {
        EXIT_INPUT
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
        Err(_) => {
            eprintln!("error: internal failure (see panic message above)");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
