//! `clusterpart` command-line tool.
//!
//! Every command is a pure function of its flags and input files: all
//! randomness derives from `--seed`, and outputs do not depend on `--threads`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use clusterpart::balancing::BalanceConfig;
use clusterpart::clustering::KMeansConfig;
use clusterpart::embedding::{random_features, EncoderConfig, EncoderWeights};
use clusterpart::graph::sbm_generate;
use clusterpart::metrics::report;
use clusterpart::partitioner::{embed, ldg_partition, partition, random_partition, EmbeddingSource, PipelineConfig};
use clusterpart::reorder::ordering_from_partition;
use clusterpart::{seed, EmbeddingMatrix, FeatureMatrix, Graph, Matrix, NodeSplit, Ordering, PartitionAssignment};

#[derive(Parser)]
#[command(name = "clusterpart", version, about = "Graph partitioning by clustering vertex embeddings")]
struct Cli {
    /// Worker threads (default: available cores). Outputs are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute vertex embeddings with an untrained message-passing encoder.
    Embed(EmbedCmd),
    /// Partition a graph: embed, cluster, then balance per vertex class.
    Partition(PartitionCmd),
    /// Partition with a baseline method.
    Baseline(BaselineCmd),
    /// Relabel vertices so each partition occupies consecutive ids.
    Reorder(ReorderCmd),
    /// Evaluate an assignment (and optionally an ordering) as a JSON report.
    Metrics(MetricsCmd),
    /// Generate a stochastic block model graph with features and a split.
    Sbm(SbmCmd),
}

/// Features and encoder settings shared by every command that embeds.
#[derive(Args)]
struct EncoderArgs {
    /// Feature TSV, one row per vertex.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Use seeded uniform random features of this dimension instead of a file.
    #[arg(long, value_name = "D")]
    random_features: Option<usize>,
    /// Number of message-passing layers.
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Hidden (and output) dimension of the encoder.
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    /// Reuse encoder weights from a snapshot instead of drawing new ones.
    #[arg(long)]
    load_weights: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Number of partitions.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1.05)]
    beta_train: f64,
    #[arg(long, default_value_t = 1.05)]
    beta_val: f64,
    #[arg(long, default_value_t = 1.05)]
    beta_rest: f64,
    /// Fitting sample size per cluster.
    #[arg(long, default_value_t = 512)]
    sample_per_cluster: usize,
    /// Maximum Lloyd iterations.
    #[arg(long, default_value_t = 25)]
    max_iters: usize,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["features", "random_features"])))]
struct EmbedCmd {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    encoder: EncoderArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Embeddings TSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the encoder weights to this snapshot file.
    #[arg(long)]
    save_weights: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["embeddings", "features", "random_features"])))]
struct PartitionCmd {
    #[arg(long)]
    graph: PathBuf,
    /// Precomputed embeddings TSV; skips the encoder.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    encoder: EncoderArgs,
    #[command(flatten)]
    cluster: ClusterArgs,
    /// Split file ("vertex_id class"); unlisted vertices are rest.
    #[arg(long)]
    split: Option<PathBuf>,
    /// Keep the raw clustering without enforcing balance.
    #[arg(long)]
    no_balance: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assignment file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write a JSON metrics report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Random,
    Ldg,
}

#[derive(Args)]
struct BaselineCmd {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum)]
    method: Method,
    /// LDG capacity slack: each partition holds at most slack * n / k vertices.
    #[arg(long, default_value_t = 1.05)]
    slack: f64,
    /// Split file used for the per-class figures in the report.
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("input").required(true).args(["assignment", "embeddings", "features", "random_features"])))]
#[command(group(ArgGroup::new("outputs").required(true).multiple(true).args(["out_ordering", "out_graph", "report"])))]
struct ReorderCmd {
    #[arg(long)]
    graph: PathBuf,
    /// Existing assignment to lay out; skips partitioning.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[command(flatten)]
    encoder: EncoderArgs,
    /// Number of partitions (inferred from --assignment when omitted there).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1.05)]
    beta_train: f64,
    #[arg(long, default_value_t = 1.05)]
    beta_val: f64,
    #[arg(long, default_value_t = 1.05)]
    beta_rest: f64,
    #[arg(long, default_value_t = 512)]
    sample_per_cluster: usize,
    #[arg(long, default_value_t = 25)]
    max_iters: usize,
    /// Skip balancing before laying out partitions.
    #[arg(long)]
    unbalanced: bool,
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ordering file ("old_id new_id") to write.
    #[arg(long)]
    out_ordering: Option<PathBuf>,
    /// Relabeled edge list to write.
    #[arg(long)]
    out_graph: Option<PathBuf>,
    /// JSON report including the average graph bandwidth of the ordering.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsCmd {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    assignment: PathBuf,
    /// Partition count; inferred as max id + 1 when omitted.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    split: Option<PathBuf>,
    /// Ordering whose average graph bandwidth is added to the report.
    #[arg(long)]
    ordering: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SbmCmd {
    /// Comma-separated block sizes, e.g. "500,500".
    #[arg(long, value_delimiter = ',', required = true)]
    blocks: Vec<usize>,
    #[arg(long)]
    p_in: f64,
    #[arg(long)]
    p_out: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes PREFIX.edges, PREFIX.features.tsv and PREFIX.split.
    #[arg(long)]
    out_prefix: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain on one line, skipping causes already quoted by the
/// message above them.
fn one_line(e: &anyhow::Error) -> String {
    let mut message = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !message.ends_with(&text) {
            if !message.is_empty() {
                message.push_str(": ");
            }
            message.push_str(&text);
        }
    }
    message.replace('\n', " ")
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Embed(cmd) => cmd_embed(cmd),
        Command::Partition(cmd) => cmd_partition(cmd),
        Command::Baseline(cmd) => cmd_baseline(cmd),
        Command::Reorder(cmd) => cmd_reorder(cmd),
        Command::Metrics(cmd) => cmd_metrics(cmd),
        Command::Sbm(cmd) => cmd_sbm(cmd),
    }
}

fn cmd_embed(cmd: EmbedCmd) -> Result<()> {
    let graph = Graph::load_edge_list(&cmd.graph)?;
    let features = load_features(&cmd.encoder, graph.num_vertices(), cmd.seed)?;
    let config = pipeline_config(1, cmd.seed, &cmd.encoder);
    let weights = encoder_weights(&cmd.encoder, &features, &config)?;
    let embeddings = embed(&graph, EmbeddingSource::Encoder(&features, &weights), &config)?;
    embeddings.save_tsv(&cmd.out)?;
    if let Some(path) = &cmd.save_weights {
        weights.save(path)?;
    }
    Ok(())
}

fn cmd_partition(cmd: PartitionCmd) -> Result<()> {
    let graph = Graph::load_edge_list(&cmd.graph)?;
    let n = graph.num_vertices();
    let split = load_split(cmd.split.as_deref(), n)?;
    let mut config = pipeline_config(cmd.cluster.k, cmd.seed, &cmd.encoder);
    config.kmeans = kmeans_config(cmd.cluster.sample_per_cluster, cmd.cluster.max_iters);
    config.balance = if cmd.no_balance {
        None
    } else {
        Some(balance_config(cmd.cluster.beta_train, cmd.cluster.beta_val, cmd.cluster.beta_rest)?)
    };
    let assignment = run_pipeline(&graph, cmd.embeddings.as_deref(), &cmd.encoder, &split, &config)?;
    assignment.save(&cmd.out)?;
    if let Some(path) = &cmd.report {
        write_report(&graph, &assignment, &split, None, path)?;
    }
    Ok(())
}

fn cmd_baseline(cmd: BaselineCmd) -> Result<()> {
    let graph = Graph::load_edge_list(&cmd.graph)?;
    let n = graph.num_vertices();
    let split = load_split(cmd.split.as_deref(), n)?;
    let assignment = match cmd.method {
        Method::Random => random_partition(n, cmd.k, cmd.seed)?,
        Method::Ldg => ldg_partition(&graph, cmd.k, cmd.slack, cmd.seed)?,
    };
    assignment.save(&cmd.out)?;
    if let Some(path) = &cmd.report {
        write_report(&graph, &assignment, &split, None, path)?;
    }
    Ok(())
}

fn cmd_reorder(cmd: ReorderCmd) -> Result<()> {
    let graph = Graph::load_edge_list(&cmd.graph)?;
    let n = graph.num_vertices();
    let split = load_split(cmd.split.as_deref(), n)?;
    let assignment = match &cmd.assignment {
        Some(path) => PartitionAssignment::load(path, n, cmd.k)?,
        None => {
            let Some(k) = cmd.k else {
                bail!("--k is required unless --assignment is given");
            };
            let mut config = pipeline_config(k, cmd.seed, &cmd.encoder);
            config.kmeans = kmeans_config(cmd.sample_per_cluster, cmd.max_iters);
            config.balance = if cmd.unbalanced {
                None
            } else {
                Some(balance_config(cmd.beta_train, cmd.beta_val, cmd.beta_rest)?)
            };
            run_pipeline(&graph, cmd.embeddings.as_deref(), &cmd.encoder, &split, &config)?
        }
    };
    let ordering = ordering_from_partition(&assignment);
    if let Some(path) = &cmd.out_ordering {
        ordering.save(path)?;
    }
    if let Some(path) = &cmd.out_graph {
        graph.relabel(&ordering)?.save_edge_list(path)?;
    }
    if let Some(path) = &cmd.report {
        write_report(&graph, &assignment, &split, Some(&ordering), path)?;
    }
    Ok(())
}

fn cmd_metrics(cmd: MetricsCmd) -> Result<()> {
    let graph = Graph::load_edge_list(&cmd.graph)?;
    let n = graph.num_vertices();
    let assignment = PartitionAssignment::load(&cmd.assignment, n, cmd.k)?;
    let split = load_split(cmd.split.as_deref(), n)?;
    let ordering = cmd.ordering.as_ref().map(|p| Ordering::load(p, n)).transpose()?;
    let json = report(&graph, &assignment, &split, ordering.as_ref())?.to_json();
    match &cmd.out {
        Some(path) => write_text(path, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn cmd_sbm(cmd: SbmCmd) -> Result<()> {
    let (graph, features, split) = sbm_generate(&cmd.blocks, cmd.p_in, cmd.p_out, cmd.seed)?;
    let prefix = cmd.out_prefix.as_os_str().to_string_lossy().into_owned();
    graph.save_edge_list(format!("{prefix}.edges"))?;
    features.save_tsv(format!("{prefix}.features.tsv"))?;
    split.save(format!("{prefix}.split"))?;
    Ok(())
}

fn pipeline_config(k: usize, seed: u64, encoder: &EncoderArgs) -> PipelineConfig {
    let mut config = PipelineConfig::new(k, seed);
    config.encoder = EncoderConfig {
        hidden_dim: encoder.hidden,
        num_layers: encoder.layers,
    };
    config
}

fn kmeans_config(sample_per_cluster: usize, max_iters: usize) -> KMeansConfig {
    KMeansConfig {
        sample_per_cluster,
        max_iters,
        ..KMeansConfig::default()
    }
}

fn balance_config(beta_train: f64, beta_val: f64, beta_rest: f64) -> Result<BalanceConfig> {
    let config = BalanceConfig {
        beta_train,
        beta_val,
        beta_rest,
    };
    config.validate()?;
    Ok(config)
}

fn load_features(args: &EncoderArgs, n: usize, run_seed: u64) -> Result<FeatureMatrix> {
    match (&args.features, args.random_features) {
        (Some(path), _) => Ok(Matrix::load_tsv(path, n)?),
        (None, Some(dim)) => {
            if dim == 0 {
                bail!("--random-features must be at least 1");
            }
            Ok(random_features(n, dim, seed::derive(run_seed, "features")))
        }
        (None, None) => bail!("one of --features or --random-features is required"),
    }
}

fn encoder_weights(args: &EncoderArgs, features: &FeatureMatrix, config: &PipelineConfig) -> Result<EncoderWeights> {
    match &args.load_weights {
        Some(path) => Ok(EncoderWeights::load(path)?),
        None => Ok(clusterpart::partitioner::pipeline_weights(features, config)?),
    }
}

fn run_pipeline(
    graph: &Graph,
    embeddings: Option<&Path>,
    encoder: &EncoderArgs,
    split: &NodeSplit,
    config: &PipelineConfig,
) -> Result<PartitionAssignment> {
    let n = graph.num_vertices();
    if let Some(path) = embeddings {
        let e: EmbeddingMatrix = Matrix::load_tsv(path, n)?;
        return Ok(partition(graph, EmbeddingSource::Embeddings(&e), split, config)?);
    }
    let features = load_features(encoder, n, config.seed)?;
    let weights = encoder_weights(encoder, &features, config)?;
    Ok(partition(graph, EmbeddingSource::Encoder(&features, &weights), split, config)?)
}

fn load_split(path: Option<&Path>, n: usize) -> Result<NodeSplit> {
    Ok(match path {
        Some(p) => NodeSplit::load(p, n)?,
        None => NodeSplit::all_rest(n),
    })
}

fn write_report(
    graph: &Graph,
    assignment: &PartitionAssignment,
    split: &NodeSplit,
    ordering: Option<&Ordering>,
    path: &Path,
) -> Result<()> {
    write_text(path, &report(graph, assignment, split, ordering)?.to_json())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))
}
