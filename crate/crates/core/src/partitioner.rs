//! Embed → cluster → balance pipeline and the random / LDG baselines.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assignment::PartitionAssignment;
use crate::balancing::{balance_all, BalanceConfig};
use crate::clustering::{kmeans_assign, kmeans_fit, KMeansConfig};
use crate::embedding::{forward_embed, init_weights, EncoderConfig, EncoderWeights};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{EmbeddingMatrix, FeatureMatrix};
use crate::seed;
use crate::split::NodeSplit;

/// Where the per-vertex embeddings come from.
#[derive(Debug, Clone, Copy)]
pub enum EmbeddingSource<'a> {
    /// Run a freshly initialized encoder over these features.
    Features(&'a FeatureMatrix),
    /// Run previously stored encoder weights over these features.
    Encoder(&'a FeatureMatrix, &'a EncoderWeights),
    /// Use externally computed embeddings as-is.
    Embeddings(&'a EmbeddingMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub k: usize,
    pub encoder: EncoderConfig,
    pub kmeans: KMeansConfig,
    /// `None` skips balancing entirely.
    pub balance: Option<BalanceConfig>,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            encoder: EncoderConfig::default(),
            kmeans: KMeansConfig::default(),
            balance: Some(BalanceConfig::default()),
            seed,
        }
    }

    pub fn unbalanced(mut self) -> Self {
        self.balance = None;
        self
    }
}

/// Encoder weights the pipeline draws for `features` under `config`.
pub fn pipeline_weights(features: &FeatureMatrix, config: &PipelineConfig) -> Result<EncoderWeights> {
    init_weights(
        features.cols(),
        config.encoder.hidden_dim,
        config.encoder.num_layers,
        seed::derive(config.seed, "encoder"),
    )
}

/// Stage 1: per-vertex embeddings.
pub fn embed(graph: &Graph, source: EmbeddingSource<'_>, config: &PipelineConfig) -> Result<EmbeddingMatrix> {
    let n = graph.num_vertices();
    match source {
        EmbeddingSource::Features(features) => {
            let weights = pipeline_weights(features, config)?;
            forward_embed(graph, features, &weights)
        }
        EmbeddingSource::Encoder(features, weights) => forward_embed(graph, features, weights),
        EmbeddingSource::Embeddings(e) => {
            if e.rows() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} embedding rows for {n} vertices",
                    e.rows()
                )));
            }
            Ok(e.clone())
        }
    }
}

/// Stage 2: raw (possibly unbalanced) k-means partition.
pub fn cluster(embeddings: &EmbeddingMatrix, config: &PipelineConfig) -> Result<PartitionAssignment> {
    let centroids = kmeans_fit(
        embeddings,
        config.k,
        &config.kmeans,
        seed::derive(config.seed, "kmeans"),
    )?;
    kmeans_assign(embeddings, &centroids)
}

/// Stage 3: enforce the class balance constraints, or pass through when
/// balancing is disabled.
pub fn rebalance(
    graph: &Graph,
    assignment: &PartitionAssignment,
    split: &NodeSplit,
    config: &PipelineConfig,
) -> Result<PartitionAssignment> {
    match &config.balance {
        Some(balance) => balance_all(
            assignment,
            split,
            balance,
            &graph.degrees(),
            seed::derive(config.seed, "balance"),
        ),
        None => Ok(assignment.clone()),
    }
}

/// Full pipeline: embed, cluster, then balance.
pub fn partition(
    graph: &Graph,
    source: EmbeddingSource<'_>,
    split: &NodeSplit,
    config: &PipelineConfig,
) -> Result<PartitionAssignment> {
    let n = graph.num_vertices();
    if config.k == 0 || config.k > n {
        return Err(Error::InvalidArgument(format!(
            "k must be in [1, {n}], got {}",
            config.k
        )));
    }
    if split.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "split covers {} vertices, graph has {n}",
            split.len()
        )));
    }
    let embeddings = embed(graph, source, config)?;
    let raw = cluster(&embeddings, config)?;
    rebalance(graph, &raw, split, config)
}

/// Each vertex independently uniform over `[0, k)`.
pub fn random_partition(n: usize, k: usize, seed: u64) -> Result<PartitionAssignment> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    let parts = (0..n).map(|_| rng.random_range(0..k)).collect();
    Ok(PartitionAssignment::from_raw(parts, k))
}

/// Linear deterministic greedy streaming partitioner.
///
/// Vertices arrive in a seeded random order. Vertex `v` goes to the partition
/// maximizing `|N(v) ∩ P_i| · (1 - |P_i| / C)` with `C = slack · n / k`,
/// skipping partitions already at capacity. Ties go to the lower current load,
/// then the lower partition index.
pub fn ldg_partition(graph: &Graph, k: usize, slack: f64, seed: u64) -> Result<PartitionAssignment> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if !(slack >= 1.0 && slack.is_finite()) {
        return Err(Error::InvalidArgument(format!("slack must be >= 1, got {slack}")));
    }
    let n = graph.num_vertices();
    let capacity = slack * n as f64 / k as f64;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));

    const UNASSIGNED: usize = usize::MAX;
    let mut parts = vec![UNASSIGNED; n];
    let mut loads = vec![0usize; k];
    let mut affinity = vec![0usize; k];
    for v in order {
        affinity.iter_mut().for_each(|a| *a = 0);
        for &u in graph.neighbors(v) {
            if parts[u] != UNASSIGNED {
                affinity[parts[u]] += 1;
            }
        }
        let mut best: Option<(f64, usize)> = None;
        for i in 0..k {
            if loads[i] as f64 >= capacity {
                continue;
            }
            let score = affinity[i] as f64 * (1.0 - loads[i] as f64 / capacity);
            let better = match best {
                None => true,
                Some((s, j)) => score > s || (score == s && loads[i] < loads[j]),
            };
            if better {
                best = Some((score, i));
            }
        }
        let target = match best {
            Some((_, i)) => i,
            None => (0..k).min_by_key(|&i| (loads[i], i)).unwrap(),
        };
        parts[v] = target;
        loads[target] += 1;
    }
    Ok(PartitionAssignment::from_raw(parts, k))
}
