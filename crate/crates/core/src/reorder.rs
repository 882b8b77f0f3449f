//! Vertex orderings derived from partitions.
//!
//! Vertices of the same partition receive consecutive ids, partitions laid
//! out in ascending id order. The unbalanced variant skips migration, which
//! keeps clusters intact at the cost of uneven block sizes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::assignment::PartitionAssignment;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::FeatureMatrix;
use crate::partitioner::{partition, EmbeddingSource, PipelineConfig};
use crate::split::NodeSplit;

/// Bijection from old vertex id to new vertex id over `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n || std::mem::replace(&mut seen[new], true) {
                return Err(Error::InvalidArgument(format!(
                    "not a permutation: vertex {old} maps to {new}"
                )));
            }
        }
        Ok(Self { perm })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn new_id(&self, old: usize) -> usize {
        self.perm[old]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (old, &new) in self.perm.iter().enumerate() {
            inv[new] = old;
        }
        Self { perm: inv }
    }

    /// Reads "old_id new_id" lines; every id in `[0, n)` must appear once on
    /// each side.
    pub fn load(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut perm = vec![usize::MAX; n];
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(path, lineno, "expected \"old_id new_id\""));
            };
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(path, lineno, format!("bad integer {t:?}")))
            };
            let (old, new) = (parse(a)?, parse(b)?);
            if old >= n || new >= n {
                return Err(Error::parse(path, lineno, format!("id out of range for {n} vertices")));
            }
            if perm[old] != usize::MAX {
                return Err(Error::parse(path, lineno, format!("vertex {old} listed twice")));
            }
            perm[old] = new;
        }
        if let Some(v) = perm.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidArgument(format!(
                "{}: vertex {v} missing from ordering",
                path.display()
            )));
        }
        Self::new(perm)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (old, new) in self.perm.iter().enumerate() {
            writeln!(out, "{old} {new}")?;
        }
        out.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// Order of vertices inside one partition block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WithinPartition {
    #[default]
    AscendingId,
    /// Higher degree first, ties by ascending id.
    DegreeDescending,
}

/// Consecutive ids per partition, ascending original id within a partition.
pub fn ordering_from_partition(assignment: &PartitionAssignment) -> Ordering {
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); assignment.k()];
    for (v, &p) in assignment.parts().iter().enumerate() {
        blocks[p].push(v);
    }
    layout(blocks, assignment.len())
}

pub fn ordering_from_partition_with(
    assignment: &PartitionAssignment,
    graph: &Graph,
    within: WithinPartition,
) -> Result<Ordering> {
    if graph.num_vertices() != assignment.len() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} vertices, graph has {}",
            assignment.len(),
            graph.num_vertices()
        )));
    }
    match within {
        WithinPartition::AscendingId => Ok(ordering_from_partition(assignment)),
        WithinPartition::DegreeDescending => {
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); assignment.k()];
            for (v, &p) in assignment.parts().iter().enumerate() {
                blocks[p].push(v);
            }
            for block in &mut blocks {
                block.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
            }
            Ok(layout(blocks, assignment.len()))
        }
    }
}

fn layout(blocks: Vec<Vec<usize>>, n: usize) -> Ordering {
    let mut perm = vec![0; n];
    for (new, old) in blocks.into_iter().flatten().enumerate() {
        perm[old] = new;
    }
    Ordering { perm }
}

/// Partitions with the configured pipeline (balanced or not, per
/// `config.balance`) and lays the partitions out contiguously.
pub fn reorder(
    graph: &Graph,
    source: EmbeddingSource<'_>,
    split: &NodeSplit,
    config: &PipelineConfig,
) -> Result<Ordering> {
    let assignment = partition(graph, source, split, config)?;
    Ok(ordering_from_partition(&assignment))
}

/// [`reorder`] with the balancing step skipped.
pub fn reorder_unbalanced(graph: &Graph, source: EmbeddingSource<'_>, config: &PipelineConfig) -> Result<Ordering> {
    let config = config.clone().unbalanced();
    reorder(graph, source, &NodeSplit::all_rest(graph.num_vertices()), &config)
}

/// Materializes the relabeled graph together with permuted features and split.
pub fn apply_ordering(
    graph: &Graph,
    features: &FeatureMatrix,
    split: &NodeSplit,
    ordering: &Ordering,
) -> Result<(Graph, FeatureMatrix, NodeSplit)> {
    Ok((
        graph.relabel(ordering)?,
        features.permute_rows(ordering)?,
        split.permute(ordering)?,
    ))
}
