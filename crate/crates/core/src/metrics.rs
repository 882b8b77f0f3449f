//! Partition and ordering quality metrics.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::assignment::PartitionAssignment;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::reorder::Ordering;
use crate::split::{NodeSplit, VertexClass};

pub const REPORT_SCHEMA: u32 = 1;

fn check_assignment(graph: &Graph, assignment: &PartitionAssignment) -> Result<()> {
    if assignment.len() != graph.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} vertices, graph has {}",
            assignment.len(),
            graph.num_vertices()
        )));
    }
    Ok(())
}

fn check_ordering(graph: &Graph, ordering: &Ordering) -> Result<()> {
    if ordering.len() != graph.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "ordering covers {} vertices, graph has {}",
            ordering.len(),
            graph.num_vertices()
        )));
    }
    Ok(())
}

/// Number of undirected edges whose endpoints lie in different partitions.
pub fn cut_edges(graph: &Graph, assignment: &PartitionAssignment) -> Result<usize> {
    check_assignment(graph, assignment)?;
    Ok((0..graph.num_vertices())
        .into_par_iter()
        .map(|u| {
            let pu = assignment.part_of(u);
            graph
                .neighbors(u)
                .iter()
                .filter(|&&v| v > u && assignment.part_of(v) != pu)
                .count()
        })
        .sum())
}

/// Fraction of cut edges; 0 for an edgeless graph.
pub fn edge_cut_ratio(graph: &Graph, assignment: &PartitionAssignment) -> Result<f64> {
    let cut = cut_edges(graph, assignment)?;
    Ok(match graph.num_edges() {
        0 => 0.0,
        m => cut as f64 / m as f64,
    })
}

/// `k × k` symmetric matrix of cut edges between each pair of partitions.
pub fn cut_matrix(graph: &Graph, assignment: &PartitionAssignment) -> Result<Vec<Vec<usize>>> {
    check_assignment(graph, assignment)?;
    let k = assignment.k();
    let mut m = vec![vec![0usize; k]; k];
    for (u, v) in graph.edges() {
        let (a, b) = (assignment.part_of(u), assignment.part_of(v));
        if a != b {
            m[a][b] += 1;
            m[b][a] += 1;
        }
    }
    Ok(m)
}

/// Max-over-mean partition size, optionally restricted to one vertex class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexBalance {
    pub value: f64,
    /// Set when the (filtered) vertex set is empty; `value` is then 1.
    pub empty: bool,
}

pub fn vertex_balance(
    assignment: &PartitionAssignment,
    filter: Option<(&NodeSplit, VertexClass)>,
) -> Result<VertexBalance> {
    let k = assignment.k();
    let mut sizes = vec![0usize; k];
    match filter {
        None => sizes = assignment.sizes(),
        Some((split, class)) => {
            if split.len() != assignment.len() {
                return Err(Error::DimensionMismatch(format!(
                    "split covers {} vertices, assignment {}",
                    split.len(),
                    assignment.len()
                )));
            }
            for (v, &p) in assignment.parts().iter().enumerate() {
                if split.class_of(v) == class {
                    sizes[p] += 1;
                }
            }
        }
    }
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return Ok(VertexBalance {
            value: 1.0,
            empty: true,
        });
    }
    let max = *sizes.iter().max().unwrap();
    Ok(VertexBalance {
        value: max as f64 * k as f64 / total as f64,
        empty: false,
    })
}

pub fn gap(ordering: &Ordering, u: usize, v: usize) -> usize {
    ordering.new_id(u).abs_diff(ordering.new_id(v))
}

/// Largest gap from `v` to any neighbor; 0 for isolated vertices.
pub fn vertex_bandwidth(graph: &Graph, ordering: &Ordering, v: usize) -> usize {
    graph
        .neighbors(v)
        .iter()
        .map(|&u| gap(ordering, v, u))
        .max()
        .unwrap_or(0)
}

/// Mean vertex bandwidth over all vertices.
pub fn avg_graph_bandwidth(graph: &Graph, ordering: &Ordering) -> Result<f64> {
    check_ordering(graph, ordering)?;
    let n = graph.num_vertices();
    if n == 0 {
        return Ok(0.0);
    }
    let total: usize = (0..n)
        .into_par_iter()
        .map(|v| vertex_bandwidth(graph, ordering, v))
        .sum();
    Ok(total as f64 / n as f64)
}

fn six_digits<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x, 6))
}

fn six_digits_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => six_digits(x, s),
        None => s.serialize_none(),
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap()
}

/// Summary of a partitioning (and optionally an ordering) serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub schema: u32,
    pub vertices: usize,
    pub edges: usize,
    pub k: usize,
    pub cut_edges: usize,
    #[serde(serialize_with = "six_digits")]
    pub ecr: f64,
    #[serde(serialize_with = "six_digits")]
    pub balance_overall: f64,
    #[serde(serialize_with = "six_digits")]
    pub balance_train: f64,
    #[serde(serialize_with = "six_digits")]
    pub balance_val: f64,
    #[serde(serialize_with = "six_digits")]
    pub balance_rest: f64,
    /// Classes with no vertices; their balance is reported as 1.
    pub empty_classes: Vec<VertexClass>,
    pub partition_sizes: Vec<usize>,
    pub cut_matrix: Vec<Vec<usize>>,
    #[serde(serialize_with = "six_digits_opt", skip_serializing_if = "Option::is_none")]
    pub avg_bandwidth: Option<f64>,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn report(
    graph: &Graph,
    assignment: &PartitionAssignment,
    split: &NodeSplit,
    ordering: Option<&Ordering>,
) -> Result<MetricsReport> {
    check_assignment(graph, assignment)?;
    let cut = cut_edges(graph, assignment)?;
    let ecr = edge_cut_ratio(graph, assignment)?;
    let mut empty_classes = Vec::new();
    let mut per_class = [0.0; 3];
    for (slot, class) in per_class.iter_mut().zip(VertexClass::ALL) {
        let b = vertex_balance(assignment, Some((split, class)))?;
        if b.empty {
            empty_classes.push(class);
        }
        *slot = b.value;
    }
    let avg_bandwidth = ordering
        .map(|o| avg_graph_bandwidth(graph, o))
        .transpose()?;
    Ok(MetricsReport {
        schema: REPORT_SCHEMA,
        vertices: graph.num_vertices(),
        edges: graph.num_edges(),
        k: assignment.k(),
        cut_edges: cut,
        ecr,
        balance_overall: vertex_balance(assignment, None)?.value,
        balance_train: per_class[0],
        balance_val: per_class[1],
        balance_rest: per_class[2],
        empty_classes,
        partition_sizes: assignment.sizes(),
        cut_matrix: cut_matrix(graph, assignment)?,
        avg_bandwidth,
    })
}
