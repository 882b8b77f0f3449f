//! Embedding-driven balanced k-way graph partitioning.
//!
//! The pipeline has three independently replaceable stages:
//!
//! 1. [`embedding`]: a forward-only mean-aggregation message-passing encoder
//!    (or externally produced embeddings loaded from TSV),
//! 2. [`clustering`]: sampled k-means over the embedding rows,
//! 3. [`balancing`]: per-class vertex migration from overloaded to
//!    underloaded partitions, lowest degree first.
//!
//! [`partitioner`] composes the stages and provides random and LDG baselines,
//! [`reorder`] turns partitions into locality-preserving vertex orderings, and
//! [`metrics`] evaluates edge cut, vertex balance and bandwidth.
//!
//! ```
//! use clusterpart::{graph::sbm_generate, partitioner::{partition, EmbeddingSource, PipelineConfig}};
//! use clusterpart::metrics::edge_cut_ratio;
//!
//! let (graph, features, split) = sbm_generate(&[40, 40], 0.3, 0.01, 7).unwrap();
//! let config = PipelineConfig::new(2, 7);
//! let parts = partition(&graph, EmbeddingSource::Features(&features), &split, &config).unwrap();
//! assert!(edge_cut_ratio(&graph, &parts).unwrap() < 0.5);
//! ```

pub mod assignment;
pub mod balancing;
pub mod clustering;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod partitioner;
pub mod reorder;
pub mod seed;
pub mod split;

pub use assignment::PartitionAssignment;
pub use error::{Error, Result};
pub use graph::Graph;
pub use matrix::{EmbeddingMatrix, FeatureMatrix, Matrix};
pub use reorder::Ordering;
pub use split::{NodeSplit, VertexClass};
