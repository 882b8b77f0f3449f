//! Stochastic block model generator with planted communities.

use rand::RngCore;

use super::Graph;
use crate::error::{Error, Result};
use crate::matrix::{FeatureMatrix, Matrix};
use crate::seed;
use crate::split::{NodeSplit, VertexClass};

const FEATURE_NOISE: f64 = 0.1;

/// Generates an undirected SBM graph with contiguous blocks.
///
/// Pairs inside a block are connected with probability `p_in`, pairs across
/// blocks with `p_out`. Features are a one-hot block indicator plus uniform
/// noise in `[0, 0.1)`. Within every block the first 60% of vertex ids are
/// `Train`, the next 20% `Val`, and the rest `Rest`.
///
/// Edges are drawn by geometric skipping over the pair index, so the cost is
/// proportional to the number of edges rather than the number of pairs.
pub fn sbm_generate(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph, FeatureMatrix, NodeSplit)> {
    if block_sizes.is_empty() {
        return Err(Error::InvalidArgument("block_sizes must be non-empty".into()));
    }
    let valid = |p: f64| (0.0..=1.0).contains(&p);
    if !valid(p_in) || !valid(p_out) || p_out > p_in {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}"
        )));
    }
    let n: usize = block_sizes.iter().sum();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let starts: Vec<usize> = block_sizes
        .iter()
        .scan(0, |acc, &s| {
            let start = *acc;
            *acc += s;
            Some(start)
        })
        .collect();

    let mut rng = seed::rng(seed::derive(seed, "sbm/edges"));
    let mut edges = Vec::new();
    for (b, &size) in block_sizes.iter().enumerate() {
        let base = starts[b];
        let total = (size as u64) * (size.saturating_sub(1) as u64) / 2;
        // Lower-triangle walk: row i holds pairs (i, 0..i).
        let (mut row, mut row_start) = (1u64, 0u64);
        sample_indices(&mut rng, total, p_in, |idx| {
            while idx >= row_start + row {
                row_start += row;
                row += 1;
            }
            let col = idx - row_start;
            edges.push((base + col as usize, base + row as usize));
        });
    }
    for a in 0..block_sizes.len() {
        for b in a + 1..block_sizes.len() {
            let (sa, sb) = (block_sizes[a], block_sizes[b]);
            if sa == 0 || sb == 0 {
                continue;
            }
            let (ba, bb) = (starts[a], starts[b]);
            sample_indices(&mut rng, (sa as u64) * (sb as u64), p_out, |idx| {
                let (i, j) = (idx / sb as u64, idx % sb as u64);
                edges.push((ba + i as usize, bb + j as usize));
            });
        }
    }
    let graph = Graph::from_edges(n, edges)?;

    let blocks = block_sizes.len();
    let mut rng = seed::rng(seed::derive(seed, "sbm/features"));
    let mut values = Vec::with_capacity(n * blocks);
    let mut classes = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        for j in 0..size {
            for c in 0..blocks {
                let one_hot = if c == b { 1.0 } else { 0.0 };
                values.push(one_hot + FEATURE_NOISE * seed::unit_f64(&mut rng));
            }
            classes.push(if 10 * j < 6 * size {
                VertexClass::Train
            } else if 10 * j < 8 * size {
                VertexClass::Val
            } else {
                VertexClass::Rest
            });
        }
    }
    let features = Matrix::from_raw(n, blocks, values);
    Ok((graph, features, NodeSplit::new(classes)))
}

/// Calls `emit` with each index in `[0, total)` independently kept with
/// probability `p`, in ascending order.
fn sample_indices(rng: &mut impl RngCore, total: u64, p: f64, mut emit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut next: u64 = 0;
    loop {
        let u = 1.0 - seed::unit_f64(rng);
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - next) as f64 {
            return;
        }
        next += skip as u64;
        emit(next);
        next += 1;
        if next >= total {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_full_block_is_complete() {
        let (g, f, _) = sbm_generate(&[3], 1.0, 0.0, 1).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!((f.rows(), f.cols()), (3, 1));
    }

    #[test]
    fn zero_probabilities_give_no_edges() {
        let (g, _, _) = sbm_generate(&[2, 2], 0.0, 0.0, 1).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.num_edges(), 0);
    }

    #[test]
    fn full_probabilities_give_complete_graph() {
        let (g, _, _) = sbm_generate(&[3, 4, 2], 1.0, 1.0, 5).unwrap();
        assert_eq!(g.num_edges(), 9 * 8 / 2);
        g.validate().unwrap();
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(sbm_generate(&[2], 0.1, 0.2, 0).is_err());
        assert!(sbm_generate(&[2], 1.5, 0.0, 0).is_err());
        assert!(sbm_generate(&[], 0.5, 0.0, 0).is_err());
        assert!(sbm_generate(&[2], f64::NAN, 0.0, 0).is_err());
    }

    #[test]
    fn intra_edge_count_matches_binomial_expectation() {
        let (g, _, _) = sbm_generate(&[50, 50], 0.5, 0.01, 7).unwrap();
        let intra = g.edges().filter(|&(u, v)| (u < 50) == (v < 50)).count() as f64;
        let pairs: f64 = 2.0 * (50.0 * 49.0 / 2.0);
        let mean = pairs * 0.5;
        let sd = (pairs * 0.25).sqrt();
        assert_eq!(mean, 1225.0);
        assert!((intra - mean).abs() < 5.0 * sd, "intra={intra}");
        let inter = g.num_edges() as f64 - intra;
        let (m2, sd2) = (2500.0 * 0.01, (2500.0f64 * 0.01 * 0.99).sqrt());
        assert!((inter - m2).abs() < 5.0 * sd2, "inter={inter}");
    }

    #[test]
    fn deterministic_for_seed() {
        let a = sbm_generate(&[30, 20], 0.3, 0.05, 11).unwrap();
        let b = sbm_generate(&[30, 20], 0.3, 0.05, 11).unwrap();
        assert_eq!(a, b);
        let c = sbm_generate(&[30, 20], 0.3, 0.05, 12).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn features_and_split_layout() {
        let (_, f, s) = sbm_generate(&[10, 5], 0.0, 0.0, 2).unwrap();
        for v in 0..15 {
            let block = usize::from(v >= 10);
            for c in 0..2 {
                let x = f.get(v, c);
                let base = if c == block { 1.0 } else { 0.0 };
                assert!(x >= base && x < base + 0.1);
            }
        }
        assert_eq!(s.count(VertexClass::Train), 6 + 3);
        assert_eq!(s.count(VertexClass::Val), 2 + 1);
        assert_eq!(s.count(VertexClass::Rest), 2 + 1);
        assert_eq!(s.class_of(10), VertexClass::Train);
        assert_eq!(s.class_of(9), VertexClass::Rest);
    }
}
