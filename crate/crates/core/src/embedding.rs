//! Forward-only message-passing encoder.
//!
//! Each layer computes, for every vertex `v`,
//!
//! ```text
//! a_v = mean { h_u : u in N(v) }            (zero when N(v) is empty)
//! h_v' = tanh(h_v · W_self + a_v · W_neigh)
//! ```
//!
//! and the final rows are L2-normalized. Weights are random and never trained;
//! they can be persisted and reapplied to a grown or modified graph.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{EmbeddingMatrix, FeatureMatrix, Matrix};
use crate::seed;

const MAGIC: &[u8; 8] = b"CPARTENC";
const FORMAT_VERSION: u32 = 1;

/// Shape of the untrained encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub hidden_dim: usize,
    pub num_layers: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            num_layers: 2,
        }
    }
}

/// Self and neighbor projections of one layer, each `d_in × d_out` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w_self: Matrix,
    pub w_neigh: Matrix,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.w_self.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.w_self.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    input_dim: usize,
    hidden_dim: usize,
    seed: u64,
    layers: Vec<Layer>,
}

impl EncoderWeights {
    /// Assembles weights from explicit layers, checking that dimensions chain.
    pub fn from_layers(input_dim: usize, hidden_dim: usize, seed: u64, layers: Vec<Layer>) -> Result<Self> {
        let mut d_in = input_dim;
        for (l, layer) in layers.iter().enumerate() {
            let shapes = [
                (layer.w_self.rows(), layer.w_self.cols()),
                (layer.w_neigh.rows(), layer.w_neigh.cols()),
            ];
            if shapes.iter().any(|&s| s != (d_in, hidden_dim)) {
                return Err(Error::DimensionMismatch(format!(
                    "layer {l} expected {d_in}x{hidden_dim}, got {shapes:?}"
                )));
            }
            d_in = hidden_dim;
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            seed,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Dimension of the rows produced by [`forward_embed`].
    pub fn output_dim(&self) -> usize {
        if self.layers.is_empty() {
            self.input_dim
        } else {
            self.hidden_dim
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for x in [
            self.input_dim as u64,
            self.hidden_dim as u64,
            self.layers.len() as u64,
            self.seed,
        ] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for layer in &self.layers {
            for m in [&layer.w_self, &layer.w_neigh] {
                for x in m.values() {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Truncated(format!("unsupported format version {version}")));
        }
        let input_dim = r.usize()?;
        let hidden_dim = r.usize()?;
        let num_layers = r.usize()?;
        let seed = r.u64()?;
        let mut layers = Vec::new();
        let mut d_in = input_dim;
        for _ in 0..num_layers {
            let w_self = r.matrix(d_in, hidden_dim)?;
            let w_neigh = r.matrix(d_in, hidden_dim)?;
            layers.push(Layer { w_self, w_neigh });
            d_in = hidden_dim;
        }
        if r.pos != bytes.len() {
            return Err(Error::Truncated(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Self::from_layers(input_dim, hidden_dim, seed, layers)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Truncated(format!("need {len} bytes at offset {}", self.pos)))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        let x = self.u64()?;
        usize::try_from(x).map_err(|_| Error::Truncated(format!("dimension {x} too large")))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let count = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Truncated("matrix size overflow".into()))?;
        let raw = self.take(count.checked_mul(8).ok_or_else(|| Error::Truncated("matrix size overflow".into()))?)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Matrix::new(rows, cols, values).map_err(|e| Error::Truncated(e.to_string()))
    }
}

/// Draws weights uniformly from `[-s, s]`, `s = sqrt(6 / (fan_in + fan_out))`.
///
/// Layer 0 maps `input_dim → hidden_dim`; later layers `hidden_dim → hidden_dim`.
pub fn init_weights(input_dim: usize, hidden_dim: usize, num_layers: usize, seed: u64) -> Result<EncoderWeights> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::InvalidArgument(
            "input_dim and hidden_dim must be at least 1".into(),
        ));
    }
    let mut rng = seed::rng(seed);
    let mut layers = Vec::with_capacity(num_layers);
    let mut d_in = input_dim;
    for _ in 0..num_layers {
        let s = (6.0 / (d_in + hidden_dim) as f64).sqrt();
        let mut draw = || {
            let values = (0..d_in * hidden_dim)
                .map(|_| -s + 2.0 * s * seed::unit_f64(&mut rng))
                .collect();
            Matrix::from_raw(d_in, hidden_dim, values)
        };
        let w_self = draw();
        let w_neigh = draw();
        layers.push(Layer { w_self, w_neigh });
        d_in = hidden_dim;
    }
    EncoderWeights::from_layers(input_dim, hidden_dim, seed, layers)
}

/// Runs the encoder over the whole graph and returns unit-norm (or zero) rows.
///
/// Output is bit-identical for any thread count: every vertex's row is
/// computed independently in a fixed operation order.
pub fn forward_embed(graph: &Graph, features: &FeatureMatrix, weights: &EncoderWeights) -> Result<EmbeddingMatrix> {
    let n = graph.num_vertices();
    if features.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows for {n} vertices",
            features.rows()
        )));
    }
    if features.cols() != weights.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature columns, encoder expects {}",
            features.cols(),
            weights.input_dim()
        )));
    }
    if let Some(i) = features.values().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            row: i / features.cols(),
            col: i % features.cols(),
        });
    }

    let mut h = features.clone();
    for layer in weights.layers() {
        h = propagate(graph, &h, layer);
    }
    h.normalize_rows();
    Ok(h)
}

/// Same computation as [`forward_embed`], applied with previously stored
/// weights to a graph that may have grown or changed since they were drawn.
pub fn inductive_embed(
    updated_graph: &Graph,
    updated_features: &FeatureMatrix,
    stored_weights: &EncoderWeights,
) -> Result<EmbeddingMatrix> {
    forward_embed(updated_graph, updated_features, stored_weights)
}

fn propagate(graph: &Graph, h: &Matrix, layer: &Layer) -> Matrix {
    let (d_in, d_out) = (layer.input_dim(), layer.output_dim());
    let mut out = vec![0.0; graph.num_vertices() * d_out];
    out.par_chunks_mut(d_out)
        .enumerate()
        .for_each_init(
            || vec![0.0; d_in],
            |agg, (v, row)| {
                agg.iter_mut().for_each(|x| *x = 0.0);
                let nbrs = graph.neighbors(v);
                for &u in nbrs {
                    for (a, x) in agg.iter_mut().zip(h.row(u)) {
                        *a += x;
                    }
                }
                if !nbrs.is_empty() {
                    let deg = nbrs.len() as f64;
                    agg.iter_mut().for_each(|a| *a /= deg);
                }
                for (i, &x) in h.row(v).iter().enumerate() {
                    if x != 0.0 {
                        axpy(row, x, layer.w_self.row(i));
                    }
                }
                for (i, &a) in agg.iter().enumerate() {
                    if a != 0.0 {
                        axpy(row, a, layer.w_neigh.row(i));
                    }
                }
                row.iter_mut().for_each(|y| *y = y.tanh());
            },
        );
    Matrix::from_raw(graph.num_vertices(), d_out, out)
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Seeded features uniform in `[0, 1)`, for graphs without their own.
pub fn random_features(n: usize, dim: usize, seed: u64) -> FeatureMatrix {
    let mut rng = seed::rng(seed);
    let values = (0..n * dim).map(|_| seed::unit_f64(&mut rng)).collect();
    Matrix::from_raw(n, dim, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> Matrix {
        Matrix::new(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_chained() {
        let a = init_weights(4, 8, 2, 9).unwrap();
        assert_eq!(a, init_weights(4, 8, 2, 9).unwrap());
        assert_ne!(a, init_weights(4, 8, 2, 10).unwrap());
        let dims: Vec<_> = a.layers().iter().map(|l| (l.input_dim(), l.output_dim())).collect();
        assert_eq!(dims, vec![(4, 8), (8, 8)]);
        assert!(init_weights(4, 8, 0, 1).unwrap().layers().is_empty());
        assert!(init_weights(0, 8, 1, 1).is_err());
    }

    #[test]
    fn init_range() {
        let w = init_weights(10, 6, 1, 3).unwrap();
        let s = (6.0f64 / 16.0).sqrt();
        for x in w.layers()[0].w_self.values() {
            assert!(x.abs() <= s);
        }
    }

    #[test]
    fn zero_layers_normalizes_features() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let f = m(3, 2, &[3.0, 4.0, 0.0, 0.0, -1.0, 0.0]);
        let w = init_weights(2, 5, 0, 0).unwrap();
        let e = forward_embed(&g, &f, &w).unwrap();
        assert_eq!(e.values(), &[0.6, 0.8, 0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn isolated_vertex_hand_trace() {
        // x = [1, 2], W_self = [[0.1, -0.2], [0.3, 0.05]]
        // pre = [0.1 + 0.6, -0.2 + 0.1] = [0.7, -0.1]
        let g = Graph::from_edges(1, []).unwrap();
        let f = m(1, 2, &[1.0, 2.0]);
        let layer = Layer {
            w_self: m(2, 2, &[0.1, -0.2, 0.3, 0.05]),
            w_neigh: m(2, 2, &[9.0, 9.0, 9.0, 9.0]),
        };
        let w = EncoderWeights::from_layers(2, 2, 0, vec![layer]).unwrap();
        let e = forward_embed(&g, &f, &w).unwrap();
        let (a, b) = (0.7f64.tanh(), (-0.1f64).tanh());
        let norm = (a * a + b * b).sqrt();
        assert!((e.get(0, 0) - a / norm).abs() < 1e-15);
        assert!((e.get(0, 1) - b / norm).abs() < 1e-15);
    }

    #[test]
    fn zero_feature_vertex_uses_neighbor_mean() {
        // Vertex 0 has zero features and neighbors 1, 2 with features [1, 0], [0, 1].
        // mean = [0.5, 0.5]; pre = 0.5 * row0(Wn) + 0.5 * row1(Wn) = [0.5*0.2+0.5*0.4, 0.5*(-0.6)+0.5*0.8] = [0.3, 0.1]
        let g = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let f = m(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let layer = Layer {
            w_self: m(2, 2, &[5.0, 5.0, 5.0, 5.0]),
            w_neigh: m(2, 2, &[0.2, -0.6, 0.4, 0.8]),
        };
        let w = EncoderWeights::from_layers(2, 2, 0, vec![layer]).unwrap();
        let e = forward_embed(&g, &f, &w).unwrap();
        let (a, b) = (0.3f64.tanh(), 0.1f64.tanh());
        let norm = (a * a + b * b).sqrt();
        assert!((e.get(0, 0) - a / norm).abs() < 1e-15);
        assert!((e.get(0, 1) - b / norm).abs() < 1e-15);
    }

    #[test]
    fn complete_graph_identical_rows() {
        let edges = (0..5).flat_map(|u| (u + 1..5).map(move |v| (u, v)));
        let g = Graph::from_edges(5, edges).unwrap();
        let f = m(5, 3, &[0.3, -0.2, 0.9].repeat(5));
        let w = init_weights(3, 4, 3, 1).unwrap();
        let e = forward_embed(&g, &f, &w).unwrap();
        for v in 1..5 {
            assert_eq!(e.row(v), e.row(0));
        }
    }

    #[test]
    fn dimension_errors() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let w = init_weights(3, 4, 1, 1).unwrap();
        assert!(forward_embed(&g, &Matrix::zeros(2, 2), &w).is_err());
        assert!(forward_embed(&g, &Matrix::zeros(3, 3), &w).is_err());
    }

    #[test]
    fn snapshot_round_trip_and_corruption() {
        let w = init_weights(3, 5, 2, 77).unwrap();
        let bytes = w.to_bytes();
        assert_eq!(EncoderWeights::from_bytes(&bytes).unwrap(), w);
        assert!(matches!(
            EncoderWeights::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::Truncated(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(EncoderWeights::from_bytes(&bad), Err(Error::BadMagic)));
        assert!(matches!(EncoderWeights::from_bytes(&bytes[..4]), Err(Error::Truncated(_))));
    }

    #[test]
    fn snapshot_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bin");
        let w = init_weights(2, 3, 1, 5).unwrap();
        w.save(&path).unwrap();
        assert_eq!(EncoderWeights::load(&path).unwrap(), w);
    }
}
