//! Python bindings: graphs, the embed → cluster → balance pipeline,
//! baselines, metrics and reordering.
//!
//! Matrices cross the boundary as lists of rows, assignments and orderings as
//! lists of ints, and splits as lists of "train" / "val" / "rest" strings.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use clusterpart::clustering::{kmeans_assign, kmeans_fit_traced, KMeansConfig};
use clusterpart::embedding::{self, init_weights};
use clusterpart::balancing::BalanceConfig;
use clusterpart::metrics;
use clusterpart::partitioner::{self, EmbeddingSource, PipelineConfig};
use clusterpart::reorder;
use clusterpart::{Error, Matrix, NodeSplit, Ordering, PartitionAssignment, VertexClass};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for clusterpart::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).or_py()
}

fn split_from(classes: Option<Vec<String>>, n: usize) -> PyResult<NodeSplit> {
    let Some(classes) = classes else {
        return Ok(NodeSplit::all_rest(n));
    };
    if classes.len() != n {
        return Err(PyValueError::new_err(format!(
            "split has {} entries for {n} vertices",
            classes.len()
        )));
    }
    let parsed = classes
        .iter()
        .map(|c| c.parse::<VertexClass>().map_err(PyValueError::new_err))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(NodeSplit::new(parsed))
}

fn assignment(parts: Vec<usize>, k: Option<usize>) -> PyResult<PartitionAssignment> {
    let k = k.unwrap_or_else(|| parts.iter().max().map_or(1, |&m| m + 1));
    PartitionAssignment::new(parts, k).or_py()
}

/// Undirected simple graph in compressed sparse row form.
#[pyclass(frozen, module = "pyclusterpart")]
struct Graph(clusterpart::Graph);

#[pymethods]
impl Graph {
    /// Builds a graph on `n` vertices; edges are symmetrized, deduplicated and
    /// self-loops dropped.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        clusterpart::Graph::from_edges(n, edges).map(Self).or_py()
    }

    #[staticmethod]
    fn load_edge_list(path: &str) -> PyResult<Self> {
        clusterpart::Graph::load_edge_list(path).map(Self).or_py()
    }

    fn save_edge_list(&self, path: &str) -> PyResult<()> {
        self.0.save_edge_list(path).or_py()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.0.num_edges()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        self.check(v)?;
        Ok(self.0.degree(v))
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        self.check(v)?;
        Ok(self.0.neighbors(v).to_vec())
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn induced_subgraph(&self, vertices: Vec<usize>) -> PyResult<Self> {
        self.0.induced_subgraph(&vertices).map(Self).or_py()
    }

    fn relabel(&self, ordering: Vec<usize>) -> PyResult<Self> {
        let o = Ordering::new(ordering).or_py()?;
        self.0.relabel(&o).map(Self).or_py()
    }

    fn __len__(&self) -> usize {
        self.0.num_vertices()
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.0.num_vertices(), self.0.num_edges())
    }
}

impl Graph {
    fn check(&self, v: usize) -> PyResult<()> {
        if v >= self.0.num_vertices() {
            return Err(PyValueError::new_err(format!(
                "vertex {v} out of range for {} vertices",
                self.0.num_vertices()
            )));
        }
        Ok(())
    }
}

/// Randomly initialized encoder weights; never trained.
#[pyclass(frozen, module = "pyclusterpart")]
struct EncoderWeights(embedding::EncoderWeights);

#[pymethods]
impl EncoderWeights {
    #[new]
    #[pyo3(signature = (input_dim, hidden_dim = 64, num_layers = 2, seed = 0))]
    fn new(input_dim: usize, hidden_dim: usize, num_layers: usize, seed: u64) -> PyResult<Self> {
        init_weights(input_dim, hidden_dim, num_layers, seed).map(Self).or_py()
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        embedding::EncoderWeights::load(path).map(Self).or_py()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save(path).or_py()
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        embedding::EncoderWeights::from_bytes(data).map(Self).or_py()
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &self.0.to_bytes())
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }

    #[getter]
    fn hidden_dim(&self) -> usize {
        self.0.hidden_dim()
    }

    #[getter]
    fn num_layers(&self) -> usize {
        self.0.num_layers()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    fn __repr__(&self) -> String {
        format!(
            "EncoderWeights(input_dim={}, hidden_dim={}, num_layers={}, seed={})",
            self.0.input_dim(),
            self.0.hidden_dim(),
            self.0.num_layers(),
            self.0.seed()
        )
    }
}

/// Planted-partition graph with one-hot plus noise features and a split.
///
/// Returns `(graph, features, split)`.
#[pyfunction]
#[pyo3(signature = (blocks, p_in, p_out, seed = 0))]
fn sbm_generate(blocks: Vec<usize>, p_in: f64, p_out: f64, seed: u64) -> PyResult<(Graph, Vec<Vec<f64>>, Vec<String>)> {
    let (g, f, s) = clusterpart::graph::sbm_generate(&blocks, p_in, p_out, seed).or_py()?;
    let split = s.classes().iter().map(|c| c.to_string()).collect();
    Ok((Graph(g), f.to_rows(), split))
}

/// Seeded uniform `[0, 1)` features.
#[pyfunction]
#[pyo3(signature = (n, dim, seed = 0))]
fn random_features(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    embedding::random_features(n, dim, seed).to_rows()
}

/// Unit-norm (or zero) embedding rows from an untrained encoder.
#[pyfunction]
fn embed(graph: &Graph, features: Vec<Vec<f64>>, weights: &EncoderWeights) -> PyResult<Vec<Vec<f64>>> {
    let f = matrix(features)?;
    embedding::forward_embed(&graph.0, &f, &weights.0).map(|e| e.to_rows()).or_py()
}

/// Assignment, centroid rows and objective trace.
type KMeansResult = (Vec<usize>, Vec<Vec<f64>>, Vec<f64>);

/// Fits k-means on a sample of the rows and assigns every row to its nearest
/// centroid. Returns `(assignment, centroids, objectives)`.
#[pyfunction]
#[pyo3(signature = (embeddings, k, seed = 0, sample_per_cluster = 512, max_iters = 25, tol = 1e-4))]
fn kmeans(
    embeddings: Vec<Vec<f64>>,
    k: usize,
    seed: u64,
    sample_per_cluster: usize,
    max_iters: usize,
    tol: f64,
) -> PyResult<KMeansResult> {
    let e = matrix(embeddings)?;
    let config = KMeansConfig {
        sample_per_cluster,
        max_iters,
        tol,
    };
    let fit = kmeans_fit_traced(&e, k, &config, seed).or_py()?;
    let a = kmeans_assign(&e, &fit.centroids).or_py()?;
    Ok((a.parts().to_vec(), fit.centroids.as_matrix().to_rows(), fit.objectives))
}

/// Embeds, clusters and balances. Give exactly one of `features` or
/// `embeddings`; `weights` optionally replaces the freshly drawn encoder.
#[pyfunction]
#[pyo3(signature = (
    graph, k, *, features = None, embeddings = None, weights = None, split = None,
    balance = true, beta_train = 1.05, beta_val = 1.05, beta_rest = 1.05,
    hidden_dim = 64, num_layers = 2, sample_per_cluster = 512, max_iters = 25, seed = 0,
))]
#[allow(clippy::too_many_arguments)]
fn partition(
    graph: &Graph,
    k: usize,
    features: Option<Vec<Vec<f64>>>,
    embeddings: Option<Vec<Vec<f64>>>,
    weights: Option<PyRef<'_, EncoderWeights>>,
    split: Option<Vec<String>>,
    balance: bool,
    beta_train: f64,
    beta_val: f64,
    beta_rest: f64,
    hidden_dim: usize,
    num_layers: usize,
    sample_per_cluster: usize,
    max_iters: usize,
    seed: u64,
) -> PyResult<Vec<usize>> {
    let g = &graph.0;
    let split = split_from(split, g.num_vertices())?;
    let mut config = PipelineConfig::new(k, seed);
    config.encoder.hidden_dim = hidden_dim;
    config.encoder.num_layers = num_layers;
    config.kmeans.sample_per_cluster = sample_per_cluster;
    config.kmeans.max_iters = max_iters;
    config.balance = if balance {
        let b = BalanceConfig {
            beta_train,
            beta_val,
            beta_rest,
        };
        b.validate().or_py()?;
        Some(b)
    } else {
        None
    };
    let a = match (features, embeddings) {
        (Some(f), None) => {
            let f = matrix(f)?;
            let source = match &weights {
                Some(w) => EmbeddingSource::Encoder(&f, &w.0),
                None => EmbeddingSource::Features(&f),
            };
            partitioner::partition(g, source, &split, &config)
        }
        (None, Some(e)) => {
            let e = matrix(e)?;
            partitioner::partition(g, EmbeddingSource::Embeddings(&e), &split, &config)
        }
        _ => return Err(PyValueError::new_err("pass exactly one of features or embeddings")),
    }
    .or_py()?;
    Ok(a.parts().to_vec())
}

/// Each vertex independently uniform over `[0, k)`.
#[pyfunction]
#[pyo3(signature = (n, k, seed = 0))]
fn random_partition(n: usize, k: usize, seed: u64) -> PyResult<Vec<usize>> {
    partitioner::random_partition(n, k, seed).map(|a| a.parts().to_vec()).or_py()
}

/// Linear deterministic greedy streaming partition.
#[pyfunction]
#[pyo3(signature = (graph, k, slack = 1.05, seed = 0))]
fn ldg_partition(graph: &Graph, k: usize, slack: f64, seed: u64) -> PyResult<Vec<usize>> {
    partitioner::ldg_partition(&graph.0, k, slack, seed).map(|a| a.parts().to_vec()).or_py()
}

#[pyfunction]
#[pyo3(signature = (graph, parts, k = None))]
fn edge_cut_ratio(graph: &Graph, parts: Vec<usize>, k: Option<usize>) -> PyResult<f64> {
    metrics::edge_cut_ratio(&graph.0, &assignment(parts, k)?).or_py()
}

/// `k x k` symmetric matrix of cut edges between partition pairs.
#[pyfunction]
#[pyo3(signature = (graph, parts, k = None))]
fn cut_matrix(graph: &Graph, parts: Vec<usize>, k: Option<usize>) -> PyResult<Vec<Vec<usize>>> {
    metrics::cut_matrix(&graph.0, &assignment(parts, k)?).or_py()
}

/// Max-over-mean partition size, optionally over one class of `split`.
#[pyfunction]
#[pyo3(signature = (parts, k = None, split = None, vertex_class = None))]
fn vertex_balance(
    parts: Vec<usize>,
    k: Option<usize>,
    split: Option<Vec<String>>,
    vertex_class: Option<&str>,
) -> PyResult<f64> {
    let n = parts.len();
    let a = assignment(parts, k)?;
    let b = match vertex_class {
        None => metrics::vertex_balance(&a, None),
        Some(c) => {
            let class: VertexClass = c.parse().map_err(PyValueError::new_err)?;
            let split = split_from(split, n)?;
            metrics::vertex_balance(&a, Some((&split, class)))
        }
    };
    b.map(|b| b.value).or_py()
}

/// Mean over vertices of the largest id gap to any neighbor under `ordering`.
#[pyfunction]
fn avg_graph_bandwidth(graph: &Graph, ordering: Vec<usize>) -> PyResult<f64> {
    let o = Ordering::new(ordering).or_py()?;
    metrics::avg_graph_bandwidth(&graph.0, &o).or_py()
}

/// JSON metrics report, identical to the command-line report.
#[pyfunction]
#[pyo3(signature = (graph, parts, k = None, split = None, ordering = None))]
fn report(
    graph: &Graph,
    parts: Vec<usize>,
    k: Option<usize>,
    split: Option<Vec<String>>,
    ordering: Option<Vec<usize>>,
) -> PyResult<String> {
    let n = graph.0.num_vertices();
    let a = assignment(parts, k)?;
    let split = split_from(split, n)?;
    let ordering = ordering.map(Ordering::new).transpose().or_py()?;
    metrics::report(&graph.0, &a, &split, ordering.as_ref())
        .map(|r| r.to_json())
        .or_py()
}

/// New id per vertex so that each partition occupies consecutive ids.
#[pyfunction]
#[pyo3(signature = (parts, k = None))]
fn ordering_from_partition(parts: Vec<usize>, k: Option<usize>) -> PyResult<Vec<usize>> {
    Ok(reorder::ordering_from_partition(&assignment(parts, k)?).perm().to_vec())
}

#[pymodule]
fn pyclusterpart(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<EncoderWeights>()?;
    m.add_function(wrap_pyfunction!(sbm_generate, m)?)?;
    m.add_function(wrap_pyfunction!(random_features, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(random_partition, m)?)?;
    m.add_function(wrap_pyfunction!(ldg_partition, m)?)?;
    m.add_function(wrap_pyfunction!(edge_cut_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(cut_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(vertex_balance, m)?)?;
    m.add_function(wrap_pyfunction!(avg_graph_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(ordering_from_partition, m)?)?;
    Ok(())
}
