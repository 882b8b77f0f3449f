//! Sampled k-means over embedding rows.
//!
//! Centroids are fitted on a uniform sample of `min(n, k · sample_per_cluster)`
//! rows with k-means++ seeding and Lloyd iterations; every vertex is then
//! mapped to its nearest centroid. All reductions run over fixed-size chunks
//! merged in chunk order, so results do not depend on the thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::assignment::PartitionAssignment;
use crate::error::{Error, Result};
use crate::matrix::{EmbeddingMatrix, Matrix};
use crate::seed;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    /// Sample size per cluster used for fitting.
    pub sample_per_cluster: usize,
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            sample_per_cluster: 512,
            max_iters: 25,
            tol: 1e-4,
        }
    }
}

/// `k × d` centroid matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids(Matrix);

impl Centroids {
    pub fn new(values: Matrix) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::InvalidArgument("need at least one centroid".into()));
        }
        Ok(Self(values))
    }

    pub fn k(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }

    pub fn centroid(&self, c: usize) -> &[f64] {
        self.0.row(c)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Result of a fit, including the objective after every accepted assignment
/// step. `objectives[0]` is the objective of the seeding.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centroids: Centroids,
    pub objectives: Vec<f64>,
    /// Row indices of the fitting sample, ascending.
    pub sample: Vec<usize>,
}

pub fn kmeans_fit(
    embeddings: &EmbeddingMatrix,
    k: usize,
    config: &KMeansConfig,
    seed: u64,
) -> Result<Centroids> {
    kmeans_fit_traced(embeddings, k, config, seed).map(|fit| fit.centroids)
}

pub fn kmeans_fit_traced(
    embeddings: &EmbeddingMatrix,
    k: usize,
    config: &KMeansConfig,
    seed: u64,
) -> Result<KMeansFit> {
    let n = embeddings.rows();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("no embedding rows to cluster".into()));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "k={k} exceeds the number of vertices {n}"
        )));
    }
    if config.sample_per_cluster == 0 || config.max_iters == 0 || config.tol.is_nan() || config.tol < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid k-means config {config:?}")));
    }

    let mut rng = seed::rng(seed);
    let m = n.min(k.saturating_mul(config.sample_per_cluster));
    let sample = if m == n {
        (0..n).collect::<Vec<_>>()
    } else {
        let mut idx = rand::seq::index::sample(&mut rng, n, m).into_vec();
        idx.sort_unstable();
        idx
    };
    let d = embeddings.cols();
    let mut points = Vec::with_capacity(m * d);
    for &i in &sample {
        points.extend_from_slice(embeddings.row(i));
    }
    let points = Matrix::from_raw(m, d, points);

    let mut centroids = plus_plus_seed(&points, k, &mut rng);
    let (mut labels, dists) = nearest_all(&points, &centroids);
    let mut objective = sum(&dists);
    let mut objectives = vec![objective];

    for _ in 0..config.max_iters {
        let mut next = update_means(&points, &labels, &centroids);
        reseed_empty(&points, &labels, &mut next);
        let (next_labels, next_dists) = nearest_all(&points, &next);
        let next_objective = sum(&next_dists);
        if next_objective > objective {
            // Only reachable through rounding; keep the better configuration.
            break;
        }
        let improvement = objective - next_objective;
        centroids = next;
        labels = next_labels;
        let previous = objective;
        objective = next_objective;
        objectives.push(objective);
        if previous == 0.0 || improvement / previous < config.tol {
            break;
        }
    }
    Ok(KMeansFit {
        centroids: Centroids(centroids),
        objectives,
        sample,
    })
}

/// Maps each row to its nearest centroid by squared Euclidean distance,
/// breaking ties toward the lower centroid index.
pub fn kmeans_assign(embeddings: &EmbeddingMatrix, centroids: &Centroids) -> Result<PartitionAssignment> {
    if embeddings.cols() != centroids.dim() {
        return Err(Error::DimensionMismatch(format!(
            "embeddings have {} columns, centroids {}",
            embeddings.cols(),
            centroids.dim()
        )));
    }
    let (labels, _) = nearest_all(embeddings, centroids.as_matrix());
    Ok(PartitionAssignment::from_raw(labels, centroids.k()))
}

/// Sum over rows of the squared distance to the assigned centroid.
pub fn kmeans_objective(
    embeddings: &EmbeddingMatrix,
    centroids: &Centroids,
    assignment: &PartitionAssignment,
) -> Result<f64> {
    if embeddings.cols() != centroids.dim()
        || embeddings.rows() != assignment.len()
        || assignment.k() != centroids.k()
    {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} embeddings, {}x{} centroids, assignment of {} over k={}",
            embeddings.rows(),
            embeddings.cols(),
            centroids.k(),
            centroids.dim(),
            assignment.len(),
            assignment.k()
        )));
    }
    let dists: Vec<f64> = (0..embeddings.rows())
        .into_par_iter()
        .map(|v| sq_dist(embeddings.row(v), centroids.centroid(assignment.part_of(v))))
        .collect();
    Ok(sum(&dists))
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn sum(xs: &[f64]) -> f64 {
    xs.iter().sum()
}

fn nearest(row: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, sq_dist(row, centroids.row(0)));
    for c in 1..centroids.rows() {
        let d = sq_dist(row, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn nearest_all(points: &Matrix, centroids: &Matrix) -> (Vec<usize>, Vec<f64>) {
    (0..points.rows())
        .into_par_iter()
        .map(|i| nearest(points.row(i), centroids))
        .unzip()
}

fn plus_plus_seed(points: &Matrix, k: usize, rng: &mut impl Rng) -> Matrix {
    let m = points.rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..m));
    let mut d2: Vec<f64> = (0..m)
        .map(|i| sq_dist(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total = sum(&d2);
        let pick = if total > 0.0 {
            let target = seed::unit_f64(rng) * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight")
        } else {
            // All remaining mass is on already-covered duplicates.
            let free: Vec<usize> = (0..m).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        for (i, w) in d2.iter_mut().enumerate() {
            let d = sq_dist(points.row(i), points.row(pick));
            if d < *w {
                *w = d;
            }
        }
    }
    let mut values = Vec::with_capacity(k * points.cols());
    for &i in &chosen {
        values.extend_from_slice(points.row(i));
    }
    Matrix::from_raw(k, points.cols(), values)
}

/// Per-cluster means; empty clusters keep their previous centroid until
/// [`reseed_empty`] replaces it.
fn update_means(points: &Matrix, labels: &[usize], previous: &Matrix) -> Matrix {
    let (k, d) = (previous.rows(), previous.cols());
    let partials: Vec<(Vec<f64>, Vec<usize>)> = labels
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, labels)| {
            let mut sums = vec![0.0; k * d];
            let mut counts = vec![0usize; k];
            for (j, &c) in labels.iter().enumerate() {
                let row = points.row(chunk * CHUNK + j);
                counts[c] += 1;
                for (s, x) in sums[c * d..(c + 1) * d].iter_mut().zip(row) {
                    *s += x;
                }
            }
            (sums, counts)
        })
        .collect();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (s, c) in partials {
        sums.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        counts.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
    }
    for c in 0..k {
        let block = &mut sums[c * d..(c + 1) * d];
        if counts[c] == 0 {
            block.copy_from_slice(previous.row(c));
        } else {
            let count = counts[c] as f64;
            block.iter_mut().for_each(|x| *x /= count);
        }
    }
    Matrix::from_raw(k, d, sums)
}

/// Moves each empty cluster's centroid onto the sample point farthest from
/// its own centroid, using distinct points for distinct empty clusters.
fn reseed_empty(points: &Matrix, labels: &[usize], centroids: &mut Matrix) {
    let k = centroids.rows();
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&c| counts[c] += 1);
    let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut by_distance: Vec<(f64, usize)> = labels
        .iter()
        .enumerate()
        .map(|(i, &c)| (sq_dist(points.row(i), centroids.row(c)), i))
        .collect();
    by_distance.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let d = centroids.cols();
    for (&c, &(_, i)) in empty.iter().zip(&by_distance) {
        let row = points.row(i).to_vec();
        centroids.values_mut()[c * d..(c + 1) * d].copy_from_slice(&row);
    }
}
