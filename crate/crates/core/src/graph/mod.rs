//! Immutable CSR representation of undirected simple graphs.

mod sbm;

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::reorder::Ordering;

pub use sbm::sbm_generate;

/// Undirected simple graph in compressed sparse row form.
///
/// Every edge `{u, v}` is stored in both adjacency lists. Lists are sorted
/// ascending with no duplicates and no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph over `[0, n)` from arbitrary endpoint pairs.
    ///
    /// Pairs are symmetrized, duplicates collapsed and self-loops dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|(u, v)| u != v).collect();
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return Err(Error::InvalidArgument(format!(
                "edge ({u}, {v}) references a vertex outside [0, {n})"
            )));
        }

        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in &edges {
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut raw = vec![0usize; offsets[n]];
        for &(u, v) in &edges {
            raw[fill[u]] = v;
            fill[u] += 1;
            raw[fill[v]] = u;
            fill[v] += 1;
        }
        drop(edges);

        let mut compact = Vec::with_capacity(raw.len());
        let mut new_offsets = Vec::with_capacity(n + 1);
        new_offsets.push(0);
        for v in 0..n {
            let slice = &mut raw[offsets[v]..offsets[v + 1]];
            slice.sort_unstable();
            let mut last = None;
            for &u in slice.iter() {
                if last != Some(u) {
                    compact.push(u);
                    last = Some(u);
                }
            }
            new_offsets.push(compact.len());
        }
        let edge_count = compact.len() / 2;
        Ok(Self {
            offsets: new_offsets,
            neighbors: compact,
            edge_count,
        })
    }

    /// Wraps existing CSR arrays after a full invariant scan.
    pub fn from_csr(offsets: Vec<usize>, neighbors: Vec<usize>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidArgument("offsets must have n + 1 entries".into()));
        }
        if !neighbors.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(
                "odd adjacency length cannot be symmetric".into(),
            ));
        }
        let g = Self {
            edge_count: neighbors.len() / 2,
            offsets,
            neighbors,
        };
        g.validate()?;
        Ok(g)
    }

    /// Checks every structural invariant: offsets shape, sorted duplicate-free
    /// lists without self-loops, and symmetry.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vertices();
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.offsets[0] != 0 {
            return bad("offsets[0] != 0".into());
        }
        if self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets not non-decreasing".into());
        }
        if self.offsets[n] != self.neighbors.len() || self.neighbors.len() != 2 * self.edge_count {
            return bad("offsets[n] != 2 * |E|".into());
        }
        for v in 0..n {
            let nbrs = self.neighbors(v);
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("adjacency of {v} not strictly ascending"));
            }
            for &u in nbrs {
                if u >= n {
                    return bad(format!("neighbor {u} of {v} out of range"));
                }
                if u == v {
                    return bad(format!("self-loop at {v}"));
                }
                if self.neighbors(u).binary_search(&v).is_err() {
                    return bad(format!("edge {v}->{u} has no reverse"));
                }
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges |E|.
    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn adjacency(&self) -> &[usize] {
        &self.neighbors
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Each undirected edge once as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Relabels vertex `v` as `ordering.new_id(v)`.
    pub fn relabel(&self, ordering: &Ordering) -> Result<Self> {
        let n = self.num_vertices();
        if ordering.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "ordering over {} vertices applied to a graph of {n}",
                ordering.len()
            )));
        }
        let inverse = ordering.inverse();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        offsets.push(0);
        for &old in inverse.perm() {
            let start = neighbors.len();
            neighbors.extend(self.neighbors(old).iter().map(|&u| ordering.new_id(u)));
            neighbors[start..].sort_unstable();
            offsets.push(neighbors.len());
        }
        Ok(Self {
            offsets,
            neighbors,
            edge_count: self.edge_count,
        })
    }

    /// Subgraph induced by `vertices`, relabeled to `0..vertices.len()` in the
    /// given order.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Self> {
        let n = self.num_vertices();
        let mut local = vec![usize::MAX; n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
            }
            if local[v] != usize::MAX {
                return Err(Error::InvalidArgument(format!("vertex {v} listed twice")));
            }
            local[v] = i;
        }
        let edges = vertices.iter().flat_map(|&v| {
            let local = &local;
            self.neighbors(v)
                .iter()
                .filter(move |&&u| local[u] != usize::MAX)
                .map(move |&u| (local[v], local[u]))
        });
        Self::from_edges(vertices.len(), edges)
    }

    /// Reads a whitespace-separated "u v" edge list. Blank lines and lines
    /// starting with `#` are ignored, except that a `# vertices N` line
    /// declares at least `N` vertices. Otherwise the vertex set is `[0, max id]`.
    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut edges = Vec::new();
        let mut max_id = None;
        let mut declared = 0;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            let lineno = idx + 1;
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(count) = comment.trim().strip_prefix("vertices ") {
                    declared = count.trim().parse().map_err(|_| {
                        Error::parse(path, lineno, format!("bad vertex count {:?}", count.trim()))
                    })?;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(path, lineno, "expected two vertex ids"));
            };
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(path, lineno, format!("bad vertex id {t:?}")))
            };
            let (u, v) = (parse(a)?, parse(b)?);
            max_id = max_id.max(Some(u.max(v)));
            edges.push((u, v));
        }
        let n = max_id.map_or(declared, |m| declared.max(m + 1));
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Self::from_edges(n, edges)
    }

    /// Writes each undirected edge once as "u v" with `u < v`.
    ///
    /// Isolated trailing vertices cannot be expressed in this format, so a
    /// `# vertices N` comment line is emitted first for readers that care.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# vertices {}", self.num_vertices())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edge_list(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}
