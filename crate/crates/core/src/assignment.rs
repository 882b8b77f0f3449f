//! Total vertex → partition maps and their text format.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::reorder::Ordering;

/// Partition id in `[0, k)` for every vertex.
///
/// `k` is kept explicitly because partitions may be empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionAssignment {
    parts: Vec<usize>,
    k: usize,
}

impl PartitionAssignment {
    pub fn new(parts: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if let Some((v, &p)) = parts.iter().enumerate().find(|&(_, &p)| p >= k) {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} assigned to partition {p} >= k={k}"
            )));
        }
        Ok(Self { parts, k })
    }

    pub(crate) fn from_raw(parts: Vec<usize>, k: usize) -> Self {
        debug_assert!(parts.iter().all(|&p| p < k));
        Self { parts, k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn part_of(&self, v: usize) -> usize {
        self.parts[v]
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub(crate) fn set(&mut self, v: usize, p: usize) {
        debug_assert!(p < self.k);
        self.parts[v] = p;
    }

    /// Number of vertices in each partition.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &p in &self.parts {
            sizes[p] += 1;
        }
        sizes
    }

    /// The same assignment expressed over relabeled vertex ids.
    pub fn permute(&self, ordering: &Ordering) -> Result<Self> {
        if ordering.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "ordering over {} vertices applied to an assignment of {}",
                ordering.len(),
                self.len()
            )));
        }
        let mut parts = vec![0; self.len()];
        for (old, &p) in self.parts.iter().enumerate() {
            parts[ordering.new_id(old)] = p;
        }
        Ok(Self::from_raw(parts, self.k))
    }

    /// Reads "vertex_id partition_id" lines covering every vertex in `[0, n)`.
    ///
    /// With `k = None` the partition count is inferred as max id + 1.
    pub fn load(path: impl AsRef<Path>, n: usize, k: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut parts = vec![usize::MAX; n];
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(path, lineno, "expected \"vertex_id partition_id\""));
            };
            let parse = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(path, lineno, format!("bad integer {t:?}")))
            };
            let (v, p) = (parse(a)?, parse(b)?);
            if v >= n {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("vertex id {v} out of range for {n} vertices"),
                ));
            }
            if let Some(k) = k {
                if p >= k {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("partition id {p} out of range for k={k}"),
                    ));
                }
            }
            if parts[v] != usize::MAX {
                return Err(Error::parse(path, lineno, format!("vertex {v} assigned twice")));
            }
            parts[v] = p;
        }
        if let Some(v) = parts.iter().position(|&p| p == usize::MAX) {
            return Err(Error::InvalidArgument(format!(
                "{}: vertex {v} has no partition",
                path.display()
            )));
        }
        let k = k.unwrap_or_else(|| parts.iter().max().map_or(1, |&m| m + 1));
        Ok(Self::from_raw(parts, k))
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (v, p) in self.parts.iter().enumerate() {
            writeln!(out, "{v} {p}")?;
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

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn rejects_ids_at_or_above_k() {
        assert!(PartitionAssignment::new(vec![0, 2], 2).is_err());
        assert!(PartitionAssignment::new(vec![], 0).is_err());
    }

    #[test]
    fn load_infers_k() {
        let f = file("0 1\n1 0\n2 3\n");
        let a = PartitionAssignment::load(f.path(), 3, None).unwrap();
        assert_eq!(a.k(), 4);
        assert_eq!(a.sizes(), vec![1, 1, 0, 1]);
    }

    #[test]
    fn load_errors_name_the_line() {
        let f = file("0 0\n5 1\n");
        let err = PartitionAssignment::load(f.path(), 2, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let f = file("0 0\n1 4\n");
        let err = PartitionAssignment::load(f.path(), 2, Some(2)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let f = file("0 0\n");
        assert!(PartitionAssignment::load(f.path(), 2, None).is_err());
    }

    #[test]
    fn write_load_round_trip() {
        let a = PartitionAssignment::new(vec![2, 0, 1, 1], 3).unwrap();
        let mut buf = Vec::new();
        a.write(&mut buf).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        assert_eq!(PartitionAssignment::load(f.path(), 4, Some(3)).unwrap(), a);
    }
}
