//! Train / validation / rest labeling of vertices.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::reorder::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexClass {
    Train,
    Val,
    Rest,
}

impl VertexClass {
    pub const ALL: [VertexClass; 3] = [VertexClass::Train, VertexClass::Val, VertexClass::Rest];

    pub fn as_str(self) -> &'static str {
        match self {
            VertexClass::Train => "train",
            VertexClass::Val => "val",
            VertexClass::Rest => "rest",
        }
    }
}

impl fmt::Display for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VertexClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(VertexClass::Train),
            "val" => Ok(VertexClass::Val),
            "rest" => Ok(VertexClass::Rest),
            other => Err(format!("unknown class {other:?} (expected train, val or rest)")),
        }
    }
}

/// Total labeling of `[0, n)` with exactly one [`VertexClass`] per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSplit {
    classes: Vec<VertexClass>,
}

impl NodeSplit {
    pub fn new(classes: Vec<VertexClass>) -> Self {
        Self { classes }
    }

    pub fn all_rest(n: usize) -> Self {
        Self::new(vec![VertexClass::Rest; n])
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, v: usize) -> VertexClass {
        self.classes[v]
    }

    pub fn classes(&self) -> &[VertexClass] {
        &self.classes
    }

    /// Vertices carrying `class`, ascending.
    pub fn vertices_of(&self, class: VertexClass) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == class)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn count(&self, class: VertexClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn permute(&self, ordering: &Ordering) -> Result<Self> {
        if ordering.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "ordering over {} vertices applied to a split of {}",
                ordering.len(),
                self.len()
            )));
        }
        let mut classes = vec![VertexClass::Rest; self.len()];
        for (old, &c) in self.classes.iter().enumerate() {
            classes[ordering.new_id(old)] = c;
        }
        Ok(Self::new(classes))
    }

    /// Reads "vertex_id class" lines. Unlisted vertices are `Rest`; when a
    /// vertex is listed more than once the last line wins.
    pub fn load(path: impl AsRef<Path>, n: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut classes = vec![VertexClass::Rest; n];
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let mut it = line.split_whitespace();
            let (Some(id), Some(class), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::parse(path, lineno, "expected \"vertex_id class\""));
            };
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad vertex id {id:?}")))?;
            if id >= n {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("vertex id {id} out of range for {n} vertices"),
                ));
            }
            classes[id] = class.parse().map_err(|m| Error::parse(path, lineno, m))?;
        }
        Ok(Self::new(classes))
    }

    /// Writes one "vertex_id class" line per vertex.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (v, c) in self.classes.iter().enumerate() {
            writeln!(out, "{v} {c}")?;
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
    fn unlisted_default_to_rest() {
        let f = file("0 train\n1 val");
        let s = NodeSplit::load(f.path(), 3).unwrap();
        assert_eq!(
            s.classes(),
            &[VertexClass::Train, VertexClass::Val, VertexClass::Rest]
        );
    }

    #[test]
    fn empty_file_is_all_rest() {
        let f = file("");
        assert_eq!(NodeSplit::load(f.path(), 5).unwrap(), NodeSplit::all_rest(5));
    }

    #[test]
    fn out_of_range_id() {
        let f = file("7 train");
        let err = NodeSplit::load(f.path(), 3).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn unknown_class() {
        let f = file("0 test\n");
        assert!(matches!(NodeSplit::load(f.path(), 3), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_load() {
        let s = NodeSplit::new(vec![VertexClass::Val, VertexClass::Rest, VertexClass::Train]);
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        assert_eq!(NodeSplit::load(f.path(), 3).unwrap(), s);
    }
}
