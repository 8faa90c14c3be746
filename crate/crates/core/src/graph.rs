//! Immutable directed graphs in compressed sparse row layout.
//!
//! A [`Graph`] stores both directions of every edge: the out-adjacency
//! (`A(x)`, the vertices `x` links to) and the in-adjacency (`D(x)`, the
//! vertices linking to `x`). Neighbor lists are sorted and duplicate-free so
//! that intersections reduce to linear merges. The undirected view
//! `Γ(x) = A(x) ∪ D(x)` is materialized on first use and cached.
//!
//! Vertices are dense ids `0..vertex_count`. Graphs loaded from text keep the
//! external id of every vertex as a label.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use thiserror::Error;

/// Dense internal vertex id.
pub type VertexId = u32;

/// A directed edge `(source, target)` in dense ids.
pub type Edge = (VertexId, VertexId);

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error("vertex {vertex} out of range for a graph with {vertex_count} vertices")]
    VertexOutOfRange { vertex: u64, vertex_count: usize },
    #[error("graph has more vertices than fit in a 32-bit id")]
    TooManyVertices,
    #[error("label table has {labels} entries for {vertex_count} vertices")]
    LabelCount { labels: usize, vertex_count: usize },
}

/// How vertex ids are written in an edge list.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// Non-negative integer ids (SNAP-style dumps). Distinct ids are mapped to
    /// dense ids in ascending numeric order.
    #[default]
    Integer,
    /// Arbitrary whitespace-free tokens, mapped to dense ids in ascending
    /// lexicographic order.
    Token,
}

impl std::str::FromStr for EdgeListFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int" | "integer" | "snap" => Ok(Self::Integer),
            "token" | "string" => Ok(Self::Token),
            other => Err(format!("unknown edge-list format `{other}` (expected `int` or `token`)")),
        }
    }
}

impl fmt::Display for EdgeListFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integer => f.write_str("int"),
            Self::Token => f.write_str("token"),
        }
    }
}

/// Counters reported while building a graph. Duplicates and self-loops are
/// dropped, never rejected.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    /// Edge records read, before any filtering.
    pub raw_edges: usize,
    pub duplicate_edges: usize,
    pub self_loops: usize,
}

impl BuildStats {
    pub fn retained_edges(&self) -> usize {
        self.raw_edges - self.duplicate_edges - self.self_loops
    }
}

/// One direction of adjacency: an offset array into a flat neighbor array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Csr {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
}

impl Csr {
    /// Builds from `(row, column)` pairs already sorted by row then column
    /// and free of duplicates.
    fn from_sorted_pairs(rows: usize, pairs: impl Iterator<Item = Edge> + Clone) -> Self {
        let mut offsets = vec![0usize; rows + 1];
        for (r, _) in pairs.clone() {
            offsets[r as usize + 1] += 1;
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = pairs.map(|(_, c)| c).collect();
        Self { offsets, neighbors }
    }

    #[inline]
    pub fn row(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total number of stored neighbor entries.
    pub fn nnz(&self) -> usize {
        self.neighbors.len()
    }
}

/// Immutable simple directed graph.
#[derive(Clone)]
pub struct Graph {
    out_adj: Csr,
    in_adj: Csr,
    labels: Option<Vec<String>>,
    undirected: OnceLock<Csr>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.out_adj == other.out_adj && self.in_adj == other.in_adj && self.labels == other.labels
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("vertex_count", &self.vertex_count())
            .field("edge_count", &self.edge_count())
            .field("labelled", &self.labels.is_some())
            .finish()
    }
}

impl Graph {
    /// Builds a graph on `vertex_count` vertices. Self-loops and repeated
    /// edges are dropped and counted.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<(Self, BuildStats), GraphError>
    where
        I: IntoIterator<Item = Edge>,
    {
        if vertex_count > VertexId::MAX as usize {
            return Err(GraphError::TooManyVertices);
        }
        let mut stats = BuildStats::default();
        let mut list = Vec::new();
        for (u, v) in edges {
            stats.raw_edges += 1;
            for w in [u, v] {
                if w as usize >= vertex_count {
                    return Err(GraphError::VertexOutOfRange { vertex: w as u64, vertex_count });
                }
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            list.push((u, v));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        stats.duplicate_edges = before - list.len();
        Ok((Self::from_sorted_unique(vertex_count, &list), stats))
    }

    fn from_sorted_unique(vertex_count: usize, edges: &[Edge]) -> Self {
        let out_adj = Csr::from_sorted_pairs(vertex_count, edges.iter().copied());
        let mut reversed: Vec<Edge> = edges.iter().map(|&(u, v)| (v, u)).collect();
        reversed.sort_unstable();
        let in_adj = Csr::from_sorted_pairs(vertex_count, reversed.iter().copied());
        Self { out_adj, in_adj, labels: None, undirected: OnceLock::new() }
    }

    /// Attaches external labels, one per vertex.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.vertex_count() {
            return Err(GraphError::LabelCount {
                labels: labels.len(),
                vertex_count: self.vertex_count(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// A graph on the same vertex set (and labels) without the given edges.
    /// Edges not present in `self` are ignored.
    pub fn without_edges(&self, removed: &BTreeSet<Edge>) -> Self {
        let kept: Vec<Edge> = self.edges().filter(|e| !removed.contains(e)).collect();
        let mut g = Self::from_sorted_unique(self.vertex_count(), &kept);
        g.labels = self.labels.clone();
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.out_adj.rows()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.nnz()
    }

    /// `A(v)`: sorted out-neighbors. Panics if `v` is out of range.
    #[inline]
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.out_adj.row(v)
    }

    /// `D(v)`: sorted in-neighbors. Panics if `v` is out of range.
    #[inline]
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.in_adj.row(v)
    }

    /// `Γ(v) = A(v) ∪ D(v)`. Panics if `v` is out of range.
    #[inline]
    pub fn undirected_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.undirected().row(v)
    }

    pub fn neighbors_out(&self, v: VertexId) -> Result<&[VertexId], GraphError> {
        self.check_vertex(v)?;
        Ok(self.out_neighbors(v))
    }

    pub fn neighbors_in(&self, v: VertexId) -> Result<&[VertexId], GraphError> {
        self.check_vertex(v)?;
        Ok(self.in_neighbors(v))
    }

    pub fn neighbors_undirected(&self, v: VertexId) -> Result<&[VertexId], GraphError> {
        self.check_vertex(v)?;
        Ok(self.undirected_neighbors(v))
    }

    fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v as u64, vertex_count: self.vertex_count() })
        }
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj.degree(v)
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_adj.degree(v)
    }

    /// In-degree plus out-degree.
    pub fn total_degree(&self, v: VertexId) -> usize {
        self.out_degree(v) + self.in_degree(v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        (u as usize) < self.vertex_count() && self.out_neighbors(u).binary_search(&v).is_ok()
    }

    /// All edges in ascending `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.vertex_count() as VertexId)
            .flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.as_ref().and_then(|l| l.get(v as usize)).map(String::as_str)
    }

    /// Dense id for an external label, by linear scan.
    pub fn find_label(&self, label: &str) -> Option<VertexId> {
        self.labels.as_ref()?.iter().position(|l| l == label).map(|i| i as VertexId)
    }

    /// The cached undirected view.
    pub fn undirected(&self) -> &Csr {
        self.undirected.get_or_init(|| {
            let n = self.vertex_count();
            let mut offsets = Vec::with_capacity(n + 1);
            let mut neighbors = Vec::with_capacity(self.edge_count() * 2);
            offsets.push(0);
            for v in 0..n as VertexId {
                merge_union(self.out_neighbors(v), self.in_neighbors(v), &mut neighbors);
                offsets.push(neighbors.len());
            }
            neighbors.shrink_to_fit();
            Csr { offsets, neighbors }
        })
    }

    /// External name of a vertex: its label, or the dense id.
    pub fn display_vertex(&self, v: VertexId) -> String {
        self.label(v).map_or_else(|| v.to_string(), str::to_owned)
    }
}

/// Appends the sorted union of two sorted, duplicate-free slices.
fn merge_union(a: &[VertexId], b: &[VertexId], out: &mut Vec<VertexId>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Reads a whitespace-separated edge list. Lines starting with `#` and blank
/// lines are skipped; every other line must hold exactly two ids.
///
/// Every id that appears on a well-formed line becomes a vertex, including
/// ids that only occur in dropped self-loops.
pub fn load_edge_list<R: BufRead>(
    reader: R,
    format: EdgeListFormat,
) -> Result<(Graph, BuildStats), GraphError> {
    let mut raw: Vec<(String, String)> = Vec::new();
    let mut ints: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(GraphError::Parse {
                line: lineno,
                message: format!(
                    "expected 2 fields, found {}",
                    trimmed.split_whitespace().count()
                ),
            });
        };
        match format {
            EdgeListFormat::Integer => {
                let parse = |t: &str| {
                    t.parse::<u64>().map_err(|_| GraphError::Parse {
                        line: lineno,
                        message: format!("`{t}` is not a non-negative integer id"),
                    })
                };
                ints.push((parse(a)?, parse(b)?));
            }
            EdgeListFormat::Token => raw.push((a.to_owned(), b.to_owned())),
        }
    }
    match format {
        EdgeListFormat::Integer => {
            if ints.is_empty() {
                return Err(GraphError::Empty);
            }
            let mut ids: Vec<u64> = ints.iter().flat_map(|&(a, b)| [a, b]).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() > VertexId::MAX as usize {
                return Err(GraphError::TooManyVertices);
            }
            let dense = |x: u64| ids.binary_search(&x).expect("id collected above") as VertexId;
            let edges: Vec<Edge> = ints.iter().map(|&(a, b)| (dense(a), dense(b))).collect();
            let (g, stats) = Graph::from_edges(ids.len(), edges)?;
            let labels = ids.iter().map(u64::to_string).collect();
            Ok((g.with_labels(labels)?, stats))
        }
        EdgeListFormat::Token => {
            if raw.is_empty() {
                return Err(GraphError::Empty);
            }
            let mut ids: Vec<&str> = raw.iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
            ids.sort_unstable();
            ids.dedup();
            if ids.len() > VertexId::MAX as usize {
                return Err(GraphError::TooManyVertices);
            }
            let dense = |x: &str| ids.binary_search(&x).expect("id collected above") as VertexId;
            let edges: Vec<Edge> = raw.iter().map(|(a, b)| (dense(a), dense(b))).collect();
            let (g, stats) = Graph::from_edges(ids.len(), edges)?;
            let labels = ids.iter().map(|s| (*s).to_owned()).collect();
            Ok((g.with_labels(labels)?, stats))
        }
    }
}

/// Writes the canonical edge list: one `u v` line per edge, sorted by dense
/// `(u, v)`, using labels when present.
pub fn write_edge_list<W: Write>(g: &Graph, mut w: W) -> std::io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", g.display_vertex(u), g.display_vertex(v))?;
    }
    w.flush()
}
