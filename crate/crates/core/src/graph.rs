//! Ground-truth colored graph: the hidden world the sampler explores.
//!
//! A [`WorldGraph`] is a simple undirected graph over dense [`NodeId`]s with a
//! true [`Color`], a hierarchy score and an honesty value per node. Graphs are
//! read from a whitespace edge list plus a `id,color,hierarchy` node CSV, and
//! written back in the same two-file layout.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn is_red(self) -> bool {
        self == Color::Red
    }

    /// 0 for red, 1 for blue. Used to index counter tables.
    #[inline]
    pub fn slot(self) -> usize {
        match self {
            Color::Red => 0,
            Color::Blue => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "red" => Ok(Color::Red),
            "blue" => Ok(Color::Blue),
            other => Err(format!("unknown color {other:?} (expected red or blue)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: edge references unknown node id {id:?}")]
    UnknownNode { path: PathBuf, line: u64, id: String },
    #[error("{path}:{line}: duplicate node id {id:?}")]
    DuplicateNode { path: PathBuf, line: u64, id: String },
    #[error("{path}:{line}: hierarchy for node {id:?} must be positive, got {value}")]
    NonPositiveHierarchy {
        path: PathBuf,
        line: u64,
        id: String,
        value: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Counts of edge-list lines that were dropped while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    pub self_loops: usize,
    pub duplicate_edges: usize,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.self_loops + self.duplicate_edges
    }
}

/// The hidden network: topology, true colors, hierarchy and honesty.
///
/// Adjacency lists are sorted ascending and free of duplicates and self loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldGraph {
    pub name: String,
    adjacency: Vec<Vec<NodeId>>,
    colors: Vec<Color>,
    hierarchy: Vec<f64>,
    honesty: Vec<f64>,
    labels: Vec<String>,
}

impl WorldGraph {
    /// Builds a graph from an edge iterator, dropping self loops and repeated
    /// edges. Honesty starts at 1 for every node.
    pub fn from_edges<I>(
        name: impl Into<String>,
        colors: Vec<Color>,
        hierarchy: Vec<f64>,
        labels: Vec<String>,
        edges: I,
    ) -> Result<(Self, LoadWarnings), GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let n = colors.len();
        if hierarchy.len() != n || labels.len() != n {
            return Err(GraphError::InvalidArgument(format!(
                "colors ({}), hierarchy ({}) and labels ({}) must have equal length",
                n,
                hierarchy.len(),
                labels.len()
            )));
        }
        if let Some((i, h)) = hierarchy
            .iter()
            .enumerate()
            .find(|(_, h)| !(**h > 0.0 && h.is_finite()))
        {
            return Err(GraphError::InvalidArgument(format!(
                "hierarchy of node {} must be positive, got {h}",
                labels[i]
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut warnings = LoadWarnings::default();
        for (u, v) in edges {
            if u.index() >= n || v.index() >= n {
                return Err(GraphError::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                warnings.self_loops += 1;
                continue;
            }
            adjacency[u.index()].push(v);
            adjacency[v.index()].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            // each duplicate undirected edge shows up once in each endpoint's list
            warnings.duplicate_edges += before - list.len();
        }
        warnings.duplicate_edges /= 2;
        let graph = WorldGraph {
            name: name.into(),
            adjacency,
            colors,
            hierarchy,
            honesty: vec![1.0; n],
            labels,
        };
        Ok((graph, warnings))
    }

    pub fn node_count(&self) -> usize {
        self.colors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    pub fn color(&self, v: NodeId) -> Color {
        self.colors[v.index()]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn hierarchy(&self, v: NodeId) -> f64 {
        self.hierarchy[v.index()]
    }

    pub fn honesty(&self, v: NodeId) -> f64 {
        self.honesty[v.index()]
    }

    pub fn honesty_values(&self) -> &[f64] {
        &self.honesty
    }

    /// External label of a node, as read from the node file.
    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Lookup table from external label to dense id.
    pub fn id_map(&self) -> HashMap<&str, NodeId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), NodeId::from(i)))
            .collect()
    }

    /// Replaces the honesty vector; values are clamped into `[0, 1]`.
    pub fn with_honesty(mut self, honesty: Vec<f64>) -> Result<Self, GraphError> {
        if honesty.len() != self.node_count() {
            return Err(GraphError::InvalidArgument(format!(
                "honesty vector has {} entries for {} nodes",
                honesty.len(),
                self.node_count()
            )));
        }
        self.honesty = honesty.into_iter().map(|h| h.clamp(0.0, 1.0)).collect();
        Ok(self)
    }

    pub fn set_honesty(&mut self, v: NodeId, h: f64) {
        self.honesty[v.index()] = h.clamp(0.0, 1.0);
    }

    pub fn set_hierarchy(&mut self, v: NodeId, h: f64) -> Result<(), GraphError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GraphError::InvalidArgument(format!(
                "hierarchy must be positive, got {h}"
            )));
        }
        self.hierarchy[v.index()] = h;
        Ok(())
    }

    /// Each undirected edge once, as `(low, high)`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = NodeId::from(u);
            list.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    pub fn red_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&v| self.color(v).is_red())
    }

    pub fn red_red_edge_count(&self) -> usize {
        self.edges()
            .filter(|&(u, v)| self.color(u).is_red() && self.color(v).is_red())
            .count()
    }
}

/// Returns `(red, blue)` node counts.
pub fn count_colors(g: &WorldGraph) -> (usize, usize) {
    let red = g.colors.iter().filter(|c| c.is_red()).count();
    (red, g.node_count() - red)
}

/// Copy of `g` with every edge between two red nodes deleted.
pub fn remove_red_red_edges(g: &WorldGraph) -> WorldGraph {
    let mut out = g.clone();
    for (u, list) in out.adjacency.iter_mut().enumerate() {
        if g.colors[u].is_red() {
            list.retain(|v| !g.colors[v.index()].is_red());
        }
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GraphError + '_ {
    move |source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Deserialize)]
struct NodeRow {
    id: String,
    color: String,
    #[serde(default)]
    hierarchy: Option<String>,
}

/// Loads a graph from an edge list and a node CSV.
///
/// Dense ids follow the row order of the node file. Self loops and repeated
/// edges are dropped and counted in the returned [`LoadWarnings`].
pub fn load_graph(
    edge_file: impl AsRef<Path>,
    node_file: impl AsRef<Path>,
) -> Result<(WorldGraph, LoadWarnings), GraphError> {
    let edge_file = edge_file.as_ref();
    let node_file = node_file.as_ref();

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(node_file)
        .map_err(|source| GraphError::Csv {
            path: node_file.to_path_buf(),
            source,
        })?;

    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut labels = Vec::new();
    let mut colors = Vec::new();
    let mut hierarchy = Vec::new();
    for row in reader.deserialize::<NodeRow>() {
        let row = row.map_err(|source| GraphError::Csv {
            path: node_file.to_path_buf(),
            source,
        })?;
        // header is line 1; the reader's position is not exposed for deserialized rows
        let line = labels.len() as u64 + 2;
        let color = row.color.parse::<Color>().map_err(|message| GraphError::Parse {
            path: node_file.to_path_buf(),
            line,
            message,
        })?;
        let h = match row.hierarchy.as_deref().map(str::trim) {
            None | Some("") => 1.0,
            Some(text) => text.parse::<f64>().map_err(|e| GraphError::Parse {
                path: node_file.to_path_buf(),
                line,
                message: format!("bad hierarchy {text:?}: {e}"),
            })?,
        };
        if !(h > 0.0 && h.is_finite()) {
            return Err(GraphError::NonPositiveHierarchy {
                path: node_file.to_path_buf(),
                line,
                id: row.id,
                value: h,
            });
        }
        if index.contains_key(&row.id) {
            return Err(GraphError::DuplicateNode {
                path: node_file.to_path_buf(),
                line,
                id: row.id,
            });
        }
        index.insert(row.id.clone(), NodeId::from(labels.len()));
        labels.push(row.id);
        colors.push(color);
        hierarchy.push(h);
    }

    let file = File::open(edge_file).map_err(io_err(edge_file))?;
    let mut edges = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(edge_file))?;
        let lineno = i as u64 + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(GraphError::Parse {
                    path: edge_file.to_path_buf(),
                    line: lineno,
                    message: format!("expected two node ids, got {content:?}"),
                })
            }
        };
        let lookup = |id: &str| {
            index.get(id).copied().ok_or_else(|| GraphError::UnknownNode {
                path: edge_file.to_path_buf(),
                line: lineno,
                id: id.to_string(),
            })
        };
        edges.push((lookup(a)?, lookup(b)?));
    }

    let name = node_file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let (graph, warnings) = WorldGraph::from_edges(name, colors, hierarchy, labels, edges)?;
    if warnings.total() > 0 {
        log::warn!(
            "{}: dropped {} self loop(s) and {} duplicate edge(s)",
            edge_file.display(),
            warnings.self_loops,
            warnings.duplicate_edges
        );
    }
    Ok((graph, warnings))
}

/// Writes `g` as an edge list and a node CSV readable by [`load_graph`].
pub fn save_graph(
    g: &WorldGraph,
    edge_file: impl AsRef<Path>,
    node_file: impl AsRef<Path>,
) -> Result<(), GraphError> {
    let edge_file = edge_file.as_ref();
    let node_file = node_file.as_ref();

    let mut out = BufWriter::new(File::create(edge_file).map_err(io_err(edge_file))?);
    for (u, v) in g.edges() {
        writeln!(out, "{} {}", g.label(u), g.label(v)).map_err(io_err(edge_file))?;
    }
    out.flush().map_err(io_err(edge_file))?;

    let csv_err = |source| GraphError::Csv {
        path: node_file.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(node_file).map_err(csv_err)?;
    w.write_record(["id", "color", "hierarchy"]).map_err(csv_err)?;
    for v in g.nodes() {
        w.write_record([
            g.label(v).to_string(),
            g.color(v).to_string(),
            g.hierarchy(v).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(node_file))?;
    Ok(())
}
