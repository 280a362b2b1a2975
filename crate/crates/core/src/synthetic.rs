//! Seeded synthetic worlds for experiments that cannot ship real data.
//!
//! Every mode starts from a connected random base graph (random recursive
//! tree plus uniformly placed extra edges). Hierarchy is set to node degree.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{remove_red_red_edges, Color, GraphError, NodeId, WorldGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticMode {
    /// Red nodes are wired to each other on top of the base graph.
    Homophily,
    /// `Homophily` followed by red-red edge removal.
    NoHomophily,
    /// No red-red edges; red nodes have a much larger degree than blue nodes.
    StructuralSignal,
}

impl FromStr for SyntheticMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "homophily" => Ok(SyntheticMode::Homophily),
            "no_homophily" => Ok(SyntheticMode::NoHomophily),
            "structural_signal" => Ok(SyntheticMode::StructuralSignal),
            other => Err(format!(
                "unknown synthetic mode {other:?} (expected homophily, no_homophily or structural_signal)"
            )),
        }
    }
}

impl fmt::Display for SyntheticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticMode::Homophily => "homophily",
            SyntheticMode::NoHomophily => "no_homophily",
            SyntheticMode::StructuralSignal => "structural_signal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub red_fraction: f64,
    pub mode: SyntheticMode,
    pub seed: u64,
    /// Target mean degree of the base graph.
    pub base_degree: f64,
    /// Extra red-to-red links drawn per red node in the homophily modes, on
    /// top of a random tree that keeps the red subgraph connected.
    pub red_links: usize,
    /// Minimum gap between mean red degree and mean blue degree in
    /// `StructuralSignal` mode.
    pub degree_offset: f64,
}

impl SyntheticSpec {
    pub fn new(n: usize, red_fraction: f64, mode: SyntheticMode, seed: u64) -> Self {
        SyntheticSpec {
            n,
            red_fraction,
            mode,
            seed,
            base_degree: 6.0,
            red_links: 2,
            degree_offset: 10.0,
        }
    }

    pub fn red_count(&self) -> usize {
        ((self.n as f64 * self.red_fraction).round() as usize).max(1)
    }

    fn validate(&self) -> Result<(), GraphError> {
        if self.n < 10 {
            return Err(GraphError::InvalidArgument(format!(
                "synthetic graphs need n >= 10, got {}",
                self.n
            )));
        }
        if !(self.red_fraction > 0.0 && self.red_fraction < 0.5) {
            return Err(GraphError::InvalidArgument(format!(
                "red_fraction must lie in (0, 0.5), got {}",
                self.red_fraction
            )));
        }
        if !(self.base_degree >= 2.0 && self.base_degree.is_finite()) {
            return Err(GraphError::InvalidArgument(format!(
                "base_degree must be at least 2, got {}",
                self.base_degree
            )));
        }
        if !(self.degree_offset >= 0.0 && self.degree_offset.is_finite()) {
            return Err(GraphError::InvalidArgument(format!(
                "degree_offset must be non-negative, got {}",
                self.degree_offset
            )));
        }
        Ok(())
    }
}

/// Generates a world with default shape parameters. See [`generate`].
pub fn generate_synthetic(
    n: usize,
    red_fraction: f64,
    mode: SyntheticMode,
    seed: u64,
) -> Result<WorldGraph, GraphError> {
    generate(&SyntheticSpec::new(n, red_fraction, mode, seed))
}

pub fn generate(spec: &SyntheticSpec) -> Result<WorldGraph, GraphError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let reds = spec.red_count();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut colors = vec![Color::Blue; n];
    for &v in &order[..reds] {
        colors[v] = Color::Red;
    }
    let red_nodes: Vec<usize> = order[..reds].to_vec();
    let blue_nodes: Vec<usize> = order[reds..].to_vec();

    let mut edges = EdgeSet::default();
    match spec.mode {
        SyntheticMode::Homophily | SyntheticMode::NoHomophily => {
            edges.random_connected(&order, spec.base_degree, &mut rng);
            // tree over the reds keeps them mutually reachable through red edges
            edges.random_connected(&red_nodes, 0.0, &mut rng);
            if reds > 1 {
                for &r in &red_nodes {
                    for _ in 0..spec.red_links {
                        let other = red_nodes[rng.random_range(0..reds)];
                        edges.insert(r, other);
                    }
                }
            }
        }
        SyntheticMode::StructuralSignal => {
            edges.random_connected(&blue_nodes, spec.base_degree, &mut rng);
            let b = blue_nodes.len();
            let base_mean = 2.0 * edges.len() as f64 / b as f64;
            // red degree k, blue mean base_mean + reds*k/b; solve k - blue_mean >= offset
            let k = ((spec.degree_offset + base_mean) / (1.0 - reds as f64 / b as f64)).ceil();
            let k = (k as usize).min(b);
            for &r in &red_nodes {
                for i in rand::seq::index::sample(&mut rng, b, k) {
                    edges.insert(r, blue_nodes[i]);
                }
            }
        }
    }

    let labels = (0..n).map(|i| i.to_string()).collect();
    let (mut g, _) = WorldGraph::from_edges(
        format!("synthetic-{}-{}", spec.mode, spec.seed),
        colors,
        vec![1.0; n],
        labels,
        edges.pairs.iter().map(|&(a, b)| (NodeId::from(a), NodeId::from(b))),
    )?;
    if spec.mode == SyntheticMode::NoHomophily {
        g = remove_red_red_edges(&g);
    }
    for v in 0..n {
        let v = NodeId::from(v);
        let d = g.degree(v).max(1) as f64;
        g.set_hierarchy(v, d)?;
    }
    Ok(g)
}

/// Insertion-ordered undirected edge set.
#[derive(Default)]
struct EdgeSet {
    seen: HashSet<(usize, usize)>,
    pairs: Vec<(usize, usize)>,
}

impl EdgeSet {
    fn insert(&mut self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let key = (a.min(b), a.max(b));
        if self.seen.insert(key) {
            self.pairs.push(key);
            true
        } else {
            false
        }
    }

    fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Random recursive tree over `nodes`, then uniform extra edges among them
    /// until the induced mean degree reaches `mean_degree`.
    fn random_connected<R: Rng>(&mut self, nodes: &[usize], mean_degree: f64, rng: &mut R) {
        let m = nodes.len();
        if m < 2 {
            return;
        }
        for i in 1..m {
            let j = rng.random_range(0..i);
            self.insert(nodes[i], nodes[j]);
        }
        let max_edges = m * (m - 1) / 2;
        let target = ((mean_degree * m as f64 / 2.0).round() as usize).min(max_edges);
        let mut added = m - 1;
        while added < target {
            let a = nodes[rng.random_range(0..m)];
            let b = nodes[rng.random_range(0..m)];
            if self.insert(a, b) {
                added += 1;
            }
        }
    }
}
