//! What the sampler knows: the observed part of the graph, true colors of
//! monitored nodes, every statement received, and how often each kind of
//! statement turned out to be right once its subject was monitored.
//!
//! Feature extraction for candidate nodes lives here too.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{Color, NodeId};
use crate::oracle::MonitorReport;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObserverError {
    #[error("node {0} is already monitored")]
    AlreadyMonitored(NodeId),
    #[error("node {0} has not been observed yet")]
    NotObserved(NodeId),
    #[error("node {0} is monitored; features are only defined for candidates")]
    Monitored(NodeId),
    #[error("node {0} is outside the id space of this observer")]
    OutOfRange(NodeId),
    #[error("malformed report for node {0}: {1}")]
    MalformedReport(NodeId, String),
}

/// Verified-statement counters indexed by
/// `(speaker true color, said color, subject true color)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifiedCounts([[[u32; 2]; 2]; 2]);

impl VerifiedCounts {
    pub fn get(&self, speaker: Color, said: Color, subject: Color) -> u32 {
        self.0[speaker.slot()][said.slot()][subject.slot()]
    }

    pub fn increment(&mut self, speaker: Color, said: Color, subject: Color) {
        self.0[speaker.slot()][said.slot()][subject.slot()] += 1;
    }

    fn decrement(&mut self, speaker: Color, said: Color, subject: Color) {
        self.0[speaker.slot()][said.slot()][subject.slot()] -= 1;
    }

    pub fn total(&self) -> u32 {
        self.0.iter().flatten().flatten().sum()
    }

    /// Laplace-smoothed `P(subject red | speaker color, said color)`.
    pub fn trust(&self, speaker: Color, said: Color) -> f64 {
        let red = self.get(speaker, said, Color::Red) as f64;
        let blue = self.get(speaker, said, Color::Blue) as f64;
        (red + 1.0) / (red + blue + 2.0)
    }
}

pub const FEATURE_COUNT: usize = 9;

/// Per-candidate features in a fixed order:
///
/// 0. monitored red neighbors
/// 1. monitored blue neighbors
/// 2. observed edges between two monitored red neighbors
/// 3. statements calling the node red
/// 4. red speakers saying red
/// 5. red speakers saying blue
/// 6. blue speakers saying red
/// 7. blue speakers saying blue
/// 8. trust-weighted probability of being red inferred from the statements
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn red_neighbors(&self) -> f64 {
        self.0[0]
    }
    pub fn blue_neighbors(&self) -> f64 {
        self.0[1]
    }
    pub fn red_triangles(&self) -> f64 {
        self.0[2]
    }
    pub fn red_score(&self) -> f64 {
        self.0[3]
    }
    pub fn red_say_red(&self) -> f64 {
        self.0[4]
    }
    pub fn red_say_blue(&self) -> f64 {
        self.0[5]
    }
    pub fn blue_say_red(&self) -> f64 {
        self.0[6]
    }
    pub fn blue_say_blue(&self) -> f64 {
        self.0[7]
    }
    pub fn inferred_red(&self) -> f64 {
        self.0[8]
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    observed: Vec<bool>,
    observed_order: Vec<NodeId>,
    monitored: Vec<Option<Color>>,
    monitor_order: Vec<NodeId>,
    /// Observed neighbors per node. Every observed edge touches a monitored node.
    known_adj: Vec<Vec<NodeId>>,
    edges: HashSet<(NodeId, NodeId)>,
    statements: HashMap<(NodeId, NodeId), Color>,
    /// `(speaker, said)` for every statement about a node, in arrival order.
    about: Vec<Vec<(NodeId, Color)>>,
    verified: VerifiedCounts,
    candidates: BTreeSet<NodeId>,
    start: Option<NodeId>,
}

fn edge_key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ObserverState {
    /// Empty knowledge over the id space `[0, n)`.
    pub fn new(n: usize) -> Self {
        ObserverState {
            observed: vec![false; n],
            observed_order: Vec::new(),
            monitored: vec![None; n],
            monitor_order: Vec::new(),
            known_adj: vec![Vec::new(); n],
            edges: HashSet::new(),
            statements: HashMap::new(),
            about: vec![Vec::new(); n],
            verified: VerifiedCounts::default(),
            candidates: BTreeSet::new(),
            start: None,
        }
    }

    /// Rebuilds a state by ingesting `reports` in order.
    pub fn replay<'a, I>(n: usize, reports: I) -> Result<Self, ObserverError>
    where
        I: IntoIterator<Item = &'a MonitorReport>,
    {
        let mut state = ObserverState::new(n);
        for r in reports {
            state.ingest(r)?;
        }
        Ok(state)
    }

    pub fn capacity(&self) -> usize {
        self.observed.len()
    }

    pub fn start(&self) -> Option<NodeId> {
        self.start
    }

    fn check(&self, v: NodeId) -> Result<(), ObserverError> {
        if v.index() < self.capacity() {
            Ok(())
        } else {
            Err(ObserverError::OutOfRange(v))
        }
    }

    fn observe(&mut self, v: NodeId) {
        if !self.observed[v.index()] {
            self.observed[v.index()] = true;
            self.observed_order.push(v);
            if self.monitored[v.index()].is_none() {
                self.candidates.insert(v);
            }
        }
    }

    /// Records a monitor report.
    pub fn ingest(&mut self, report: &MonitorReport) -> Result<(), ObserverError> {
        let target = report.target;
        self.check(target)?;
        if self.monitored[target.index()].is_some() {
            return Err(ObserverError::AlreadyMonitored(target));
        }
        if self.start.is_some() && !self.observed[target.index()] {
            return Err(ObserverError::NotObserved(target));
        }
        if report.statements.len() != report.neighbors.len() {
            return Err(ObserverError::MalformedReport(
                target,
                format!(
                    "{} statements for {} neighbors",
                    report.statements.len(),
                    report.neighbors.len()
                ),
            ));
        }
        for (s, &u) in report.statements.iter().zip(&report.neighbors) {
            self.check(u)?;
            if s.speaker != target || s.subject != u || u == target {
                return Err(ObserverError::MalformedReport(
                    target,
                    format!("statement {s:?} does not match neighbor {u}"),
                ));
            }
        }

        let color = report.true_color;
        if self.start.is_none() {
            self.start = Some(target);
        }
        self.observe(target);
        self.monitored[target.index()] = Some(color);
        self.monitor_order.push(target);
        self.candidates.remove(&target);

        // statements about the target issued earlier are now verifiable
        for &(speaker, said) in &self.about[target.index()] {
            let speaker_color = self.monitored[speaker.index()].expect("speakers are monitored");
            self.verified.increment(speaker_color, said, color);
        }

        for &u in &report.neighbors {
            self.observe(u);
            if self.edges.insert(edge_key(target, u)) {
                self.known_adj[target.index()].push(u);
                self.known_adj[u.index()].push(target);
            }
        }

        for s in &report.statements {
            self.statements.insert((target, s.subject), s.said);
            self.about[s.subject.index()].push((target, s.said));
            if let Some(subject_color) = self.monitored[s.subject.index()] {
                self.verified.increment(color, s.said, subject_color);
            }
        }
        Ok(())
    }

    pub fn is_observed(&self, v: NodeId) -> bool {
        self.observed.get(v.index()).copied().unwrap_or(false)
    }

    pub fn is_monitored(&self, v: NodeId) -> bool {
        self.monitored_color(v).is_some()
    }

    pub fn monitored_color(&self, v: NodeId) -> Option<Color> {
        self.monitored.get(v.index()).copied().flatten()
    }

    /// Monitored nodes in the order they were monitored.
    pub fn monitored_nodes(&self) -> &[NodeId] {
        &self.monitor_order
    }

    pub fn monitored_count(&self) -> usize {
        self.monitor_order.len()
    }

    /// Observed nodes in discovery order.
    pub fn observed_nodes(&self) -> &[NodeId] {
        &self.observed_order
    }

    /// Observed but unmonitored nodes, ascending.
    pub fn candidates(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.candidates.iter().copied()
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_candidate(&self, v: NodeId) -> bool {
        self.candidates.contains(&v)
    }

    pub fn has_observed_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.edges.contains(&edge_key(a, b))
    }

    pub fn observed_edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn known_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.known_adj[v.index()]
    }

    pub fn statement(&self, speaker: NodeId, subject: NodeId) -> Option<Color> {
        self.statements.get(&(speaker, subject)).copied()
    }

    pub fn statement_count(&self) -> usize {
        self.statements.len()
    }

    /// `(speaker, said)` pairs about `v`, in arrival order.
    pub fn statements_about(&self, v: NodeId) -> &[(NodeId, Color)] {
        &self.about[v.index()]
    }

    pub fn verified_counts(&self) -> &VerifiedCounts {
        &self.verified
    }

    /// Smoothed probability that a statement's subject is red, given the
    /// speaker's true color and what it said.
    pub fn conditional_trust(&self, speaker_color: Color, said: Color) -> f64 {
        self.verified.trust(speaker_color, said)
    }

    fn require_candidate(&self, v: NodeId) -> Result<(), ObserverError> {
        self.check(v)?;
        if self.is_monitored(v) {
            return Err(ObserverError::Monitored(v));
        }
        if !self.observed[v.index()] {
            return Err(ObserverError::NotObserved(v));
        }
        Ok(())
    }

    /// Mean trust over the statements about `v`; 0.5 when nobody spoke about it.
    pub fn inferred_red_probability(&self, v: NodeId) -> Result<f64, ObserverError> {
        self.require_candidate(v)?;
        Ok(self.inferred_with(v, &self.verified))
    }

    fn inferred_with(&self, v: NodeId, counts: &VerifiedCounts) -> f64 {
        let about = &self.about[v.index()];
        if about.is_empty() {
            return 0.5;
        }
        let sum: f64 = about
            .iter()
            .map(|&(speaker, said)| {
                let c = self.monitored[speaker.index()].expect("speakers are monitored");
                counts.trust(c, said)
            })
            .sum();
        sum / about.len() as f64
    }

    pub fn features(&self, v: NodeId) -> Result<FeatureVector, ObserverError> {
        self.require_candidate(v)?;
        Ok(self.features_with(v, &self.verified))
    }

    /// Features of a monitored node as they would look had it never been
    /// monitored: its own statements and the verification of statements about
    /// it are taken out of the trust counters.
    pub fn masked_features(&self, m: NodeId) -> Result<FeatureVector, ObserverError> {
        self.check(m)?;
        let Some(m_color) = self.monitored[m.index()] else {
            return Err(ObserverError::NotObserved(m));
        };
        let mut counts = self.verified;
        for &(speaker, said) in &self.about[m.index()] {
            let c = self.monitored[speaker.index()].expect("speakers are monitored");
            counts.decrement(c, said, m_color);
        }
        for &u in &self.known_adj[m.index()] {
            if let (Some(u_color), Some(said)) = (self.monitored[u.index()], self.statement(m, u)) {
                counts.decrement(m_color, said, u_color);
            }
        }
        Ok(self.features_with(m, &counts))
    }

    fn features_with(&self, v: NodeId, counts: &VerifiedCounts) -> FeatureVector {
        let mut f = [0.0; FEATURE_COUNT];
        let mut reds: Vec<NodeId> = Vec::new();
        for &u in &self.known_adj[v.index()] {
            match self.monitored[u.index()] {
                Some(Color::Red) => {
                    f[0] += 1.0;
                    reds.push(u);
                }
                Some(Color::Blue) => f[1] += 1.0,
                None => {}
            }
        }
        let mut triangles = 0usize;
        for (i, &a) in reds.iter().enumerate() {
            for &b in &reds[i + 1..] {
                if self.has_observed_edge(a, b) {
                    triangles += 1;
                }
            }
        }
        f[2] = triangles as f64;
        for &(speaker, said) in &self.about[v.index()] {
            let c = self.monitored[speaker.index()].expect("speakers are monitored");
            if said == Color::Red {
                f[3] += 1.0;
            }
            let slot = match (c, said) {
                (Color::Red, Color::Red) => 4,
                (Color::Red, Color::Blue) => 5,
                (Color::Blue, Color::Red) => 6,
                (Color::Blue, Color::Blue) => 7,
            };
            f[slot] += 1.0;
        }
        f[8] = self.inferred_with(v, counts);
        FeatureVector(f)
    }
}

/// Writes one JSON report per line.
pub fn write_report_log(path: impl AsRef<Path>, reports: &[MonitorReport]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_report_log(path: impl AsRef<Path>) -> std::io::Result<Vec<MonitorReport>> {
    let reader = BufReader::new(File::open(path)?);
    let mut reports = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        reports.push(serde_json::from_str(&line)?);
    }
    Ok(reports)
}
