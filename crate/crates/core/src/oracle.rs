//! The hidden world's answers to monitor placements.
//!
//! A monitor reveals the target's true color and true neighbor list, plus one
//! stated color per neighbor. A stated color is either the truth or its flip,
//! decided once per `(speaker, subject)` pair by a Bernoulli draw whose
//! probability depends on the lying scenario, the speaker's honesty and the
//! hierarchy scores of both ends.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, NodeId, WorldGraph};

pub const HONESTY_MEAN: f64 = 0.5;
pub const HONESTY_SD: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LyingScenario {
    /// Blue nodes know which nodes are red and where they sit in the hierarchy.
    Ls1,
    /// Blue nodes know nothing about red nodes and call every neighbor blue.
    Ls2,
}

impl FromStr for LyingScenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ls1" | "1" => Ok(LyingScenario::Ls1),
            "ls2" | "2" => Ok(LyingScenario::Ls2),
            other => Err(format!("unknown lying scenario {other:?} (expected ls1 or ls2)")),
        }
    }
}

impl fmt::Display for LyingScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LyingScenario::Ls1 => "ls1",
            LyingScenario::Ls2 => "ls2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub speaker: NodeId,
    pub subject: NodeId,
    pub said: Color,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub target: NodeId,
    pub true_color: Color,
    pub neighbors: Vec<NodeId>,
    /// One statement per neighbor, in the same order as `neighbors`.
    pub statements: Vec<Statement>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("node {0} is not in the world graph")]
    UnknownNode(NodeId),
    #[error("node {speaker} is not adjacent to node {subject}")]
    NotAdjacent { speaker: NodeId, subject: NodeId },
}

/// Draws one honesty value per node from N(0.5, 0.125), clamped into `[0, 1]`.
pub fn draw_honesty<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(HONESTY_MEAN, HONESTY_SD).expect("valid normal parameters");
    (0..n).map(|_| normal.sample(rng).clamp(0.0, 1.0)).collect()
}

/// Copy of `world` carrying a fresh honesty assignment.
pub fn assign_honesty<R: Rng + ?Sized>(world: &WorldGraph, rng: &mut R) -> WorldGraph {
    let honesty = draw_honesty(world.node_count(), rng);
    world
        .clone()
        .with_honesty(honesty)
        .expect("honesty vector sized to the graph")
}

/// Probability that a speaker misreports a subject's color, from the
/// node attributes alone.
///
/// Red speakers (both scenarios) and blue speakers under LS1 lie about a red
/// subject with `min((1 - H) * L_subject / L_speaker, 1)` and about a blue
/// subject with `1 - H`. Under LS2 a blue speaker calls everyone blue, so it
/// always lies about red subjects and never about blue ones.
pub fn lie_chance(
    scenario: LyingScenario,
    speaker_color: Color,
    subject_color: Color,
    speaker_honesty: f64,
    speaker_level: f64,
    subject_level: f64,
) -> f64 {
    let dishonesty = 1.0 - speaker_honesty;
    let p = match (scenario, speaker_color, subject_color) {
        (LyingScenario::Ls2, Color::Blue, Color::Blue) => 0.0,
        (LyingScenario::Ls2, Color::Blue, Color::Red) => 1.0,
        (_, _, Color::Red) => dishonesty * subject_level / speaker_level,
        (_, _, Color::Blue) => dishonesty,
    };
    p.clamp(0.0, 1.0)
}

/// `P(speaker lies about subject)` for an adjacent pair of the world graph.
pub fn lie_probability(
    speaker: NodeId,
    subject: NodeId,
    world: &WorldGraph,
    scenario: LyingScenario,
) -> Result<f64, OracleError> {
    for v in [speaker, subject] {
        if !world.contains(v) {
            return Err(OracleError::UnknownNode(v));
        }
    }
    if !world.has_edge(speaker, subject) {
        return Err(OracleError::NotAdjacent { speaker, subject });
    }
    Ok(lie_chance(
        scenario,
        world.color(speaker),
        world.color(subject),
        world.honesty(speaker),
        world.hierarchy(speaker),
        world.hierarchy(subject),
    ))
}

/// Answers monitor placements for one run.
///
/// Statements are decided on first issue and cached, so monitoring the same
/// node again returns an identical report.
pub struct Oracle<'w> {
    world: &'w WorldGraph,
    scenario: LyingScenario,
    rng: ChaCha8Rng,
    issued: HashMap<(NodeId, NodeId), Color>,
}

impl<'w> Oracle<'w> {
    /// `world` must already carry this run's honesty assignment.
    pub fn new(world: &'w WorldGraph, scenario: LyingScenario, lie_seed: u64) -> Self {
        Oracle {
            world,
            scenario,
            rng: ChaCha8Rng::seed_from_u64(lie_seed),
            issued: HashMap::new(),
        }
    }

    pub fn world(&self) -> &'w WorldGraph {
        self.world
    }

    pub fn scenario(&self) -> LyingScenario {
        self.scenario
    }

    pub fn place_monitor(&mut self, target: NodeId) -> Result<MonitorReport, OracleError> {
        if !self.world.contains(target) {
            return Err(OracleError::UnknownNode(target));
        }
        let world = self.world;
        let neighbors = world.neighbors(target).to_vec();
        let mut statements = Vec::with_capacity(neighbors.len());
        // adjacency lists are sorted, so draws are consumed in ascending neighbor order
        for &subject in &neighbors {
            let said = match self.issued.get(&(target, subject)) {
                Some(&c) => c,
                None => {
                    let p = lie_probability(target, subject, world, self.scenario)?;
                    let truth = world.color(subject);
                    let said = if self.rng.random::<f64>() < p {
                        truth.flip()
                    } else {
                        truth
                    };
                    self.issued.insert((target, subject), said);
                    said
                }
            };
            statements.push(Statement {
                speaker: target,
                subject,
                said,
            });
        }
        Ok(MonitorReport {
            target,
            true_color: world.color(target),
            neighbors,
            statements,
        })
    }
}
