//! Budgeted exploration of a hidden red/blue network whose members may lie
//! about the colors of their neighbors.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`] and [`synthetic`]: the ground-truth world and its file formats;
//! - [`oracle`]: answers to monitor placements under two lying scenarios;
//! - [`observer`]: the sampler's partial knowledge and candidate features;
//! - [`classifier`]: logistic regression used by the learning strategy;
//! - [`strategy`]: the five placement policies;
//! - [`harness`]: seeded runs, experiments and CSV reporting.

pub mod classifier;
pub mod graph;
pub mod harness;
pub mod observer;
pub mod oracle;
pub mod strategy;
pub mod synthetic;

pub use graph::{count_colors, load_graph, remove_red_red_edges, save_graph, Color, NodeId, WorldGraph};
pub use oracle::{LyingScenario, MonitorReport, Oracle, Statement};
pub use observer::{FeatureVector, ObserverState};
pub use strategy::StrategyKind;
