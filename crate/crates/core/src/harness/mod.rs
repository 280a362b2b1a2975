//! Seeded experiment driver.
//!
//! A run monitors a red start node, then repeatedly asks a strategy for the
//! next candidate, queries the oracle and feeds the report to the observer
//! until the budget is spent or the frontier is empty.

mod config;
mod experiment;
mod summary;

pub use config::{ExperimentConfig, GraphSource};
pub use experiment::{load_world, run_experiment, trial_plan, ExperimentOutput, RunPlan};
pub use summary::{reds_at, summarize, write_summary_csv, write_trace_csv, SummaryRow};

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::{build_training_set, fit, FitConfig, TrainedModel};
use crate::graph::{Color, GraphError, NodeId, WorldGraph};
use crate::observer::{ObserverError, ObserverState};
use crate::oracle::{assign_honesty, LyingScenario, MonitorReport, Oracle, OracleError};
use crate::strategy::{pick, StrategyError, StrategyKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("start node {0} is not red")]
    StartNotRed(NodeId),
    #[error("start node {0} is not in the graph")]
    UnknownStart(NodeId),
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("graph has no red node to start from")]
    NoRedNodes,
    #[error("{0}")]
    Config(String),
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
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Observer(#[from] ObserverError),
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index` under `master_seed`.
pub fn run_seed(master_seed: u64, run_index: usize) -> u64 {
    mix64(mix64(master_seed) ^ (run_index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Independent random streams carved out of one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStreams {
    pub start: u64,
    pub honesty: u64,
    pub lies: u64,
    pub strategy: u64,
}

impl RunStreams {
    pub fn from_seed(seed: u64) -> Self {
        let sub = |tag: u64| mix64(seed ^ mix64(tag));
        RunStreams {
            start: sub(1),
            honesty: sub(2),
            lies: sub(3),
            strategy: sub(4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    /// 0 for the start node.
    pub step: usize,
    pub node: NodeId,
    pub true_color: Color,
    /// Monitored red nodes so far, this step included.
    pub cum_red: usize,
    /// Observed red nodes so far, monitored or not.
    pub cum_red_discovered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub run_id: usize,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    /// True when the run stopped because the frontier emptied before the
    /// budget was spent.
    pub exhausted: bool,
}

impl RunTrace {
    pub fn final_reds(&self) -> usize {
        self.steps.last().map_or(0, |s| s.cum_red)
    }
}

#[derive(Debug, Clone)]
pub struct RunParams {
    pub run_id: usize,
    pub strategy: StrategyKind,
    pub scenario: LyingScenario,
    pub start: NodeId,
    pub seed: u64,
    pub budget: usize,
    /// Retrain the learner once this many monitors were added since the last
    /// fit. Ignored by the other strategies.
    pub retrain_every: usize,
    pub fit: FitConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub reports: Vec<MonitorReport>,
    /// Honesty values this run drew, indexed by node.
    pub honesty: Vec<f64>,
}

/// Runs one strategy on `world` for up to `budget` monitors.
pub fn run_single(
    world: &WorldGraph,
    strategy: StrategyKind,
    scenario: LyingScenario,
    start: NodeId,
    seed: u64,
    budget: usize,
    retrain_every: usize,
) -> Result<RunTrace, HarnessError> {
    let params = RunParams {
        run_id: 0,
        strategy,
        scenario,
        start,
        seed,
        budget,
        retrain_every,
        fit: FitConfig::default(),
    };
    simulate(world, &params).map(|o| o.trace)
}

/// Full run, keeping the report log alongside the trace.
pub fn simulate(world: &WorldGraph, params: &RunParams) -> Result<RunOutcome, HarnessError> {
    if !world.contains(params.start) {
        return Err(HarnessError::UnknownStart(params.start));
    }
    if !world.color(params.start).is_red() {
        return Err(HarnessError::StartNotRed(params.start));
    }
    if params.budget == 0 {
        return Err(HarnessError::ZeroBudget);
    }
    let streams = RunStreams::from_seed(params.seed);
    let world = assign_honesty(world, &mut ChaCha8Rng::seed_from_u64(streams.honesty));
    let mut oracle = Oracle::new(&world, params.scenario, streams.lies);
    let mut strategy_rng = ChaCha8Rng::seed_from_u64(streams.strategy);
    let mut state = ObserverState::new(world.node_count());
    let mut reports = Vec::with_capacity(params.budget);
    let mut steps = Vec::with_capacity(params.budget);
    let mut discovered = vec![false; world.node_count()];
    let mut cum_red = 0;
    let mut cum_discovered = 0;

    let mut model: Option<TrainedModel> = None;
    let mut trained_at = 0;
    let retrain_every = params.retrain_every.max(1);

    let mut target = params.start;
    let mut exhausted = false;
    loop {
        let report = oracle.place_monitor(target)?;
        state.ingest(&report)?;
        for v in std::iter::once(target).chain(report.neighbors.iter().copied()) {
            if !discovered[v.index()] {
                discovered[v.index()] = true;
                if world.color(v).is_red() {
                    cum_discovered += 1;
                }
            }
        }
        if report.true_color.is_red() {
            cum_red += 1;
        }
        steps.push(TraceStep {
            step: steps.len(),
            node: target,
            true_color: report.true_color,
            cum_red,
            cum_red_discovered: cum_discovered,
        });
        reports.push(report);
        if steps.len() >= params.budget {
            break;
        }

        if params.strategy == StrategyKind::RedLearn {
            let monitored = state.monitored_count();
            let stale = match &model {
                None => true,
                Some(m) => m.fallback || monitored - trained_at >= retrain_every,
            };
            if stale {
                let data = build_training_set(&state).expect("start node is monitored");
                model = Some(fit(&data, &params.fit));
                trained_at = monitored;
            }
        }

        match pick(params.strategy, &state, model.as_ref(), &mut strategy_rng) {
            Ok(decision) => target = decision.chosen,
            Err(StrategyError::Exhausted) => {
                exhausted = true;
                break;
            }
        }
    }

    Ok(RunOutcome {
        trace: RunTrace {
            run_id: params.run_id,
            strategy: params.strategy,
            seed: params.seed,
            steps,
            exhausted,
        },
        reports,
        honesty: world.honesty_values().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_synthetic, SyntheticMode};

    fn star() -> WorldGraph {
        // red hub 0 with red leaves 1..=4 and blue leaves 5..=8
        let mut colors = vec![Color::Red; 5];
        colors.extend([Color::Blue; 4]);
        let edges = (1..9).map(|i| (NodeId(0), NodeId(i)));
        WorldGraph::from_edges(
            "star",
            colors,
            vec![1.0; 9],
            (0..9).map(|i| i.to_string()).collect(),
            edges,
        )
        .unwrap()
        .0
    }

    #[test]
    fn budget_one_traces_only_the_start() {
        let g = star();
        let t = run_single(&g, StrategyKind::MostRedNeighbors, LyingScenario::Ls1, NodeId(0), 1, 1, 1)
            .unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].node, NodeId(0));
        assert_eq!(t.final_reds(), 1);
    }

    #[test]
    fn start_must_be_red_and_budget_positive() {
        let g = star();
        assert!(matches!(
            run_single(&g, StrategyKind::SmartRandom, LyingScenario::Ls1, NodeId(5), 1, 3, 1),
            Err(HarnessError::StartNotRed(_))
        ));
        assert!(matches!(
            run_single(&g, StrategyKind::SmartRandom, LyingScenario::Ls1, NodeId(0), 1, 0, 1),
            Err(HarnessError::ZeroBudget)
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let g = generate_synthetic(120, 0.1, SyntheticMode::NoHomophily, 3).unwrap();
        let start = g.red_nodes().next().unwrap();
        for k in StrategyKind::ALL {
            let a = run_single(&g, k, LyingScenario::Ls2, start, 99, 40, 1).unwrap();
            let b = run_single(&g, k, LyingScenario::Ls2, start, 99, 40, 1).unwrap();
            assert_eq!(a, b, "{k}");
        }
    }

    #[test]
    fn frontier_exhaustion_ends_the_run() {
        let g = star();
        let t = run_single(&g, StrategyKind::SmartRandom, LyingScenario::Ls1, NodeId(0), 5, 50, 1)
            .unwrap();
        assert_eq!(t.steps.len(), 9);
        assert!(t.exhausted);
        assert_eq!(t.final_reds(), 5);
    }

    #[test]
    fn streams_differ() {
        let s = RunStreams::from_seed(run_seed(1, 0));
        let all = [s.start, s.honesty, s.lies, s.strategy];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_ne!(run_seed(1, 0), run_seed(1, 1));
        assert_ne!(run_seed(1, 0), run_seed(2, 0));
    }
}
