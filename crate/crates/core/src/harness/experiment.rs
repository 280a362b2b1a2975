use std::fs;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{count_colors, load_graph, remove_red_red_edges, NodeId, WorldGraph};
use crate::observer::write_report_log;
use crate::strategy::StrategyKind;
use crate::synthetic::generate;

use super::{
    run_seed, simulate, summarize, write_summary_csv, write_trace_csv, ExperimentConfig,
    GraphSource, HarnessError, RunOutcome, RunParams, RunStreams, RunTrace, SummaryRow,
};

/// Start node and seed shared by every strategy for one run index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunPlan {
    pub run_id: usize,
    pub start: NodeId,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub world: WorldGraph,
    pub plans: Vec<RunPlan>,
    /// Ordered by strategy (config order), then run index.
    pub outcomes: Vec<RunOutcome>,
    pub summary: Vec<SummaryRow>,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

impl ExperimentOutput {
    pub fn traces(&self) -> Vec<RunTrace> {
        self.outcomes.iter().map(|o| o.trace.clone()).collect()
    }

    pub fn row(&self, strategy: StrategyKind, tier: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.strategy == strategy && r.tier == tier)
    }
}

/// Loads or generates the configured world, applying red-red removal if asked.
pub fn load_world(config: &ExperimentConfig) -> Result<WorldGraph, HarnessError> {
    let world = match &config.graph {
        GraphSource::Files { edges, nodes } => load_graph(edges, nodes)?.0,
        GraphSource::Synthetic(spec) => generate(spec)?,
    };
    Ok(if config.remove_red_red {
        remove_red_red_edges(&world)
    } else {
        world
    })
}

/// Per-run start nodes and seeds derived from the master seed.
pub fn trial_plan(world: &WorldGraph, master_seed: u64, runs: usize) -> Result<Vec<RunPlan>, HarnessError> {
    let reds: Vec<NodeId> = world.red_nodes().collect();
    if reds.is_empty() {
        return Err(HarnessError::NoRedNodes);
    }
    Ok((0..runs)
        .map(|run_id| {
            let seed = run_seed(master_seed, run_id);
            let mut rng = ChaCha8Rng::seed_from_u64(RunStreams::from_seed(seed).start);
            RunPlan {
                run_id,
                start: reds[rng.random_range(0..reds.len())],
                seed,
            }
        })
        .collect())
}

/// Runs every strategy over the same run plans and writes `traces.csv` and
/// `summary.csv` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    let world = load_world(config)?;
    let n = world.node_count();
    let (total_reds, _) = count_colors(&world);
    let plans = trial_plan(&world, config.master_seed, config.runs)?;
    let budget = ((config.budget_fraction * n as f64).floor() as usize).max(1);

    let tasks: Vec<RunParams> = config
        .strategies
        .iter()
        .flat_map(|&strategy| {
            plans.iter().map(move |p| RunParams {
                run_id: p.run_id,
                strategy,
                scenario: config.scenario,
                start: p.start,
                seed: p.seed,
                budget,
                retrain_every: config.retrain_every,
                fit: config.fit,
            })
        })
        .collect();
    let outcomes = tasks
        .par_iter()
        .map(|params| simulate(&world, params))
        .collect::<Result<Vec<_>, _>>()?;

    let traces: Vec<RunTrace> = outcomes.iter().map(|o| o.trace.clone()).collect();
    let summary = summarize(&traces, &config.budget_tiers, n, total_reds);
    for row in summary.iter().filter(|r| r.truncated_runs > 0) {
        log::warn!(
            "{} tier {}: {} of {} runs ended before reaching the tier",
            row.strategy,
            row.tier,
            row.truncated_runs,
            row.runs
        );
    }

    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    let trace_path = dir.join("traces.csv");
    let summary_path = dir.join("summary.csv");
    write_trace_csv(&trace_path, &world, &traces, config.emit_discovered)?;
    write_summary_csv(&summary_path, &summary)?;
    if config.dump_reports {
        for o in &outcomes {
            let path = dir.join(format!("reports_{}_{}.jsonl", o.trace.strategy, o.trace.run_id));
            write_report_log(&path, &o.reports)
                .map_err(|source| HarnessError::Io { path, source })?;
        }
    }

    Ok(ExperimentOutput {
        world,
        plans,
        outcomes,
        summary,
        trace_path,
        summary_path,
    })
}
