use std::path::Path;

use crate::graph::WorldGraph;
use crate::strategy::StrategyKind;

use super::{HarnessError, RunTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: StrategyKind,
    pub tier: f64,
    pub mean_pct_red: f64,
    /// Sample standard deviation across runs; 0 for a single run.
    pub std_pct_red: f64,
    pub runs: usize,
    /// Runs whose trace ended before this tier's monitor count.
    pub truncated_runs: usize,
}

/// Monitored reds after the first `monitors` monitors, and whether the trace
/// was too short to reach that count.
pub fn reds_at(trace: &RunTrace, monitors: usize) -> (usize, bool) {
    if monitors == 0 {
        return (0, false);
    }
    match trace.steps.get(monitors - 1) {
        Some(s) => (s.cum_red, false),
        None => (trace.final_reds(), true),
    }
}

/// Mean and spread of the percentage of red nodes found at each tier, per
/// strategy. Tier `t` means `floor(t * node_count)` monitors. Strategies keep
/// their order of first appearance in `traces`.
pub fn summarize(
    traces: &[RunTrace],
    tiers: &[f64],
    node_count: usize,
    total_reds: usize,
) -> Vec<SummaryRow> {
    let mut strategies: Vec<StrategyKind> = Vec::new();
    for t in traces {
        if !strategies.contains(&t.strategy) {
            strategies.push(t.strategy);
        }
    }
    let mut rows = Vec::new();
    for &strategy in &strategies {
        let runs: Vec<&RunTrace> = traces.iter().filter(|t| t.strategy == strategy).collect();
        for &tier in tiers {
            let monitors = (tier * node_count as f64).floor() as usize;
            let mut truncated = 0;
            let pcts: Vec<f64> = runs
                .iter()
                .map(|t| {
                    let (reds, short) = reds_at(t, monitors);
                    truncated += short as usize;
                    if total_reds == 0 {
                        0.0
                    } else {
                        100.0 * reds as f64 / total_reds as f64
                    }
                })
                .collect();
            let n = pcts.len() as f64;
            let mean = pcts.iter().sum::<f64>() / n;
            let std = if pcts.len() > 1 {
                (pcts.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            rows.push(SummaryRow {
                strategy,
                tier,
                mean_pct_red: mean,
                std_pct_red: std,
                runs: pcts.len(),
                truncated_runs: truncated,
            });
        }
    }
    rows
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// `run,strategy,step,node,true_color,cum_red` with node labels taken from
/// `world`; `with_discovered` appends `cum_red_discovered`.
pub fn write_trace_csv(
    path: &Path,
    world: &WorldGraph,
    traces: &[RunTrace],
    with_discovered: bool,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["run", "strategy", "step", "node", "true_color", "cum_red"];
    if with_discovered {
        header.push("cum_red_discovered");
    }
    w.write_record(&header).map_err(csv_err(path))?;
    for t in traces {
        for s in &t.steps {
            let mut rec = vec![
                t.run_id.to_string(),
                t.strategy.to_string(),
                s.step.to_string(),
                world.label(s.node).to_string(),
                s.true_color.to_string(),
                s.cum_red.to_string(),
            ];
            if with_discovered {
                rec.push(s.cum_red_discovered.to_string());
            }
            w.write_record(&rec).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `strategy,tier,mean_pct_red,std_pct_red,runs`.
pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["strategy", "tier", "mean_pct_red", "std_pct_red", "runs"])
        .map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.strategy.to_string(),
            format!("{}", r.tier),
            format!("{:.4}", r.mean_pct_red),
            format!("{:.4}", r.std_pct_red),
            r.runs.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
