use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::classifier::FitConfig;
use crate::oracle::LyingScenario;
use crate::strategy::StrategyKind;
use crate::synthetic::{SyntheticMode, SyntheticSpec};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Files { edges: PathBuf, nodes: PathBuf },
    Synthetic(SyntheticSpec),
}

/// Everything needed to reproduce an experiment.
///
/// The text form is one `key = value` pair per line; `#` starts a comment.
/// Recognized keys:
///
/// | key | meaning |
/// |-----|---------|
/// | `edges`, `nodes` | graph files, relative to the config file |
/// | `synthetic_n`, `synthetic_red_fraction`, `synthetic_mode`, `synthetic_seed` | generated graph instead of files |
/// | `synthetic_base_degree`, `synthetic_red_links`, `synthetic_degree_offset` | generator shape |
/// | `scenario` | `ls1` or `ls2` |
/// | `strategies` | comma list of `sr, rs, mrsr, mrn, redlearn` |
/// | `runs` | paired runs per strategy |
/// | `budget_fraction` | monitors as a fraction of the node count |
/// | `budget_tiers` | comma list of fractions reported in the summary |
/// | `retrain_every` | learner refit cadence, in monitors |
/// | `seed` | master seed |
/// | `remove_red_red` | drop red-red edges before running |
/// | `output_dir` | where CSVs go, relative to the config file |
/// | `lambda`, `max_iterations`, `tolerance` | learner hyperparameters |
/// | `emit_discovered` | add a `cum_red_discovered` trace column |
/// | `dump_reports` | write one JSON-lines report log per run |
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub scenario: LyingScenario,
    pub strategies: Vec<StrategyKind>,
    pub runs: usize,
    pub budget_fraction: f64,
    pub budget_tiers: Vec<f64>,
    pub retrain_every: usize,
    pub master_seed: u64,
    pub remove_red_red: bool,
    pub output_dir: PathBuf,
    pub fit: FitConfig,
    pub emit_discovered: bool,
    pub dump_reports: bool,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSource) -> Self {
        ExperimentConfig {
            graph,
            scenario: LyingScenario::Ls1,
            strategies: StrategyKind::ALL.to_vec(),
            runs: 25,
            budget_fraction: 0.5,
            budget_tiers: vec![0.10, 0.25, 0.50],
            retrain_every: 1,
            master_seed: 0,
            remove_red_red: false,
            output_dir: PathBuf::from("out"),
            fit: FitConfig::default(),
            emit_discovered: false,
            dump_reports: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.strategies.is_empty() {
            return bad("at least one strategy is required".into());
        }
        for &f in std::iter::once(&self.budget_fraction).chain(&self.budget_tiers) {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("fractions must lie in (0, 1], got {f}"));
            }
        }
        if self.retrain_every == 0 {
            return bad("retrain_every must be at least 1".into());
        }
        if !(self.fit.lambda >= 0.0) || !(self.fit.tolerance > 0.0) {
            return bad("lambda must be >= 0 and tolerance > 0".into());
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses the text form; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let mut edges = None;
        let mut nodes = None;
        let mut syn_n = None;
        let mut syn_frac = None;
        let mut syn_mode = None;
        let mut syn_seed = None;
        let mut syn_base = None;
        let mut syn_links = None;
        let mut syn_offset = None;
        // graph placeholder, replaced once the source keys are known
        let mut cfg = ExperimentConfig::new(GraphSource::Files {
            edges: PathBuf::new(),
            nodes: PathBuf::new(),
        });
        let mut output_dir = None;

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let err = |m: String| HarnessError::Config(format!("line {lineno}: {m}"));
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            fn num<T: FromStr>(v: &str) -> Result<T, String>
            where
                T::Err: std::fmt::Display,
            {
                v.parse::<T>().map_err(|e| format!("bad value {v:?}: {e}"))
            }
            let res: Result<(), String> = (|| {
                match key {
                    "edges" => edges = Some(base.join(value)),
                    "nodes" => nodes = Some(base.join(value)),
                    "synthetic_n" => syn_n = Some(num::<usize>(value)?),
                    "synthetic_red_fraction" => syn_frac = Some(num::<f64>(value)?),
                    "synthetic_mode" => syn_mode = Some(value.parse::<SyntheticMode>()?),
                    "synthetic_seed" => syn_seed = Some(num::<u64>(value)?),
                    "synthetic_base_degree" => syn_base = Some(num::<f64>(value)?),
                    "synthetic_red_links" => syn_links = Some(num::<usize>(value)?),
                    "synthetic_degree_offset" => syn_offset = Some(num::<f64>(value)?),
                    "scenario" => cfg.scenario = value.parse()?,
                    "strategies" => {
                        cfg.strategies = value
                            .split(',')
                            .map(|s| s.parse::<StrategyKind>())
                            .collect::<Result<_, _>>()?
                    }
                    "runs" => cfg.runs = num(value)?,
                    "budget_fraction" => cfg.budget_fraction = num(value)?,
                    "budget_tiers" => {
                        cfg.budget_tiers = value
                            .split(',')
                            .map(|s| num::<f64>(s.trim()))
                            .collect::<Result<_, _>>()?
                    }
                    "retrain_every" => cfg.retrain_every = num(value)?,
                    "seed" => cfg.master_seed = num(value)?,
                    "remove_red_red" => cfg.remove_red_red = num(value)?,
                    "output_dir" => output_dir = Some(base.join(value)),
                    "lambda" => cfg.fit.lambda = num(value)?,
                    "max_iterations" => cfg.fit.max_iterations = num(value)?,
                    "tolerance" => cfg.fit.tolerance = num(value)?,
                    "emit_discovered" => cfg.emit_discovered = num(value)?,
                    "dump_reports" => cfg.dump_reports = num(value)?,
                    other => return Err(format!("unknown key {other:?}")),
                }
                Ok(())
            })();
            res.map_err(err)?;
        }

        cfg.graph = match (edges, nodes, syn_n) {
            (Some(edges), Some(nodes), None) => GraphSource::Files { edges, nodes },
            (None, None, Some(n)) => {
                let frac = syn_frac.ok_or_else(|| {
                    HarnessError::Config("synthetic_red_fraction is required".into())
                })?;
                let mode = syn_mode.unwrap_or(SyntheticMode::Homophily);
                let mut spec = SyntheticSpec::new(n, frac, mode, syn_seed.unwrap_or(0));
                if let Some(b) = syn_base {
                    spec.base_degree = b;
                }
                if let Some(l) = syn_links {
                    spec.red_links = l;
                }
                if let Some(o) = syn_offset {
                    spec.degree_offset = o;
                }
                GraphSource::Synthetic(spec)
            }
            _ => {
                return Err(HarnessError::Config(
                    "give either both `edges` and `nodes`, or `synthetic_n`".into(),
                ))
            }
        };
        cfg.output_dir = output_dir.unwrap_or_else(|| base.join("out"));
        cfg.validate()?;
        Ok(cfg)
    }
}
