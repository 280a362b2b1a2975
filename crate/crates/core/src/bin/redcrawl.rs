use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use redcrawl::graph::{count_colors, save_graph};
use redcrawl::harness::{run_experiment, ExperimentConfig};
use redcrawl::synthetic::{generate, SyntheticMode, SyntheticSpec};
use redcrawl::{LyingScenario, StrategyKind};

#[derive(Parser)]
#[command(name = "redcrawl", version, about = "Budgeted search for red nodes in a deceptive network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run(RunArgs),
    /// Generate a synthetic world and write it as an edge list and node CSV.
    Gen(GenArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Strategy to run; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    strategy: Vec<StrategyKind>,
    #[arg(long)]
    scenario: Option<LyingScenario>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    budget_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    remove_red_red: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    red_fraction: f64,
    #[arg(long, default_value = "homophily")]
    mode: SyntheticMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    degree_offset: Option<f64>,
    /// Output directory; receives `graph.edges` and `graph.nodes.csv`.
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if !args.strategy.is_empty() {
        cfg.strategies = args.strategy;
    }
    if let Some(s) = args.scenario {
        cfg.scenario = s;
    }
    if let Some(r) = args.runs {
        cfg.runs = r;
    }
    if let Some(b) = args.budget_fraction {
        cfg.budget_fraction = b;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if args.remove_red_red {
        cfg.remove_red_red = true;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    cfg.validate()?;

    let out = run_experiment(&cfg)?;
    let (reds, blues) = count_colors(&out.world);
    println!(
        "{}: {} nodes ({} red, {} blue), {} edges, scenario {}, {} runs",
        out.world.name,
        out.world.node_count(),
        reds,
        blues,
        out.world.edge_count(),
        cfg.scenario,
        cfg.runs
    );
    println!("{:<10} {:>6} {:>10} {:>10}", "strategy", "tier", "mean %red", "std");
    for row in &out.summary {
        let flag = if row.truncated_runs > 0 { " *" } else { "" };
        println!(
            "{:<10} {:>6.2} {:>10.2} {:>10.2}{flag}",
            row.strategy.to_string(),
            row.tier,
            row.mean_pct_red,
            row.std_pct_red
        );
    }
    if out.summary.iter().any(|r| r.truncated_runs > 0) {
        println!("* some runs exhausted the frontier before reaching this tier");
    }
    println!("traces:  {}", out.trace_path.display());
    println!("summary: {}", out.summary_path.display());
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let mut spec = SyntheticSpec::new(args.n, args.red_fraction, args.mode, args.seed);
    if let Some(o) = args.degree_offset {
        spec.degree_offset = o;
    }
    let g = generate(&spec)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let edges = args.out.join("graph.edges");
    let nodes = args.out.join("graph.nodes.csv");
    save_graph(&g, &edges, &nodes)?;
    let (reds, _) = count_colors(&g);
    if reds == 0 {
        bail!("generated graph has no red nodes");
    }
    println!(
        "wrote {} nodes ({} red), {} edges to {} and {}",
        g.node_count(),
        reds,
        g.edge_count(),
        edges.display(),
        nodes.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Gen(args) => gen(args),
    }
}
