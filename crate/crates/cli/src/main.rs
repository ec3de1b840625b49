//! `plan` — command-line front end for the planners and the benchmark
//! harness.
//!
//! Subcommands:
//! - `run`: one planner, one seed, JSON report.
//! - `bench`: multi-trial comparison from a JSON config, two CSV outputs.
//! - `converge`: failure-rate-vs-budget table against an analytic optimum.
//! - `scenario`: list builtin problems or export one as JSON.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use aorrt::bench::{
    convergence_csv, convergence_experiment, raw_csv, run_benchmark, summary_csv,
    BenchConfig, ConvergenceConfig, ParamPatch, PlannerSpec,
};
use aorrt::metric::MetricWeights;
use aorrt::planners::{plan, StopCondition, Variant};
use aorrt::rng::RandomStream;
use aorrt::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "plan",
    version,
    about = "Kinodynamic planner benchmarks in augmented state-cost space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one planner on one scenario and report the outcome as JSON.
    Run(RunArgs),
    /// Run a multi-planner, multi-trial benchmark described by a config file.
    Bench(BenchArgs),
    /// Estimate failure rates against a scenario's analytic optimum.
    Converge(ConvergeArgs),
    /// Inspect builtin scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::from_str(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    /// Builtin scenario name or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    #[arg(long, value_parser = parse_variant)]
    planner: Variant,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget (exclusive with --time-budget).
    #[arg(long, conflicts_with = "time_budget")]
    iterations: Option<u64>,
    /// Wallclock budget in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Checkpoints (iterations or seconds, matching the budget kind) at
    /// which to snapshot progress, e.g. `--checkpoints 1000,5000`.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<f64>>,
    /// State-block weight of the selection metric.
    #[arg(long)]
    w_x: Option<f64>,
    /// Cost-coordinate weight of the selection metric.
    #[arg(long)]
    w_c: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
    #[arg(long)]
    t_prop: Option<f64>,
    #[arg(long)]
    goal_bias: Option<f64>,
    /// Integration step size.
    #[arg(long)]
    step: Option<f64>,
    /// Collision-check spacing along propagated segments.
    #[arg(long)]
    resolution: Option<f64>,
    /// Whether the cost ceiling adapts to the best solution found.
    #[arg(long)]
    adaptive_c_max: Option<bool>,
    /// Where to write the JSON report (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark config JSON; see `BenchConfigFile` in the docs for the schema.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for raw.csv and summary.csv (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count (overrides the config).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Builtin scenario name or path; must declare an analytic optimum
    /// unless --reference is given.
    #[arg(long)]
    scenario: String,
    /// Planner variant; repeat the flag to compare several.
    #[arg(long, value_parser = parse_variant, required = true)]
    planner: Vec<Variant>,
    /// Sub-optimality tolerances, e.g. `--eps 0.1,0.3`.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// Iteration budgets, e.g. `--k-grid 5000,20000,80000`.
    #[arg(long, value_delimiter = ',', required = true)]
    k_grid: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Reference cost to score against instead of the scenario's optimum.
    #[arg(long)]
    reference: Option<f64>,
    /// Where to write the CSV table (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// List builtin scenario names.
    List,
    /// Export a builtin scenario as JSON.
    Export {
        name: String,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// On-disk benchmark description: the library's config with the scenario
/// referenced by builtin name or file path (or inlined), plus an output
/// directory.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchConfigFile {
    scenario: ScenarioRef,
    planners: Vec<PlannerSpec>,
    #[serde(default = "default_trials")]
    trials: u32,
    stop: StopCondition,
    checkpoints: Vec<f64>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_threads")]
    threads: usize,
    #[serde(default)]
    out: Option<PathBuf>,
}

fn default_trials() -> u32 {
    50
}

fn default_threads() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioRef {
    Name(String),
    Inline(Box<Scenario>),
}

fn resolve_scenario(name_or_path: &str) -> Result<Scenario> {
    if Scenario::builtin_names().contains(&name_or_path) {
        return Ok(Scenario::builtin(name_or_path)?);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return Scenario::load(path)
            .with_context(|| format!("loading scenario from {}", path.display()));
    }
    bail!(
        "`{name_or_path}` is neither a builtin scenario ({}) nor an existing file",
        Scenario::builtin_names().join(", ")
    )
}

fn write_or_print(out: Option<&Path>, contents: &str, what: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(path, contents)
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {what} to {}", path.display());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let scenario = resolve_scenario(&args.scenario)?;
    let problem = scenario.problem()?;
    let mut params = scenario.params();
    let patch = ParamPatch {
        c_max: args.c_max,
        t_prop: args.t_prop,
        goal_bias: args.goal_bias,
        step: args.step,
        resolution: args.resolution,
        adaptive_c_max: args.adaptive_c_max,
        ..ParamPatch::default()
    };
    params = patch.apply(&params);
    if args.w_x.is_some() || args.w_c.is_some() {
        params.weights = MetricWeights::new(
            args.w_x.unwrap_or(params.weights.w_x),
            args.w_c.unwrap_or(params.weights.w_c),
        )?;
    }
    let stop = match (args.iterations, args.time_budget) {
        (Some(k), None) => StopCondition::iterations(k),
        (None, Some(s)) => StopCondition::time_s(s),
        (None, None) => bail!("pass --iterations K or --time-budget S"),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let checkpoints = args.checkpoints.unwrap_or_default();
    let stream = RandomStream::new(args.seed);
    let result = plan(&problem, args.planner, &params, &stop, &checkpoints, &stream)?;

    let best = result.best.as_ref().map(|solution| {
        serde_json::json!({
            "cost": solution.cost,
            "found_iteration": solution.found_iteration,
            "goal_distance": solution.goal_distance,
            "schedule": solution.schedule,
            "trajectory_samples": solution.trajectory.times.len(),
        })
    });
    let report = serde_json::json!({
        "scenario": scenario.name,
        "planner": args.planner.as_str(),
        "seed": args.seed,
        "params": params,
        "stop": stop,
        "iterations": result.iterations,
        "elapsed_s": result.elapsed_s,
        "nodes_live": result.nodes_live,
        "nodes_total": result.nodes_total,
        "pruned": result.pruned,
        "success": result.best.is_some(),
        "best": best,
        "improvements": result.improvements.iter()
            .map(|im| serde_json::json!({"iteration": im.iteration, "cost": im.cost}))
            .collect::<Vec<_>>(),
        "checkpoints": result.checkpoints.iter()
            .map(|c| serde_json::json!({
                "checkpoint": c.checkpoint,
                "iterations": c.iterations,
                "best_cost": c.best_cost,
                "nodes": c.nodes,
                "pruned": c.pruned,
            }))
            .collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_or_print(args.out.as_deref(), &text, "run report")?;
    if args.out.is_some() {
        match &result.best {
            Some(s) => eprintln!(
                "solved: cost {} after {} iterations ({} nodes)",
                s.cost, result.iterations, result.nodes_total
            ),
            None => eprintln!(
                "no solution in {} iterations ({} nodes)",
                result.iterations, result.nodes_total
            ),
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let file: BenchConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let scenario = match file.scenario {
        ScenarioRef::Name(name) => resolve_scenario(&name)?,
        ScenarioRef::Inline(s) => {
            s.validate()?;
            *s
        }
    };
    let out_dir = args
        .out
        .or(file.out)
        .ok_or_else(|| anyhow!("no output directory: set `out` in the config or pass --out"))?;
    let config = BenchConfig {
        scenario,
        planners: file.planners,
        trials: file.trials,
        stop: file.stop,
        checkpoints: file.checkpoints,
        seed: file.seed,
        threads: args.threads.unwrap_or(file.threads),
    };
    let report = run_benchmark(&config)?;
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let raw_path = out_dir.join("raw.csv");
    let summary_path = out_dir.join("summary.csv");
    std::fs::write(&raw_path, raw_csv(&report))
        .with_context(|| format!("writing {}", raw_path.display()))?;
    std::fs::write(&summary_path, summary_csv(&report))
        .with_context(|| format!("writing {}", summary_path.display()))?;
    eprintln!(
        "wrote {} and {} ({} planners x {} trials, {} failed trials)",
        raw_path.display(),
        summary_path.display(),
        config.planners.len(),
        config.trials,
        report.trial_failures
    );
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> Result<()> {
    let scenario = resolve_scenario(&args.scenario)?;
    let planners = args.planner.into_iter().map(PlannerSpec::new).collect();
    let config = ConvergenceConfig {
        scenario,
        planners,
        trials: args.trials,
        budgets: args.k_grid,
        eps: args.eps,
        reference: args.reference,
        seed: args.seed,
        threads: args.threads,
    };
    let records = convergence_experiment(&config)?;
    write_or_print(args.out.as_deref(), &convergence_csv(&records), "convergence table")
}

fn cmd_scenario(command: ScenarioCommand) -> Result<()> {
    match command {
        ScenarioCommand::List => {
            for name in Scenario::builtin_names() {
                println!("{name}");
            }
            Ok(())
        }
        ScenarioCommand::Export { name, out } => {
            let scenario = Scenario::builtin(&name)?;
            let mut text = serde_json::to_string_pretty(&scenario)?;
            text.push('\n');
            write_or_print(out.as_deref(), &text, "scenario")
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Scenario(command) => cmd_scenario(command),
    }
}
