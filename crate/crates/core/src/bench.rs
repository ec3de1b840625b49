//! Multi-trial benchmark harness.
//!
//! Runs every configured planner over a common set of seeded trials on one
//! scenario, snapshots best cost / tree size at fixed checkpoints, and
//! renders the outcome as CSV. Scheduling is a work queue over a fixed
//! `(planner, trial)` grid, so the report is independent of the number of
//! worker threads; with an iteration-based stop condition the bytes of the
//! CSV are reproducible exactly.
//!
//! Trial `i` of every planner uses the same derived seed, which pairs the
//! planners sample-for-sample the way repeated-measures comparisons want.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricWeights;
use crate::oracle;
use crate::planners::{
    plan, CheckpointRecord, PlanResult, PlannerParams, Problem, StopCondition, Variant,
};
use crate::rng::RandomStream;
use crate::scenario::Scenario;

/// Partial override of [`PlannerParams`]; unset fields keep the scenario's
/// defaults. This is what benchmark configs use to vary one knob at a time
/// without restating the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamPatch {
    pub t_prop: Option<f64>,
    pub c_max: Option<f64>,
    pub weights: Option<MetricWeights>,
    pub resolution: Option<f64>,
    pub step: Option<f64>,
    pub goal_bias: Option<f64>,
    pub adaptive_c_max: Option<bool>,
    pub sst_delta_bn: Option<f64>,
    pub sst_delta_s: Option<f64>,
    pub multi_shrink: Option<f64>,
    pub multi_max_rounds: Option<u32>,
    pub pln_bins: Option<u32>,
}

impl ParamPatch {
    /// The base parameters with every set field replaced.
    pub fn apply(&self, base: &PlannerParams) -> PlannerParams {
        let mut p = base.clone();
        macro_rules! patch {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { p.$field = v; })*
            };
        }
        patch!(
            t_prop,
            c_max,
            weights,
            resolution,
            step,
            goal_bias,
            adaptive_c_max,
            sst_delta_bn,
            sst_delta_s,
            multi_shrink,
            multi_max_rounds,
            pln_bins
        );
        p
    }
}

/// One planner entry in a benchmark: a variant, an optional distinguishing
/// label (required when the same variant appears twice), and parameter
/// overrides on top of the scenario defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSpec {
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub overrides: ParamPatch,
}

impl PlannerSpec {
    pub fn new(variant: Variant) -> Self {
        Self { variant, label: None, overrides: ParamPatch::default() }
    }

    /// The name used in report rows: the explicit label, or the variant.
    pub fn effective_label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.variant.as_str())
    }
}

fn default_trials() -> u32 {
    50
}

fn default_threads() -> usize {
    1
}

/// A complete benchmark description; serializable so runs can be archived
/// and repeated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub scenario: Scenario,
    pub planners: Vec<PlannerSpec>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    pub stop: StopCondition,
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

/// One planner/trial/checkpoint cell of the raw results table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub planner: String,
    pub trial: u32,
    pub checkpoint: f64,
    pub success: bool,
    pub best_cost: Option<f64>,
    pub nodes: u64,
    pub pruned: u64,
}

/// Per-planner, per-checkpoint aggregate over trials. Cost statistics are
/// over successful trials only (sample standard deviation; absent below
/// two successes).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub planner: String,
    pub checkpoint: f64,
    pub success_rate: f64,
    pub mean_cost: Option<f64>,
    pub std_cost: Option<f64>,
    pub n_success: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Sorted by (planner order in the config, trial, checkpoint).
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRecord>,
    /// Trials that panicked or returned an error; their rows are marked
    /// unsuccessful with empty statistics.
    pub trial_failures: u64,
}

enum TrialOutcome {
    Completed(Vec<CheckpointRecord>),
    Failed,
}

/// Run the benchmark with the standard planner entry point.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    run_benchmark_with(config, plan)
}

/// [`run_benchmark`] with an injectable planner call, which tests use to
/// exercise failure handling. `runner` must behave like [`plan`].
pub fn run_benchmark_with<F>(config: &BenchConfig, runner: F) -> Result<BenchReport>
where
    F: Fn(
            &Problem,
            Variant,
            &PlannerParams,
            &StopCondition,
            &[f64],
            &RandomStream,
        ) -> Result<PlanResult>
        + Sync,
{
    // Fail fast on anything malformed before spawning workers.
    config.scenario.validate()?;
    if config.planners.is_empty() {
        return Err(Error::Parameter("benchmark needs at least one planner".into()));
    }
    if config.trials == 0 {
        return Err(Error::Parameter("benchmark needs at least one trial".into()));
    }
    config.stop.validate()?;
    crate::planners::validate_checkpoints(&config.checkpoints)?;
    let problem = config.scenario.problem()?;
    let defaults = config.scenario.params();
    let mut param_sets = Vec::with_capacity(config.planners.len());
    let mut labels: Vec<&str> = Vec::with_capacity(config.planners.len());
    for spec in &config.planners {
        let params = spec.overrides.apply(&defaults);
        params.validate()?;
        let label = spec.effective_label();
        if labels.contains(&label) {
            return Err(Error::Parameter(format!(
                "duplicate planner label {label:?}; set distinct labels"
            )));
        }
        labels.push(label);
        param_sets.push(params);
    }

    let trials = config.trials as usize;
    let total = config.planners.len() * trials;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<TrialOutcome>>> =
        Mutex::new((0..total).map(|_| None).collect());
    let workers = config.threads.max(1).min(total);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let item = next.fetch_add(1, Ordering::Relaxed);
                if item >= total {
                    break;
                }
                let planner_idx = item / trials;
                let trial_idx = item % trials;
                let spec = &config.planners[planner_idx];
                let params = &param_sets[planner_idx];
                let stream = RandomStream::new(config.seed).trial(trial_idx as u64);
                let outcome = catch_unwind(AssertUnwindSafe(|| {
                    runner(
                        &problem,
                        spec.variant,
                        params,
                        &config.stop,
                        &config.checkpoints,
                        &stream,
                    )
                }));
                let outcome = match outcome {
                    Ok(Ok(result)) => TrialOutcome::Completed(result.checkpoints),
                    Ok(Err(_)) | Err(_) => TrialOutcome::Failed,
                };
                slots.lock().unwrap()[item] = Some(outcome);
            });
        }
    });

    let slots = slots.into_inner().unwrap();
    let mut records = Vec::with_capacity(total * config.checkpoints.len());
    let mut trial_failures = 0u64;
    for (item, outcome) in slots.into_iter().enumerate() {
        let planner_idx = item / trials;
        let trial_idx = (item % trials) as u32;
        let label = labels[planner_idx];
        match outcome.expect("every work item is claimed exactly once") {
            TrialOutcome::Completed(checkpoints) => {
                debug_assert_eq!(checkpoints.len(), config.checkpoints.len());
                for rec in checkpoints {
                    records.push(TrialRecord {
                        planner: label.to_string(),
                        trial: trial_idx,
                        checkpoint: rec.checkpoint,
                        success: rec.best_cost.is_some(),
                        best_cost: rec.best_cost,
                        nodes: rec.nodes,
                        pruned: rec.pruned,
                    });
                }
            }
            TrialOutcome::Failed => {
                trial_failures += 1;
                for &checkpoint in &config.checkpoints {
                    records.push(TrialRecord {
                        planner: label.to_string(),
                        trial: trial_idx,
                        checkpoint,
                        success: false,
                        best_cost: None,
                        nodes: 0,
                        pruned: 0,
                    });
                }
            }
        }
    }

    let summaries = summarize(&records, &labels, &config.checkpoints, config.trials);
    Ok(BenchReport { records, summaries, trial_failures })
}

fn summarize(
    records: &[TrialRecord],
    labels: &[&str],
    checkpoints: &[f64],
    trials: u32,
) -> Vec<SummaryRecord> {
    let mut out = Vec::with_capacity(labels.len() * checkpoints.len());
    for &label in labels {
        for &checkpoint in checkpoints {
            let costs: Vec<f64> = records
                .iter()
                .filter(|r| r.planner == label && r.checkpoint == checkpoint)
                .filter_map(|r| r.best_cost)
                .collect();
            let n = costs.len();
            let mean = if n > 0 { Some(costs.iter().sum::<f64>() / n as f64) } else { None };
            let std = if n > 1 {
                let m = mean.unwrap();
                Some(
                    (costs.iter().map(|c| (c - m) * (c - m)).sum::<f64>()
                        / (n as f64 - 1.0))
                        .sqrt(),
                )
            } else {
                None
            };
            out.push(SummaryRecord {
                planner: label.to_string(),
                checkpoint,
                success_rate: n as f64 / trials as f64,
                mean_cost: mean,
                std_cost: std,
                n_success: n as u32,
            });
        }
    }
    out
}

/// Format a float the way `%g` with six significant digits would: fixed
/// notation in a moderate exponent range with trailing zeros trimmed,
/// scientific otherwise. Used for every float in the CSV outputs so the
/// files are compact and bit-stable.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round to six significant digits first; the exponent of the *rounded*
    // value picks the notation (999999.7 prints as 1e6, not 1000000).
    let sci = format!("{x:.5e}");
    let (mantissa, exponent) = sci.split_once('e').expect("{:e} always has an exponent");
    let e: i32 = exponent.parse().expect("exponent is an integer");
    if !(-4..6).contains(&e) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    } else {
        let decimals = (5 - e).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_g6).unwrap_or_default()
}

/// The per-trial table as CSV.
pub fn raw_csv(report: &BenchReport) -> String {
    let mut out = String::from("planner,trial,checkpoint,success,best_cost,nodes,pruned\n");
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.planner,
            r.trial,
            fmt_g6(r.checkpoint),
            u8::from(r.success),
            fmt_opt(r.best_cost),
            r.nodes,
            r.pruned,
        ));
    }
    out
}

/// The aggregate table as CSV.
pub fn summary_csv(report: &BenchReport) -> String {
    let mut out =
        String::from("planner,checkpoint,success_rate,mean_cost,std_cost,n_success\n");
    for s in &report.summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.planner,
            fmt_g6(s.checkpoint),
            fmt_g6(s.success_rate),
            fmt_opt(s.mean_cost),
            fmt_opt(s.std_cost),
            s.n_success,
        ));
    }
    out
}

/// Configuration for the convergence experiment: how often does each
/// planner fail to get within a factor `1 + eps` of the reference cost
/// after `k` iterations?
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub scenario: Scenario,
    pub planners: Vec<PlannerSpec>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    /// Iteration budgets to probe, strictly increasing.
    pub budgets: Vec<u64>,
    /// Sub-optimality tolerances to probe.
    pub eps: Vec<f64>,
    /// Reference cost; when absent, the scenario's analytic optimum.
    #[serde(default)]
    pub reference: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub planner: String,
    pub eps: f64,
    pub budget: u64,
    pub trials: u32,
    pub failures: u32,
    pub failure_rate: f64,
}

/// Run each planner once per trial to the largest budget, snapshooting at
/// every budget, and score failures against `(1 + eps) * reference`.
pub fn convergence_experiment(config: &ConvergenceConfig) -> Result<Vec<ConvergenceRecord>> {
    if config.budgets.is_empty() {
        return Err(Error::Parameter("convergence needs at least one budget".into()));
    }
    if config.eps.is_empty() {
        return Err(Error::Parameter("convergence needs at least one tolerance".into()));
    }
    for eps in &config.eps {
        if !(*eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Parameter(format!(
                "tolerance must be finite and >= 0, got {eps}"
            )));
        }
    }
    let reference = match config.reference {
        Some(r) => {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Parameter(format!(
                    "reference cost must be finite and > 0, got {r}"
                )));
            }
            r
        }
        None => oracle::optimal_cost(&config.scenario)?.ok_or_else(|| {
            Error::Parameter(
                "scenario declares no analytic optimum; pass an explicit reference"
                    .into(),
            )
        })?,
    };
    let last = *config.budgets.last().expect("checked non-empty");
    let bench = BenchConfig {
        scenario: config.scenario.clone(),
        planners: config.planners.clone(),
        trials: config.trials,
        stop: StopCondition::iterations(last),
        checkpoints: config.budgets.iter().map(|&k| k as f64).collect(),
        seed: config.seed,
        threads: config.threads,
    };
    let report = run_benchmark(&bench)?;

    let mut out = Vec::new();
    for spec in &config.planners {
        let label = spec.effective_label();
        for &eps in &config.eps {
            let target = (1.0 + eps) * reference;
            for &budget in &config.budgets {
                let mut failures = 0u32;
                let mut seen = 0u32;
                for r in report
                    .records
                    .iter()
                    .filter(|r| r.planner == label && r.checkpoint == budget as f64)
                {
                    seen += 1;
                    if !r.success || r.best_cost.expect("success implies a cost") > target
                    {
                        failures += 1;
                    }
                }
                debug_assert_eq!(seen, config.trials);
                out.push(ConvergenceRecord {
                    planner: label.to_string(),
                    eps,
                    budget,
                    trials: config.trials,
                    failures,
                    failure_rate: failures as f64 / config.trials as f64,
                });
            }
        }
    }
    Ok(out)
}

/// The convergence table as CSV.
pub fn convergence_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("planner,eps,budget,trials,failures,failure_rate\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.planner,
            fmt_g6(r.eps),
            r.budget,
            r.trials,
            r.failures,
            fmt_g6(r.failure_rate),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(threads: usize) -> BenchConfig {
        let scenario = Scenario::builtin("geo2d_one_box").unwrap();
        BenchConfig {
            scenario,
            planners: vec![
                PlannerSpec::new(Variant::Rrt),
                PlannerSpec::new(Variant::AoRrt),
            ],
            trials: 3,
            stop: StopCondition::iterations(600),
            checkpoints: vec![200.0, 600.0],
            seed: 9,
            threads,
        }
    }

    #[test]
    fn reports_are_identical_across_runs_and_thread_counts() {
        let a = run_benchmark(&tiny_config(1)).unwrap();
        let b = run_benchmark(&tiny_config(1)).unwrap();
        let c = run_benchmark(&tiny_config(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(raw_csv(&a), raw_csv(&c));
        assert_eq!(summary_csv(&a), summary_csv(&c));
        // Shape: one row per planner/trial/checkpoint, sorted.
        assert_eq!(a.records.len(), 2 * 3 * 2);
        let mut expected_order = Vec::new();
        for planner in ["rrt", "ao-rrt"] {
            for trial in 0..3u32 {
                for checkpoint in [200.0, 600.0] {
                    expected_order.push((planner.to_string(), trial, checkpoint));
                }
            }
        }
        let got: Vec<_> = a
            .records
            .iter()
            .map(|r| (r.planner.clone(), r.trial, r.checkpoint))
            .collect();
        assert_eq!(got, expected_order);
        assert_eq!(a.trial_failures, 0);
    }

    #[test]
    fn summaries_recompute_from_the_raw_records() {
        let report = run_benchmark(&tiny_config(2)).unwrap();
        assert_eq!(report.summaries.len(), 2 * 2);
        for s in &report.summaries {
            let costs: Vec<f64> = report
                .records
                .iter()
                .filter(|r| r.planner == s.planner && r.checkpoint == s.checkpoint)
                .filter_map(|r| r.best_cost)
                .collect();
            assert_eq!(s.n_success as usize, costs.len());
            assert_eq!(s.success_rate, costs.len() as f64 / 3.0);
            match s.mean_cost {
                Some(m) => {
                    let mean = costs.iter().sum::<f64>() / costs.len() as f64;
                    assert!((m - mean).abs() < 1e-12);
                }
                None => assert!(costs.is_empty()),
            }
            match s.std_cost {
                Some(sd) => {
                    let m = s.mean_cost.unwrap();
                    let var = costs.iter().map(|c| (c - m) * (c - m)).sum::<f64>()
                        / (costs.len() as f64 - 1.0);
                    assert!((sd - var.sqrt()).abs() < 1e-12);
                }
                None => assert!(costs.len() < 2),
            }
        }
    }

    #[test]
    fn a_panicking_trial_becomes_failure_rows_not_a_crash() {
        let config = tiny_config(2);
        let report = run_benchmark_with(&config, |p, v, pp, s, c, st| {
            if v == Variant::AoRrt && st.seed == 10 {
                panic!("injected");
            }
            plan(p, v, pp, s, c, st)
        })
        .unwrap();
        assert_eq!(report.trial_failures, 1);
        assert_eq!(report.records.len(), 2 * 3 * 2);
        let failed: Vec<_> = report
            .records
            .iter()
            .filter(|r| r.planner == "ao-rrt" && r.trial == 1)
            .collect();
        assert_eq!(failed.len(), 2);
        assert!(failed.iter().all(|r| !r.success && r.best_cost.is_none() && r.nodes == 0));
        // Other trials of the same planner are unaffected.
        assert!(report
            .records
            .iter()
            .filter(|r| r.planner == "ao-rrt" && r.trial != 1)
            .any(|r| r.success));
    }

    #[test]
    fn labels_disambiguate_repeated_variants() {
        let mut config = tiny_config(1);
        config.planners = vec![
            PlannerSpec::new(Variant::AoRrt),
            PlannerSpec::new(Variant::AoRrt),
        ];
        assert!(matches!(run_benchmark(&config), Err(Error::Parameter(_))));

        config.planners[1].label = Some("ao-rrt-heavy-cost".into());
        config.planners[1].overrides.weights = Some(MetricWeights::new(1.0, 1.0).unwrap());
        let report = run_benchmark(&config).unwrap();
        assert!(report.records.iter().any(|r| r.planner == "ao-rrt-heavy-cost"));
    }

    #[test]
    fn param_patch_changes_exactly_the_named_fields() {
        let base = PlannerParams::default();
        let patch = ParamPatch {
            goal_bias: Some(0.2),
            weights: Some(MetricWeights::new(2.0, 0.5).unwrap()),
            ..ParamPatch::default()
        };
        let patched = patch.apply(&base);
        assert_eq!(patched.goal_bias, 0.2);
        assert_eq!(patched.weights, MetricWeights::new(2.0, 0.5).unwrap());
        let mut reverted = patched.clone();
        reverted.goal_bias = base.goal_bias;
        reverted.weights = base.weights;
        assert_eq!(reverted, base);
        assert_eq!(ParamPatch::default().apply(&base), base);
    }

    #[test]
    fn g6_formatting_matches_the_reference_cases() {
        for (x, want) in [
            (0.0, "0"),
            (1.0, "1"),
            (-1.0, "-1"),
            (0.05, "0.05"),
            (5000.0, "5000"),
            (10.246211251235321, "10.2462"),
            (0.0001234567, "0.000123457"),
            (1.0e-5, "1e-5"),
            (1234567.0, "1.23457e6"),
            (999999.7, "1e6"),
            (0.1 + 0.2, "0.3"),
            (2.5e-7, "2.5e-7"),
            (-31.557, "-31.557"),
        ] {
            assert_eq!(fmt_g6(x), want, "formatting {x}");
        }
    }

    #[test]
    fn convergence_scores_against_the_analytic_optimum() {
        let scenario = Scenario::builtin("geo2d_one_box").unwrap();
        let config = ConvergenceConfig {
            scenario,
            planners: vec![PlannerSpec::new(Variant::AoRrt)],
            trials: 4,
            budgets: vec![300, 1200],
            eps: vec![0.5, 10.0],
            reference: None,
            seed: 4,
            threads: 2,
        };
        let records = convergence_experiment(&config).unwrap();
        assert_eq!(records.len(), 1 * 2 * 2);
        for r in &records {
            assert_eq!(r.trials, 4);
            assert!((r.failure_rate - r.failures as f64 / 4.0).abs() < 1e-15);
        }
        // A looser tolerance can never fail more often at the same budget,
        // and more budget can never fail more often at the same tolerance.
        let get = |eps: f64, budget: u64| {
            records
                .iter()
                .find(|r| r.eps == eps && r.budget == budget)
                .unwrap()
                .failures
        };
        assert!(get(10.0, 300) <= get(0.5, 300));
        assert!(get(10.0, 1200) <= get(0.5, 1200));
        assert!(get(0.5, 1200) <= get(0.5, 300));
        // With eps = 10 the target cost is ~112, reachable whenever any
        // solution exists; expect at least one success by 1200 iterations.
        assert!(get(10.0, 1200) < 4);

        let csv = convergence_csv(&records);
        assert!(csv.starts_with("planner,eps,budget,trials,failures,failure_rate\n"));
        assert_eq!(csv.lines().count(), 1 + records.len());
    }

    #[test]
    fn csv_rows_have_empty_cost_cells_for_failures() {
        let mut config = tiny_config(1);
        // A budget too small to ever reach the goal: all rows fail.
        config.stop = StopCondition::iterations(5);
        config.checkpoints = vec![5.0];
        let report = run_benchmark(&config).unwrap();
        let csv = raw_csv(&report);
        for line in csv.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 7);
            assert_eq!(cells[3], "0");
            assert_eq!(cells[4], "");
        }
        let summary = summary_csv(&report);
        for line in summary.lines().skip(1) {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 6);
            assert_eq!(cells[2], "0");
            assert_eq!(cells[5], "0");
        }
    }
}
