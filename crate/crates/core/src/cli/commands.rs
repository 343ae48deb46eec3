//! Implementations of the four subcommands. Each returns `Ok(())` on
//! success or a [`CmdError`] carrying the exit-code class; all numeric
//! output uses 12 significant digits.

use std::path::Path;

use crate::analysis::{
    compare_optimal_costs, mismatch_norm_kl, sensitivity_bound, AnalysisError,
};
use crate::bounds::{check_assumptions, myopic_lower, myopic_upper, Verdict};
use crate::cli::artifacts::{
    fmt12, write_json, CompareArtifact, PolicyArtifact, SummaryArtifact, ARTIFACT_FORMAT_VERSION,
};
use crate::cli::config::ScenarioConfig;
use crate::cli::CmdError;
use crate::sim::monte_carlo_evaluate;
use crate::solver::{
    analyze_stopping_set, extract_thresholds, value_iterate, Policy, Solution, SolverError,
};

fn solver_to_cmd(e: SolverError) -> CmdError {
    match e {
        SolverError::Convergence { .. } => CmdError::Analysis(e.to_string()),
        other => CmdError::Input(other.to_string()),
    }
}

fn analysis_to_cmd(e: AnalysisError) -> CmdError {
    match e {
        AnalysisError::Solver(SolverError::Convergence { .. }) => {
            CmdError::Analysis(e.to_string())
        }
        other => CmdError::Input(other.to_string()),
    }
}

fn scenario_label(config: &ScenarioConfig, path: &Path) -> String {
    if config.name.is_empty() {
        path.display().to_string()
    } else {
        config.name.clone()
    }
}

// ------------------------------------------------------------------
// check
// ------------------------------------------------------------------

/// Scans the structural assumptions and prints one verdict per line.
///
/// # Errors
///
/// [`CmdError::Input`] for unreadable scenarios or an inadmissible
/// `alpha`; [`CmdError::Analysis`] when any applicable assumption fails.
pub fn cmd_check(
    scenario: &Path,
    alpha: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CmdError> {
    let config = ScenarioConfig::load(scenario)?;
    let (model, vectors) = config.build()?;
    let alpha = alpha.or(config.alpha);
    let report = check_assumptions(&model, &vectors, alpha)
        .map_err(|e| CmdError::Input(e.to_string()))?;

    println!(
        "scenario: {} ({} states, {} sampling actions)",
        scenario_label(&config, scenario),
        model.num_states(),
        model.num_actions()
    );
    println!("shift constant (absorption checks): {}", fmt12(report.alpha));
    if let Some(au) = report.alpha_underline {
        println!("shift constant (transformed costs): {}", fmt12(au));
    }
    for entry in &report.entries {
        match &entry.verdict {
            Verdict::Pass { margin } => {
                println!("  {:<7} pass   margin {}", entry.id.to_string(), fmt12(*margin));
            }
            Verdict::Fail { witness, margin } => {
                let idx: Vec<String> = witness.iter().map(|w| w.to_string()).collect();
                println!(
                    "  {:<7} FAIL   witness ({})  margin {}",
                    entry.id.to_string(),
                    idx.join(","),
                    fmt12(*margin)
                );
            }
            Verdict::NotApplicable { reason } => {
                println!("  {:<7} n/a    {}", entry.id.to_string(), reason);
            }
        }
    }

    if let Some(out) = out {
        write_json(&report, out)?;
        println!("wrote {}", out.display());
    }

    let failed: Vec<String> = report
        .entries
        .iter()
        .filter(|e| e.verdict.failed())
        .map(|e| e.id.to_string())
        .collect();
    if failed.is_empty() {
        println!("result: all applicable assumptions hold");
        Ok(())
    } else {
        println!("result: {} assumption(s) failed", failed.len());
        Err(CmdError::Analysis(format!(
            "assumption scan failed: {}",
            failed.join(", ")
        )))
    }
}

// ------------------------------------------------------------------
// solve
// ------------------------------------------------------------------

/// Solves a scenario and optionally exports the policy artifact pair.
///
/// # Errors
///
/// [`CmdError::Input`] for bad scenarios or unwritable outputs;
/// [`CmdError::Analysis`] when the solver does not converge.
pub fn cmd_solve(
    scenario: &Path,
    out: Option<&Path>,
    grid_override: Option<usize>,
    tol_override: Option<f64>,
) -> Result<(), CmdError> {
    let config = ScenarioConfig::load(scenario)?;
    let (model, vectors) = config.build()?;
    let grid = config.grid(model.num_states(), grid_override)?;
    let tol = tol_override.unwrap_or(config.solver.tol);

    let solution = value_iterate(&model, &vectors, &grid, tol, config.solver.max_iter)
        .map_err(solver_to_cmd)?;
    let (thresholds, monotone) = if grid.dimension() == 2 {
        let (t, m) = extract_thresholds(&solution.policy, &grid).map_err(solver_to_cmd)?;
        (t, Some(m))
    } else {
        (None, None)
    };
    let stopping = analyze_stopping_set(&solution.policy, &grid);

    println!("scenario: {}", scenario_label(&config, scenario));
    println!(
        "grid: {} points over {} states",
        grid.len(),
        grid.dimension()
    );
    println!(
        "converged: {} sweeps, final gap {} (tol {})",
        solution.iterations,
        fmt12(solution.gap),
        fmt12(tol)
    );
    let initial = config.initial_belief(model.num_states())?;
    println!(
        "value at initial belief: {}",
        fmt12(solution.values.value_at(&grid, &initial))
    );
    print!(
        "stopping set: {} points, convex: {}",
        stopping.members.iter().filter(|m| **m).count(),
        stopping.convex
    );
    if let Some((lo, hi)) = stopping.interval {
        print!(", target-probability interval [{}, {}]", fmt12(lo), fmt12(hi));
    }
    println!();
    if let Some(t) = &thresholds {
        let list: Vec<String> = t.thresholds.iter().map(|&v| fmt12(v)).collect();
        println!("action thresholds (target probability): {}", list.join(", "));
    }
    if let Some(m) = monotone {
        println!("actions monotone along the grid: {m}");
    }

    if let Some(out) = out {
        let artifact = PolicyArtifact::from_solution(
            &scenario_label(&config, scenario),
            &grid,
            &solution,
            thresholds.as_ref(),
            monotone,
            &stopping,
        );
        let json_path = out.with_extension("json");
        let csv_path = out.with_extension("csv");
        artifact.write_json(&json_path)?;
        artifact.write_csv(&csv_path)?;
        println!("wrote {} and {}", json_path.display(), csv_path.display());
    }
    Ok(())
}

// ------------------------------------------------------------------
// simulate
// ------------------------------------------------------------------

/// Resolves the `--policy` argument to a concrete policy.
fn resolve_policy(
    source: &str,
    config: &ScenarioConfig,
    model: &crate::models::SamplingModel,
    vectors: &crate::costs::ActionCostVectors,
    grid: &crate::solver::BeliefGrid,
    tol: f64,
    alpha: Option<f64>,
) -> Result<Policy, CmdError> {
    match source {
        "optimal" => {
            let Solution { policy, .. } =
                value_iterate(model, vectors, grid, tol, config.solver.max_iter)
                    .map_err(solver_to_cmd)?;
            Ok(policy)
        }
        "myopic-lower" => {
            myopic_lower(model, vectors, grid).map_err(|e| CmdError::Input(e.to_string()))
        }
        "myopic-upper" => myopic_upper(model, vectors, grid, alpha)
            .map_err(|e| CmdError::Input(e.to_string())),
        path => PolicyArtifact::load(Path::new(path))?.to_policy(grid),
    }
}

/// Monte-Carlo rollout of a policy; prints each cost component with its
/// standard error.
///
/// # Errors
///
/// [`CmdError::Input`] for bad scenarios, policies, or parameters;
/// [`CmdError::Analysis`] when any episode hits the step cap.
#[allow(clippy::too_many_arguments)]
pub fn cmd_simulate(
    scenario: &Path,
    policy_source: &str,
    runs: u64,
    seed: u64,
    grid_override: Option<usize>,
    tol_override: Option<f64>,
    alpha: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CmdError> {
    let config = ScenarioConfig::load(scenario)?;
    let (model, vectors) = config.build()?;
    let grid = config.grid(model.num_states(), grid_override)?;
    let tol = tol_override.unwrap_or(config.solver.tol);
    let alpha = alpha.or(config.alpha);
    let policy = resolve_policy(policy_source, &config, &model, &vectors, &grid, tol, alpha)?;
    let initial = config.initial_belief(model.num_states())?;

    let summary = monte_carlo_evaluate(&model, &policy, &grid, &initial, runs, seed)
        .map_err(|e| match e {
            crate::sim::SimError::AllEpisodesRanAway { .. }
            | crate::sim::SimError::RunawayEpisode { .. } => CmdError::Analysis(e.to_string()),
            other => CmdError::Input(other.to_string()),
        })?;

    println!("scenario: {}", scenario_label(&config, scenario));
    println!("policy: {policy_source} ({}-point grid)", grid.len());
    println!(
        "episodes: {} completed, {} runaway, seed {}",
        summary.episodes, summary.runaways, summary.seed
    );
    println!(
        "total cost:        {} +/- {}",
        fmt12(summary.total.mean),
        fmt12(summary.total.std_error)
    );
    println!(
        "running cost:      {} +/- {}",
        fmt12(summary.running.mean),
        fmt12(summary.running.std_error)
    );
    println!(
        "stop cost:         {} +/- {}",
        fmt12(summary.stop.mean),
        fmt12(summary.stop.std_error)
    );
    println!(
        "measurement cost:  {} +/- {}",
        fmt12(summary.measurement.mean),
        fmt12(summary.measurement.std_error)
    );

    if let Some(out) = out {
        let artifact = SummaryArtifact {
            format_version: ARTIFACT_FORMAT_VERSION,
            scenario: scenario_label(&config, scenario),
            policy: policy_source.to_string(),
            summary: summary.clone(),
        };
        write_json(&artifact, out)?;
        println!("wrote {}", out.display());
    }

    if summary.runaways > 0 {
        return Err(CmdError::Analysis(format!(
            "{} episode(s) never announced within the step cap",
            summary.runaways
        )));
    }
    Ok(())
}

// ------------------------------------------------------------------
// compare
// ------------------------------------------------------------------

/// Compares two scenarios: optimal-cost dominance, the sensitivity bound
/// under the first scenario's costs, and mismatch norms where the model
/// shapes allow them.
///
/// # Errors
///
/// [`CmdError::Input`] when the scenarios are unreadable or structurally
/// incomparable; [`CmdError::Analysis`] when a solve fails to converge.
/// A comparison whose premises simply do not hold still exits 0.
pub fn cmd_compare(
    scenario_a: &Path,
    scenario_b: &Path,
    grid_override: Option<usize>,
    tol_override: Option<f64>,
    out: Option<&Path>,
) -> Result<(), CmdError> {
    let config_a = ScenarioConfig::load(scenario_a)?;
    let config_b = ScenarioConfig::load(scenario_b)?;
    let (model_a, _) = config_a.build()?;
    let (model_b, _) = config_b.build()?;
    let grid = config_a.grid(model_a.num_states(), grid_override)?;
    let tol = tol_override.unwrap_or(1e-8);

    let label_a = scenario_label(&config_a, scenario_a);
    let label_b = scenario_label(&config_b, scenario_b);
    println!("first:  {label_a}");
    println!("second: {label_b}");

    let verdict =
        compare_optimal_costs(&model_a, &model_b, &grid, tol).map_err(analysis_to_cmd)?;
    println!(
        "transition order (first dominates second): {}",
        verdict.transition_ordered
    );
    println!(
        "observation order (first garbled from second): {}",
        verdict.observation_ordered
    );
    println!("value dominance implied: {}", verdict.implied);
    println!(
        "pointwise value violations: {} of {}",
        verdict.violations,
        verdict.pointwise_ok.len()
    );
    println!("verdict: {}", if verdict.pass { "pass" } else { "not implied" });

    let sensitivity = match sensitivity_bound(&model_a, &model_b, &model_a.costs) {
        Ok(report) => {
            println!(
                "sensitivity: y* {} rho {} norm {} bound {}",
                report.y_star,
                fmt12(report.rho),
                fmt12(report.norm),
                fmt12(report.bound)
            );
            Some(report)
        }
        Err(AnalysisError::UnboundedSensitivity { rho }) => {
            println!(
                "sensitivity: unbounded (continue mass {} does not contract)",
                fmt12(rho)
            );
            None
        }
        Err(AnalysisError::InvalidParameter(msg)) => {
            println!("sensitivity: n/a ({msg})");
            None
        }
        Err(e) => return Err(analysis_to_cmd(e)),
    };

    let kl = match mismatch_norm_kl(&model_a, &model_b) {
        Ok(report) => {
            println!(
                "divergence norm: {}{}",
                fmt12(report.norm),
                if report.infinite {
                    " (infinite: disjoint observation support)"
                } else {
                    ""
                }
            );
            if let Some(g) = &report.gaussian {
                println!(
                    "gaussian forms: deviation-ratio {} standard {}",
                    fmt12(g.printed),
                    fmt12(g.standard)
                );
            }
            Some(report)
        }
        Err(AnalysisError::InvalidParameter(msg)) => {
            println!("divergence norm: n/a ({msg})");
            None
        }
        Err(e) => return Err(analysis_to_cmd(e)),
    };

    if let Some(out) = out {
        let artifact = CompareArtifact::new(&label_a, &label_b, &verdict, sensitivity, kl);
        write_json(&artifact, out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
