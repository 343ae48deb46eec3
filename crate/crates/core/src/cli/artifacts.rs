//! Export formats: policy artifacts (JSON + CSV), simulation summaries,
//! and comparison reports. All floating-point fields are rounded to 12
//! significant digits so artifacts are regression-stable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{DominanceVerdict, KlNormReport, SensitivityReport};
use crate::cli::CmdError;
use crate::sim::MonteCarloSummary;
use crate::solver::{BeliefGrid, Policy, Solution, StoppingSetReport, ThresholdSet};

/// Current artifact schema version.
pub const ARTIFACT_FORMAT_VERSION: u32 = 1;

/// Rounds to 12 significant digits (the artifact precision contract).
pub fn sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float reparses")
}

/// Formats with 12 significant digits for human-readable output.
pub fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Condensed stopping-set block of a policy artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoppingBlock {
    /// Number of grid points where the policy announces.
    pub points: usize,
    /// Midpoints between stop points stay in the stop set.
    pub convex: bool,
    /// For two-state problems: the target-probability interval.
    pub interval: Option<(f64, f64)>,
}

impl StoppingBlock {
    pub fn from_report(report: &StoppingSetReport) -> Self {
        StoppingBlock {
            points: report.members.iter().filter(|m| **m).count(),
            convex: report.convex,
            interval: report
                .interval
                .map(|(lo, hi)| (sig12(lo), sig12(hi))),
        }
    }
}

/// A solved policy with its value table, as written by the solve command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyArtifact {
    pub format_version: u32,
    #[serde(default)]
    pub scenario: String,
    pub num_states: usize,
    pub num_actions: usize,
    pub grid_resolution: usize,
    /// Belief coordinates per grid point.
    pub beliefs: Vec<Vec<f64>>,
    /// Chosen action per grid point (0 = announce).
    pub actions: Vec<usize>,
    /// Optimal expected total cost per grid point.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub final_gap: f64,
    /// Two-state problems: per-action target-probability thresholds.
    pub thresholds: Option<Vec<f64>>,
    /// Actions are nonincreasing along rising target probability.
    pub monotone: Option<bool>,
    pub stopping: StoppingBlock,
}

impl PolicyArtifact {
    /// Assembles the artifact from a solution and its grid diagnostics.
    pub fn from_solution(
        scenario: &str,
        grid: &BeliefGrid,
        solution: &Solution,
        thresholds: Option<&ThresholdSet>,
        monotone: Option<bool>,
        stopping: &StoppingSetReport,
    ) -> Self {
        PolicyArtifact {
            format_version: ARTIFACT_FORMAT_VERSION,
            scenario: scenario.to_string(),
            num_states: grid.dimension(),
            num_actions: solution.policy.num_actions(),
            grid_resolution: grid.resolution(),
            beliefs: grid
                .points()
                .iter()
                .map(|p| p.probs().iter().map(|&v| sig12(v)).collect())
                .collect(),
            actions: solution.policy.actions().to_vec(),
            values: solution.values.values().iter().map(|&v| sig12(v)).collect(),
            iterations: solution.iterations,
            final_gap: sig12(solution.gap),
            thresholds: thresholds.map(|t| t.thresholds.iter().map(|&v| sig12(v)).collect()),
            monotone,
            stopping: StoppingBlock::from_report(stopping),
        }
    }

    /// Writes the JSON artifact.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] on I/O failure.
    pub fn write_json(&self, path: &Path) -> Result<(), CmdError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CmdError::Input(format!("serialize artifact: {e}")))?;
        std::fs::write(path, text)
            .map_err(|e| CmdError::Input(format!("write {}: {e}", path.display())))
    }

    /// Writes the CSV companion: `pi_1..pi_X,action,value` per grid point.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] on I/O failure.
    pub fn write_csv(&self, path: &Path) -> Result<(), CmdError> {
        let mut writer = csv::Writer::from_path(path)
            .map_err(|e| CmdError::Input(format!("write {}: {e}", path.display())))?;
        let mut header: Vec<String> = (1..=self.num_states).map(|i| format!("pi_{i}")).collect();
        header.push("action".into());
        header.push("value".into());
        writer
            .write_record(&header)
            .map_err(|e| CmdError::Input(format!("write {}: {e}", path.display())))?;
        for ((belief, &action), &value) in self
            .beliefs
            .iter()
            .zip(&self.actions)
            .zip(&self.values)
        {
            let mut row: Vec<String> = belief.iter().map(|&v| fmt12(v)).collect();
            row.push(action.to_string());
            row.push(fmt12(value));
            writer
                .write_record(&row)
                .map_err(|e| CmdError::Input(format!("write {}: {e}", path.display())))?;
        }
        writer
            .flush()
            .map_err(|e| CmdError::Input(format!("write {}: {e}", path.display())))
    }

    /// Reads an artifact back.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] on I/O or parse failure or version mismatch.
    pub fn load(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::Input(format!("cannot read {}: {e}", path.display())))?;
        let artifact: PolicyArtifact = serde_json::from_str(&text)
            .map_err(|e| CmdError::Input(format!("cannot parse {}: {e}", path.display())))?;
        if artifact.format_version != ARTIFACT_FORMAT_VERSION {
            return Err(CmdError::Input(format!(
                "{}: format_version {} is not supported (expected {ARTIFACT_FORMAT_VERSION})",
                path.display(),
                artifact.format_version
            )));
        }
        Ok(artifact)
    }

    /// Rebuilds the policy against a grid, verifying compatibility.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] when the artifact does not fit the grid.
    pub fn to_policy(&self, grid: &BeliefGrid) -> Result<Policy, CmdError> {
        if self.num_states != grid.dimension() || self.actions.len() != grid.len() {
            return Err(CmdError::Input(format!(
                "policy artifact covers {} points over {} states; grid has {} points over {}",
                self.actions.len(),
                self.num_states,
                grid.len(),
                grid.dimension()
            )));
        }
        Policy::new(self.actions.clone(), self.num_actions)
            .map_err(|e| CmdError::Input(format!("policy artifact: {e}")))
    }
}

/// Simulation summary artifact.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryArtifact {
    pub format_version: u32,
    pub scenario: String,
    pub policy: String,
    pub summary: MonteCarloSummary,
}

/// Comparison artifact: dominance verdict plus sensitivity norms where the
/// model shapes allow them.
#[derive(Debug, Clone, Serialize)]
pub struct CompareArtifact {
    pub format_version: u32,
    pub scenario_first: String,
    pub scenario_second: String,
    pub transition_ordered: bool,
    pub observation_ordered: bool,
    pub implied: bool,
    pub violations: usize,
    pub pass: bool,
    pub sensitivity: Option<SensitivityReport>,
    pub kl: Option<KlNormReport>,
}

impl CompareArtifact {
    pub fn new(
        first: &str,
        second: &str,
        verdict: &DominanceVerdict,
        sensitivity: Option<SensitivityReport>,
        kl: Option<KlNormReport>,
    ) -> Self {
        CompareArtifact {
            format_version: ARTIFACT_FORMAT_VERSION,
            scenario_first: first.to_string(),
            scenario_second: second.to_string(),
            transition_ordered: verdict.transition_ordered,
            observation_ordered: verdict.observation_ordered,
            implied: verdict.implied,
            violations: verdict.violations,
            pass: verdict.pass,
            sensitivity,
            kl,
        }
    }
}

/// Serializes any artifact to a file.
///
/// # Errors
///
/// [`CmdError::Input`] on I/O failure.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CmdError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CmdError::Input(format!("serialize artifact: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CmdError::Input(format!("write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::build_action_costs;
    use crate::models::{ObservationKind, ObservationModel, SamplingModel, TransitionMatrix};
    use crate::solver::{analyze_stopping_set, extract_thresholds, make_grid, value_iterate};

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(1.0), 1.0);
        assert_eq!(sig12(2.0 / 3.0), 0.666666666667);
        assert_eq!(fmt12(0.4), "4.00000000000e-1");
        assert!(sig12(f64::INFINITY).is_infinite());
    }

    #[test]
    fn artifact_round_trip_preserves_the_policy() {
        let a = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.1, 0.9]]).unwrap();
        let obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.3, 0.7, 0.0], vec![0.0, 0.2, 0.8]],
        })
        .unwrap();
        let intervals = vec![1, 3, 5, 10];
        let costs = crate::costs::build_qd_costs(
            17.0,
            0.4,
            vec![vec![0.0; 4], vec![2.8; 4]],
            &a,
            &intervals,
        )
        .unwrap();
        let model = SamplingModel::new(a, obs, intervals, costs).unwrap();
        let vectors = build_action_costs(&model);
        let grid = make_grid(2, 101).unwrap();
        let solution = value_iterate(&model, &vectors, &grid, 1e-7, 10_000).unwrap();
        let (thresholds, monotone) = extract_thresholds(&solution.policy, &grid).unwrap();
        let stopping = analyze_stopping_set(&solution.policy, &grid);
        let artifact = PolicyArtifact::from_solution(
            "demo",
            &grid,
            &solution,
            thresholds.as_ref(),
            Some(monotone),
            &stopping,
        );

        let dir = tempfile::tempdir().unwrap();
        let json_path = dir.path().join("policy.json");
        let csv_path = dir.path().join("policy.csv");
        artifact.write_json(&json_path).unwrap();
        artifact.write_csv(&csv_path).unwrap();

        let reloaded = PolicyArtifact::load(&json_path).unwrap();
        let policy = reloaded.to_policy(&grid).unwrap();
        assert_eq!(policy.actions(), solution.policy.actions());

        // CSV rows encode the identical policy.
        let mut reader = csv::Reader::from_path(&csv_path).unwrap();
        let headers = reader.headers().unwrap().clone();
        assert_eq!(&headers[0], "pi_1");
        assert_eq!(&headers[2], "action");
        for (record, &action) in reader.records().zip(solution.policy.actions()) {
            let record = record.unwrap();
            assert_eq!(record[2].parse::<usize>().unwrap(), action);
        }

        // A mismatched grid is rejected.
        let small = make_grid(2, 11).unwrap();
        assert!(reloaded.to_policy(&small).is_err());
    }
}
