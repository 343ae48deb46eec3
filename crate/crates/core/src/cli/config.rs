//! Scenario files: the JSON schema that describes one sampling problem.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cli::CmdError;
use crate::costs::{build_action_costs, build_qd_costs, ActionCostVectors, CostSpec};
use crate::models::{BeliefState, ObservationKind, ObservationModel, SamplingModel, TransitionMatrix};
use crate::solver::{default_resolution, BeliefGrid, make_grid};

/// Current scenario-file schema version.
pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// Measurement-cost shorthand: one scalar for everything, one value per
/// state, or the full state×action matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementConfig {
    Scalar(f64),
    PerState(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        MeasurementConfig::Scalar(0.0)
    }
}

impl MeasurementConfig {
    fn expand(&self, states: usize, actions: usize) -> Result<Vec<Vec<f64>>, CmdError> {
        match self {
            MeasurementConfig::Scalar(v) => Ok(vec![vec![*v; actions]; states]),
            MeasurementConfig::PerState(per) => {
                if per.len() != states {
                    return Err(CmdError::Input(format!(
                        "costs.measurement lists {} states, the model has {states}",
                        per.len()
                    )));
                }
                Ok(per.iter().map(|&v| vec![v; actions]).collect())
            }
            MeasurementConfig::Matrix(m) => Ok(m.clone()),
        }
    }
}

/// Cost block of a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CostConfig {
    /// Change-detection costs: false-alarm charge, per-unit delay charge,
    /// and measurement costs.
    Quickest {
        false_alarm: f64,
        delay: f64,
        #[serde(default)]
        measurement: MeasurementConfig,
    },
    /// General linear costs: `c[i][u]` (u = 0 is the stop cost) and the
    /// state×action measurement matrix `m`.
    Generic { c: Vec<Vec<f64>>, m: Vec<Vec<f64>> },
}

/// Solver knobs; all optional in the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Belief-grid resolution (defaults to the dimension-based choice).
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_max_iter() -> usize {
    100_000
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_points: None,
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

/// One sampling problem as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub format_version: u32,
    #[serde(default)]
    pub name: String,
    /// Row-stochastic transition matrix, state 0 first.
    pub transition: Vec<Vec<f64>>,
    /// Observation channel (tagged by `kind`).
    pub observation: ObservationKind,
    /// Sampling-interval ladder D_1 < … < D_L.
    pub intervals: Vec<u32>,
    pub costs: CostConfig,
    /// Starting belief; defaults to certainty of the last state.
    #[serde(default)]
    pub initial_belief: Option<Vec<f64>>,
    /// Shift constant for upper-bound constructions.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl ScenarioConfig {
    /// Reads and parses a scenario file.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] with the file path and the parser's
    /// field-level message.
    pub fn load(path: &Path) -> Result<Self, CmdError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CmdError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CmdError::Input(msg) => CmdError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses scenario JSON text, enforcing the format version.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] when the text is not a scenario document or
    /// its format version is unsupported.
    pub fn parse(text: &str) -> Result<Self, CmdError> {
        let config: ScenarioConfig = serde_json::from_str(text)
            .map_err(|e| CmdError::Input(format!("invalid scenario JSON: {e}")))?;
        if config.format_version != SCENARIO_FORMAT_VERSION {
            return Err(CmdError::Input(format!(
                "format_version {} is not supported (expected {SCENARIO_FORMAT_VERSION})",
                config.format_version
            )));
        }
        Ok(config)
    }

    /// Builds the model and its cost vectors.
    ///
    /// # Errors
    ///
    /// [`CmdError::Input`] when any block fails validation.
    pub fn build(&self) -> Result<(SamplingModel, ActionCostVectors), CmdError> {
        let transition = TransitionMatrix::new(self.transition.clone())
            .map_err(|e| CmdError::Input(format!("transition: {e}")))?;
        let obs = ObservationModel::build(self.observation.clone())
            .map_err(|e| CmdError::Input(format!("observation: {e}")))?;
        let states = transition.dim();
        let actions = self.intervals.len();
        let costs = match &self.costs {
            CostConfig::Quickest {
                false_alarm,
                delay,
                measurement,
            } => {
                let m = measurement.expand(states, actions)?;
                build_qd_costs(*false_alarm, *delay, m, &transition, &self.intervals)
                    .map_err(|e| CmdError::Input(format!("costs: {e}")))?
            }
            CostConfig::Generic { c, m } => CostSpec::Generic {
                c: c.clone(),
                m: m.clone(),
            },
        };
        let model = SamplingModel::new(transition, obs, self.intervals.clone(), costs)
            .map_err(|e| CmdError::Input(format!("model: {e}")))?;
        let vectors = build_action_costs(&model);
        Ok((model, vectors))
    }

    /// The starting belief (explicit or the default last-state vertex).
    pub fn initial_belief(&self, states: usize) -> Result<BeliefState, CmdError> {
        match &self.initial_belief {
            Some(probs) => BeliefState::new(probs.clone())
                .map_err(|e| CmdError::Input(format!("initial_belief: {e}"))),
            None => Ok(BeliefState::unit(states - 1, states)),
        }
    }

    /// The belief grid, honoring a command-line override.
    pub fn grid(&self, states: usize, override_points: Option<usize>) -> Result<BeliefGrid, CmdError> {
        let resolution = override_points
            .or(self.solver.grid_points)
            .unwrap_or_else(|| default_resolution(states));
        make_grid(states, resolution).map_err(|e| CmdError::Input(format!("grid: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_json() -> String
    {
        r#"{
            "format_version": 1,
            "name": "detection demo",
            "transition": [[1.0, 0.0], [0.1, 0.9]],
            "observation": {"kind": "discrete", "matrix": [[0.3, 0.7, 0.0], [0.0, 0.2, 0.8]]},
            "intervals": [1, 3, 5, 10],
            "costs": {"mode": "quickest", "false_alarm": 17.0, "delay": 0.4,
                      "measurement": [0.0, 2.8]},
            "solver": {"grid_points": 101}
        }"#
        .to_string()
    }

    #[test]
    fn scenario_round_trip() {
        let config: ScenarioConfig = serde_json::from_str(&example_json()).unwrap();
        let (model, vectors) = config.build().unwrap();
        assert_eq!(model.num_states(), 2);
        assert_eq!(model.num_actions(), 4);
        assert_eq!(vectors.vector(0), &[0.0, 17.0]);
        // Per-state measurement shorthand expanded across actions.
        assert_eq!(model.costs.measurement(1, 3), 2.8);
        assert_eq!(model.costs.measurement(0, 1), 0.0);
        let belief = config.initial_belief(2).unwrap();
        assert_eq!(belief.probs(), &[0.0, 1.0]);
        let grid = config.grid(2, None).unwrap();
        assert_eq!(grid.len(), 101);
        // Command-line override wins.
        assert_eq!(config.grid(2, Some(11)).unwrap().len(), 11);

        // Serialize back and reparse.
        let text = serde_json::to_string(&config).unwrap();
        let again: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(again.intervals, vec![1, 3, 5, 10]);
    }

    #[test]
    fn bad_inputs_have_field_level_messages() {
        let mut bad: serde_json::Value = serde_json::from_str(&example_json()).unwrap();
        bad["transition"] = serde_json::json!([[0.5, 0.4], [0.1, 0.9]]);
        let config: ScenarioConfig = serde_json::from_value(bad).unwrap();
        let err = config.build().unwrap_err();
        assert!(matches!(err, CmdError::Input(_)));
        assert!(err.to_string().contains("transition"));

        let mut wrong_version: serde_json::Value =
            serde_json::from_str(&example_json()).unwrap();
        wrong_version["format_version"] = serde_json::json!(99);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        std::fs::write(&path, wrong_version.to_string()).unwrap();
        assert!(matches!(
            ScenarioConfig::load(&path),
            Err(CmdError::Input(_))
        ));
    }

    #[test]
    fn generic_costs_parse() {
        let text = r#"{
            "format_version": 1,
            "transition": [[0.2, 0.8], [0.1, 0.9]],
            "observation": {"kind": "discrete", "matrix": [[0.7, 0.3], [0.2, 0.8]]},
            "intervals": [1, 2],
            "costs": {"mode": "generic",
                      "c": [[0.0, 0.5, 0.5], [3.0, 0.1, 0.2]],
                      "m": [[1.0, 0.9], [1.0, 0.9]]}
        }"#;
        let config: ScenarioConfig = serde_json::from_str(text).unwrap();
        let (model, vectors) = config.build().unwrap();
        assert_eq!(model.num_actions(), 2);
        assert_eq!(vectors.vector(0), &[0.0, 3.0]);
    }
}
