//! Monte-Carlo simulation of the measurement-sampling protocol.
//!
//! An episode follows the decision protocol exactly: the chain starts from
//! a draw of the initial belief and moves one step per time unit; the
//! first observation arrives free at time 0 and conditions the belief; at
//! each decision epoch the policy either announces (terminal stop cost,
//! for detection problems the false-alarm charge) or picks a sampling
//! interval, paying its measurement cost now and the per-unit running
//! cost (for detection problems the delay charge in the target state)
//! until the next observation arrives. [`monte_carlo_evaluate`] averages
//! independent episodes with per-episode counter-derived random streams,
//! so summaries are bitwise reproducible regardless of how episodes are
//! scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::models::{filter_update, BeliefState, ModelError, SamplingModel, TransitionMatrix};
use crate::solver::{BeliefGrid, Policy};

/// Hard cap on simulated chain time per episode; hitting it means the
/// policy never stops.
pub const EPISODE_CAP: u64 = 1_000_000;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    /// A caller-supplied argument violates the operation's contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The policy kept sampling past the episode time cap.
    #[error("episode exceeded {cap} time units without stopping")]
    RunawayEpisode { cap: u64 },
    /// Every requested episode hit the time cap.
    #[error("all {episodes} episodes exceeded {cap} time units")]
    AllEpisodesRanAway { cap: u64, episodes: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Complete record of one simulated episode.
#[derive(Debug, Clone, Serialize)]
pub struct EpisodeTrace {
    /// First chain time at which the target state was occupied, if it was
    /// before the announcement.
    pub change_time: Option<u64>,
    /// Decision epochs τ₁..τ_k in chain time, starting at 0; consecutive
    /// epochs differ by the chosen action's sampling interval.
    pub epochs: Vec<u64>,
    /// Action taken at each epoch; the last one is always 0 (announce).
    pub actions: Vec<usize>,
    /// Observation symbol received at each epoch.
    pub observations: Vec<usize>,
    /// Accumulated per-unit running cost (the delay charge for detection
    /// problems).
    pub running_cost: f64,
    /// Terminal announcement cost (the false-alarm charge for detection
    /// problems when the chain had not yet changed).
    pub stop_cost: f64,
    /// Accumulated measurement-scheduling cost.
    pub measurement_cost: f64,
}

impl EpisodeTrace {
    pub fn total(&self) -> f64 {
        self.running_cost + self.stop_cost + self.measurement_cost
    }

    /// The announcement was charged, i.e. it came before the change.
    pub fn false_alarm(&self) -> bool {
        self.stop_cost > 0.0
    }
}

/// Mean and standard error of one cost component.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Aggregated Monte-Carlo results.
#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    /// Episodes that terminated (runaways excluded from the estimates).
    pub episodes: u64,
    /// Episodes that hit the time cap.
    pub runaways: u64,
    pub seed: u64,
    pub total: Estimate,
    pub running: Estimate,
    pub stop: Estimate,
    pub measurement: Estimate,
}

/// Draws an index from a probability row.
fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Runs one episode of the sampling protocol.
///
/// The chain state is drawn from `initial`; the free time-0 observation
/// conditions the belief before the first decision. Off-grid beliefs map
/// to actions through the grid's lookup rule.
///
/// # Errors
///
/// [`SimError::RunawayEpisode`] when the policy does not stop within
/// [`EPISODE_CAP`] time units; [`SimError::InvalidParameter`] on shape
/// mismatches.
pub fn simulate_episode<R: Rng>(
    model: &SamplingModel,
    policy: &Policy,
    grid: &BeliefGrid,
    initial: &BeliefState,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    if initial.dim() != model.num_states() || grid.dimension() != model.num_states() {
        return Err(SimError::InvalidParameter(format!(
            "initial belief ({}) and grid ({}) must match the {}-state model",
            initial.dim(),
            grid.dimension(),
            model.num_states()
        )));
    }
    if policy.len() != grid.len() {
        return Err(SimError::InvalidParameter(format!(
            "policy covers {} points, grid has {}",
            policy.len(),
            grid.len()
        )));
    }

    let mut state = sample_index(initial.probs(), rng);
    let mut t: u64 = 0;
    let mut change_time = if state == 0 { Some(0) } else { None };

    // Free observation at τ₁ = 0: condition the belief on it directly.
    let y0 = sample_index(&model.obs.matrix()[state], rng);
    let (post, _) = model
        .obs
        .bayes(initial.probs(), y0)
        .expect("observations drawn from the true state have positive likelihood");
    let mut belief = BeliefState::new(post).expect("Bayes update is normalized");

    let mut epochs = vec![0u64];
    let mut observations = vec![y0];
    let mut actions = Vec::new();
    let mut running_cost = 0.0;
    let mut measurement_cost = 0.0;

    loop {
        let u = policy.action_at(grid, &belief);
        actions.push(u);
        if u == 0 {
            return Ok(EpisodeTrace {
                change_time,
                epochs,
                actions,
                observations,
                running_cost,
                stop_cost: model.costs.stop_cost(state),
                measurement_cost,
            });
        }
        measurement_cost += model.costs.measurement(state, u);
        let d = model.intervals[u - 1] as u64;
        for _ in 0..d {
            running_cost += model.costs.running_cost(state, u);
            state = sample_index(&model.transition.rows()[state], rng);
            t += 1;
            if change_time.is_none() && state == 0 {
                change_time = Some(t);
            }
            if t >= EPISODE_CAP {
                return Err(SimError::RunawayEpisode { cap: EPISODE_CAP });
            }
        }
        epochs.push(t);
        let y = sample_index(&model.obs.matrix()[state], rng);
        observations.push(y);
        let (next, _) = filter_update(&belief, y, u, model)
            .expect("observations drawn from the true state have positive likelihood");
        belief = next;
    }
}

/// Averages `episodes` independent episodes.
///
/// Episode `k` uses the ChaCha stream `k` of `seed`, so the summary is
/// bitwise identical for a given `(seed, episodes)` pair no matter how
/// the work is scheduled. Runaway episodes are counted and excluded from
/// the estimates.
///
/// # Errors
///
/// [`SimError::InvalidParameter`] when `episodes` is 0;
/// [`SimError::AllEpisodesRanAway`] when no episode terminated.
pub fn monte_carlo_evaluate(
    model: &SamplingModel,
    policy: &Policy,
    grid: &BeliefGrid,
    initial: &BeliefState,
    episodes: u64,
    seed: u64,
) -> Result<MonteCarloSummary> {
    if episodes == 0 {
        return Err(SimError::InvalidParameter(
            "at least one episode is required".into(),
        ));
    }
    let outcomes: Vec<Result<EpisodeTrace>> = (0..episodes)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            simulate_episode(model, policy, grid, initial, &mut rng)
        })
        .collect();

    // Deterministic reduction: episode order, not thread order.
    let mut components: Vec<[f64; 3]> = Vec::with_capacity(outcomes.len());
    let mut runaways = 0u64;
    for outcome in outcomes {
        match outcome {
            Ok(trace) => {
                components.push([trace.running_cost, trace.stop_cost, trace.measurement_cost])
            }
            Err(SimError::RunawayEpisode { .. }) => runaways += 1,
            Err(e) => return Err(e),
        }
    }
    if components.is_empty() {
        return Err(SimError::AllEpisodesRanAway {
            cap: EPISODE_CAP,
            episodes,
        });
    }

    let estimate = |values: &[f64]| -> Estimate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Estimate {
                mean,
                std_error: f64::NAN,
            };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
        }
    };
    let column = |idx: usize| -> Vec<f64> { components.iter().map(|c| c[idx]).collect() };
    let totals: Vec<f64> = components.iter().map(|c| c[0] + c[1] + c[2]).collect();
    Ok(MonteCarloSummary {
        episodes: components.len() as u64,
        runaways,
        seed,
        total: estimate(&totals),
        running: estimate(&column(0)),
        stop: estimate(&column(1)),
        measurement: estimate(&column(2)),
    })
}

/// Samples the first time the chain hits state 0, starting from a draw of
/// `initial`; `None` if it doesn't happen within `cap` steps. Uses the
/// same stepping as the episode simulator, so empirical change times are
/// comparable with the analytic distribution.
pub fn sample_change_time<R: Rng>(
    a: &TransitionMatrix,
    initial: &BeliefState,
    cap: u64,
    rng: &mut R,
) -> Option<u64> {
    let mut state = sample_index(initial.probs(), rng);
    if state == 0 {
        return Some(0);
    }
    for t in 1..=cap {
        state = sample_index(&a.rows()[state], rng);
        if state == 0 {
            return Some(t);
        }
    }
    None
}

/// Pearson goodness-of-fit p-value for observed vs expected counts
/// (degrees of freedom = bins − 1).
///
/// # Errors
///
/// [`SimError::InvalidParameter`] when the slices differ in length, have
/// fewer than two bins, or an expected count is not positive.
pub fn chi_square_pvalue(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(SimError::InvalidParameter(format!(
            "need matching count vectors with at least two bins, got {} and {}",
            observed.len(),
            expected.len()
        )));
    }
    if expected.iter().any(|&e| e <= 0.0) {
        return Err(SimError::InvalidParameter(
            "expected counts must be positive".into(),
        ));
    }
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64)
        .map_err(|e| SimError::InvalidParameter(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}
