//! Belief-simplex discretization and value iteration.
//!
//! The sampling problem is a partially observed Markov decision process
//! whose sufficient statistic is the belief state. This module discretizes
//! the belief simplex ([`BeliefGrid`]), solves Bellman's equation by
//! successive approximation ([`value_iterate`]), evaluates a frozen policy
//! under a possibly different model ([`evaluate_policy`]), and reduces
//! solved policies to threshold descriptions ([`extract_thresholds`]) and
//! stopping-set geometry ([`analyze_stopping_set`]).
//!
//! Conventions:
//!
//! - Two-state grids hold `n` points with target-state probability
//!   `i/(n−1)` ascending; off-grid values are piecewise-linear
//!   interpolants in that coordinate, which preserves concavity.
//! - Grids for three or more states are barycentric lattices `{k/n : Σk =
//!   n}`; off-grid beliefs project to the nearest lattice point with a
//!   deterministic largest-remainder rounding rule (ties to the smallest
//!   coordinate index).
//! - Sweeps are synchronous: each new value table is computed entirely
//!   from the previous one, so results are independent of grid traversal
//!   order and bitwise independent of the number of worker threads.
//! - Argmin ties break toward the smallest action index (stop first, then
//!   the shortest sampling interval), giving reproducible policies.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::costs::ActionCostVectors;
use crate::models::{filter_update, BeliefState, ModelError, SamplingModel};

/// Default sup-norm convergence tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Default sweep budget before [`SolverError::Convergence`] is raised.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Hard cap on the number of grid points a single grid may hold.
pub const MAX_GRID_POINTS: u128 = 1_000_000;

/// Customary grid resolution: 1000 points for two states, lattice
/// denominator 125 (8001 points) for three.
pub fn default_resolution(num_states: usize) -> usize {
    if num_states == 2 {
        1000
    } else {
        125
    }
}

/// Errors raised by grid construction and dynamic programming.
#[derive(Debug, Error)]
pub enum SolverError {
    /// Grids need at least two states and two points per axis.
    #[error("invalid grid request: {states} states with resolution {resolution}")]
    InvalidGrid { states: usize, resolution: usize },
    /// The requested lattice would exceed [`MAX_GRID_POINTS`].
    #[error("grid would hold {points} points, above the {MAX_GRID_POINTS}-point limit")]
    GridTooLarge { points: u128 },
    /// The sweep budget ran out before the sup-norm gap fell below `tol`.
    #[error(
        "no convergence to tol {tol:e} within {iterations} sweeps (last sup-norm gap {gap:e})"
    )]
    Convergence {
        tol: f64,
        iterations: usize,
        gap: f64,
    },
    /// A caller-supplied argument violates the operation's contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// An underlying model operation failed.
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, SolverError>;

// ------------------------------------------------------------------
// Grid
// ------------------------------------------------------------------

/// A finite discretization of the belief simplex.
#[derive(Debug, Clone)]
pub struct BeliefGrid {
    dimension: usize,
    resolution: usize,
    points: Vec<BeliefState>,
    /// Lattice-coordinate index for dimensions ≥ 3.
    lattice: Option<HashMap<Vec<u32>, usize>>,
}

/// Builds a belief grid.
///
/// For two states the grid holds `n` points whose target-state
/// probability runs `0, 1/(n−1), …, 1`. For `X ≥ 3` states it holds every
/// lattice point `k/n` with nonnegative integer coordinates summing to
/// `n`, enumerated in lexicographic coordinate order — `C(n+X−1, X−1)`
/// points including all unit vectors.
///
/// # Errors
///
/// [`SolverError::InvalidGrid`] when `X < 2` or `n < 2`;
/// [`SolverError::GridTooLarge`] when the lattice would exceed
/// [`MAX_GRID_POINTS`].
pub fn make_grid(num_states: usize, resolution: usize) -> Result<BeliefGrid> {
    if num_states < 2 || resolution < 2 {
        return Err(SolverError::InvalidGrid {
            states: num_states,
            resolution,
        });
    }
    if num_states == 2 {
        let step = 1.0 / (resolution as f64 - 1.0);
        let points = (0..resolution)
            .map(|i| {
                let p = if i + 1 == resolution { 1.0 } else { i as f64 * step };
                BeliefState::from_normalized(vec![p, 1.0 - p])
            })
            .collect();
        return Ok(BeliefGrid {
            dimension: 2,
            resolution,
            points,
            lattice: None,
        });
    }
    let count = simplex_lattice_size(resolution, num_states);
    if count > MAX_GRID_POINTS {
        return Err(SolverError::GridTooLarge { points: count });
    }
    let mut keys = Vec::with_capacity(count as usize);
    let mut key = vec![0u32; num_states];
    enumerate_compositions(resolution as u32, 0, &mut key, &mut keys);
    let n = resolution as f64;
    let mut lattice = HashMap::with_capacity(keys.len());
    let mut points = Vec::with_capacity(keys.len());
    for (idx, k) in keys.into_iter().enumerate() {
        points.push(BeliefState::from_normalized(
            k.iter().map(|&c| c as f64 / n).collect(),
        ));
        lattice.insert(k, idx);
    }
    Ok(BeliefGrid {
        dimension: num_states,
        resolution,
        points,
        lattice: Some(lattice),
    })
}

/// `C(n + x − 1, x − 1)`, saturating just above [`MAX_GRID_POINTS`].
fn simplex_lattice_size(n: usize, x: usize) -> u128 {
    let k = (x - 1) as u128;
    let m = n as u128 + k;
    let mut acc: u128 = 1;
    for j in 1..=k {
        // Exact at every step: the running product of j consecutive
        // binomial factors is divisible by j.
        acc = acc * (m - k + j) / j;
        if acc > MAX_GRID_POINTS {
            return acc;
        }
    }
    acc
}

fn enumerate_compositions(left: u32, slot: usize, key: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slot + 1 == key.len() {
        key[slot] = left;
        out.push(key.clone());
        return;
    }
    for v in 0..=left {
        key[slot] = v;
        enumerate_compositions(left - v, slot + 1, key, out);
    }
}

impl BeliefGrid {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BeliefState] {
        &self.points
    }

    pub fn point(&self, idx: usize) -> &BeliefState {
        &self.points[idx]
    }

    /// Index of the grid point nearest to `probs` under the grid's
    /// deterministic rounding rule.
    pub fn nearest_index(&self, probs: &[f64]) -> usize {
        if self.dimension == 2 {
            let t = probs[0].clamp(0.0, 1.0) * (self.resolution as f64 - 1.0);
            (t.round() as usize).min(self.resolution - 1)
        } else {
            let key = self.lattice_key(probs);
            *self
                .lattice
                .as_ref()
                .expect("lattice index exists for dimension >= 3")
                .get(&key)
                .expect("rounded lattice key lies inside the simplex")
        }
    }

    /// Rounds `probs · n` to integer lattice coordinates summing to `n`,
    /// repairing rounding drift one unit at a time at the coordinate with
    /// the largest rounding error (smallest index on ties).
    fn lattice_key(&self, probs: &[f64]) -> Vec<u32> {
        let n = self.resolution as f64;
        let scaled: Vec<f64> = probs.iter().map(|p| p.max(0.0) * n).collect();
        let mut key: Vec<i64> = scaled.iter().map(|s| s.round() as i64).collect();
        let mut drift = key.iter().sum::<i64>() - self.resolution as i64;
        while drift != 0 {
            if drift > 0 {
                let mut pick = usize::MAX;
                let mut worst = f64::NEG_INFINITY;
                for (i, &k) in key.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let over = k as f64 - scaled[i];
                    if over > worst {
                        worst = over;
                        pick = i;
                    }
                }
                key[pick] -= 1;
                drift -= 1;
            } else {
                let mut pick = usize::MAX;
                let mut worst = f64::NEG_INFINITY;
                for (i, &k) in key.iter().enumerate() {
                    let under = scaled[i] - k as f64;
                    if under > worst {
                        worst = under;
                        pick = i;
                    }
                }
                key[pick] += 1;
                drift += 1;
            }
        }
        key.into_iter().map(|k| k as u32).collect()
    }

    /// All grid points at minimal distance from `probs`, among the rounded
    /// key and its single-pair unit transfers. Midpoints of two grid points
    /// sit exactly between at most two lattice keys, so this neighborhood
    /// is exhaustive for them; [`nearest_index`](Self::nearest_index) keeps
    /// its deterministic tie-break for table lookups.
    pub(crate) fn nearest_indices_tied(&self, probs: &[f64]) -> Vec<usize> {
        if self.dimension == 2 {
            let t = probs[0].clamp(0.0, 1.0) * (self.resolution as f64 - 1.0);
            let lo = (t.floor() as usize).min(self.resolution - 1);
            let hi = (t.ceil() as usize).min(self.resolution - 1);
            let mut out = vec![lo];
            if hi != lo && (hi as f64 - t) <= (t - lo as f64) + 1e-12 {
                out.push(hi);
            }
            return out;
        }
        let lattice = self
            .lattice
            .as_ref()
            .expect("lattice index exists for dimension >= 3");
        let n = self.resolution as f64;
        let dist2 = |key: &[u32]| -> f64 {
            key.iter()
                .zip(probs)
                .map(|(&k, &p)| {
                    let d = k as f64 / n - p;
                    d * d
                })
                .sum()
        };
        let base = self.lattice_key(probs);
        let d0 = dist2(&base);
        let tol = 1e-9 * d0.max(1e-30) + 1e-18;
        let mut out = vec![*lattice
            .get(&base)
            .expect("rounded lattice key lies inside the simplex")];
        let mut cand = base.clone();
        for s in 0..self.dimension {
            for t in 0..self.dimension {
                if s == t || base[t] == 0 {
                    continue;
                }
                cand.copy_from_slice(&base);
                cand[s] += 1;
                cand[t] -= 1;
                if dist2(&cand) <= d0 + tol {
                    if let Some(&idx) = lattice.get(&cand) {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }

    /// Off-grid value lookup rule: linear interpolation for two states,
    /// nearest-point projection otherwise.
    pub(crate) fn lookup(&self, probs: &[f64]) -> Lookup {
        if self.dimension == 2 {
            let t = probs[0].clamp(0.0, 1.0) * (self.resolution as f64 - 1.0);
            let lo = (t.floor() as usize).min(self.resolution - 2);
            Lookup::Interp { lo, w: t - lo as f64 }
        } else {
            Lookup::At(self.nearest_index(probs))
        }
    }
}

/// A resolved position for reading a value table.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Lookup {
    /// Linear interpolation between adjacent two-state grid points.
    Interp { lo: usize, w: f64 },
    /// Exact table read (nearest lattice point).
    At(usize),
}

impl Lookup {
    #[inline]
    fn eval(self, values: &[f64]) -> f64 {
        match self {
            Lookup::Interp { lo, w } => values[lo] * (1.0 - w) + values[lo + 1] * w,
            Lookup::At(i) => values[i],
        }
    }
}

// ------------------------------------------------------------------
// Value tables and policies
// ------------------------------------------------------------------

/// Expected total cost per grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueFunction {
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        ValueFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Value at an arbitrary belief under the grid's lookup rule.
    pub fn value_at(&self, grid: &BeliefGrid, belief: &BeliefState) -> f64 {
        grid.lookup(belief.probs()).eval(&self.values)
    }
}

/// One action in `0..=L` per grid point (0 = stop).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Policy {
    actions: Vec<usize>,
    num_actions: usize,
}

impl Policy {
    /// # Errors
    ///
    /// [`SolverError::InvalidParameter`] when any action exceeds
    /// `num_actions`.
    pub fn new(actions: Vec<usize>, num_actions: usize) -> Result<Self> {
        if let Some(&bad) = actions.iter().find(|&&a| a > num_actions) {
            return Err(SolverError::InvalidParameter(format!(
                "policy action {bad} exceeds the largest action index {num_actions}"
            )));
        }
        Ok(Policy {
            actions,
            num_actions,
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn action(&self, idx: usize) -> usize {
        self.actions[idx]
    }

    /// Number of continue actions `L` (actions run `0..=L`).
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Action at an arbitrary belief: the action of the nearest grid
    /// point.
    pub fn action_at(&self, grid: &BeliefGrid, belief: &BeliefState) -> usize {
        self.actions[grid.nearest_index(belief.probs())]
    }
}

/// Output of [`value_iterate`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub values: ValueFunction,
    pub policy: Policy,
    /// Sweeps performed, including the final policy-extraction sweep.
    pub iterations: usize,
    /// Last measured sup-norm gap (below the requested tolerance).
    pub gap: f64,
}

// ------------------------------------------------------------------
// Dynamic programming
// ------------------------------------------------------------------

/// Immutable per-grid-point data shared by every sweep: instantaneous
/// costs and, for each continue action, the positive-probability
/// observation branches with their value-table lookup positions.
struct Stage {
    stop: Vec<f64>,
    acts: Vec<ActionStage>,
}

struct ActionStage {
    cost: Vec<f64>,
    /// `moves[point] = [(σ, lookup), …]` over observations with `σ > 0`.
    moves: Vec<Vec<(f64, Lookup)>>,
}

fn build_stage(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    grid: &BeliefGrid,
) -> Result<Stage> {
    if grid.dimension() != model.num_states() {
        return Err(SolverError::InvalidParameter(format!(
            "grid dimension {} does not match the {}-state model",
            grid.dimension(),
            model.num_states()
        )));
    }
    if costs.dim() != model.num_states() || costs.num_continue_actions() != model.num_actions() {
        return Err(SolverError::InvalidParameter(format!(
            "cost vectors ({} actions x {} states) do not match the model ({} x {})",
            costs.num_continue_actions(),
            costs.dim(),
            model.num_actions(),
            model.num_states()
        )));
    }
    let stop = grid
        .points()
        .iter()
        .map(|pt| costs.evaluate(0, pt.probs()))
        .collect();
    let num_symbols = model.obs.num_symbols();
    let mut acts = Vec::with_capacity(model.num_actions());
    for u in 1..=model.num_actions() {
        let cost = grid
            .points()
            .iter()
            .map(|pt| costs.evaluate(u, pt.probs()))
            .collect();
        let moves = grid
            .points()
            .par_iter()
            .map(|pt| {
                let mut branches = Vec::with_capacity(num_symbols);
                for y in 0..num_symbols {
                    match filter_update(pt, y, u, model) {
                        Ok((post, sigma)) => branches.push((sigma, grid.lookup(post.probs()))),
                        // Zero-probability observations contribute nothing
                        // to the expectation.
                        Err(ModelError::ZeroLikelihood { .. }) => {}
                        Err(e) => return Err(SolverError::from(e)),
                    }
                }
                Ok(branches)
            })
            .collect::<Result<Vec<_>>>()?;
        acts.push(ActionStage { cost, moves });
    }
    Ok(Stage { stop, acts })
}

/// One synchronous Bellman sweep: every point reads only `prev`.
fn sweep_min(stage: &Stage, prev: &[f64]) -> Vec<f64> {
    (0..prev.len())
        .into_par_iter()
        .map(|g| {
            let mut best = stage.stop[g];
            for act in &stage.acts {
                let mut q = act.cost[g];
                for &(sigma, target) in &act.moves[g] {
                    q += sigma * target.eval(prev);
                }
                if q < best {
                    best = q;
                }
            }
            best
        })
        .collect()
}

/// Greedy sweep against a converged table; ties go to the smallest action.
fn sweep_greedy(stage: &Stage, prev: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pairs: Vec<(f64, usize)> = (0..prev.len())
        .into_par_iter()
        .map(|g| {
            let mut best = (stage.stop[g], 0usize);
            for (k, act) in stage.acts.iter().enumerate() {
                let mut q = act.cost[g];
                for &(sigma, target) in &act.moves[g] {
                    q += sigma * target.eval(prev);
                }
                if q < best.0 {
                    best = (q, k + 1);
                }
            }
            best
        })
        .collect();
    pairs.into_iter().unzip()
}

/// Solves Bellman's equation by successive approximation.
///
/// Starting from the zero table, repeats
///
/// ```text
/// V_{k+1}(π) = min( C_0ᵀπ, min_u C_uᵀπ + Σ_y V_k(T(π,y,u)) σ(π,y,u) )
/// ```
///
/// until the sup-norm gap between consecutive tables falls below `tol`,
/// then extracts the greedy policy in one final sweep. The returned table
/// is that final sweep's minimum, so `V(π) = Q(π, policy(π))` holds
/// exactly at every grid point, and `V(π) = C_0ᵀπ` exactly where the
/// policy stops.
///
/// # Errors
///
/// [`SolverError::Convergence`] when `max_iter` sweeps do not reach
/// `tol`; [`SolverError::InvalidParameter`] on dimension mismatches or a
/// nonpositive tolerance.
pub fn value_iterate(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    grid: &BeliefGrid,
    tol: f64,
    max_iter: usize,
) -> Result<Solution> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    let stage = build_stage(model, costs, grid)?;
    let mut table = vec![0.0; grid.len()];
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    while iterations < max_iter {
        let next = sweep_min(&stage, &table);
        iterations += 1;
        gap = sup_gap(&next, &table);
        table = next;
        if gap < tol {
            let (values, actions) = sweep_greedy(&stage, &table);
            let policy = Policy {
                actions,
                num_actions: model.num_actions(),
            };
            return Ok(Solution {
                values: ValueFunction { values },
                policy,
                iterations: iterations + 1,
                gap,
            });
        }
    }
    Err(SolverError::Convergence {
        tol,
        iterations,
        gap,
    })
}

/// Expected total cost of following `policy` verbatim while beliefs
/// evolve under `model`'s filter.
///
/// The policy's actions are read off the grid (points are evaluated at
/// themselves; filtered beliefs land wherever the filter sends them).
/// Stopping points take the stop cost exactly; elsewhere the fixed-action
/// Bellman operator is iterated to the same sup-norm criterion as
/// [`value_iterate`].
///
/// # Errors
///
/// [`SolverError::Convergence`] when the policy's cost does not settle —
/// e.g. a policy that never stops accrues unbounded cost;
/// [`SolverError::InvalidParameter`] on dimension mismatches.
pub fn evaluate_policy(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    grid: &BeliefGrid,
    policy: &Policy,
    tol: f64,
    max_iter: usize,
) -> Result<ValueFunction> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(SolverError::InvalidParameter(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if policy.len() != grid.len() {
        return Err(SolverError::InvalidParameter(format!(
            "policy covers {} points but the grid has {}",
            policy.len(),
            grid.len()
        )));
    }
    if policy.num_actions() != model.num_actions() {
        return Err(SolverError::InvalidParameter(format!(
            "policy has {} continue actions but the model has {}",
            policy.num_actions(),
            model.num_actions()
        )));
    }
    let stage = build_stage(model, costs, grid)?;
    let mut table = vec![0.0; grid.len()];
    let mut iterations = 0;
    while iterations < max_iter {
        let next: Vec<f64> = (0..table.len())
            .into_par_iter()
            .map(|g| {
                let u = policy.action(g);
                if u == 0 {
                    return stage.stop[g];
                }
                let act = &stage.acts[u - 1];
                let mut q = act.cost[g];
                for &(sigma, target) in &act.moves[g] {
                    q += sigma * target.eval(&table);
                }
                q
            })
            .collect();
        iterations += 1;
        let gap = sup_gap(&next, &table);
        table = next;
        if gap < tol {
            return Ok(ValueFunction { values: table });
        }
    }
    Err(SolverError::Convergence {
        tol,
        iterations,
        gap: f64::NAN,
    })
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// ------------------------------------------------------------------
// Policy structure
// ------------------------------------------------------------------

/// Per-action switching points of a monotone two-state policy.
///
/// `thresholds[u−1]` is the target-state probability at which the policy
/// drops below action `u`: 0 when no point uses an action ≥ `u`, 1 when
/// every point does, otherwise the midpoint between the last grid point
/// with action ≥ `u` and its successor. For a monotone policy they
/// satisfy `thresholds[L−1] ≤ … ≤ thresholds[0]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub thresholds: Vec<f64>,
}

/// Reads thresholds off a two-state policy.
///
/// Returns the monotone flag (actions nonincreasing in the target-state
/// probability) and, only when monotone, the threshold set.
///
/// # Errors
///
/// [`SolverError::InvalidParameter`] unless the grid has exactly two
/// states and the policy covers it.
pub fn extract_thresholds(
    policy: &Policy,
    grid: &BeliefGrid,
) -> Result<(Option<ThresholdSet>, bool)> {
    if grid.dimension() != 2 {
        return Err(SolverError::InvalidParameter(format!(
            "thresholds are defined on two-state grids, not {} states",
            grid.dimension()
        )));
    }
    if policy.len() != grid.len() {
        return Err(SolverError::InvalidParameter(format!(
            "policy covers {} points but the grid has {}",
            policy.len(),
            grid.len()
        )));
    }
    let acts = policy.actions();
    if acts.windows(2).any(|w| w[1] > w[0]) {
        return Ok((None, false));
    }
    let thresholds = (1..=policy.num_actions())
        .map(|u| match acts.iter().rposition(|&a| a >= u) {
            None => 0.0,
            Some(k) if k + 1 == grid.len() => 1.0,
            Some(k) => 0.5 * (grid.point(k).prob(0) + grid.point(k + 1).prob(0)),
        })
        .collect();
    Ok((Some(ThresholdSet { thresholds }), true))
}

/// Geometry of a policy's stopping set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoppingSetReport {
    /// Per grid point: does the policy stop here?
    pub members: Vec<bool>,
    /// Two states: the stop points form one contiguous run containing the
    /// target vertex (or are empty). Three or more: for every pair of
    /// stop points, a grid point nearest their midpoint also stops (the
    /// midpoint of two lattice points is equidistant to two keys, and
    /// either suffices).
    pub convex: bool,
    /// Two states only: `(lower, 1.0)` in target-state probability, with
    /// `lower` the midpoint below the first stopping point. `None` when
    /// the set is empty or not an interval.
    pub interval: Option<(f64, f64)>,
}

/// Checks the stopping set for interval/convex structure.
///
/// Violations are reported in the verdict, never thrown.
pub fn analyze_stopping_set(policy: &Policy, grid: &BeliefGrid) -> StoppingSetReport {
    let members: Vec<bool> = policy.actions().iter().map(|&a| a == 0).collect();
    let stops: Vec<usize> = members
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect();
    if stops.is_empty() {
        return StoppingSetReport {
            members,
            convex: true,
            interval: None,
        };
    }
    if grid.dimension() == 2 {
        let first = stops[0];
        let contiguous = stops.len() == stops[stops.len() - 1] - first + 1;
        let convex = contiguous && stops[stops.len() - 1] + 1 == grid.len();
        let interval = convex.then(|| {
            let lower = if first == 0 {
                0.0
            } else {
                0.5 * (grid.point(first - 1).prob(0) + grid.point(first).prob(0))
            };
            (lower, 1.0)
        });
        return StoppingSetReport {
            members,
            convex,
            interval,
        };
    }
    let dim = grid.dimension();
    let mut mid = vec![0.0; dim];
    let mut convex = true;
    'scan: for (a, &i) in stops.iter().enumerate() {
        for &j in &stops[a + 1..] {
            for (s, m) in mid.iter_mut().enumerate() {
                *m = 0.5 * (grid.point(i).prob(s) + grid.point(j).prob(s));
            }
            if !grid
                .nearest_indices_tied(&mid)
                .into_iter()
                .any(|k| members[k])
            {
                convex = false;
                break 'scan;
            }
        }
    }
    StoppingSetReport {
        members,
        convex,
        interval: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{build_action_costs, build_qd_costs};
    use crate::models::{predict, ObservationKind, ObservationModel, TransitionMatrix};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn detection_model(f: f64, m1: f64) -> SamplingModel {
        let a = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.1, 0.9]]).unwrap();
        let obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.3, 0.7, 0.0], vec![0.0, 0.2, 0.8]],
        })
        .unwrap();
        let intervals = vec![1, 3, 5, 10];
        let costs =
            build_qd_costs(f, 0.4, vec![vec![0.0; 4], vec![m1; 4]], &a, &intervals).unwrap();
        SamplingModel::new(a, obs, intervals, costs).unwrap()
    }

    /// Two-state model whose single informative symbol never arrives:
    /// one observation column carries all the mass, so beliefs evolve
    /// deterministically along the predictor orbit.
    fn blind_model() -> SamplingModel {
        let a = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.1, 0.9]]).unwrap();
        let obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![1.0, 0.0], vec![1.0, 0.0]],
        })
        .unwrap();
        let intervals = vec![1, 2];
        let costs =
            build_qd_costs(17.0, 0.4, vec![vec![0.0; 2], vec![2.8; 2]], &a, &intervals).unwrap();
        SamplingModel::new(a, obs, intervals, costs).unwrap()
    }

    // ---- grids ----

    #[test]
    fn two_state_grid_layout() {
        let grid = make_grid(2, 5).unwrap();
        let targets: Vec<f64> = grid.points().iter().map(|p| p.prob(0)).collect();
        assert_eq!(targets, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for p in grid.points() {
            assert_relative_eq!(p.prob(0) + p.prob(1), 1.0, epsilon = 1e-15);
        }
        let fine = make_grid(2, 1000).unwrap();
        assert_eq!(fine.len(), 1000);
        assert_relative_eq!(fine.point(1).prob(0), 1.0 / 999.0, epsilon = 1e-18);
        assert_eq!(fine.point(999).prob(0), 1.0);
    }

    #[test]
    fn lattice_grid_layout() {
        let grid = make_grid(3, 3).unwrap();
        assert_eq!(grid.len(), 10);
        for v in 0..3 {
            let vertex = BeliefState::unit(v, 3);
            let idx = grid.nearest_index(vertex.probs());
            assert_eq!(grid.point(idx).probs(), vertex.probs());
        }
        for p in grid.points() {
            assert_relative_eq!(p.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(make_grid(3, 125).unwrap().len(), 8001);
    }

    #[test]
    fn grid_limits() {
        assert!(matches!(
            make_grid(2, 1),
            Err(SolverError::InvalidGrid { .. })
        ));
        assert!(matches!(
            make_grid(1, 100),
            Err(SolverError::InvalidGrid { .. })
        ));
        assert!(matches!(
            make_grid(4, 1000),
            Err(SolverError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn lattice_rounding_is_deterministic() {
        let grid = make_grid(3, 4).unwrap();
        // No drift: (0.3, 0.3, 0.4)·4 = (1.2, 1.2, 1.6) rounds to (1, 1, 2).
        let idx = grid.nearest_index(&[0.3, 0.3, 0.4]);
        assert_eq!(grid.point(idx).probs(), &[0.25, 0.25, 0.5]);
        // Drift: (1.5, 1.5, 1.0) rounds to (2, 2, 1), one over; the first
        // coordinate among the worst-rounded loses the unit.
        let idx = grid.nearest_index(&[0.375, 0.375, 0.25]);
        assert_eq!(grid.point(idx).probs(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn two_state_value_lookup_interpolates() {
        let grid = make_grid(2, 7).unwrap();
        let vf = ValueFunction::from_values(
            grid.points().iter().map(|p| 3.0 + 2.0 * p.prob(0)).collect(),
        );
        for &p in &[0.0, 0.05, 1.0 / 3.0, 0.5, 0.99, 1.0] {
            let belief = BeliefState::new(vec![p, 1.0 - p]).unwrap();
            assert_relative_eq!(vf.value_at(&grid, &belief), 3.0 + 2.0 * p, epsilon = 1e-12);
        }
    }

    // ---- value iteration ----

    #[test]
    fn free_stopping_makes_the_zero_table_optimal() {
        let model = detection_model(0.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 101).unwrap();
        let sol = value_iterate(&model, &costs, &grid, 1e-8, 100).unwrap();
        assert!(sol.values.values().iter().all(|&v| v == 0.0));
        assert!(sol.policy.actions().iter().all(|&a| a == 0));
    }

    #[test]
    fn deterministic_orbit_dynamic_program_oracle() {
        // With an uninformative channel the belief orbit is deterministic,
        // so Bellman's equation restricted to the orbit is a scalar
        // recursion solvable exactly — an independent check of the grid
        // solver including its interpolation.
        let model = blind_model();
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 4001).unwrap();
        let sol = value_iterate(&model, &costs, &grid, 1e-9, 5_000).unwrap();
        for &g in &[0usize, 1000, 2000, 3000] {
            let exact = orbit_value(&model, &costs, grid.point(g));
            assert_relative_eq!(sol.values.value(g), exact, epsilon = 2e-3);
        }
    }

    fn orbit_value(model: &SamplingModel, costs: &ActionCostVectors, start: &BeliefState) -> f64 {
        let horizon = 800;
        let max_d = model.max_interval() as usize;
        let mut orbit = vec![start.clone()];
        for _ in 0..horizon + max_d {
            orbit.push(predict(orbit.last().unwrap(), &model.transition, 1).unwrap());
        }
        let mut w = vec![0.0; orbit.len()];
        for m in (0..orbit.len()).rev() {
            let probs = orbit[m].probs();
            let mut best = costs.evaluate(0, probs);
            for u in 1..=model.num_actions() {
                let d = model.interval(u).unwrap() as usize;
                if m + d < w.len() {
                    let q = costs.evaluate(u, probs) + w[m + d];
                    if q < best {
                        best = q;
                    }
                }
            }
            w[m] = best;
        }
        w[0]
    }

    #[test]
    fn early_stopped_tables_stay_below_converged_ones() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 101).unwrap();
        let rough = value_iterate(&model, &costs, &grid, 1e-3, 10_000).unwrap();
        let fine = value_iterate(&model, &costs, &grid, 1e-9, 10_000).unwrap();
        for (r, f) in rough.values.values().iter().zip(fine.values.values()) {
            assert!(r <= &(f + 1e-12), "iterates must increase toward the fixed point");
        }
        assert!(rough.iterations < fine.iterations);
    }

    #[test]
    fn solved_detection_model_structure() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 201).unwrap();
        let sol = value_iterate(&model, &costs, &grid, 1e-8, 10_000).unwrap();
        assert!(sol.gap < 1e-8);
        let v = sol.values.values();

        // Nonnegative costs give nonnegative values, zero at the target
        // vertex where stopping is free.
        assert!(v.iter().all(|&x| x >= 0.0));
        assert_eq!(v[grid.len() - 1], 0.0);

        // Value decreases as the target probability rises (the belief
        // gets strictly closer to the free-stop vertex).
        for i in 1..v.len() {
            assert!(
                v[i] <= v[i - 1] + 1e-9,
                "value rose from {} to {} at point {i}",
                v[i - 1],
                v[i]
            );
        }

        // Concavity: discrete second differences stay nonpositive.
        for i in 1..v.len() - 1 {
            assert!(
                v[i + 1] + v[i - 1] - 2.0 * v[i] <= 1e-8,
                "convex kink at point {i}"
            );
        }

        // Where the policy stops, the table equals the stopping cost
        // exactly; elsewhere it is no larger.
        for g in 0..grid.len() {
            let stop_cost = costs.evaluate(0, grid.point(g).probs());
            if sol.policy.action(g) == 0 {
                assert_eq!(sol.values.value(g), stop_cost);
            } else {
                assert!(sol.values.value(g) <= stop_cost + 1e-12);
            }
        }

        // Greedy consistency: no action improves on the recorded one.
        for g in 0..grid.len() {
            let probs = grid.point(g).probs();
            let here = grid.point(g);
            let chosen = sol.policy.action(g);
            let q_of = |u: usize| -> f64 {
                if u == 0 {
                    return costs.evaluate(0, probs);
                }
                let mut q = costs.evaluate(u, probs);
                for y in 0..model.obs.num_symbols() {
                    match filter_update(here, y, u, &model) {
                        Ok((post, sigma)) => q += sigma * sol.values.value_at(&grid, &post),
                        Err(ModelError::ZeroLikelihood { .. }) => {}
                        Err(e) => panic!("unexpected filter failure: {e}"),
                    }
                }
                q
            };
            let q_star = q_of(chosen);
            for u in 0..=model.num_actions() {
                assert!(
                    q_star <= q_of(u) + 1e-9,
                    "action {chosen} beaten by {u} at point {g}"
                );
            }
        }

        // The overall shape: monotone ladder with ordered switch points
        // and a stopping interval ending at the target vertex.
        let (thresholds, monotone) = extract_thresholds(&sol.policy, &grid).unwrap();
        assert!(monotone);
        let t = thresholds.unwrap().thresholds;
        for pair in t.windows(2) {
            assert!(pair[1] <= pair[0], "switch points out of order: {pair:?}");
        }
        let report = analyze_stopping_set(&sol.policy, &grid);
        assert!(report.convex);
        let (lower, upper) = report.interval.unwrap();
        assert_eq!(upper, 1.0);
        assert_relative_eq!(lower, t[0], epsilon = 1e-15);
    }

    #[test]
    fn policy_evaluation_agrees_with_the_fixed_point() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 101).unwrap();
        let sol = value_iterate(&model, &costs, &grid, 1e-9, 10_000).unwrap();
        let under_own_policy =
            evaluate_policy(&model, &costs, &grid, &sol.policy, 1e-9, 10_000).unwrap();
        for g in 0..grid.len() {
            assert_relative_eq!(
                under_own_policy.value(g),
                sol.values.value(g),
                epsilon = 1e-6
            );
        }

        let always_stop = Policy::new(vec![0; grid.len()], model.num_actions()).unwrap();
        let stopped = evaluate_policy(&model, &costs, &grid, &always_stop, 1e-9, 10).unwrap();
        for g in 0..grid.len() {
            assert_eq!(stopped.value(g), costs.evaluate(0, grid.point(g).probs()));
        }
    }

    #[test]
    fn sweeps_are_bitwise_identical_across_worker_counts() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 101).unwrap();
        let solve = || {
            let sol = value_iterate(&model, &costs, &grid, 1e-5, 10_000).unwrap();
            (
                sol.values
                    .values()
                    .iter()
                    .map(|v| v.to_bits())
                    .collect::<Vec<_>>(),
                sol.policy.actions().to_vec(),
                sol.iterations,
            )
        };
        let mut outcomes = Vec::new();
        for workers in [1usize, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            outcomes.push(pool.install(solve));
        }
        assert_eq!(outcomes[0], outcomes[1]);
        assert_eq!(outcomes[0], outcomes[2]);
    }

    #[test]
    fn solver_rejects_mismatched_inputs() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid3 = make_grid(3, 10).unwrap();
        assert!(matches!(
            value_iterate(&model, &costs, &grid3, 1e-6, 100),
            Err(SolverError::InvalidParameter(_))
        ));
        let grid = make_grid(2, 11).unwrap();
        assert!(matches!(
            value_iterate(&model, &costs, &grid, -1.0, 100),
            Err(SolverError::InvalidParameter(_))
        ));
        assert!(matches!(
            value_iterate(&model, &costs, &grid, 1e-6, 0),
            Err(SolverError::Convergence { .. })
        ));
        assert!(Policy::new(vec![0, 5], 4).is_err());
        let short = Policy::new(vec![0; 5], 4).unwrap();
        assert!(matches!(
            evaluate_policy(&model, &costs, &grid, &short, 1e-6, 100),
            Err(SolverError::InvalidParameter(_))
        ));
    }

    #[test]
    fn nonstopping_policy_evaluation_diverges() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 11).unwrap();
        let never_stop = Policy::new(vec![1; grid.len()], model.num_actions()).unwrap();
        assert!(matches!(
            evaluate_policy(&model, &costs, &grid, &never_stop, 1e-9, 200),
            Err(SolverError::Convergence { .. })
        ));
    }

    // ---- thresholds and stopping sets ----

    #[test]
    fn threshold_extraction_cases() {
        let grid = make_grid(2, 5).unwrap();

        let ladder = Policy::new(vec![2, 2, 1, 1, 0], 2).unwrap();
        let (set, monotone) = extract_thresholds(&ladder, &grid).unwrap();
        assert!(monotone);
        assert_eq!(set.unwrap().thresholds, vec![0.875, 0.375]);

        let all_stop = Policy::new(vec![0; 5], 3).unwrap();
        let (set, monotone) = extract_thresholds(&all_stop, &grid).unwrap();
        assert!(monotone);
        assert_eq!(set.unwrap().thresholds, vec![0.0, 0.0, 0.0]);

        let never_stop = Policy::new(vec![4; 5], 4).unwrap();
        let (set, monotone) = extract_thresholds(&never_stop, &grid).unwrap();
        assert!(monotone);
        assert_eq!(set.unwrap().thresholds, vec![1.0; 4]);

        let bumpy = Policy::new(vec![1, 0, 1, 0, 0], 1).unwrap();
        let (set, monotone) = extract_thresholds(&bumpy, &grid).unwrap();
        assert!(!monotone);
        assert!(set.is_none());

        let grid3 = make_grid(3, 4).unwrap();
        let flat = Policy::new(vec![0; grid3.len()], 1).unwrap();
        assert!(extract_thresholds(&flat, &grid3).is_err());
    }

    #[test]
    fn two_state_stopping_set_cases() {
        let grid = make_grid(2, 5).unwrap();

        let suffix = Policy::new(vec![2, 1, 1, 0, 0], 2).unwrap();
        let report = analyze_stopping_set(&suffix, &grid);
        assert!(report.convex);
        assert_eq!(report.interval, Some((0.625, 1.0)));

        let everywhere = Policy::new(vec![0; 5], 2).unwrap();
        let report = analyze_stopping_set(&everywhere, &grid);
        assert!(report.convex);
        assert_eq!(report.interval, Some((0.0, 1.0)));

        let nowhere = Policy::new(vec![1; 5], 2).unwrap();
        let report = analyze_stopping_set(&nowhere, &grid);
        assert!(report.convex);
        assert_eq!(report.interval, None);

        let hole = Policy::new(vec![1, 0, 1, 0, 0], 2).unwrap();
        assert!(!analyze_stopping_set(&hole, &grid).convex);

        let detached = Policy::new(vec![1, 0, 0, 1, 1], 2).unwrap();
        assert!(!analyze_stopping_set(&detached, &grid).convex);
    }

    #[test]
    fn lattice_stopping_set_midpoint_scan() {
        let grid = make_grid(3, 4).unwrap();

        // Half-space: stop wherever the target probability is ≥ 1/2.
        let actions: Vec<usize> = grid
            .points()
            .iter()
            .map(|p| usize::from(p.prob(0) < 0.5))
            .collect();
        let halfspace = Policy::new(actions, 1).unwrap();
        assert!(analyze_stopping_set(&halfspace, &grid).convex);

        // Two opposite corners with nothing between them.
        let actions: Vec<usize> = grid
            .points()
            .iter()
            .map(|p| usize::from(!(p.prob(0) == 1.0 || p.prob(1) == 1.0)))
            .collect();
        let corners = Policy::new(actions, 1).unwrap();
        assert!(!analyze_stopping_set(&corners, &grid).convex);
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_the_identity(p in 0.0f64..=1.0, n in 2usize..300) {
            let grid = make_grid(2, n).unwrap();
            let vf = ValueFunction::from_values(
                grid.points().iter().map(|pt| pt.prob(0)).collect(),
            );
            let belief = BeliefState::new(vec![p, 1.0 - p]).unwrap();
            prop_assert!((vf.value_at(&grid, &belief) - p).abs() < 1e-12);
        }

        #[test]
        fn lattice_projection_stays_within_a_cell(
            raw in prop::collection::vec(0.01f64..1.0, 3),
            n in 2usize..40,
        ) {
            let total: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let grid = make_grid(3, n).unwrap();
            let nearest = grid.point(grid.nearest_index(&probs));
            for (i, &p) in probs.iter().enumerate() {
                prop_assert!((nearest.prob(i) - p).abs() <= 2.0 / n as f64 + 1e-12);
            }
        }
    }
}
