//! Per-action cost vectors and the two cost transformations that expose
//! monotone structure.
//!
//! Costs are linear in the belief: choosing action `u` at belief `π` costs
//! `C_uᵀπ`, where each `C_u` is an X-vector built once per model. For a
//! continue action `u` the vector accumulates the expected running cost over
//! the `D_u` time units until the next look plus the cost of that look:
//!
//! ```text
//! C_u = m_u + (I + A + … + A^{D_u−1}) c_u,   u = 1..L,
//! C_0 = stop-cost vector.
//! ```
//!
//! The change-detection ("quickest") specialization uses `c_u = d·e_0`
//! (delay `d` accrues while the chain sits in the target state 0) and
//! `C_0 = f·(𝟙 − e_0)` (false alarm `f` when announcing early).
//!
//! Raw change-detection costs *decrease* in the state index, which hides the
//! monotone structure of the optimal policy. Two linear transformations fix
//! that without changing any Bellman argmin:
//! [`transform_underline`] rebalances against the longest-interval cost so
//! unit-belief costs increase in the state index, and [`transform_bar`]
//! shifts continue costs by predicted-absorption terms so the continue-only
//! argmin becomes a valid upper-bound policy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{mat_vec, SamplingModel, TransitionMatrix};

/// Errors from cost construction and transformation.
#[derive(Debug, Error)]
pub enum CostError {
    #[error("negative cost entry {value} at {place}")]
    NegativeEntry { place: String, value: f64 },
    #[error("cost dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation requires quickest-detection costs (false alarm / delay / measurement)")]
    RequiresQuickest,
    #[error("operation requires a two-state model (got X = {0})")]
    RequiresTwoState(usize),
    #[error("operation requires an absorbing target state (row 0 of A must be e_0)")]
    RequiresAbsorbingTarget,
    #[error("states 1..X−1 must share the same measurement cost (rows {first} and {other} differ)")]
    UnequalWaitingStateCosts { first: usize, other: usize },
    #[error("invalid alpha: {0}")]
    InvalidAlpha(String),
    #[error("degenerate chain: {0}")]
    DegenerateChain(String),
}

pub type Result<T> = std::result::Result<T, CostError>;

/// Cost parameters of a sampling problem, before expansion into per-action
/// vectors. `measurement[i][u−1]` / `m[i][u−1]` is the cost of scheduling a
/// look with action `u` while the chain is in state `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CostSpec {
    /// Change detection: announce-too-early penalty `false_alarm`, per-time-
    /// unit `delay` penalty while the change is unannounced, and an X×L
    /// measurement-cost matrix.
    Quickest {
        false_alarm: f64,
        delay: f64,
        measurement: Vec<Vec<f64>>,
    },
    /// Fully general linear costs: `c[i][u]` for u = 0..L is the stop cost
    /// (u = 0) or the per-time-unit running cost (u ≥ 1) in state `i`;
    /// `m[i][u−1]` is the per-look measurement cost.
    Generic { c: Vec<Vec<f64>>, m: Vec<Vec<f64>> },
}

fn check_matrix(name: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(CostError::DimensionMismatch(format!(
            "{name} must be {rows}x{cols}, got {}x{}",
            m.len(),
            m.first().map_or(0, Vec::len)
        )));
    }
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(CostError::NegativeEntry {
                    place: format!("{name}[{i}][{j}]"),
                    value: v,
                });
            }
        }
    }
    Ok(())
}

impl CostSpec {
    /// Validates entry signs and shapes against an X-state, L-action model.
    pub fn validate(&self, x: usize, l: usize) -> Result<()> {
        match self {
            CostSpec::Quickest {
                false_alarm,
                delay,
                measurement,
            } => {
                for (name, v) in [("false_alarm", *false_alarm), ("delay", *delay)] {
                    if !v.is_finite() || v < 0.0 {
                        return Err(CostError::NegativeEntry {
                            place: name.into(),
                            value: v,
                        });
                    }
                }
                check_matrix("measurement", measurement, x, l)
            }
            CostSpec::Generic { c, m } => {
                check_matrix("c", c, x, l + 1)?;
                check_matrix("m", m, x, l)
            }
        }
    }

    pub fn is_quickest(&self) -> bool {
        matches!(self, CostSpec::Quickest { .. })
    }

    /// False-alarm penalty (quickest mode only).
    pub fn false_alarm(&self) -> Option<f64> {
        match self {
            CostSpec::Quickest { false_alarm, .. } => Some(*false_alarm),
            CostSpec::Generic { .. } => None,
        }
    }

    /// Delay penalty per time unit (quickest mode only).
    pub fn delay(&self) -> Option<f64> {
        match self {
            CostSpec::Quickest { delay, .. } => Some(*delay),
            CostSpec::Generic { .. } => None,
        }
    }

    /// Measurement cost of scheduling action `u ∈ 1..=L` in state `i`.
    pub fn measurement(&self, i: usize, u: usize) -> f64 {
        match self {
            CostSpec::Quickest { measurement, .. } => measurement[i][u - 1],
            CostSpec::Generic { m, .. } => m[i][u - 1],
        }
    }

    /// Stop cost in state `i`.
    pub fn stop_cost(&self, i: usize) -> f64 {
        match self {
            CostSpec::Quickest { false_alarm, .. } => {
                if i == 0 {
                    0.0
                } else {
                    *false_alarm
                }
            }
            CostSpec::Generic { c, .. } => c[i][0],
        }
    }

    /// Per-time-unit running cost of action `u ∈ 1..=L` in state `i`.
    pub fn running_cost(&self, i: usize, u: usize) -> f64 {
        match self {
            CostSpec::Quickest { delay, .. } => {
                if i == 0 {
                    *delay
                } else {
                    0.0
                }
            }
            CostSpec::Generic { c, .. } => c[i][u],
        }
    }
}

/// Builds a validated change-detection cost spec: stop cost `f·(𝟙 − e_0)`,
/// running cost `d` per time unit in the target state, measurement matrix
/// `m` (X×L). States 1..X−1 are interchangeable waiting states, so their
/// measurement-cost rows must agree.
pub fn build_qd_costs(
    f: f64,
    d: f64,
    m: Vec<Vec<f64>>,
    a: &TransitionMatrix,
    intervals: &[u32],
) -> Result<CostSpec> {
    let spec = CostSpec::Quickest {
        false_alarm: f,
        delay: d,
        measurement: m,
    };
    spec.validate(a.dim(), intervals.len())?;
    if let CostSpec::Quickest { measurement, .. } = &spec {
        for i in 2..a.dim() {
            if measurement[i] != measurement[1] {
                return Err(CostError::UnequalWaitingStateCosts { first: 1, other: i });
            }
        }
    }
    Ok(spec)
}

/// The expanded per-action cost vectors `C_0..C_L`, each of length X.
/// `C(π, u) = C_uᵀπ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCostVectors {
    vectors: Vec<Vec<f64>>,
}

impl ActionCostVectors {
    pub(crate) fn new(vectors: Vec<Vec<f64>>) -> Self {
        debug_assert!(vectors.len() >= 2 && vectors.iter().all(|v| v.len() == vectors[0].len()));
        Self { vectors }
    }

    /// Number of chain states X.
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// Number of continue actions L (vector count is L + 1).
    pub fn num_continue_actions(&self) -> usize {
        self.vectors.len() - 1
    }

    /// The cost vector for action `u ∈ 0..=L`.
    pub fn vector(&self, u: usize) -> &[f64] {
        &self.vectors[u]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// `C(π, u) = C_uᵀπ` for a belief given as raw probabilities.
    pub fn evaluate(&self, u: usize, probs: &[f64]) -> f64 {
        self.vectors[u].iter().zip(probs).map(|(c, p)| c * p).sum()
    }
}

/// Expands a model's cost spec into the per-action vectors
/// `C_0 = stop costs` and `C_u = m_u + (Σ_{k<D_u} A^k) c_u`.
pub fn build_action_costs(model: &SamplingModel) -> ActionCostVectors {
    let x = model.num_states();
    let l = model.num_actions();
    let pows = model.transition.powers(model.max_interval() as usize);
    let mut vectors = Vec::with_capacity(l + 1);
    vectors.push((0..x).map(|i| model.costs.stop_cost(i)).collect::<Vec<_>>());
    for u in 1..=l {
        let d_u = model.intervals[u - 1] as usize;
        let acc = pows.partial_sum(d_u);
        let running: Vec<f64> = (0..x).map(|j| model.costs.running_cost(j, u)).collect();
        let vec_u: Vec<f64> = (0..x)
            .map(|i| {
                model.costs.measurement(i, u)
                    + acc[i].iter().zip(&running).map(|(a, c)| a * c).sum::<f64>()
            })
            .collect();
        vectors.push(vec_u);
    }
    ActionCostVectors::new(vectors)
}

/// Default weight for [`transform_underline`]: `1/(1 − A₁₁^{D_L})`, the
/// reciprocal of the probability that the chain jumps to the target at some
/// point during the longest sampling interval.
pub fn default_alpha_underline(model: &SamplingModel) -> Result<f64> {
    require_quickest_two_state(model)?;
    let a11 = model.transition.entry(1, 1);
    let stay = a11.powi(model.max_interval() as i32);
    if stay >= 1.0 - 1e-15 {
        return Err(CostError::DegenerateChain(format!(
            "A[1][1]^D_L = {stay} leaves no jump probability over the longest interval"
        )));
    }
    Ok(1.0 / (1.0 - stay))
}

/// Default weight for [`transform_bar`]: `f/(d·(1 − A₁₀))`, the smallest
/// weight that keeps the shifted continue costs decreasing in the state
/// index.
pub fn default_alpha_bar(model: &SamplingModel) -> Result<f64> {
    let (f, d) = quickest_params(model)?;
    let a10 = model.transition.entry(1, 0);
    if d <= 0.0 || a10 >= 1.0 - 1e-15 {
        return Err(CostError::DegenerateChain(format!(
            "f/(d·(1 − A[1][0])) undefined for d = {d}, A[1][0] = {a10}"
        )));
    }
    Ok(f / (d * (1.0 - a10)))
}

fn quickest_params(model: &SamplingModel) -> Result<(f64, f64)> {
    match (model.costs.false_alarm(), model.costs.delay()) {
        (Some(f), Some(d)) => Ok((f, d)),
        _ => Err(CostError::RequiresQuickest),
    }
}

fn require_quickest_two_state(model: &SamplingModel) -> Result<()> {
    quickest_params(model)?;
    if model.num_states() != 2 {
        return Err(CostError::RequiresTwoState(model.num_states()));
    }
    if !model.transition.has_absorbing_first_state(1e-12) {
        return Err(CostError::RequiresAbsorbingTarget);
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha.is_finite() {
        Ok(alpha)
    } else {
        Err(CostError::InvalidAlpha(format!("{alpha}")))
    }
}

/// Rebalances two-state change-detection costs against the longest-interval
/// cost `C_L`:
///
/// ```text
/// C̲_0 = C_0 − α C_L,
/// C̲_u = C_u − α C_L + α A^{D_u} C_L,   u = 1..L,
/// ```
///
/// where `A^{D_u} C_L` is the expected longest-interval cost at the next
/// decision epoch (the observation marginalizes out of the Bayes update).
/// Every Bellman argmin is unchanged, and with the default `α` from
/// [`default_alpha_underline`] the unit-belief costs become increasing in
/// the state index with differences `C̲(e_i,u+1) − C̲(e_i,u)` decreasing in
/// `i`.
pub fn transform_underline(
    costs: &ActionCostVectors,
    model: &SamplingModel,
    alpha: Option<f64>,
) -> Result<ActionCostVectors> {
    require_quickest_two_state(model)?;
    check_dims(costs, model)?;
    let alpha = check_alpha(match alpha {
        Some(a) => a,
        None => default_alpha_underline(model)?,
    })?;
    let l = costs.num_continue_actions();
    let c_last = costs.vector(l).to_vec();
    let pows = model.transition.powers(model.max_interval() as usize);
    let mut vectors = Vec::with_capacity(l + 1);
    vectors.push(combine(costs.vector(0), &c_last, -alpha, None));
    for u in 1..=l {
        let reached = mat_vec(pows.get(model.intervals[u - 1] as usize), &c_last);
        vectors.push(combine(costs.vector(u), &c_last, -alpha, Some((&reached, alpha))));
    }
    Ok(ActionCostVectors::new(vectors))
}

/// Shifts change-detection costs by predicted-absorption terms:
///
/// ```text
/// C̄_0 = C_0 + α d (A e_0),
/// C̄_u = C_u + α d (A e_0) − α d (A^{D_u+1} e_0),   u = 1..L,
/// ```
///
/// where `(A^k e_0)(i)` is the probability of sitting in the target state
/// `k` steps after starting from state `i`. The terms telescope along any
/// trajectory, so every Bellman argmin is unchanged; with `α` at least
/// [`default_alpha_bar`] the continue costs decrease in the state index,
/// making `argmin_{u ≥ 1} C̄(π,u)` a monotone upper-bound policy.
pub fn transform_bar(
    costs: &ActionCostVectors,
    model: &SamplingModel,
    alpha: Option<f64>,
) -> Result<ActionCostVectors> {
    let (_, d) = quickest_params(model)?;
    check_dims(costs, model)?;
    let alpha = check_alpha(match alpha {
        Some(a) => a,
        None => default_alpha_bar(model)?,
    })?;
    if alpha <= 0.0 {
        return Err(CostError::InvalidAlpha(format!("{alpha} (must be positive)")));
    }
    let l = costs.num_continue_actions();
    let pows = model.transition.powers(model.max_interval() as usize + 1);
    let col0 = |k: usize| -> Vec<f64> {
        let p = pows.get(k);
        (0..model.num_states()).map(|i| p[i][0]).collect()
    };
    let one_step = col0(1);
    let mut vectors = Vec::with_capacity(l + 1);
    vectors.push(combine(costs.vector(0), &one_step, alpha * d, None));
    for u in 1..=l {
        let after = col0(model.intervals[u - 1] as usize + 1);
        // Group the correction before adding so the two absorption terms
        // cancel exactly where they are equal (the target component).
        let shift: Vec<f64> = one_step.iter().zip(&after).map(|(a, b)| a - b).collect();
        vectors.push(combine(costs.vector(u), &shift, alpha * d, None));
    }
    Ok(ActionCostVectors::new(vectors))
}

fn check_dims(costs: &ActionCostVectors, model: &SamplingModel) -> Result<()> {
    if costs.dim() != model.num_states() || costs.num_continue_actions() != model.num_actions() {
        return Err(CostError::DimensionMismatch(format!(
            "cost vectors are {}x{} but model is {} states x {} actions",
            costs.num_continue_actions(),
            costs.dim(),
            model.num_states(),
            model.num_actions()
        )));
    }
    Ok(())
}

/// `base + w1·v1 [+ w2·v2]` componentwise.
fn combine(base: &[f64], v1: &[f64], w1: f64, extra: Option<(&[f64], f64)>) -> Vec<f64> {
    base.iter()
        .enumerate()
        .map(|(i, &b)| {
            let mut out = b + w1 * v1[i];
            if let Some((v2, w2)) = extra {
                out += w2 * v2[i];
            }
            out
        })
        .collect()
}
