//! Core domain types: belief states, transition and observation models, the
//! Bayesian filter/predictor, and phase-type change-time laws.
//!
//! The hidden chain `x_t` evolves per time unit with transition matrix `A`.
//! When the decision maker looks after waiting `D` time units it receives an
//! observation `y` with law `B[x][y]` and updates its belief by the standard
//! HMM filter
//!
//! ```text
//! T(π, y, u) = B_y (Aᵀ)^{D_u} π / σ(π, y, u),
//! σ(π, y, u) = 𝟙ᵀ B_y (Aᵀ)^{D_u} π,
//! ```
//!
//! where `B_y = diag(B[0][y], …, B[X−1][y])` and `σ` is the probability of
//! seeing `y` next given the current belief and chosen interval.
//!
//! For change-detection models state 0 is absorbing and the time to
//! absorption is phase-type distributed; [`change_time_pmf`] evaluates that
//! law exactly.
//!
//! Stochastic-order predicates (MLR, first-order dominance, TP2 and the
//! transition-matrix ordering) live in [`orders`]; the Blackwell garbling
//! test lives in [`blackwell`].

mod blackwell;
mod discretize;
mod orders;

pub use blackwell::{blackwell_geq, BlackwellResult};
pub use orders::{
    fosd_compare, is_tp2, mlr_compare, transition_order_geq, OrderVerdict, DEFAULT_ORDER_TOL,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used by constructors when checking that probabilities sum to 1.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Errors from model construction and filtering.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("belief needs at least two states (got {0})")]
    TooFewStates(usize),
    #[error("belief entry {index} = {value} outside [0, 1]")]
    BeliefRange { index: usize, value: f64 },
    #[error("belief entries sum to {sum}, expected 1")]
    BeliefSum { sum: f64 },
    #[error("matrix must be square (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry ({row}, {col}) = {value} outside [0, 1]")]
    EntryRange { row: usize, col: usize, value: f64 },
    #[error("matrix row {row} sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },
    #[error("ragged matrix: row {row} has {len} entries, expected {expected}")]
    RaggedRow { row: usize, len: usize, expected: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("observation grid needs at least two nodes (got {0})")]
    InvalidGrid(usize),
    #[error("observation index {y} out of range (Y = {num_symbols})")]
    BadObservation { y: usize, num_symbols: usize },
    #[error("action index {u} out of range (continue actions are 1..={num_actions})")]
    BadAction { u: usize, num_actions: usize },
    #[error("zero-likelihood observation y = {y} under action u = {u}")]
    ZeroLikelihood { y: usize, u: usize },
    #[error("transition matrix is not phase-type: state 0 is not absorbing")]
    NotPhStructured,
    #[error("sampling intervals must be strictly increasing positive integers")]
    BadIntervals,
}

pub type Result<T> = std::result::Result<T, ModelError>;

// ---- Small dense-matrix helpers (row-major Vec of rows) ----

pub(crate) fn mat_identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub(crate) fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += ail * b[l][j];
            }
        }
    }
    out
}

/// `Mᵀ v`: component j is `Σ_i M[i][j] v[i]`.
pub(crate) fn mat_tvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let cols = m[0].len();
    let mut out = vec![0.0; cols];
    for (i, row) in m.iter().enumerate() {
        let vi = v[i];
        if vi == 0.0 {
            continue;
        }
        for j in 0..cols {
            out[j] += row[j] * vi;
        }
    }
    out
}

/// `M v`: component i is `Σ_j M[i][j] v[j]`.
pub(crate) fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---- BeliefState ----

/// A point on the probability simplex: the posterior distribution of the
/// chain state. Entries are 0-indexed by state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    probs: Vec<f64>,
}

impl BeliefState {
    /// Validates and wraps a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(ModelError::TooFewStates(probs.len()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0 + PROB_SUM_TOL).contains(&p) || p.is_nan() {
                return Err(ModelError::BeliefRange { index: i, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::BeliefSum { sum });
        }
        Ok(Self { probs })
    }

    /// The unit belief `e_i` (all mass on state `i`) in an `x`-state model.
    pub fn unit(i: usize, x: usize) -> Self {
        assert!(i < x && x >= 2, "unit belief index out of range");
        let mut probs = vec![0.0; x];
        probs[i] = 1.0;
        Self { probs }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Wraps a vector that is known to be a valid distribution (e.g. the
    /// output of a normalization step). Debug builds still assert.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self { probs }
    }
}

// ---- TransitionMatrix ----

/// Row-stochastic transition matrix of the hidden chain (one chain time
/// unit). `rows[i][j]` is the probability of moving from state `i` to `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let x = rows.len();
        if x < 2 {
            return Err(ModelError::TooFewStates(x));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != x {
                return Err(ModelError::NotSquare {
                    rows: x,
                    cols: row.len(),
                });
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0 + PROB_SUM_TOL).contains(&p) || p.is_nan() {
                    return Err(ModelError::EntryRange {
                        row: i,
                        col: j,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(ModelError::RowSum { row: i, sum });
            }
        }
        Ok(Self { rows })
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// True when state 0 is absorbing (row 0 equals `e_0` within `tol`).
    pub fn has_absorbing_first_state(&self, tol: f64) -> bool {
        let row = &self.rows[0];
        (row[0] - 1.0).abs() <= tol && row[1..].iter().all(|&p| p.abs() <= tol)
    }

    /// Precomputes `A^0 .. A^upto` for repeated use by costs and solvers.
    pub fn powers(&self, upto: usize) -> PowerCache {
        let mut pows = Vec::with_capacity(upto + 1);
        pows.push(mat_identity(self.dim()));
        for k in 1..=upto {
            let next = mat_mul(&pows[k - 1], &self.rows);
            pows.push(next);
        }
        PowerCache { pows }
    }

    pub fn is_tp2(&self, tol: f64) -> bool {
        is_tp2(&self.rows, tol)
    }
}

/// Cached powers `A^0, A^1, …` of a transition matrix.
#[derive(Debug, Clone)]
pub struct PowerCache {
    pows: Vec<Vec<Vec<f64>>>,
}

impl PowerCache {
    pub fn get(&self, k: usize) -> &[Vec<f64>] {
        &self.pows[k]
    }

    pub fn max_power(&self) -> usize {
        self.pows.len() - 1
    }

    /// `(A^k)ᵀ v` — the `k`-step predictor applied to a distribution.
    pub fn apply_transpose(&self, k: usize, v: &[f64]) -> Vec<f64> {
        mat_tvec(&self.pows[k], v)
    }

    /// `Σ_{l=0}^{k−1} A^l` (the matrix that accumulates per-step running
    /// costs over an interval of `k` time units).
    pub fn partial_sum(&self, k: usize) -> Vec<Vec<f64>> {
        assert!(k <= self.pows.len(), "sum over {k} powers needs them computed");
        let n = self.pows[0].len();
        let mut out = vec![vec![0.0; n]; n];
        for power in self.pows.iter().take(k) {
            for (out_row, pow_row) in out.iter_mut().zip(power) {
                for (acc, &entry) in out_row.iter_mut().zip(pow_row) {
                    *acc += entry;
                }
            }
        }
        out
    }
}

// ---- ObservationModel ----

/// How observation distributions are specified. Continuous families are
/// discretized once at model construction so the rest of the crate only
/// ever sees a finite row-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationKind {
    /// Finite observation alphabet given directly as an X×Y matrix.
    Discrete { matrix: Vec<Vec<f64>> },
    /// Per-state Gaussian densities, discretized on an equispaced grid
    /// covering `[min mean − span·max sd, max mean + span·max sd]` with
    /// `nodes` cells (probability mass per cell, rows renormalized).
    Gaussian {
        means: Vec<f64>,
        variances: Vec<f64>,
        #[serde(default = "default_gaussian_nodes")]
        nodes: usize,
        #[serde(default = "default_gaussian_span")]
        span_stdevs: f64,
    },
    /// Per-state Poisson counts on the shifted support y = 1, 2, …
    /// (`P(y) = λ^{y−1} e^{−λ}/(y−1)!`), truncated where the remaining tail
    /// mass of every row falls below `tail_epsilon`, rows renormalized.
    Poisson {
        rates: Vec<f64>,
        #[serde(default = "default_poisson_tail")]
        tail_epsilon: f64,
    },
}

pub(crate) fn default_gaussian_nodes() -> usize {
    101
}

pub(crate) fn default_gaussian_span() -> f64 {
    5.0
}

pub(crate) fn default_poisson_tail() -> f64 {
    1e-10
}

/// Observation channel after discretization: `matrix[x][y]` is the
/// probability of symbol `y` from state `x`. Symbols keep the natural order
/// of the underlying support (grid nodes ascending, counts ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationModel {
    kind: ObservationKind,
    matrix: Vec<Vec<f64>>,
}

impl ObservationModel {
    /// Builds the effective observation matrix for the given specification.
    pub fn build(kind: ObservationKind) -> Result<Self> {
        let matrix = discretize::discretize(&kind)?;
        let y = matrix[0].len();
        if y < 2 {
            return Err(ModelError::InvalidGrid(y));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != y {
                return Err(ModelError::RaggedRow {
                    row: i,
                    len: row.len(),
                    expected: y,
                });
            }
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0 + PROB_SUM_TOL).contains(&p) || p.is_nan() {
                    return Err(ModelError::EntryRange {
                        row: i,
                        col: j,
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(ModelError::RowSum { row: i, sum });
            }
        }
        Ok(Self { kind, matrix })
    }

    pub fn kind(&self) -> &ObservationKind {
        &self.kind
    }

    /// Number of chain states X.
    pub fn states(&self) -> usize {
        self.matrix.len()
    }

    /// Number of observation symbols Y after discretization.
    pub fn num_symbols(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    /// Measurement update of a predicted distribution: returns the posterior
    /// and the normalization weight `σ = Σ_j B[j][y]·pred[j]`, or `None`
    /// when the observation has zero likelihood under `pred`.
    pub fn bayes(&self, pred: &[f64], y: usize) -> Option<(Vec<f64>, f64)> {
        let mut post: Vec<f64> = pred
            .iter()
            .enumerate()
            .map(|(j, &p)| self.matrix[j][y] * p)
            .collect();
        let sigma: f64 = post.iter().sum();
        if sigma <= 0.0 {
            return None;
        }
        for p in &mut post {
            *p /= sigma;
        }
        Some((post, sigma))
    }

    pub fn is_tp2(&self, tol: f64) -> bool {
        is_tp2(&self.matrix, tol)
    }
}

/// Convenience alias for [`ObservationModel::build`].
pub fn discretize_observations(kind: ObservationKind) -> Result<ObservationModel> {
    ObservationModel::build(kind)
}

// ---- SamplingModel ----

use crate::costs::CostSpec;

/// The full problem instance: chain dynamics, observation channel, the menu
/// of sampling intervals `D_1 < … < D_L`, and the cost specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingModel {
    pub transition: TransitionMatrix,
    pub obs: ObservationModel,
    pub intervals: Vec<u32>,
    pub costs: CostSpec,
}

impl SamplingModel {
    pub fn new(
        transition: TransitionMatrix,
        obs: ObservationModel,
        intervals: Vec<u32>,
        costs: CostSpec,
    ) -> Result<Self> {
        let x = transition.dim();
        if obs.states() != x {
            return Err(ModelError::DimensionMismatch(format!(
                "transition has {x} states but observation matrix has {}",
                obs.states()
            )));
        }
        if intervals.is_empty()
            || intervals[0] == 0
            || intervals.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ModelError::BadIntervals);
        }
        costs
            .validate(x, intervals.len())
            .map_err(|e| ModelError::InvalidParameter(format!("costs: {e}")))?;
        Ok(Self {
            transition,
            obs,
            intervals,
            costs,
        })
    }

    /// Number of chain states X.
    pub fn num_states(&self) -> usize {
        self.transition.dim()
    }

    /// Number of continue actions L (the stop action 0 is extra).
    pub fn num_actions(&self) -> usize {
        self.intervals.len()
    }

    /// The sampling interval `D_u` for continue action `u ∈ 1..=L`.
    pub fn interval(&self, u: usize) -> Result<u32> {
        if u == 0 || u > self.intervals.len() {
            return Err(ModelError::BadAction {
                u,
                num_actions: self.intervals.len(),
            });
        }
        Ok(self.intervals[u - 1])
    }

    pub fn max_interval(&self) -> u32 {
        *self.intervals.last().expect("validated nonempty")
    }
}

// ---- Filter and predictor ----

/// The `l`-step Bayesian predictor `(Aᵀ)^l π`.
pub fn predict(pi: &BeliefState, a: &TransitionMatrix, l: u32) -> Result<BeliefState> {
    if pi.dim() != a.dim() {
        return Err(ModelError::DimensionMismatch(format!(
            "belief has {} states, transition matrix {}",
            pi.dim(),
            a.dim()
        )));
    }
    let mut v = pi.probs().to_vec();
    for _ in 0..l {
        v = mat_tvec(a.rows(), &v);
    }
    Ok(BeliefState::from_normalized(v))
}

/// One filter step for continue action `u ∈ 1..=L`: predict over the
/// sampling interval `D_u`, then condition on observation `y`.
///
/// Returns `(T(π,y,u), σ(π,y,u))`. The weights satisfy `Σ_y σ(π,y,u) = 1`;
/// a zero weight means `y` cannot occur and is reported as an error.
pub fn filter_update(
    pi: &BeliefState,
    y: usize,
    u: usize,
    model: &SamplingModel,
) -> Result<(BeliefState, f64)> {
    if y >= model.obs.num_symbols() {
        return Err(ModelError::BadObservation {
            y,
            num_symbols: model.obs.num_symbols(),
        });
    }
    let d = model.interval(u)?;
    let pred = predict(pi, &model.transition, d)?;
    match model.obs.bayes(pred.probs(), y) {
        Some((post, sigma)) => Ok((BeliefState::from_normalized(post), sigma)),
        None => Err(ModelError::ZeroLikelihood { y, u }),
    }
}

// ---- Phase-type change time ----

/// Exact pmf of the absorption (change) time `t* = inf{t : x_t = 0}` when
/// state 0 is absorbing: `P(t* = 0) = π₀(0)` and for `t ≥ 1`
/// `P(t* = t) = π̄₀ᵀ Ā^{t−1} a` where `Ā` is the transient block of `A`,
/// `a` the transient-to-absorbing column, and `π̄₀` the transient part of
/// the initial distribution. For X = 2 this is the geometric law
/// `π₀(1)·(1−A₁₁)·A₁₁^{t−1}`.
pub fn change_time_pmf(a: &TransitionMatrix, pi0: &BeliefState, t: u64) -> Result<f64> {
    if !a.has_absorbing_first_state(PROB_SUM_TOL) {
        return Err(ModelError::NotPhStructured);
    }
    if pi0.dim() != a.dim() {
        return Err(ModelError::DimensionMismatch(format!(
            "belief has {} states, transition matrix {}",
            pi0.dim(),
            a.dim()
        )));
    }
    if t == 0 {
        return Ok(pi0.prob(0));
    }
    let x = a.dim();
    // Transient block Ā (states 1..X−1) and entry column a_i = A[i][0].
    let trans: Vec<Vec<f64>> = (1..x)
        .map(|i| (1..x).map(|j| a.entry(i, j)).collect())
        .collect();
    let into_target: Vec<f64> = (1..x).map(|i| a.entry(i, 0)).collect();
    let mut w: Vec<f64> = (1..x).map(|i| pi0.prob(i)).collect();
    for _ in 1..t {
        w = mat_tvec(&trans, &w);
    }
    Ok(dot(&w, &into_target))
}
