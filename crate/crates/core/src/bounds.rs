//! Structural-assumption checks and myopic policy bounds.
//!
//! The threshold and bound guarantees for solved policies rest on a list
//! of checkable conditions: monotone unit-vector costs (A1), totally
//! positive transition and observation kernels (A2, A3), submodular costs
//! (A4), submodular tail sums of the interval transition powers (A5), a
//! transition matrix dominating its own square (A6), and a large-enough
//! shift constant for the upper-bound cost transform (A7). This module
//! evaluates each condition exactly as a finite scan
//! ([`check_assumptions`]), builds the two myopic policies that sandwich
//! the optimal one ([`myopic_lower`], [`myopic_upper`]), verifies the
//! sandwich on solved policies ([`verify_policy_bounds`]), and stress-tests
//! the monotonicity properties of the Bayes filter that underpin the
//! theory ([`filter_dominance_probe`]).
//!
//! Index conventions: code is 0-based throughout, but witness tuples in
//! verdicts are reported 1-based (states, actions, and symbols numbered
//! from 1) so they can be read against the usual matrix notation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::costs::{
    default_alpha_bar, default_alpha_underline, transform_bar, transform_underline,
    ActionCostVectors, CostError,
};
use crate::models::{
    fosd_compare, is_tp2, mlr_compare, transition_order_geq, BeliefState, ModelError,
    SamplingModel, TransitionMatrix,
};
use crate::solver::{BeliefGrid, Policy};

/// Slack allowed on the weak inequalities of the assumption scans; several
/// of them hold with exact equality for natural cost structures.
pub const ASSUMPTION_TOL: f64 = 1e-9;

/// Tolerance for the randomized filter-dominance probes.
pub const PROBE_TOL: f64 = 1e-10;

/// Errors raised by bound construction.
#[derive(Debug, Error)]
pub enum BoundsError {
    /// A caller-supplied argument violates the operation's contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The shift constant is too small for the upper-bound construction.
    #[error("shift constant {alpha} is below the required {required}")]
    AlphaTooSmall { alpha: f64, required: f64 },
    /// An underlying cost transform failed.
    #[error(transparent)]
    Cost(#[from] CostError),
    /// An underlying model operation failed.
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

// ------------------------------------------------------------------
// Assumption report
// ------------------------------------------------------------------

/// Identifiers of the individual structural assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AssumptionId {
    /// Unit-vector costs increase with the state index for every action.
    A1i,
    /// The target vertex belongs to the solved stopping set (post-solve).
    A1ii,
    /// The transition matrix is TP2.
    A2,
    /// The observation matrix is TP2.
    A3,
    /// Unit-vector costs are submodular in (state, action).
    A4,
    /// Tail sums of the interval transition powers are submodular.
    A5i,
    /// Selected entries of the interval transition powers decrease with
    /// the action.
    A5ii,
    /// The transition matrix dominates its own square.
    A6,
    /// The shift constant clears the false-alarm/delay ratio.
    A7i,
    /// The shifted absorption masses decrease with the state index.
    A7ii,
}

impl std::fmt::Display for AssumptionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            AssumptionId::A1i => "A1(i)",
            AssumptionId::A1ii => "A1(ii)",
            AssumptionId::A2 => "A2",
            AssumptionId::A3 => "A3",
            AssumptionId::A4 => "A4",
            AssumptionId::A5i => "A5(i)",
            AssumptionId::A5ii => "A5(ii)",
            AssumptionId::A6 => "A6",
            AssumptionId::A7i => "A7(i)",
            AssumptionId::A7ii => "A7(ii)",
        };
        f.write_str(name)
    }
}

/// Outcome of one assumption scan.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    /// All scanned inequalities hold; `margin` is the smallest slack seen
    /// (infinite when the scan was vacuous).
    Pass { margin: f64 },
    /// First violated inequality, as a 1-based index tuple in quantifier
    /// order, with its (negative) slack.
    Fail { witness: Vec<usize>, margin: f64 },
    /// The assumption does not apply to this model/cost combination.
    NotApplicable { reason: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn failed(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }
}

/// Verdicts for every assumption, in display order.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// Shift constant used for the A7 checks.
    pub alpha: f64,
    /// Shift constant used for the transformed-cost A1(i)/A4 checks on
    /// two-state detection models (`None` when those checks don't apply).
    pub alpha_underline: Option<f64>,
    pub entries: Vec<AssumptionEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionEntry {
    pub id: AssumptionId,
    pub verdict: Verdict,
}

impl AssumptionReport {
    pub fn verdict(&self, id: AssumptionId) -> &Verdict {
        &self
            .entries
            .iter()
            .find(|e| e.id == id)
            .expect("report covers every assumption id")
            .verdict
    }

    /// True when no applicable assumption failed.
    pub fn applicable_all_pass(&self) -> bool {
        self.entries.iter().all(|e| !e.verdict.failed())
    }
}

/// Folds a stream of `(witness, slack)` pairs into a verdict: the first
/// slack below `-ASSUMPTION_TOL` fails the scan.
fn scan<I: IntoIterator<Item = (Vec<usize>, f64)>>(slacks: I) -> Verdict {
    let mut margin = f64::INFINITY;
    for (witness, slack) in slacks {
        if slack < -ASSUMPTION_TOL {
            return Verdict::Fail {
                witness,
                margin: slack,
            };
        }
        if slack < margin {
            margin = slack;
        }
    }
    Verdict::Pass { margin }
}

/// TP2 scan: every 2x2 minor (rows i<m, columns j<l) is nonnegative.
/// Witness order: (i, j, m, l).
fn tp2_verdict(matrix: &[Vec<f64>]) -> Verdict {
    let rows = matrix.len();
    let cols = matrix[0].len();
    scan((0..rows).flat_map(move |i| {
        (i + 1..rows).flat_map(move |m| {
            (0..cols).flat_map(move |j| {
                (j + 1..cols).map(move |l| {
                    let minor = matrix[i][j] * matrix[m][l] - matrix[i][l] * matrix[m][j];
                    (vec![i + 1, j + 1, m + 1, l + 1], minor)
                })
            })
        })
    }))
}

/// Dominance scan for `first ⪰ second`: `first[i][j]·second[m][j+1] ≤
/// second[i][j]·first[m][j+1]` for all i, m and adjacent columns.
/// Witness order: (i, j, m).
fn transition_order_verdict(first: &[Vec<f64>], second: &[Vec<f64>]) -> Verdict {
    let x = first.len();
    scan((0..x).flat_map(move |i| {
        (0..x - 1).flat_map(move |j| {
            (0..x).map(move |m| {
                let slack = second[i][j] * first[m][j + 1] - first[i][j] * second[m][j + 1];
                (vec![i + 1, j + 1, m + 1], slack)
            })
        })
    }))
}

/// Unit-vector costs increase with the state for every action.
/// Witness order: (u, i) with i the lower state of the failing pair.
fn increasing_costs_verdict(costs: &ActionCostVectors) -> Verdict {
    let x = costs.dim();
    scan((0..=costs.num_continue_actions()).flat_map(move |u| {
        let v = costs.vector(u);
        (0..x - 1).map(move |i| (vec![u, i + 1], v[i + 1] - v[i]))
    }))
}

/// Unit-vector cost differences `C(e_i, u+1) − C(e_i, u)` decrease with
/// the state, for every adjacent action pair including (stop, first
/// continue). Witness order: (u, i) with i the lower state of the pair.
fn submodular_costs_verdict(costs: &ActionCostVectors) -> Verdict {
    let x = costs.dim();
    scan((0..costs.num_continue_actions()).flat_map(move |u| {
        let lo = costs.vector(u);
        let hi = costs.vector(u + 1);
        (0..x - 1).map(move |i| {
            let slack = (hi[i] - lo[i]) - (hi[i + 1] - lo[i + 1]);
            (vec![u, i + 1], slack)
        })
    }))
}

/// Runs every assumption scan against one model.
///
/// The optional `alpha` feeds the A7 checks (default: the smallest
/// admissible value [`default_alpha_bar`]). For two-state detection
/// models A1(i) and A4 are evaluated on the decision-equivalent
/// shifted costs from [`transform_underline`] with that transform's own
/// canonical constant, since the raw costs of a detection problem are
/// never state-increasing; for more states no such transform exists and
/// A1(i) defers to the A7 surrogate. A1(ii) needs a solved policy — see
/// [`target_vertex_stops`] — and is reported not-applicable here.
///
/// # Errors
///
/// [`BoundsError::InvalidParameter`] when `costs` does not match the
/// model's shape.
pub fn check_assumptions(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    alpha: Option<f64>,
) -> Result<AssumptionReport> {
    if costs.dim() != model.num_states() || costs.num_continue_actions() != model.num_actions() {
        return Err(BoundsError::InvalidParameter(format!(
            "cost vectors ({} actions x {} states) do not match the model ({} x {})",
            costs.num_continue_actions(),
            costs.dim(),
            model.num_actions(),
            model.num_states()
        )));
    }
    let a = &model.transition;
    let x = model.num_states();
    let l = model.num_actions();
    let quickest = model.costs.is_quickest();
    let pows = a.powers(model.max_interval() as usize + 1);

    // A1(i) / A4: on shifted costs for two-state detection models.
    let mut alpha_underline = None;
    let (a1i, a4) = if quickest && x == 2 {
        match default_alpha_underline(model) {
            Ok(au) => {
                alpha_underline = Some(au);
                let shifted = transform_underline(costs, model, Some(au))?;
                (
                    increasing_costs_verdict(&shifted),
                    submodular_costs_verdict(&shifted),
                )
            }
            Err(e) => {
                let reason = format!("no shifted-cost form: {e}");
                (
                    Verdict::NotApplicable {
                        reason: reason.clone(),
                    },
                    Verdict::NotApplicable { reason },
                )
            }
        }
    } else if quickest {
        (
            Verdict::NotApplicable {
                reason: "detection costs beyond two states have no increasing \
                         shifted form; see A7"
                    .into(),
            },
            submodular_costs_verdict(costs),
        )
    } else {
        (
            increasing_costs_verdict(costs),
            submodular_costs_verdict(costs),
        )
    };

    let a2 = tp2_verdict(a.rows());
    let a3 = tp2_verdict(model.obs.matrix());

    // A5(i): tail sums of interval powers, submodular in (state, action).
    // Witness order: (q, u, i).
    let a5i = scan((0..x).flat_map(|q| {
        let pows = &pows;
        let intervals = &model.intervals;
        (1..l).flat_map(move |u| {
            let d_lo = pows.get(intervals[u - 1] as usize);
            let d_hi = pows.get(intervals[u] as usize);
            let diff: Vec<f64> = (0..x)
                .map(|i| (q..x).map(|j| d_hi[i][j] - d_lo[i][j]).sum())
                .collect();
            (0..x - 1)
                .map(move |i| (vec![q + 1, u, i + 1], diff[i] - diff[i + 1]))
                .collect::<Vec<_>>()
        })
    }));

    // A5(ii): entries (2,2) and (1,2) of the interval powers decrease
    // with the action. Witness order: (row, col, u).
    let a5ii = scan((1..l).flat_map(|u| {
        let lo = pows.get(model.intervals[u - 1] as usize);
        let hi = pows.get(model.intervals[u] as usize);
        [
            (vec![2, 2, u], lo[1][1] - hi[1][1]),
            (vec![1, 2, u], lo[0][1] - hi[0][1]),
        ]
    }));

    let a6 = transition_order_verdict(a.rows(), pows.get(2));

    // A7: only meaningful for detection costs, which define f and d.
    let (a7i, a7ii, alpha_used) = if quickest {
        let f = model.costs.false_alarm().expect("detection costs have f");
        let d = model.costs.delay().expect("detection costs have d");
        let denom = d * (1.0 - a.entry(1, 0));
        let alpha = alpha
            .or_else(|| default_alpha_bar(model).ok())
            .unwrap_or(f64::INFINITY);
        let a7i = if denom > 0.0 && alpha.is_finite() {
            let slack = alpha - f / denom;
            if slack < -ASSUMPTION_TOL {
                Verdict::Fail {
                    witness: vec![],
                    margin: slack,
                }
            } else {
                Verdict::Pass { margin: slack }
            }
        } else {
            Verdict::Fail {
                witness: vec![],
                margin: f64::NEG_INFINITY,
            }
        };
        // A7(ii): Σ_{l=1}^{D_u−1} A^l(i,1) + α(A(i,1) − A^{D_u+1}(i,1))
        // decreasing over waiting states i = 2..X. Witness order: (u, i).
        let a7ii = if alpha.is_finite() {
            scan((1..=l).flat_map(|u| {
                let du = model.intervals[u - 1] as usize;
                let g: Vec<f64> = (1..x)
                    .map(|i| {
                        let absorbed: f64 = (1..du).map(|k| pows.get(k)[i][0]).sum();
                        absorbed + alpha * (a.entry(i, 0) - pows.get(du + 1)[i][0])
                    })
                    .collect();
                (0..g.len().saturating_sub(1))
                    .map(move |k| (vec![u, k + 2], g[k] - g[k + 1]))
                    .collect::<Vec<_>>()
            }))
        } else {
            Verdict::Fail {
                witness: vec![],
                margin: f64::NEG_INFINITY,
            }
        };
        (a7i, a7ii, alpha)
    } else {
        let reason = "the shift constant is defined for detection costs only".to_string();
        (
            Verdict::NotApplicable {
                reason: reason.clone(),
            },
            Verdict::NotApplicable { reason },
            alpha.unwrap_or(f64::NAN),
        )
    };

    let entries = vec![
        AssumptionEntry {
            id: AssumptionId::A1i,
            verdict: a1i,
        },
        AssumptionEntry {
            id: AssumptionId::A1ii,
            verdict: Verdict::NotApplicable {
                reason: "needs a solved policy; check the target vertex of the solution".into(),
            },
        },
        AssumptionEntry {
            id: AssumptionId::A2,
            verdict: a2,
        },
        AssumptionEntry {
            id: AssumptionId::A3,
            verdict: a3,
        },
        AssumptionEntry {
            id: AssumptionId::A4,
            verdict: a4,
        },
        AssumptionEntry {
            id: AssumptionId::A5i,
            verdict: a5i,
        },
        AssumptionEntry {
            id: AssumptionId::A5ii,
            verdict: a5ii,
        },
        AssumptionEntry {
            id: AssumptionId::A6,
            verdict: a6,
        },
        AssumptionEntry {
            id: AssumptionId::A7i,
            verdict: a7i,
        },
        AssumptionEntry {
            id: AssumptionId::A7ii,
            verdict: a7ii,
        },
    ];
    Ok(AssumptionReport {
        alpha: alpha_used,
        alpha_underline,
        entries,
    })
}

/// Post-solve A1(ii): does the solved policy stop at the target vertex?
pub fn target_vertex_stops(policy: &Policy, grid: &BeliefGrid) -> bool {
    let target = BeliefState::unit(0, grid.dimension());
    policy.action_at(grid, &target) == 0
}

// ------------------------------------------------------------------
// Myopic policies
// ------------------------------------------------------------------

/// The myopic policy: per grid point, the action with the smallest
/// instantaneous cost (ties to the smallest index). Ignores the future
/// entirely, so it needs one pass of `L+1` inner products per point and
/// lower-bounds the optimal action under the structural assumptions.
///
/// # Errors
///
/// [`BoundsError::InvalidParameter`] when dimensions disagree.
pub fn myopic_lower(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    grid: &BeliefGrid,
) -> Result<Policy> {
    check_shapes(model, costs, grid)?;
    let actions = grid
        .points()
        .iter()
        .map(|pt| {
            let mut best = (costs.evaluate(0, pt.probs()), 0usize);
            for u in 1..=costs.num_continue_actions() {
                let c = costs.evaluate(u, pt.probs());
                if c < best.0 {
                    best = (c, u);
                }
            }
            best.1
        })
        .collect();
    Ok(Policy::new(actions, model.num_actions()).expect("argmin actions are in range"))
}

/// Points where stopping is strictly cheaper right now than every
/// continue action — the myopic stopping set. Ties go to continue.
pub fn myopic_stop_set(costs: &ActionCostVectors, grid: &BeliefGrid) -> Vec<bool> {
    grid.points()
        .iter()
        .map(|pt| {
            let stop = costs.evaluate(0, pt.probs());
            (1..=costs.num_continue_actions()).all(|u| stop < costs.evaluate(u, pt.probs()))
        })
        .collect()
}

/// The shifted-cost myopic policy that upper-bounds the optimal one:
/// stop on the myopic stopping set, otherwise take the continue action
/// minimizing the [`transform_bar`] cost (ties to the smallest index).
///
/// `alpha` defaults to the smallest admissible shift
/// [`default_alpha_bar`].
///
/// # Errors
///
/// [`BoundsError::AlphaTooSmall`] when `alpha` is below
/// `f/(d(1−A(2,1)))`; cost-transform errors for non-detection models.
pub fn myopic_upper(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    grid: &BeliefGrid,
    alpha: Option<f64>,
) -> Result<Policy> {
    check_shapes(model, costs, grid)?;
    let required = default_alpha_bar(model)?;
    let alpha = alpha.unwrap_or(required);
    if alpha < required - ASSUMPTION_TOL {
        return Err(BoundsError::AlphaTooSmall { alpha, required });
    }
    let shifted = transform_bar(costs, model, Some(alpha))?;
    let stop = myopic_stop_set(costs, grid);
    let actions = grid
        .points()
        .iter()
        .zip(&stop)
        .map(|(pt, &stops)| {
            if stops {
                return 0;
            }
            let mut best = (shifted.evaluate(1, pt.probs()), 1usize);
            for u in 2..=shifted.num_continue_actions() {
                let c = shifted.evaluate(u, pt.probs());
                if c < best.0 {
                    best = (c, u);
                }
            }
            best.1
        })
        .collect();
    Ok(Policy::new(actions, model.num_actions()).expect("argmin actions are in range"))
}

fn check_shapes(
    model: &SamplingModel,
    costs: &ActionCostVectors,
    grid: &BeliefGrid,
) -> Result<()> {
    if costs.dim() != model.num_states() || costs.num_continue_actions() != model.num_actions() {
        return Err(BoundsError::InvalidParameter(format!(
            "cost vectors ({} actions x {} states) do not match the model ({} x {})",
            costs.num_continue_actions(),
            costs.dim(),
            model.num_actions(),
            model.num_states()
        )));
    }
    if grid.dimension() != model.num_states() {
        return Err(BoundsError::InvalidParameter(format!(
            "grid dimension {} does not match the {}-state model",
            grid.dimension(),
            model.num_states()
        )));
    }
    Ok(())
}

// ------------------------------------------------------------------
// Bound verification
// ------------------------------------------------------------------

/// Which side of the optimal policy the myopic policy must lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    /// `optimal ≥ myopic` pointwise (outside the mask).
    Lower,
    /// `myopic ≥ optimal` pointwise (outside the mask).
    Upper,
}

/// Pointwise result of a bound check.
#[derive(Debug, Clone, Serialize)]
pub struct BoundVerdict {
    /// Per grid point: true when neither the order nor the stop-set
    /// inclusion is violated there.
    pub outcomes: Vec<bool>,
    /// Points (outside the mask) where the action order failed.
    pub order_violations: usize,
    /// Points where the myopic policy stops but the optimal one doesn't.
    pub subset_violations: usize,
    pub pass: bool,
}

impl BoundVerdict {
    pub fn violations(&self) -> usize {
        self.order_violations + self.subset_violations
    }
}

/// Compares a solved policy against a myopic bound policy.
///
/// Checks the action order at every point not excluded by `mask`, and
/// that the myopic stop set is contained in the solved stop set.
///
/// # Errors
///
/// [`BoundsError::InvalidParameter`] when the policies or mask cover
/// different numbers of points.
pub fn verify_policy_bounds(
    optimal: &Policy,
    myopic: &Policy,
    direction: BoundDirection,
    mask: &[bool],
) -> Result<BoundVerdict> {
    if optimal.len() != myopic.len() || optimal.len() != mask.len() {
        return Err(BoundsError::InvalidParameter(format!(
            "policies and mask cover {} / {} / {} points",
            optimal.len(),
            myopic.len(),
            mask.len()
        )));
    }
    let mut outcomes = Vec::with_capacity(optimal.len());
    let mut order_violations = 0;
    let mut subset_violations = 0;
    for (g, &masked) in mask.iter().enumerate() {
        let (opt, myo) = (optimal.action(g), myopic.action(g));
        let order_ok = masked
            || match direction {
                BoundDirection::Lower => opt >= myo,
                BoundDirection::Upper => myo >= opt,
            };
        let subset_ok = myo != 0 || opt == 0;
        if !order_ok {
            order_violations += 1;
        }
        if !subset_ok {
            subset_violations += 1;
        }
        outcomes.push(order_ok && subset_ok);
    }
    Ok(BoundVerdict {
        outcomes,
        order_violations,
        subset_violations,
        pass: order_violations + subset_violations == 0,
    })
}

// ------------------------------------------------------------------
// Filter dominance probes
// ------------------------------------------------------------------

/// Tally for one probed property.
#[derive(Debug, Clone, Serialize)]
pub struct ProbePart {
    /// Property label: "1", "2", "3", "4", "5a", "5b", "6a", "6b".
    pub id: &'static str,
    /// Trials attempted.
    pub trials: usize,
    /// Trials whose premises held and whose conclusion was evaluated.
    pub checked: usize,
    pub violations: usize,
    /// Stream index of the first violating trial, for reproduction.
    pub first_failure: Option<u64>,
}

/// Results of [`filter_dominance_probe`].
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub seed: u64,
    pub tol: f64,
    pub parts: Vec<ProbePart>,
}

impl ProbeReport {
    pub fn part(&self, id: &str) -> &ProbePart {
        self.parts
            .iter()
            .find(|p| p.id == id)
            .expect("known probe part id")
    }

    pub fn total_violations(&self) -> usize {
        self.parts.iter().map(|p| p.violations).sum()
    }
}

/// Randomized falsification harness for the monotonicity properties of
/// the Bayes filter and predictor:
///
/// 1. TP2 transitions map likelihood-ratio-ordered beliefs to ordered
///    posteriors (any observation kernel).
/// 2. With a TP2 observation kernel as well, the observation likelihoods
///    inherit first-order stochastic dominance.
/// 3. With submodular tail sums across sampling intervals, the
///    observation likelihood differences are submodular too
///    (premise-filtered).
/// 4. With a TP2 observation kernel, larger observations give
///    likelihood-ratio-larger posteriors.
/// 5. (a) A dominating transition matrix gives a dominating one-step
///    predictor; (b) with TP2 matrices, any-step predictors too.
/// 6. (a) A dominating transition matrix gives dominating posteriors and
///    (b), with a TP2 observation kernel, stochastically larger
///    observation likelihoods.
///
/// Each part draws `trials` independent scenarios, alternating 2- and
/// 3-state chains, from seeded generators (stream = part·10⁶ + trial, so
/// any failure is reproducible from the report).
pub fn filter_dominance_probe(trials: usize, seed: u64) -> ProbeReport {
    let ids = ["1", "2", "3", "4", "5a", "5b", "6a", "6b"];
    let parts = ids
        .iter()
        .enumerate()
        .map(|(part_idx, &id)| {
            let mut checked = 0;
            let mut violations = 0;
            let mut first_failure = None;
            for trial in 0..trials {
                let stream = part_idx as u64 * 1_000_000 + trial as u64;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                let x = 2 + trial % 2;
                if let Some(ok) = run_probe_trial(id, x, &mut rng) {
                    checked += 1;
                    if !ok {
                        violations += 1;
                        first_failure.get_or_insert(stream);
                    }
                }
            }
            ProbePart {
                id,
                trials,
                checked,
                violations,
                first_failure,
            }
        })
        .collect();
    ProbeReport {
        seed,
        tol: PROBE_TOL,
        parts,
    }
}

/// Runs one trial; `None` when the premises don't hold (part 3 only).
fn run_probe_trial(id: &str, x: usize, rng: &mut ChaCha8Rng) -> Option<bool> {
    let geq = |v: crate::models::OrderVerdict| v.is_geq();
    match id {
        "1" => {
            let a = random_tp2_stochastic(x, x, rng);
            let y = rng.random_range(2..=4);
            let b = random_stochastic(x, y, rng);
            let d = rng.random_range(1..=3);
            let (hi, lo) = mlr_pair(x, rng);
            let mut ok = true;
            for obs in 0..y {
                if let (Some((t1, _)), Some((t2, _))) = (
                    posterior(&a, &b, &hi, obs, d),
                    posterior(&a, &b, &lo, obs, d),
                ) {
                    ok &= geq(mlr_compare(&t1, &t2, PROBE_TOL).unwrap());
                }
            }
            Some(ok)
        }
        "2" => {
            let a = random_tp2_stochastic(x, x, rng);
            let y = rng.random_range(2..=4);
            let b = random_tp2_stochastic(x, y, rng);
            let d = rng.random_range(1..=3);
            let (hi, lo) = mlr_pair(x, rng);
            let s1 = likelihoods(&a, &b, &hi, d);
            let s2 = likelihoods(&a, &b, &lo, d);
            Some(geq(fosd_compare(&s1, &s2, PROBE_TOL).unwrap()))
        }
        "3" => {
            // Absorbing two-state chains satisfy the tail-sum premise for
            // any interval ladder; verify it numerically all the same.
            let p = rng.random_range(0.05..0.5);
            let a = vec![vec![1.0, 0.0], vec![p, 1.0 - p]];
            let y = rng.random_range(2..=4);
            let b = random_tp2_stochastic(2, y, rng);
            let d_lo = rng.random_range(1..=3);
            let d_hi = d_lo + rng.random_range(1..=3);
            if !tail_sums_submodular(&a, d_lo, d_hi) {
                return None;
            }
            let (hi_belief, lo_belief) = mlr_pair(2, rng);
            let diff = |pi: &[f64], ybar: usize| -> f64 {
                let s_hi = likelihoods(&a, &b, pi, d_hi);
                let s_lo = likelihoods(&a, &b, pi, d_lo);
                (ybar..y).map(|obs| s_hi[obs] - s_lo[obs]).sum()
            };
            let ok = (0..y)
                .all(|ybar| diff(&hi_belief, ybar) <= diff(&lo_belief, ybar) + PROBE_TOL);
            Some(ok)
        }
        "4" => {
            let a = random_stochastic(x, x, rng);
            let y = rng.random_range(2..=4);
            let b = random_tp2_stochastic(x, y, rng);
            let d = rng.random_range(1..=3);
            let pi = random_belief(x, rng);
            let mut ok = true;
            for hi_obs in 1..y {
                for lo_obs in 0..hi_obs {
                    if let (Some((t_hi, _)), Some((t_lo, _))) = (
                        posterior(&a, &b, &pi, hi_obs, d),
                        posterior(&a, &b, &pi, lo_obs, d),
                    ) {
                        ok &= geq(mlr_compare(&t_hi, &t_lo, PROBE_TOL).unwrap());
                    }
                }
            }
            Some(ok)
        }
        "5a" => {
            let (a, a_bar) = dominating_pair(x, false, rng);
            let pi = random_belief(x, rng);
            let p1 = predict_raw(&a, &pi, 1);
            let p2 = predict_raw(&a_bar, &pi, 1);
            Some(geq(mlr_compare(&p1, &p2, PROBE_TOL).unwrap()))
        }
        "5b" => {
            let (a, a_bar) = dominating_pair(x, true, rng);
            let l = rng.random_range(1..=4);
            let pi = random_belief(x, rng);
            let p1 = predict_raw(&a, &pi, l);
            let p2 = predict_raw(&a_bar, &pi, l);
            Some(geq(mlr_compare(&p1, &p2, PROBE_TOL).unwrap()))
        }
        "6a" => {
            let (a, a_bar) = dominating_pair(x, true, rng);
            let y = rng.random_range(2..=4);
            let b = random_stochastic(x, y, rng);
            let d = rng.random_range(1..=3);
            let pi = random_belief(x, rng);
            let mut ok = true;
            for obs in 0..y {
                if let (Some((t1, _)), Some((t2, _))) = (
                    posterior(&a, &b, &pi, obs, d),
                    posterior(&a_bar, &b, &pi, obs, d),
                ) {
                    ok &= geq(mlr_compare(&t1, &t2, PROBE_TOL).unwrap());
                }
            }
            Some(ok)
        }
        "6b" => {
            let (a, a_bar) = dominating_pair(x, true, rng);
            let y = rng.random_range(2..=4);
            let b = random_tp2_stochastic(x, y, rng);
            let d = rng.random_range(1..=3);
            let pi = random_belief(x, rng);
            let s1 = likelihoods(&a, &b, &pi, d);
            let s2 = likelihoods(&a_bar, &b, &pi, d);
            Some(geq(fosd_compare(&s1, &s2, PROBE_TOL).unwrap()))
        }
        _ => unreachable!("unknown probe part"),
    }
}

// ---- probe generators and raw-matrix filter arithmetic ----

/// Row-stochastic matrix with entries bounded away from zero.
fn random_stochastic(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            let raw: Vec<f64> = (0..cols).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        })
        .collect()
}

/// Random TP2 row-stochastic matrix, built log-supermodularly: entries
/// `exp(c_j + s·a_i·b_j)` with `a` and `b` increasing and `s ≥ 0` have
/// every 2x2 minor nonnegative by construction, and row normalization
/// cancels in the minors. The verification loop only guards against
/// degenerate rounding; a canonical matrix stands in if it ever trips.
fn random_tp2_stochastic(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    for _ in 0..8 {
        let ramp = |n: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|k| (k as f64 + rng.random_range(0.0..1.0)) / n as f64)
                .collect()
        };
        let a = ramp(rows, rng);
        let b = ramp(cols, rng);
        let s = rng.random_range(0.5..3.0);
        let col_effect: Vec<f64> = (0..cols).map(|_| rng.random_range(0.0..0.5)).collect();
        let m: Vec<Vec<f64>> = a
            .iter()
            .map(|&ai| {
                let row: Vec<f64> = b
                    .iter()
                    .zip(&col_effect)
                    .map(|(&bj, &cj)| (cj + s * ai * bj).exp())
                    .collect();
                let total: f64 = row.iter().sum();
                row.into_iter().map(|v| v / total).collect()
            })
            .collect();
        if is_tp2(&m, 1e-12) {
            return m;
        }
    }
    (0..rows)
        .map(|i| {
            let row: Vec<f64> = (0..cols).map(|j| ((i * j) as f64).exp()).collect();
            let total: f64 = row.iter().sum();
            row.into_iter().map(|v| v / total).collect()
        })
        .collect()
}

/// Pair `A ⪰ Ā`: tilt one positive base matrix by geometric column
/// factors. With base entries in [1, 2) and ratio 4 between adjacent
/// column factors the dominance holds by construction; it is still
/// verified, with a fixed fallback pair for safety. `tp2` additionally
/// column-sorts the base so both outputs are TP2.
fn dominating_pair(x: usize, tp2: bool, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    for _ in 0..200 {
        let mut base: Vec<Vec<f64>> = (0..x)
            .map(|_| (0..x).map(|_| rng.random_range(1.0..2.0)).collect())
            .collect();
        if tp2 {
            let mut order: Vec<usize> = (0..x).collect();
            order.sort_by(|&j, &k| {
                let rj = base[x - 1][j] / base[0][j];
                let rk = base[x - 1][k] / base[0][k];
                rj.total_cmp(&rk)
            });
            base = base
                .iter()
                .map(|row| order.iter().map(|&j| row[j]).collect())
                .collect();
            if !is_tp2(&base, 1e-12) {
                continue;
            }
        }
        let normalize = |m: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.into_iter()
                .map(|row| {
                    let total: f64 = row.iter().sum();
                    row.into_iter().map(|v| v / total).collect()
                })
                .collect()
        };
        let a_bar = normalize(base.clone());
        let tilted: Vec<Vec<f64>> = base
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| v * 4f64.powi(j as i32))
                    .collect()
            })
            .collect();
        let a = normalize(tilted);
        let ordered = transition_order_geq(&a, &a_bar, 1e-12);
        let tp2_ok = !tp2 || (is_tp2(&a, 1e-12) && is_tp2(&a_bar, 1e-12));
        if ordered && tp2_ok {
            return (a, a_bar);
        }
    }
    // Deterministic fallback: a fixed ordered TP2 pair (padded to two
    // states by truncation when x == 2).
    let a = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.5, 0.3, 0.2],
        vec![0.3, 0.4, 0.3],
    ];
    let a_bar = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.9, 0.1, 0.0],
        vec![0.8, 0.2, 0.0],
    ];
    if x == 3 {
        (a, a_bar)
    } else {
        (
            vec![vec![1.0, 0.0], vec![0.1, 0.9]],
            vec![vec![1.0, 0.0], vec![0.2, 0.8]],
        )
    }
}

/// Likelihood-ratio ordered belief pair: tilt a base belief by a
/// nondecreasing positive vector.
fn mlr_pair(x: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let lo = random_belief(x, rng);
    let mut tilt = 1.0;
    let hi_raw: Vec<f64> = lo
        .iter()
        .map(|p| {
            let v = p * tilt;
            tilt += rng.random_range(0.0..2.0);
            v
        })
        .collect();
    let total: f64 = hi_raw.iter().sum();
    (hi_raw.into_iter().map(|v| v / total).collect(), lo)
}

fn random_belief(x: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..x).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// `(Aᵀ)^l π` for a raw matrix.
fn predict_raw(a: &[Vec<f64>], pi: &[f64], l: usize) -> Vec<f64> {
    let mut cur = pi.to_vec();
    for _ in 0..l {
        let mut next = vec![0.0; cur.len()];
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                next[j] += v * cur[i];
            }
        }
        cur = next;
    }
    cur
}

/// Posterior after `d` chain steps and one observation; `None` when the
/// observation has zero likelihood.
fn posterior(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    pi: &[f64],
    y: usize,
    d: usize,
) -> Option<(Vec<f64>, f64)> {
    let pred = predict_raw(a, pi, d);
    let unnorm: Vec<f64> = pred.iter().zip(b).map(|(p, row)| p * row[y]).collect();
    let sigma: f64 = unnorm.iter().sum();
    if sigma <= 0.0 {
        return None;
    }
    Some((unnorm.into_iter().map(|v| v / sigma).collect(), sigma))
}

/// Observation likelihood vector `σ(π, ·)` after `d` chain steps.
fn likelihoods(a: &[Vec<f64>], b: &[Vec<f64>], pi: &[f64], d: usize) -> Vec<f64> {
    let pred = predict_raw(a, pi, d);
    (0..b[0].len())
        .map(|y| pred.iter().zip(b).map(|(p, row)| p * row[y]).sum())
        .collect()
}

/// Premise of probe part 3: tail sums of `A^{d_hi} − A^{d_lo}` decreasing
/// in the row index.
fn tail_sums_submodular(a: &[Vec<f64>], d_lo: usize, d_hi: usize) -> bool {
    let x = a.len();
    let matrix = TransitionMatrix::new(a.to_vec()).expect("probe chains are stochastic");
    let pows = matrix.powers(d_hi);
    for q in 0..x {
        let diff: Vec<f64> = (0..x)
            .map(|i| {
                (q..x)
                    .map(|j| pows.get(d_hi)[i][j] - pows.get(d_lo)[i][j])
                    .sum()
            })
            .collect();
        if diff.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{build_action_costs, build_qd_costs};
    use crate::models::{ObservationKind, ObservationModel};
    use crate::solver::{extract_thresholds, make_grid, value_iterate};
    use approx::assert_relative_eq;

    fn detection_model(f: f64, m_waiting: f64) -> SamplingModel {
        let a = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.1, 0.9]]).unwrap();
        let obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.3, 0.7, 0.0], vec![0.0, 0.2, 0.8]],
        })
        .unwrap();
        let intervals = vec![1, 3, 5, 10];
        let costs = build_qd_costs(
            f,
            0.4,
            vec![vec![0.0; 4], vec![m_waiting; 4]],
            &a,
            &intervals,
        )
        .unwrap();
        SamplingModel::new(a, obs, intervals, costs).unwrap()
    }

    fn phase_model() -> SamplingModel {
        let a = TransitionMatrix::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.7, 0.3, 0.0],
            vec![0.3, 0.4, 0.3],
        ])
        .unwrap();
        let obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![
                vec![0.8, 0.2, 0.0],
                vec![0.1, 0.8, 0.1],
                vec![0.0, 0.1, 0.9],
            ],
        })
        .unwrap();
        let intervals = vec![1, 2, 4, 5];
        let costs = build_qd_costs(10.0, 0.4, vec![vec![1.0; 4]; 3], &a, &intervals).unwrap();
        SamplingModel::new(a, obs, intervals, costs).unwrap()
    }

    #[test]
    fn detection_model_passes_the_structural_checks() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let report = check_assumptions(&model, &costs, None).unwrap();
        for id in [
            AssumptionId::A1i,
            AssumptionId::A2,
            AssumptionId::A3,
            AssumptionId::A4,
            AssumptionId::A5i,
            AssumptionId::A5ii,
            AssumptionId::A6,
            AssumptionId::A7i,
            AssumptionId::A7ii,
        ] {
            assert!(
                report.verdict(id).passed(),
                "{id} should pass: {:?}",
                report.verdict(id)
            );
        }
        assert!(matches!(
            report.verdict(AssumptionId::A1ii),
            Verdict::NotApplicable { .. }
        ));
        assert!(report.applicable_all_pass());
        // Default shift constant sits exactly on the A7(i) boundary.
        match report.verdict(AssumptionId::A7i) {
            Verdict::Pass { margin } => assert_relative_eq!(*margin, 0.0, epsilon = 1e-12),
            other => panic!("unexpected verdict {other:?}"),
        }
        assert_relative_eq!(report.alpha, 17.0 / (0.4 * 0.9), epsilon = 1e-12);
        assert_relative_eq!(
            report.alpha_underline.unwrap(),
            1.0 / (1.0 - 0.9f64.powi(10)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn reversed_observation_matrix_fails_tp2_with_a_witness() {
        let a = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![0.1, 0.9]]).unwrap();
        let obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        })
        .unwrap();
        let intervals = vec![1, 2];
        let costs_spec =
            build_qd_costs(1.0, 1.0, vec![vec![0.0; 2], vec![0.0; 2]], &a, &intervals).unwrap();
        let model = SamplingModel::new(a, obs, intervals, costs_spec).unwrap();
        let costs = build_action_costs(&model);
        let report = check_assumptions(&model, &costs, None).unwrap();
        match report.verdict(AssumptionId::A3) {
            Verdict::Fail { witness, margin } => {
                assert_eq!(witness, &[1, 1, 2, 2]);
                assert_relative_eq!(*margin, -1.0, epsilon = 1e-15);
            }
            other => panic!("expected A3 failure, got {other:?}"),
        }
        assert!(!report.applicable_all_pass());
    }

    #[test]
    fn three_state_model_with_large_shift_passes_a3_a6_a7() {
        let model = phase_model();
        let costs = build_action_costs(&model);
        let report = check_assumptions(&model, &costs, Some(100.0)).unwrap();
        for id in [
            AssumptionId::A3,
            AssumptionId::A6,
            AssumptionId::A7i,
            AssumptionId::A7ii,
        ] {
            assert!(
                report.verdict(id).passed(),
                "{id} should pass: {:?}",
                report.verdict(id)
            );
        }
        // Detection costs beyond two states have no increasing form.
        assert!(matches!(
            report.verdict(AssumptionId::A1i),
            Verdict::NotApplicable { .. }
        ));
        match report.verdict(AssumptionId::A7i) {
            Verdict::Pass { margin } => {
                assert_relative_eq!(*margin, 100.0 - 10.0 / (0.4 * 0.3), epsilon = 1e-9);
            }
            other => panic!("unexpected verdict {other:?}"),
        }
    }

    #[test]
    fn myopic_policies_and_bound_verification() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 201).unwrap();

        // Free stopping is always myopically optimal.
        let free = detection_model(0.0, 2.8);
        let free_costs = build_action_costs(&free);
        let lower = myopic_lower(&free, &free_costs, &grid).unwrap();
        assert!(lower.actions().iter().all(|&a| a == 0));

        // At the target vertex the stop cost is 0 and strictly minimal.
        let lower = myopic_lower(&model, &costs, &grid).unwrap();
        assert_eq!(lower.action(grid.len() - 1), 0);
        let stop_set = myopic_stop_set(&costs, &grid);
        assert!(stop_set[grid.len() - 1]);
        assert!(!stop_set[0]);

        // The solved policy dominates the myopic one outside the solved
        // stop region, and the myopic stop set sits inside the solved one.
        let sol = value_iterate(&model, &costs, &grid, 1e-7, 10_000).unwrap();
        let solved_stops: Vec<bool> = sol.policy.actions().iter().map(|&a| a == 0).collect();
        let verdict =
            verify_policy_bounds(&sol.policy, &lower, BoundDirection::Lower, &solved_stops)
                .unwrap();
        assert!(verdict.pass, "lower bound violated: {verdict:?}");

        // Upper bound with the default (smallest admissible) shift.
        let upper = myopic_upper(&model, &costs, &grid, None).unwrap();
        let verdict = verify_policy_bounds(&sol.policy, &upper, BoundDirection::Upper, &stop_set)
            .unwrap();
        assert!(verdict.pass, "upper bound violated: {verdict:?}");

        // Both myopic policies are monotone ladders on two states.
        let (_, monotone) = extract_thresholds(&lower, &grid).unwrap();
        assert!(monotone);
        let (_, monotone) = extract_thresholds(&upper, &grid).unwrap();
        assert!(monotone);

        // The solution stops at the target vertex.
        assert!(target_vertex_stops(&sol.policy, &grid));
    }

    #[test]
    fn undersized_shift_constant_is_rejected() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 11).unwrap();
        assert!(matches!(
            myopic_upper(&model, &costs, &grid, Some(1.0)),
            Err(BoundsError::AlphaTooSmall { .. })
        ));
    }

    #[test]
    fn corrupted_policies_are_caught() {
        let model = detection_model(17.0, 2.8);
        let costs = build_action_costs(&model);
        let grid = make_grid(2, 101).unwrap();
        let lower = myopic_lower(&model, &costs, &grid).unwrap();
        let mask = vec![false; grid.len()];

        // A policy compared against itself passes trivially.
        let verdict =
            verify_policy_bounds(&lower, &lower, BoundDirection::Lower, &mask).unwrap();
        assert!(verdict.pass);
        assert_eq!(verdict.violations(), 0);

        // Lower one action below the myopic floor.
        let mut corrupted = lower.actions().to_vec();
        let idx = corrupted
            .iter()
            .position(|&a| a > 0)
            .expect("some point continues");
        corrupted[idx] -= 1;
        let bad = Policy::new(corrupted, lower.num_actions()).unwrap();
        let verdict = verify_policy_bounds(&bad, &lower, BoundDirection::Lower, &mask).unwrap();
        assert!(!verdict.pass);
        assert_eq!(verdict.order_violations, 1);

        // A myopic stop point where the "optimal" continues breaks the
        // stop-set inclusion.
        let mut no_stop = lower.actions().to_vec();
        let idx = no_stop.iter().position(|&a| a == 0).unwrap();
        no_stop[idx] = 1;
        let bad = Policy::new(no_stop, lower.num_actions()).unwrap();
        let verdict = verify_policy_bounds(&bad, &lower, BoundDirection::Lower, &mask).unwrap();
        assert!(verdict.subset_violations >= 1);
        assert!(!verdict.pass);
    }

    #[test]
    fn dominance_probe_runs_clean() {
        let report = filter_dominance_probe(60, 42);
        for part in &report.parts {
            assert_eq!(
                part.violations, 0,
                "part {} violated at stream {:?}",
                part.id, part.first_failure
            );
            assert!(part.checked > 0, "part {} never checked", part.id);
        }
        assert_eq!(report.total_violations(), 0);
        // Same seed, same tallies.
        let again = filter_dominance_probe(60, 42);
        for (a, b) in report.parts.iter().zip(&again.parts) {
            assert_eq!(a.checked, b.checked);
        }
    }

    #[test]
    fn fixed_ordered_pair_dominates_the_one_step_predictor() {
        let a = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.3, 0.2],
            vec![0.3, 0.4, 0.3],
        ];
        let a_bar = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.9, 0.1, 0.0],
            vec![0.8, 0.2, 0.0],
        ];
        assert!(transition_order_geq(&a, &a_bar, 1e-12));
        for pi in [
            vec![0.2, 0.3, 0.5],
            vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![0.05, 0.05, 0.9],
        ] {
            let hi = predict_raw(&a, &pi, 1);
            let lo = predict_raw(&a_bar, &pi, 1);
            assert!(
                mlr_compare(&hi, &lo, PROBE_TOL).unwrap().is_geq(),
                "pair failed at {pi:?}"
            );
        }
    }

    #[test]
    fn identity_dynamics_hold_with_equality() {
        let id2 = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let (hi, lo) = (vec![0.3, 0.7], vec![0.6, 0.4]);
        for y in 0..2 {
            let (t_hi, _) = posterior(&id2, &id2, &hi, y, 1).unwrap();
            let (t_lo, _) = posterior(&id2, &id2, &lo, y, 1).unwrap();
            // Both collapse to the same point mass.
            assert_eq!(t_hi, t_lo);
        }
        let s_hi = likelihoods(&id2, &id2, &hi, 1);
        assert_eq!(s_hi, hi);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let model = detection_model(17.0, 2.8);
        let other = phase_model();
        let costs = build_action_costs(&other);
        assert!(check_assumptions(&model, &costs, None).is_err());
        let grid = make_grid(3, 5).unwrap();
        assert!(myopic_lower(&model, &build_action_costs(&model), &grid).is_err());
        let p1 = Policy::new(vec![0; 5], 2).unwrap();
        let p2 = Policy::new(vec![0; 6], 2).unwrap();
        assert!(verify_policy_bounds(&p1, &p2, BoundDirection::Lower, &[false; 5]).is_err());
    }
}
