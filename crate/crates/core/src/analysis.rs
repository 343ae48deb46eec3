//! Model comparison and sensitivity analysis.
//!
//! Two questions about a pair of models are answered here. First, when one
//! model's transition matrix dominates the other's and its observation
//! channel is a garbling of the other's, the optimal total cost is ordered
//! pointwise; [`compare_optimal_costs`] verifies both premises and the
//! conclusion on a shared grid. Second, when a policy optimized for one
//! model runs against another, the cost error is bounded by a computable
//! constant times a model-distance norm; [`sensitivity_bound`] assembles
//! that bound from a stopping-observation threshold `y*`, an implicit
//! discount `ρ`, and a total-variation norm, and [`mismatch_norm_kl`]
//! provides the alternative divergence-based norm with its Gaussian
//! closed forms.

use serde::Serialize;
use thiserror::Error;

use crate::costs::{build_action_costs, ActionCostVectors, CostError, CostSpec};
use crate::models::{
    blackwell_geq, filter_update, predict, transition_order_geq, BeliefState, ModelError,
    ObservationKind, SamplingModel, DEFAULT_ORDER_TOL,
};
use crate::solver::{value_iterate, BeliefGrid, SolverError, DEFAULT_MAX_ITER};

/// Feasibility tolerance for the observation-garbling check.
const BLACKWELL_TOL: f64 = 1e-9;

/// Errors raised by the analysis operations.
#[derive(Debug, Error)]
pub enum AnalysisError {
    /// A caller-supplied argument violates the operation's contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Every observation keeps the filter away from the stopping region,
    /// so the sensitivity recursion never contracts.
    #[error("sensitivity bound is unbounded: continue mass {rho} is not below 1")]
    UnboundedSensitivity { rho: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

// ------------------------------------------------------------------
// Optimal-cost dominance
// ------------------------------------------------------------------

/// Outcome of comparing the optimal costs of two models.
#[derive(Debug, Clone, Serialize)]
pub struct DominanceVerdict {
    /// First model's transition matrix dominates the second's.
    pub transition_ordered: bool,
    /// First model's observation channel is a garbling of the second's.
    pub observation_ordered: bool,
    /// Both premises hold, so the value ordering is implied.
    pub implied: bool,
    /// Optimal values of the first model on the grid.
    pub values_first: Vec<f64>,
    /// Optimal values of the second model on the grid.
    pub values_second: Vec<f64>,
    /// Per grid point: first value ≥ second value − tol.
    pub pointwise_ok: Vec<bool>,
    pub violations: usize,
    /// Premises hold and no pointwise violation.
    pub pass: bool,
}

/// Checks that a dominating-transition, garbled-observation model incurs a
/// pointwise larger optimal cost.
///
/// The first model is the one expected to cost more: its transition matrix
/// should dominate the second's column-ratio-wise, and its observation
/// matrix should factor through the second's (`B₁ = B₂·R` for a stochastic
/// `R`). Both models are solved on `grid` (each with its own costs) to a
/// gap two orders tighter than `tol`, then compared pointwise. When a
/// premise fails the verdict reports `implied = false` but still carries
/// both value tables.
///
/// # Errors
///
/// [`AnalysisError::InvalidParameter`] when the models have different
/// state counts or don't match the grid; solver errors propagate.
pub fn compare_optimal_costs(
    first: &SamplingModel,
    second: &SamplingModel,
    grid: &BeliefGrid,
    tol: f64,
) -> Result<DominanceVerdict> {
    if first.num_states() != second.num_states() {
        return Err(AnalysisError::InvalidParameter(format!(
            "state counts differ: {} vs {}",
            first.num_states(),
            second.num_states()
        )));
    }
    if grid.dimension() != first.num_states() {
        return Err(AnalysisError::InvalidParameter(format!(
            "grid dimension {} does not match the {}-state models",
            grid.dimension(),
            first.num_states()
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(AnalysisError::InvalidParameter(format!(
            "comparison tolerance must be positive and finite, got {tol}"
        )));
    }
    let transition_ordered = transition_order_geq(
        first.transition.rows(),
        second.transition.rows(),
        DEFAULT_ORDER_TOL,
    );
    let observation_ordered = blackwell_geq(
        first.obs.matrix(),
        second.obs.matrix(),
        BLACKWELL_TOL,
    )?
    .dominated;
    let implied = transition_ordered && observation_ordered;

    let inner_tol = (tol * 1e-2).min(1e-6);
    let sol_first = value_iterate(
        first,
        &build_action_costs(first),
        grid,
        inner_tol,
        DEFAULT_MAX_ITER,
    )?;
    let sol_second = value_iterate(
        second,
        &build_action_costs(second),
        grid,
        inner_tol,
        DEFAULT_MAX_ITER,
    )?;
    let values_first = sol_first.values.values().to_vec();
    let values_second = sol_second.values.values().to_vec();
    let pointwise_ok: Vec<bool> = values_first
        .iter()
        .zip(&values_second)
        .map(|(a, b)| *a >= *b - tol)
        .collect();
    let violations = pointwise_ok.iter().filter(|ok| !**ok).count();
    Ok(DominanceVerdict {
        transition_ordered,
        observation_ordered,
        implied,
        values_first,
        values_second,
        pointwise_ok,
        violations,
        pass: implied && violations == 0,
    })
}

// ------------------------------------------------------------------
// Sensitivity bound
// ------------------------------------------------------------------

/// Ingredients and value of the policy-mismatch cost bound.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    /// Smallest observation index (0-based) from which, after any sampling
    /// interval from the last state, continuing is myopically no worse
    /// than stopping — under both models.
    pub y_star: usize,
    /// Largest probability, over sampling intervals from the last state of
    /// the first model, of drawing an observation at or above `y_star`.
    /// Acts as an implicit discount and must stay below 1.
    pub rho: f64,
    /// Total-variation distance between the models' joint
    /// interval-transition/observation kernels, maximized over starting
    /// states and intervals (see [`mismatch_norm_tv`]).
    pub norm: f64,
    /// `max_i C(e_i, stop) · norm / (1 − rho)`: a uniform bound on the
    /// cost error of running the first model's optimal policy when the
    /// second model is the truth.
    pub bound: f64,
    /// The contraction premise `rho < 1` held (always true in a returned
    /// report; failures raise [`AnalysisError::UnboundedSensitivity`]).
    pub premise_holds: bool,
}

/// Shapes shared by a model pair, checked before any pairwise norm.
fn check_pair_shapes(first: &SamplingModel, second: &SamplingModel) -> Result<()> {
    if first.num_states() != second.num_states()
        || first.obs.num_symbols() != second.obs.num_symbols()
        || first.intervals != second.intervals
    {
        return Err(AnalysisError::InvalidParameter(format!(
            "models must share states, symbols, and intervals: \
             ({} states, {} symbols, {:?}) vs ({}, {}, {:?})",
            first.num_states(),
            first.obs.num_symbols(),
            first.intervals,
            second.num_states(),
            second.obs.num_symbols(),
            second.intervals
        )));
    }
    Ok(())
}

/// Total-variation model distance: the largest, over starting states `i`
/// and sampling intervals `u`, of
/// `Σ_{j,y} |B(j,y)·A^{D_u}(i,j) − B̄(j,y)·Ā^{D_u}(i,j)|`.
///
/// # Errors
///
/// [`AnalysisError::InvalidParameter`] when the models' shapes differ.
pub fn mismatch_norm_tv(first: &SamplingModel, second: &SamplingModel) -> Result<f64> {
    check_pair_shapes(first, second)?;
    let x = first.num_states();
    let y_count = first.obs.num_symbols();
    let pows_first = first.transition.powers(first.max_interval() as usize);
    let pows_second = second.transition.powers(second.max_interval() as usize);
    let mut norm = 0.0f64;
    for u in 1..=first.num_actions() {
        let d = first.intervals[u - 1] as usize;
        let p1 = pows_first.get(d);
        let p2 = pows_second.get(d);
        for i in 0..x {
            let total: f64 = (0..x)
                .map(|j| {
                    (0..y_count)
                        .map(|yy| {
                            (first.obs.prob(j, yy) * p1[i][j]
                                - second.obs.prob(j, yy) * p2[i][j])
                                .abs()
                        })
                        .sum::<f64>()
                })
                .sum();
            norm = norm.max(total);
        }
    }
    Ok(norm)
}

/// Bounds the extra cost of running the first model's optimal policy when
/// the second model is the truth, with both evaluated under the shared
/// cost specification (per-model cost vectors are rebuilt from `costs`
/// with each model's own transition matrix).
///
/// # Errors
///
/// [`AnalysisError::UnboundedSensitivity`] when no observation qualifies
/// for `y_star` or the continue mass `rho` reaches 1;
/// [`AnalysisError::InvalidParameter`] on shape mismatches.
pub fn sensitivity_bound(
    first: &SamplingModel,
    second: &SamplingModel,
    costs: &CostSpec,
) -> Result<SensitivityReport> {
    check_pair_shapes(first, second)?;
    let rebuilt = |m: &SamplingModel| -> Result<(SamplingModel, ActionCostVectors)> {
        let model = SamplingModel::new(
            m.transition.clone(),
            m.obs.clone(),
            m.intervals.clone(),
            costs.clone(),
        )?;
        let vectors = build_action_costs(&model);
        Ok((model, vectors))
    };
    let (m1, c1) = rebuilt(first)?;
    let (m2, c2) = rebuilt(second)?;
    let x = m1.num_states();
    let l = m1.num_actions();
    let y_count = m1.obs.num_symbols();
    let last = BeliefState::unit(x - 1, x);

    // From the posterior reached by observing `y` after any interval out
    // of the last state, is continuing myopically no worse than stopping?
    let qualifies = |model: &SamplingModel, vectors: &ActionCostVectors, y: usize| -> Result<bool> {
        for u in 1..=l {
            let post = match filter_update(&last, y, u, model) {
                Ok((post, _)) => post,
                Err(ModelError::ZeroLikelihood { .. }) => continue,
                Err(e) => return Err(e.into()),
            };
            let stop = vectors.evaluate(0, post.probs());
            for other in 1..=l {
                if vectors.evaluate(other, post.probs()) - stop > 0.0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    let mut y_star = None;
    for y in 0..y_count {
        if qualifies(&m1, &c1, y)? && qualifies(&m2, &c2, y)? {
            y_star = Some(y);
            break;
        }
    }
    let Some(y_star) = y_star else {
        return Err(AnalysisError::UnboundedSensitivity { rho: 1.0 });
    };

    let mut rho = 0.0f64;
    for u in 1..=l {
        let pred = predict(&last, &m1.transition, m1.intervals[u - 1])?;
        let tail: f64 = (y_star..y_count)
            .map(|yy| {
                (0..x)
                    .map(|i| pred.probs()[i] * m1.obs.prob(i, yy))
                    .sum::<f64>()
            })
            .sum();
        rho = rho.max(tail);
    }
    if rho >= 1.0 {
        return Err(AnalysisError::UnboundedSensitivity { rho });
    }

    let norm = mismatch_norm_tv(&m1, &m2)?;
    let max_stop = c1
        .vector(0)
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v));
    Ok(SensitivityReport {
        y_star,
        rho,
        norm,
        bound: max_stop * norm / (1.0 - rho),
        premise_holds: rho < 1.0,
    })
}

// ------------------------------------------------------------------
// Divergence-based norm
// ------------------------------------------------------------------

/// Gaussian closed forms for the divergence norm, per the printed
/// standard-deviation-ratio expression and the standard
/// variance-ratio divergence, reported side by side.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussianKlForms {
    /// `max_{i,u} Σ_j A^{D_u}(i,j)·(σ_j/σ̄_j − ln(σ_j/σ̄_j) − 1)^{1/2}`.
    pub printed: f64,
    /// Same weighting with the per-state factor `√(2·KL)` for the exact
    /// Gaussian divergence `ln(σ̄/σ) + (σ² + (μ−μ̄)²)/(2σ̄²) − 1/2`.
    pub standard: f64,
}

/// Divergence-based model distance.
#[derive(Debug, Clone, Serialize)]
pub struct KlNormReport {
    /// `√2 · max_{i,u} Σ_j A^{D_u}(i,j)·√(D(B_j‖B̄_j))` over the
    /// discretized observation rows; infinite on support mismatch.
    pub norm: f64,
    /// The divergence was infinite somewhere the transition weight is
    /// positive (the second channel misses support the first one has).
    pub infinite: bool,
    /// Closed forms when both channels are Gaussian families.
    pub gaussian: Option<GaussianKlForms>,
}

/// Divergence-based alternative to [`mismatch_norm_tv`] for model pairs
/// sharing a transition matrix. Support mismatches yield an infinite,
/// flagged norm rather than an error. For Gaussian channels the
/// closed-form variants are reported alongside.
///
/// # Errors
///
/// [`AnalysisError::InvalidParameter`] when the transition matrices or
/// shapes differ.
pub fn mismatch_norm_kl(first: &SamplingModel, second: &SamplingModel) -> Result<KlNormReport> {
    check_pair_shapes(first, second)?;
    let x = first.num_states();
    let same_transition = first
        .transition
        .rows()
        .iter()
        .zip(second.transition.rows())
        .all(|(r1, r2)| r1.iter().zip(r2).all(|(a, b)| (a - b).abs() <= 1e-12));
    if !same_transition {
        return Err(AnalysisError::InvalidParameter(
            "the divergence norm is defined for models sharing a transition matrix".into(),
        ));
    }

    // Per-state divergence of the discretized observation rows.
    let divergences: Vec<f64> = (0..x)
        .map(|j| {
            let mut total = 0.0f64;
            for y in 0..first.obs.num_symbols() {
                let p = first.obs.prob(j, y);
                let q = second.obs.prob(j, y);
                if p > 0.0 {
                    if q <= 0.0 {
                        return f64::INFINITY;
                    }
                    total += p * (p / q).ln();
                }
            }
            total.max(0.0)
        })
        .collect();

    let weight_max = |per_state: &[f64]| -> f64 {
        let pows = first.transition.powers(first.max_interval() as usize);
        let mut result = 0.0f64;
        for u in 1..=first.num_actions() {
            let p = pows.get(first.intervals[u - 1] as usize);
            for p_row in p {
                let mut row = 0.0;
                for (&weight, &value) in p_row.iter().zip(per_state) {
                    if weight > 0.0 {
                        row += weight * value;
                    }
                }
                result = result.max(row);
            }
        }
        result
    };

    let roots: Vec<f64> = divergences.iter().map(|d| d.sqrt()).collect();
    let norm = std::f64::consts::SQRT_2 * weight_max(&roots);

    let gaussian = match (first.obs.kind(), second.obs.kind()) {
        (
            ObservationKind::Gaussian {
                means: mu1,
                variances: v1,
                ..
            },
            ObservationKind::Gaussian {
                means: mu2,
                variances: v2,
                ..
            },
        ) => {
            let printed: Vec<f64> = v1
                .iter()
                .zip(v2)
                .map(|(a, b)| {
                    let r = (a / b).sqrt();
                    (r - r.ln() - 1.0).max(0.0).sqrt()
                })
                .collect();
            let standard: Vec<f64> = v1
                .iter()
                .zip(v2)
                .zip(mu1.iter().zip(mu2))
                .map(|((a, b), (m1, m2))| {
                    let kl = 0.5 * (b / a).ln() + (a + (m1 - m2).powi(2)) / (2.0 * b) - 0.5;
                    (2.0 * kl).max(0.0).sqrt()
                })
                .collect();
            Some(GaussianKlForms {
                printed: weight_max(&printed),
                standard: weight_max(&standard),
            })
        }
        _ => None,
    };

    Ok(KlNormReport {
        norm,
        infinite: norm.is_infinite(),
        gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::build_qd_costs;
    use crate::models::{ObservationModel, TransitionMatrix};
    use crate::solver::{evaluate_policy, make_grid};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn erasure_obs() -> ObservationModel {
        ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.3, 0.7, 0.0], vec![0.0, 0.2, 0.8]],
        })
        .unwrap()
    }

    fn geometric_model(stay: f64, obs: ObservationModel) -> SamplingModel {
        let a = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![1.0 - stay, stay]]).unwrap();
        let intervals = vec![1, 3, 5, 10];
        let costs = build_qd_costs(
            17.0,
            0.4,
            vec![vec![0.0; 4], vec![2.8; 4]],
            &a,
            &intervals,
        )
        .unwrap();
        SamplingModel::new(a, obs, intervals, costs).unwrap()
    }

    #[test]
    fn identical_models_compare_equal() {
        let model = geometric_model(0.9, erasure_obs());
        let grid = make_grid(2, 101).unwrap();
        let verdict = compare_optimal_costs(&model, &model, &grid, 1e-8).unwrap();
        assert!(verdict.transition_ordered);
        assert!(verdict.observation_ordered);
        assert!(verdict.pass);
        assert_eq!(verdict.violations, 0);
        for (a, b) in verdict.values_first.iter().zip(&verdict.values_second) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn slower_chain_costs_more() {
        let slow = geometric_model(0.9, erasure_obs());
        let fast = geometric_model(0.8, erasure_obs());
        let grid = make_grid(2, 101).unwrap();
        let verdict = compare_optimal_costs(&slow, &fast, &grid, 1e-8).unwrap();
        assert!(verdict.transition_ordered);
        assert!(verdict.observation_ordered);
        assert!(verdict.pass, "violations: {}", verdict.violations);
        // Strictly larger somewhere in the interior.
        let strict = verdict
            .values_first
            .iter()
            .zip(&verdict.values_second)
            .any(|(a, b)| a > b);
        assert!(strict);

        // Swapping the arguments breaks the transition premise; values are
        // still reported.
        let reversed = compare_optimal_costs(&fast, &slow, &grid, 1e-8).unwrap();
        assert!(!reversed.transition_ordered);
        assert!(!reversed.implied);
        assert!(!reversed.pass);
        assert_eq!(reversed.values_first.len(), grid.len());
    }

    #[test]
    fn noisy_observations_cost_more_than_perfect() {
        let noisy = geometric_model(0.9, erasure_obs());
        let perfect = geometric_model(
            0.9,
            ObservationModel::build(ObservationKind::Discrete {
                matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            })
            .unwrap(),
        );
        let grid = make_grid(2, 101).unwrap();
        let verdict = compare_optimal_costs(&noisy, &perfect, &grid, 1e-8).unwrap();
        assert!(verdict.observation_ordered, "any channel garbles identity");
        assert!(verdict.pass, "violations: {}", verdict.violations);
    }

    #[test]
    fn sensitivity_of_identical_models_is_zero() {
        let model = geometric_model(0.9, erasure_obs());
        let report = sensitivity_bound(&model, &model, &model.costs.clone()).unwrap();
        assert_eq!(report.norm, 0.0);
        assert_eq!(report.bound, 0.0);
        assert!(report.rho < 1.0);
        assert!(report.premise_holds);
    }

    #[test]
    fn sensitivity_bound_covers_the_policy_mismatch_error() {
        let model = geometric_model(0.9, erasure_obs());
        let perturbed_obs = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.3, 0.69, 0.01], vec![0.0, 0.21, 0.79]],
        })
        .unwrap();
        let other = geometric_model(0.9, perturbed_obs);
        let spec = model.costs.clone();
        let report = sensitivity_bound(&model, &other, &spec).unwrap();
        assert!(report.norm > 0.0);
        assert!(report.bound.is_finite());

        // Exact mismatch error: optimize under the first model, evaluate
        // that policy under the second, compare pointwise.
        let grid = make_grid(2, 201).unwrap();
        let c1 = build_action_costs(&model);
        let c2 = build_action_costs(&other);
        let sol = value_iterate(&model, &c1, &grid, 1e-8, DEFAULT_MAX_ITER).unwrap();
        let replayed = evaluate_policy(&other, &c2, &grid, &sol.policy, 1e-8, DEFAULT_MAX_ITER)
            .unwrap();
        let worst = sol
            .values
            .values()
            .iter()
            .zip(replayed.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            worst <= report.bound,
            "exact error {worst} exceeds bound {}",
            report.bound
        );
    }

    #[test]
    fn single_row_perturbation_is_total_variation_bounded() {
        let model = geometric_model(0.9, erasure_obs());
        let eps = 0.05;
        let perturbed = ObservationModel::build(ObservationKind::Discrete {
            matrix: vec![vec![0.3, 0.7, 0.0], vec![0.0, 0.2 + eps, 0.8 - eps]],
        })
        .unwrap();
        let other = geometric_model(0.9, perturbed);
        let norm = mismatch_norm_tv(&model, &other).unwrap();
        assert!(norm <= 2.0 * eps + 1e-12, "norm {norm}");
        assert!(norm > 0.0);
    }

    #[test]
    fn free_stopping_never_reaches_the_continue_region() {
        let model = geometric_model(0.9, erasure_obs());
        let free = build_qd_costs(
            0.0,
            0.4,
            vec![vec![0.0; 4], vec![2.8; 4]],
            &model.transition,
            &model.intervals,
        )
        .unwrap();
        assert!(matches!(
            sensitivity_bound(&model, &model, &free),
            Err(AnalysisError::UnboundedSensitivity { .. })
        ));
    }

    #[test]
    fn continue_mass_is_largest_from_the_last_state() {
        let model = geometric_model(0.9, erasure_obs());
        let other = geometric_model(
            0.9,
            ObservationModel::build(ObservationKind::Discrete {
                matrix: vec![vec![0.3, 0.69, 0.01], vec![0.0, 0.21, 0.79]],
            })
            .unwrap(),
        );
        let report = sensitivity_bound(&model, &other, &model.costs.clone()).unwrap();
        let grid = make_grid(2, 41).unwrap();
        for pt in grid.points() {
            for u in 1..=model.num_actions() {
                let pred = predict(pt, &model.transition, model.intervals[u - 1]).unwrap();
                let tail: f64 = (report.y_star..model.obs.num_symbols())
                    .map(|yy| {
                        (0..2)
                            .map(|i| pred.probs()[i] * model.obs.prob(i, yy))
                            .sum::<f64>()
                    })
                    .sum();
                assert!(
                    tail <= report.rho + 1e-12,
                    "tail {tail} at {:?} exceeds rho {}",
                    pt.probs(),
                    report.rho
                );
            }
        }
    }

    #[test]
    fn divergence_norm_dominates_total_variation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let stay = rng.random_range(0.5..0.99);
            let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
                let t: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / t).collect()
            };
            let b1 = vec![row(&mut rng), row(&mut rng)];
            let b2 = vec![row(&mut rng), row(&mut rng)];
            let m1 = geometric_model(
                stay,
                ObservationModel::build(ObservationKind::Discrete { matrix: b1 }).unwrap(),
            );
            let m2 = geometric_model(
                stay,
                ObservationModel::build(ObservationKind::Discrete { matrix: b2 }).unwrap(),
            );
            let tv = mismatch_norm_tv(&m1, &m2).unwrap();
            let kl = mismatch_norm_kl(&m1, &m2).unwrap();
            assert!(!kl.infinite);
            assert!(
                kl.norm >= tv - 1e-12,
                "divergence norm {} below total variation {tv}",
                kl.norm
            );
        }
    }

    #[test]
    fn gaussian_closed_forms_match_hand_arithmetic() {
        let gaussian = |variances: Vec<f64>| {
            ObservationModel::build(ObservationKind::Gaussian {
                means: vec![1.0, 2.0],
                variances,
                nodes: 101,
                span_stdevs: 5.0,
            })
            .unwrap()
        };
        let m1 = geometric_model(0.9, gaussian(vec![1.0, 1.0]));
        let m2 = geometric_model(0.9, gaussian(vec![1.21, 1.21]));
        let report = mismatch_norm_kl(&m1, &m2).unwrap();
        let forms = report.gaussian.expect("both channels Gaussian");
        let r: f64 = 1.0 / 1.1;
        assert_relative_eq!(forms.printed, (r - r.ln() - 1.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(
            forms.standard,
            (r * r - (r * r).ln() - 1.0).sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(forms.printed, 0.0663409, epsilon = 1e-6);
        assert!(report.norm.is_finite());
        assert!(!report.infinite);

        let same = mismatch_norm_kl(&m1, &m1).unwrap();
        assert_eq!(same.norm, 0.0);
        let forms = same.gaussian.unwrap();
        assert_eq!(forms.printed, 0.0);
        assert_eq!(forms.standard, 0.0);
    }

    #[test]
    fn support_mismatch_is_flagged_infinite() {
        let m1 = geometric_model(
            0.9,
            ObservationModel::build(ObservationKind::Discrete {
                matrix: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            })
            .unwrap(),
        );
        let m2 = geometric_model(
            0.9,
            ObservationModel::build(ObservationKind::Discrete {
                matrix: vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            })
            .unwrap(),
        );
        let report = mismatch_norm_kl(&m1, &m2).unwrap();
        assert!(report.infinite);
        assert!(report.norm.is_infinite());
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let m1 = geometric_model(0.9, erasure_obs());
        let m2 = geometric_model(0.8, erasure_obs());
        // Different transition matrices: divergence norm refuses.
        assert!(matches!(
            mismatch_norm_kl(&m1, &m2),
            Err(AnalysisError::InvalidParameter(_))
        ));
        // Different symbol counts: every pairwise operation refuses.
        let two_symbol = geometric_model(
            0.9,
            ObservationModel::build(ObservationKind::Discrete {
                matrix: vec![vec![0.7, 0.3], vec![0.2, 0.8]],
            })
            .unwrap(),
        );
        assert!(mismatch_norm_tv(&m1, &two_symbol).is_err());
        assert!(sensitivity_bound(&m1, &two_symbol, &m1.costs.clone()).is_err());
        let grid = make_grid(3, 5).unwrap();
        assert!(compare_optimal_costs(&m1, &m1, &grid, 1e-8).is_err());
    }
}
