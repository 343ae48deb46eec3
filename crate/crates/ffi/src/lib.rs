//! C ABI for the `lookout` sampling-policy library.
//!
//! The surface follows the usual opaque-handle pattern: a scenario JSON
//! document becomes a [`LookoutModel`], solving it yields a
//! [`LookoutSolution`], and plain accessors copy values, actions, and
//! thresholds out of the handles. Every fallible call returns a
//! [`LookoutStatus`]; on failure a thread-local message is readable via
//! [`lookout_last_error`] until the next failing call on the same thread.
//!
//! All handles are created and released by this library
//! ([`lookout_model_free`], [`lookout_solution_free`],
//! [`lookout_string_free`]); passing handles allocated elsewhere is
//! undefined behavior. Panics never unwind across the boundary — they are
//! caught and reported as [`LookoutStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lookout::bounds::check_assumptions;
use lookout::cli::config::ScenarioConfig;
use lookout::costs::ActionCostVectors;
use lookout::models::{BeliefState, SamplingModel};
use lookout::sim::monte_carlo_evaluate;
use lookout::solver::{
    analyze_stopping_set, extract_thresholds, value_iterate, BeliefGrid, Solution, SolverError,
};

/// Result of every fallible ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookoutStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    BadEncoding = 2,
    /// The scenario JSON failed to parse or validate.
    BadScenario = 3,
    /// An argument (grid size, tolerance, buffer length, alpha, episode
    /// count) was out of range for the model.
    BadArgument = 4,
    /// Value iteration hit its sweep cap before reaching the tolerance.
    NoConvergence = 5,
    /// Simulation episodes exceeded the step cap before announcing.
    SimFailed = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

/// An opened scenario: model, cost vectors, and the config they came from.
pub struct LookoutModel {
    config: ScenarioConfig,
    model: SamplingModel,
    costs: ActionCostVectors,
    initial: BeliefState,
}

/// A solved policy on its belief grid, with two-state shape diagnostics.
pub struct LookoutSolution {
    grid: BeliefGrid,
    solution: Solution,
    /// Two-state grids only: actions nonincreasing in the target
    /// probability. `None` for three or more states.
    monotone: Option<bool>,
    /// Interval thresholds, present only when `monotone` is `Some(true)`.
    thresholds: Vec<f64>,
    /// The solved stopping set passed the midpoint-convexity scan.
    stopping_convex: bool,
}

/// Per-episode cost estimates from a Monte-Carlo run; `*_std_error`
/// fields are standard errors of the matching means.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LookoutSimSummary {
    pub episodes: u64,
    pub runaways: u64,
    pub total_mean: f64,
    pub total_std_error: f64,
    pub running_mean: f64,
    pub running_std_error: f64,
    pub stop_mean: f64,
    pub stop_std_error: f64,
    pub measurement_mean: f64,
    pub measurement_std_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember_error(message: impl std::fmt::Display) {
    let text = message.to_string();
    let stored = CString::new(text)
        .unwrap_or_else(|_| CString::new("error message contained a NUL byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = stored);
}

fn fail(status: LookoutStatus, message: impl std::fmt::Display) -> LookoutStatus {
    remember_error(message);
    status
}

/// Runs a body with a panic guard so unwinding never crosses the ABI.
fn guarded(body: impl FnOnce() -> LookoutStatus) -> LookoutStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(LookoutStatus::Panic, "internal panic caught at the ABI boundary"),
    }
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn lookout_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the most recent failure on this thread (empty when none).
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lookout_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opens a scenario from JSON text (same schema as the CLI's scenario
/// files) and returns an owned model handle through `out`.
///
/// # Safety
///
/// `json` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn lookout_model_from_json(
    json: *const c_char,
    out: *mut *mut LookoutModel,
) -> LookoutStatus {
    guarded(|| {
        if json.is_null() || out.is_null() {
            return fail(LookoutStatus::NullPointer, "json and out must be non-null");
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(text) => text,
            Err(e) => return fail(LookoutStatus::BadEncoding, format!("scenario text: {e}")),
        };
        let config = match ScenarioConfig::parse(text) {
            Ok(config) => config,
            Err(e) => return fail(LookoutStatus::BadScenario, e),
        };
        let (model, costs) = match config.build() {
            Ok(pair) => pair,
            Err(e) => return fail(LookoutStatus::BadScenario, e),
        };
        let initial = match config.initial_belief(model.num_states()) {
            Ok(initial) => initial,
            Err(e) => return fail(LookoutStatus::BadScenario, e),
        };
        let handle = Box::new(LookoutModel {
            config,
            model,
            costs,
            initial,
        });
        unsafe { *out = Box::into_raw(handle) };
        LookoutStatus::Ok
    })
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
///
/// `model` must have come from [`lookout_model_from_json`] and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lookout_model_free(model: *mut LookoutModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of chain states, or 0 for a null handle.
///
/// # Safety
///
/// `model` must be a live handle from [`lookout_model_from_json`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_model_num_states(model: *const LookoutModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.model.num_states())
}

/// Number of sampling-interval actions, or 0 for a null handle.
///
/// # Safety
///
/// `model` must be a live handle from [`lookout_model_from_json`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_model_num_actions(model: *const LookoutModel) -> usize {
    unsafe { model.as_ref() }.map_or(0, |m| m.model.num_actions())
}

/// Solves the scenario by value iteration and returns a solution handle.
///
/// `grid_points = 0` uses the scenario's grid resolution; `tol <= 0`
/// uses the scenario's tolerance.
///
/// # Safety
///
/// `model` must be a live handle and `out` writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lookout_solve(
    model: *const LookoutModel,
    grid_points: usize,
    tol: f64,
    out: *mut *mut LookoutSolution,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "model must be non-null");
        };
        if out.is_null() {
            return fail(LookoutStatus::NullPointer, "out must be non-null");
        }
        let override_points = (grid_points > 0).then_some(grid_points);
        let grid = match handle.config.grid(handle.model.num_states(), override_points) {
            Ok(grid) => grid,
            Err(e) => return fail(LookoutStatus::BadArgument, e),
        };
        let tol = if tol > 0.0 { tol } else { handle.config.solver.tol };
        let solution = match value_iterate(
            &handle.model,
            &handle.costs,
            &grid,
            tol,
            handle.config.solver.max_iter,
        ) {
            Ok(solution) => solution,
            Err(e @ SolverError::Convergence { .. }) => {
                return fail(LookoutStatus::NoConvergence, e)
            }
            Err(e) => return fail(LookoutStatus::BadArgument, e),
        };
        let (thresholds, monotone) = if handle.model.num_states() == 2 {
            let (set, monotone) =
                extract_thresholds(&solution.policy, &grid).expect("two-state grid");
            (set.map(|s| s.thresholds).unwrap_or_default(), Some(monotone))
        } else {
            (Vec::new(), None)
        };
        let stopping_convex = analyze_stopping_set(&solution.policy, &grid).convex;
        let boxed = Box::new(LookoutSolution {
            grid,
            solution,
            monotone,
            thresholds,
            stopping_convex,
        });
        unsafe { *out = Box::into_raw(boxed) };
        LookoutStatus::Ok
    })
}

/// Releases a solution handle. Null is a no-op.
///
/// # Safety
///
/// `solution` must have come from [`lookout_solve`] and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_free(solution: *mut LookoutSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Number of grid points covered by the solution, or 0 for null.
///
/// # Safety
///
/// `solution` must be a live handle from [`lookout_solve`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_len(solution: *const LookoutSolution) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.grid.len())
}

/// Value-iteration sweeps performed, or 0 for null.
///
/// # Safety
///
/// `solution` must be a live handle from [`lookout_solve`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_iterations(solution: *const LookoutSolution) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.solution.iterations)
}

/// Final sup-norm gap between the last two sweeps, or NaN for null.
///
/// # Safety
///
/// `solution` must be a live handle from [`lookout_solve`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_gap(solution: *const LookoutSolution) -> f64 {
    unsafe { solution.as_ref() }.map_or(f64::NAN, |s| s.solution.gap)
}

/// Whether the stopping set passed the midpoint-convexity scan; false
/// for null.
///
/// # Safety
///
/// `solution` must be a live handle from [`lookout_solve`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_stopping_convex(
    solution: *const LookoutSolution,
) -> bool {
    unsafe { solution.as_ref() }.is_some_and(|s| s.stopping_convex)
}

/// Reports whether a two-state policy is monotone (actions nonincreasing
/// in the target-state probability).
///
/// # Safety
///
/// `solution` must be a live handle and `out` writable storage for one
/// `bool`.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_monotone(
    solution: *const LookoutSolution,
    out: *mut bool,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "solution must be non-null");
        };
        if out.is_null() {
            return fail(LookoutStatus::NullPointer, "out must be non-null");
        }
        match handle.monotone {
            Some(monotone) => {
                unsafe { *out = monotone };
                LookoutStatus::Ok
            }
            None => fail(
                LookoutStatus::BadArgument,
                "monotonicity is defined for two-state grids only",
            ),
        }
    })
}

/// Number of interval thresholds available (0 unless the policy is a
/// monotone two-state ladder).
///
/// # Safety
///
/// `solution` must be a live handle from [`lookout_solve`] or null.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_num_thresholds(
    solution: *const LookoutSolution,
) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.thresholds.len())
}

/// Copies the descending interval thresholds into `buffer`.
///
/// # Safety
///
/// `solution` must be a live handle and `buffer` must point to at least
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_copy_thresholds(
    solution: *const LookoutSolution,
    buffer: *mut f64,
    len: usize,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "solution must be non-null");
        };
        if buffer.is_null() {
            return fail(LookoutStatus::NullPointer, "buffer must be non-null");
        }
        if len != handle.thresholds.len() {
            return fail(
                LookoutStatus::BadArgument,
                format!("buffer holds {len} entries, expected {}", handle.thresholds.len()),
            );
        }
        unsafe { std::ptr::copy_nonoverlapping(handle.thresholds.as_ptr(), buffer, len) };
        LookoutStatus::Ok
    })
}

/// Copies the optimal value at every grid point into `buffer`.
///
/// # Safety
///
/// `solution` must be a live handle and `buffer` must point to at least
/// `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_copy_values(
    solution: *const LookoutSolution,
    buffer: *mut f64,
    len: usize,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "solution must be non-null");
        };
        if buffer.is_null() {
            return fail(LookoutStatus::NullPointer, "buffer must be non-null");
        }
        let values = handle.solution.values.values();
        if len != values.len() {
            return fail(
                LookoutStatus::BadArgument,
                format!("buffer holds {len} entries, expected {}", values.len()),
            );
        }
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, len) };
        LookoutStatus::Ok
    })
}

/// Copies the optimal action at every grid point into `buffer`
/// (0 = stop/announce, `u >= 1` = wait the u-th sampling interval).
///
/// # Safety
///
/// `solution` must be a live handle and `buffer` must point to at least
/// `len` writable `uint32_t`s.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_copy_actions(
    solution: *const LookoutSolution,
    buffer: *mut u32,
    len: usize,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "solution must be non-null");
        };
        if buffer.is_null() {
            return fail(LookoutStatus::NullPointer, "buffer must be non-null");
        }
        let actions = handle.solution.policy.actions();
        if len != actions.len() {
            return fail(
                LookoutStatus::BadArgument,
                format!("buffer holds {len} entries, expected {}", actions.len()),
            );
        }
        for (slot, &action) in (0..len).zip(actions) {
            unsafe { *buffer.add(slot) = action as u32 };
        }
        LookoutStatus::Ok
    })
}

/// # Safety
///
/// `probs` must point to `len` readable doubles.
unsafe fn belief_from_raw(
    probs: *const f64,
    len: usize,
    states: usize,
) -> Result<BeliefState, String> {
    if len != states {
        return Err(format!("belief has {len} entries, the model has {states} states"));
    }
    let slice = unsafe { std::slice::from_raw_parts(probs, len) };
    BeliefState::new(slice.to_vec()).map_err(|e| e.to_string())
}

/// Evaluates the solved value function at an arbitrary belief
/// (interpolated for two states, nearest grid point otherwise).
///
/// # Safety
///
/// `solution` must be a live handle, `belief` must point to `len`
/// readable doubles, and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_value_at(
    solution: *const LookoutSolution,
    belief: *const f64,
    len: usize,
    out: *mut f64,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "solution must be non-null");
        };
        if belief.is_null() || out.is_null() {
            return fail(LookoutStatus::NullPointer, "belief and out must be non-null");
        }
        match unsafe { belief_from_raw(belief, len, handle.grid.dimension()) } {
            Ok(point) => {
                unsafe { *out = handle.solution.values.value_at(&handle.grid, &point) };
                LookoutStatus::Ok
            }
            Err(e) => fail(LookoutStatus::BadArgument, e),
        }
    })
}

/// Looks up the policy action at an arbitrary belief via its nearest
/// grid point.
///
/// # Safety
///
/// `solution` must be a live handle, `belief` must point to `len`
/// readable doubles, and `out` to one writable `uint32_t`.
#[no_mangle]
pub unsafe extern "C" fn lookout_solution_action_at(
    solution: *const LookoutSolution,
    belief: *const f64,
    len: usize,
    out: *mut u32,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { solution.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "solution must be non-null");
        };
        if belief.is_null() || out.is_null() {
            return fail(LookoutStatus::NullPointer, "belief and out must be non-null");
        }
        match unsafe { belief_from_raw(belief, len, handle.grid.dimension()) } {
            Ok(point) => {
                let idx = handle.grid.nearest_index(point.probs());
                unsafe { *out = handle.solution.policy.action(idx) as u32 };
                LookoutStatus::Ok
            }
            Err(e) => fail(LookoutStatus::BadArgument, e),
        }
    })
}

/// Runs seeded Monte-Carlo episodes of the solved policy from the
/// scenario's initial belief and fills `out` with cost estimates.
/// Identical seeds give bitwise-identical summaries.
///
/// # Safety
///
/// `model` and `solution` must be live handles (the solution must come
/// from the same model) and `out` must point to one writable summary.
#[no_mangle]
pub unsafe extern "C" fn lookout_simulate(
    model: *const LookoutModel,
    solution: *const LookoutSolution,
    episodes: u64,
    seed: u64,
    out: *mut LookoutSimSummary,
) -> LookoutStatus {
    guarded(|| {
        let (Some(model_handle), Some(solution_handle)) =
            (unsafe { model.as_ref() }, unsafe { solution.as_ref() })
        else {
            return fail(LookoutStatus::NullPointer, "model and solution must be non-null");
        };
        if out.is_null() {
            return fail(LookoutStatus::NullPointer, "out must be non-null");
        }
        if solution_handle.grid.dimension() != model_handle.model.num_states() {
            return fail(
                LookoutStatus::BadArgument,
                "solution was computed for a different state count",
            );
        }
        match monte_carlo_evaluate(
            &model_handle.model,
            &solution_handle.solution.policy,
            &solution_handle.grid,
            &model_handle.initial,
            episodes,
            seed,
        ) {
            Ok(summary) => {
                let flat = LookoutSimSummary {
                    episodes: summary.episodes,
                    runaways: summary.runaways,
                    total_mean: summary.total.mean,
                    total_std_error: summary.total.std_error,
                    running_mean: summary.running.mean,
                    running_std_error: summary.running.std_error,
                    stop_mean: summary.stop.mean,
                    stop_std_error: summary.stop.std_error,
                    measurement_mean: summary.measurement.mean,
                    measurement_std_error: summary.measurement.std_error,
                };
                unsafe { *out = flat };
                LookoutStatus::Ok
            }
            Err(e @ lookout::sim::SimError::InvalidParameter(_)) => {
                fail(LookoutStatus::BadArgument, e)
            }
            Err(e) => fail(LookoutStatus::SimFailed, e),
        }
    })
}

/// Scans the structural assumptions for the model and returns the report
/// as a JSON document (owned string; release with
/// [`lookout_string_free`]). Pass `alpha = NaN` to use the scenario's
/// shift constant or its canonical default.
///
/// # Safety
///
/// `model` must be a live handle and `out_json` writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lookout_check_json(
    model: *const LookoutModel,
    alpha: f64,
    out_json: *mut *mut c_char,
) -> LookoutStatus {
    guarded(|| {
        let Some(handle) = (unsafe { model.as_ref() }) else {
            return fail(LookoutStatus::NullPointer, "model must be non-null");
        };
        if out_json.is_null() {
            return fail(LookoutStatus::NullPointer, "out_json must be non-null");
        }
        let alpha = if alpha.is_nan() {
            handle.config.alpha
        } else {
            Some(alpha)
        };
        let report = match check_assumptions(&handle.model, &handle.costs, alpha) {
            Ok(report) => report,
            Err(e) => return fail(LookoutStatus::BadArgument, e),
        };
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        let owned = CString::new(text).expect("JSON has no NUL bytes");
        unsafe { *out_json = owned.into_raw() };
        LookoutStatus::Ok
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
///
/// `text` must have come from [`lookout_check_json`] and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lookout_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}
