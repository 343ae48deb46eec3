//! Garbling test for observation channels: `B̄` is a noisier version of `B`
//! exactly when `B̄ = B·R` for some row-stochastic kernel `R` (post-
//! processing `B`'s output through `R` reproduces `B̄`'s statistics).
//!
//! Feasibility is decided exactly with a small dense phase-1 simplex over
//! the kernel entries — desk-scale channels give at most a few hundred
//! constraints, so no external LP solver is warranted.

use super::{ModelError, Result};

/// Numerical floor below which a tableau coefficient is treated as zero.
const PIVOT_EPS: f64 = 1e-11;

/// Outcome of the garbling test.
#[derive(Debug, Clone)]
pub struct BlackwellResult {
    /// True when a row-stochastic `R` with `B̄ = B·R` exists within `tol`.
    pub dominated: bool,
    /// The certificate kernel, present only when `dominated`.
    pub kernel: Option<Vec<Vec<f64>>>,
    /// `max(‖B̄ − B·R‖∞, ‖R𝟙 − 𝟙‖∞)` for the extracted kernel
    /// (0 when no kernel was found).
    pub residual: f64,
}

/// Tests whether `b_bar` is a garbling of `b`, i.e. whether a row-stochastic
/// kernel `R` with `b_bar = b·R` exists. Infeasibility is a `false` verdict,
/// not an error; `tol` bounds the allowed phase-1 infeasibility mass.
pub fn blackwell_geq(b_bar: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> Result<BlackwellResult> {
    let x = b.len();
    if x == 0 || b_bar.len() != x {
        return Err(ModelError::DimensionMismatch(format!(
            "channels must share the state count: {} vs {}",
            b.len(),
            b_bar.len()
        )));
    }
    let y = b[0].len();
    let y_bar = b_bar[0].len();
    if b.iter().any(|r| r.len() != y) || b_bar.iter().any(|r| r.len() != y_bar) {
        return Err(ModelError::DimensionMismatch("ragged channel matrix".into()));
    }

    // Variables: R[k][l] flattened as k·y_bar + l.
    // Constraints: Σ_l R[k][l] = 1 per k, then Σ_k b[i][k]·R[k][l] = b_bar[i][l].
    let n = y * y_bar;
    let m = y + x * y_bar;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for k in 0..y {
        let mut row = vec![0.0; n];
        for l in 0..y_bar {
            row[k * y_bar + l] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }
    for i in 0..x {
        for l in 0..y_bar {
            let mut row = vec![0.0; n];
            for k in 0..y {
                row[k * y_bar + l] = b[i][k];
            }
            rows.push(row);
            rhs.push(b_bar[i][l]);
        }
    }

    match phase1(&rows, &rhs, tol) {
        Some(solution) => {
            let mut kernel = vec![vec![0.0; y_bar]; y];
            for k in 0..y {
                for l in 0..y_bar {
                    kernel[k][l] = solution[k * y_bar + l];
                }
            }
            let mut residual = 0.0f64;
            for row in &kernel {
                residual = residual.max((row.iter().sum::<f64>() - 1.0).abs());
            }
            for i in 0..x {
                for l in 0..y_bar {
                    let got: f64 = (0..y).map(|k| b[i][k] * kernel[k][l]).sum();
                    residual = residual.max((got - b_bar[i][l]).abs());
                }
            }
            Ok(BlackwellResult {
                dominated: true,
                kernel: Some(kernel),
                residual,
            })
        }
        None => Ok(BlackwellResult {
            dominated: false,
            kernel: None,
            residual: 0.0,
        }),
    }
}

/// Phase-1 simplex for `Ax = b, x ≥ 0`: minimizes the artificial-variable
/// sum from an all-artificial basis. Returns a feasible `x` when that sum
/// reaches `tol`, `None` otherwise. Entering columns are restricted to the
/// real variables and chosen by smallest index, with ratio-test ties broken
/// toward the smallest basis variable (Bland's rule, so no cycling).
fn phase1(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = a.len();
    let n = a[0].len();
    let width = n + m + 1;
    // Tableau rows [A | I | b] with b forced nonnegative, plus the
    // artificial-cost objective row at index m.
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = Vec::with_capacity(width);
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        row.extend(a[i].iter().map(|&v| flip * v));
        row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
        row.push(flip * b[i]);
        t.push(row);
    }
    let mut obj = vec![0.0; width];
    for j in (0..n).chain([width - 1]) {
        obj[j] = (0..m).map(|i| t[i][j]).sum();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_pivots = 50 * (n + m).max(100);
    for _ in 0..max_pivots {
        let Some(enter) = (0..n).find(|&j| t[m][j] > PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                if ratio < best - PIVOT_EPS
                    || (ratio < best + PIVOT_EPS
                        && leave.is_some_and(|l| basis[i] < basis[l]))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let leave = leave?; // unbounded cannot happen with x ≥ 0 rows, but bail safely
        let pivot = t[leave][enter];
        for v in &mut t[leave] {
            *v /= pivot;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave {
                let factor = row[enter];
                if factor != 0.0 {
                    for (v, &p) in row.iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        basis[leave] = enter;
    }

    if t[m][width - 1] > tol {
        return None;
    }
    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = t[i][width - 1].max(0.0);
        }
    }
    Some(x)
}
