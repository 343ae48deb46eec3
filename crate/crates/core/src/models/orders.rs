//! Stochastic-order predicates on probability vectors and matrices:
//! likelihood-ratio and tail-sum comparisons, total positivity of order 2,
//! and the cross-product ordering of transition matrices.
//!
//! Every predicate takes an explicit tolerance — cross products of
//! probabilities live at the scale where f64 rounding matters — and the
//! default [`DEFAULT_ORDER_TOL`] absorbs that noise.

use serde::{Deserialize, Serialize};

use super::{ModelError, Result};

/// Default slack for all order predicates.
pub const DEFAULT_ORDER_TOL: f64 = 1e-12;

/// Outcome of comparing two vectors under a partial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderVerdict {
    Greater,
    Less,
    Equal,
    Incomparable,
}

impl OrderVerdict {
    fn from_flags(ge: bool, le: bool) -> Self {
        match (ge, le) {
            (true, true) => OrderVerdict::Equal,
            (true, false) => OrderVerdict::Greater,
            (false, true) => OrderVerdict::Less,
            (false, false) => OrderVerdict::Incomparable,
        }
    }

    /// True for `Greater` or `Equal` — "at least as large".
    pub fn is_geq(self) -> bool {
        matches!(self, OrderVerdict::Greater | OrderVerdict::Equal)
    }
}

fn check_dims(p1: &[f64], p2: &[f64]) -> Result<()> {
    if p1.len() != p2.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "cannot order vectors of lengths {} and {}",
            p1.len(),
            p2.len()
        )));
    }
    Ok(())
}

/// Likelihood-ratio comparison: `p1` dominates `p2` when the ratio
/// `p1(i)/p2(i)` is nondecreasing in `i`, checked without division as
/// `p1(i)·p2(j) ≤ p2(i)·p1(j) + tol` for every pair `i < j`. Dominant
/// vectors put relatively more mass on higher indices.
pub fn mlr_compare(p1: &[f64], p2: &[f64], tol: f64) -> Result<OrderVerdict> {
    check_dims(p1, p2)?;
    let n = p1.len();
    let mut ge = true;
    let mut le = true;
    for i in 0..n {
        for j in (i + 1)..n {
            let cross_12 = p1[i] * p2[j];
            let cross_21 = p2[i] * p1[j];
            ge &= cross_12 <= cross_21 + tol;
            le &= cross_21 <= cross_12 + tol;
        }
    }
    Ok(OrderVerdict::from_flags(ge, le))
}

/// Tail-sum comparison: `p1` dominates `p2` when every upper tail
/// `Σ_{i≥j} p1(i)` is at least the matching tail of `p2`, within `tol`.
/// Implied by likelihood-ratio dominance.
pub fn fosd_compare(p1: &[f64], p2: &[f64], tol: f64) -> Result<OrderVerdict> {
    check_dims(p1, p2)?;
    let mut ge = true;
    let mut le = true;
    let mut tail1 = 0.0;
    let mut tail2 = 0.0;
    for (a, b) in p1.iter().zip(p2).rev() {
        tail1 += a;
        tail2 += b;
        ge &= tail1 >= tail2 - tol;
        le &= tail2 >= tail1 - tol;
    }
    Ok(OrderVerdict::from_flags(ge, le))
}

/// Total positivity of order 2: every 2×2 minor
/// `M[i][j]·M[i'][j'] − M[i][j']·M[i'][j]` (for `i < i'`, `j < j'`) is at
/// least `−tol`. Equivalent to every pair of rows being likelihood-ratio
/// ordered top-to-bottom.
pub fn is_tp2(m: &[Vec<f64>], tol: f64) -> bool {
    let rows = m.len();
    for hi in 0..rows {
        for lo in (hi + 1)..rows {
            let cols = m[hi].len();
            for j in 0..cols {
                for jj in (j + 1)..cols {
                    if m[hi][j] * m[lo][jj] - m[hi][jj] * m[lo][j] < -tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Cross-product ordering of transition matrices: `A¹ ⪰ A²` when
/// `A¹[i][j]·A²[m][j+1] ≤ A²[i][j]·A¹[m][j+1] + tol` for every row pair
/// `(i, m)` and every adjacent column pair. Matrices higher in this order
/// produce likelihood-ratio-larger one-step predictions from any belief.
pub fn transition_order_geq(a1: &[Vec<f64>], a2: &[Vec<f64>], tol: f64) -> bool {
    let x = a1.len();
    debug_assert!(a2.len() == x && a1.iter().chain(a2).all(|r| r.len() == x));
    for i in 0..x {
        for m in 0..x {
            for j in 0..x.saturating_sub(1) {
                if a1[i][j] * a2[m][j + 1] > a2[i][j] * a1[m][j + 1] + tol {
                    return false;
                }
            }
        }
    }
    true
}
