//! Turns continuous per-state observation densities into finite
//! row-stochastic matrices so the rest of the crate can sum over symbols.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{ModelError, ObservationKind, Result};

pub(super) fn discretize(kind: &ObservationKind) -> Result<Vec<Vec<f64>>> {
    match kind {
        ObservationKind::Discrete { matrix } => {
            if matrix.is_empty() {
                return Err(ModelError::TooFewStates(0));
            }
            Ok(matrix.clone())
        }
        ObservationKind::Gaussian {
            means,
            variances,
            nodes,
            span_stdevs,
        } => gaussian(means, variances, *nodes, *span_stdevs),
        ObservationKind::Poisson {
            rates,
            tail_epsilon,
        } => poisson(rates, *tail_epsilon),
    }
}

/// Equispaced grid of `nodes` cells covering every state's mean ± `span`
/// standard deviations; each cell carries the CDF mass of the interval
/// centered on its node, and rows are renormalized to absorb the clipped
/// tails.
fn gaussian(means: &[f64], variances: &[f64], nodes: usize, span: f64) -> Result<Vec<Vec<f64>>> {
    if means.is_empty() || means.len() != variances.len() {
        return Err(ModelError::DimensionMismatch(format!(
            "gaussian needs matching means/variances, got {} and {}",
            means.len(),
            variances.len()
        )));
    }
    if nodes < 2 {
        return Err(ModelError::InvalidGrid(nodes));
    }
    for &v in variances {
        if !v.is_finite() || v <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "gaussian variance must be positive, got {v}"
            )));
        }
    }
    if !span.is_finite() || span <= 0.0 {
        return Err(ModelError::InvalidParameter(format!(
            "gaussian span must be positive, got {span}"
        )));
    }
    let max_sd = variances.iter().cloned().fold(f64::MIN, f64::max).sqrt();
    let lo = means.iter().cloned().fold(f64::MAX, f64::min) - span * max_sd;
    let hi = means.iter().cloned().fold(f64::MIN, f64::max) + span * max_sd;
    let step = (hi - lo) / (nodes - 1) as f64;
    let mut matrix = Vec::with_capacity(means.len());
    for (&mean, &var) in means.iter().zip(variances) {
        let normal = Normal::new(mean, var.sqrt()).expect("validated parameters");
        let row: Vec<f64> = (0..nodes)
            .map(|k| {
                let center = lo + k as f64 * step;
                normal.cdf(center + step / 2.0) - normal.cdf(center - step / 2.0)
            })
            .collect();
        matrix.push(normalize(row));
    }
    Ok(matrix)
}

/// Counts on the shifted support y = 1, 2, … (column j holds the mass of
/// j + 1 events − 1, i.e. the plain Poisson pmf at j), truncated once every
/// row's remaining tail is below `tail_epsilon`, then renormalized.
fn poisson(rates: &[f64], tail_epsilon: f64) -> Result<Vec<Vec<f64>>> {
    if rates.is_empty() {
        return Err(ModelError::TooFewStates(0));
    }
    for &r in rates {
        if !r.is_finite() || r <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "poisson rate must be positive, got {r}"
            )));
        }
    }
    if !tail_epsilon.is_finite() || tail_epsilon <= 0.0 || tail_epsilon >= 1.0 {
        return Err(ModelError::InvalidParameter(format!(
            "poisson tail cutoff must be in (0, 1), got {tail_epsilon}"
        )));
    }
    // pmf(j) = rate^j e^{-rate} / j!, accumulated until all rows have
    // captured 1 − tail_epsilon of their mass.
    let x = rates.len();
    let mut pmf: Vec<f64> = rates.iter().map(|r| (-r).exp()).collect();
    let mut captured = pmf.clone();
    let mut matrix: Vec<Vec<f64>> = (0..x).map(|i| vec![pmf[i]]).collect();
    let mut j = 0usize;
    while captured.iter().any(|&c| 1.0 - c >= tail_epsilon) {
        j += 1;
        for i in 0..x {
            pmf[i] *= rates[i] / j as f64;
            captured[i] += pmf[i];
            matrix[i].push(pmf[i]);
        }
        if j > 10_000 {
            return Err(ModelError::InvalidParameter(
                "poisson tail did not close within 10000 symbols".into(),
            ));
        }
    }
    Ok(matrix.into_iter().map(normalize).collect())
}

fn normalize(mut row: Vec<f64>) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    for p in &mut row {
        *p /= sum;
    }
    row
}
