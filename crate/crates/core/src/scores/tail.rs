use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::stats::linear_fit;

/// Fitted exponential stabilization tail `P(R >= r) ≈ C exp(-c r^α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    /// Decay rate `c`.
    pub rate: f64,
    /// Prefactor `C`.
    pub prefactor: f64,
    pub rate_se: f64,
    pub points_used: usize,
}

/// Empirical survival points with at least this many exceedances enter the fit.
const MIN_EXCEEDANCES: usize = 10;
/// Points with empirical survival above this are dropped (the bulk, not the tail).
const MAX_SURVIVAL: f64 = 0.9;

/// Least-squares fit of `ln P̂(R >= r)` against `r^α` over the empirical tail.
///
/// The survival at the `i`th smallest radius (0-based) is `(N - i) / N`;
/// points with survival at most 0.9 and at least ten exceedances are used.
pub fn stabilization_tail_fit(samples: &[f64], alpha_stab: f64) -> Result<TailFit> {
    if samples.len() < 100 {
        return Err(Error::InsufficientSample("tail fit needs at least 100 radii"));
    }
    if samples.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidArgument("radii must be finite and nonnegative"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, r) in sorted.iter().enumerate() {
        let exceed = n - i;
        let survival = exceed as f64 / n as f64;
        if survival > MAX_SURVIVAL || exceed < MIN_EXCEEDANCES {
            continue;
        }
        xs.push(r.powf(alpha_stab));
        ys.push(survival.ln());
    }
    let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if xs.len() < 3 || !(spread > 0.0) {
        return Err(Error::Degenerate("radii do not spread over the tail"));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok(TailFit {
        rate: -fit.slope,
        prefactor: fit.intercept.exp(),
        rate_se: fit.slope_se,
        points_used: xs.len(),
    })
}
