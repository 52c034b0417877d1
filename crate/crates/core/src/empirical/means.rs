use super::EmpiricalCdf;
use crate::error::{Error, Result};

/// `α = ⌊M p0⌋`, `β = ⌊M p1⌋`, checked so that `α < β < M`.
fn cut_points(m: usize, p0: f64, p1: f64) -> Result<(usize, usize)> {
    if !(p0 > 0.0 && p0 < p1 && p1 < 1.0) {
        return Err(Error::InvalidArgument("trimming needs 0 < p0 < p1 < 1"));
    }
    let alpha = (m as f64 * p0).floor() as usize;
    let beta = (m as f64 * p1).floor() as usize;
    if beta <= alpha || beta + 1 > m {
        return Err(Error::TrimSampleTooSmall(m as f64));
    }
    Ok((alpha, beta))
}

/// Mean of the order statistics `α+1, …, β`.
pub fn trimmed_mean(ecdf: &EmpiricalCdf, p0: f64, p1: f64) -> Result<f64> {
    let x = ecdf.values();
    let (alpha, beta) = cut_points(x.len(), p0, p1)?;
    Ok(x[alpha..beta].iter().sum::<f64>() / (beta - alpha) as f64)
}

/// `(α x_(α) + Σ_{α<i≤β} x_(i) + (M - β) x_(β+1)) / M`.
pub fn winsorized_mean(ecdf: &EmpiricalCdf, p0: f64, p1: f64) -> Result<f64> {
    let x = ecdf.values();
    let m = x.len();
    let (alpha, beta) = cut_points(m, p0, p1)?;
    let low = if alpha == 0 { 0.0 } else { alpha as f64 * x[alpha - 1] };
    let middle: f64 = x[alpha..beta].iter().sum();
    let high = (m - beta) as f64 * x[beta];
    Ok((low + middle + high) / m as f64)
}
