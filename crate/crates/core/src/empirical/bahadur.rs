use alloc::vec::Vec;

use super::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::oracles::OracleLaw;

/// The population quantile `ψ_p` and density `f(ψ_p)` used to centre the
/// empirical quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileReference {
    pub p: f64,
    pub psi: f64,
    pub density: f64,
    /// Set when `psi` and `density` were estimated rather than taken from a
    /// closed-form law.
    pub oracle_free: bool,
}

impl QuantileReference {
    pub fn from_law<L: OracleLaw + ?Sized>(law: &L, p: f64) -> Result<Self> {
        let psi = law.quantile(p)?;
        Self::checked(p, psi, law.pdf(psi), false)
    }

    /// A reference from externally estimated `ψ_p` and `f(ψ_p)`.
    pub fn estimated(p: f64, psi: f64, density: f64) -> Result<Self> {
        Self::checked(p, psi, density, true)
    }

    fn checked(p: f64, psi: f64, density: f64, oracle_free: bool) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::NonPositiveDensity(density));
        }
        if !psi.is_finite() {
            return Err(Error::InvalidArgument("quantile must be finite"));
        }
        Ok(Self {
            p,
            psi,
            density,
            oracle_free,
        })
    }
}

/// Evenly spaced probabilities `p0, p0 + step, ...` up to `p1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityGrid {
    pub p0: f64,
    pub p1: f64,
    pub step: f64,
}

impl ProbabilityGrid {
    pub fn new(p0: f64, p1: f64, step: f64) -> Result<Self> {
        if !(p0 > 0.0 && p1 < 1.0 && p0 <= p1) {
            return Err(Error::InvalidArgument("grid needs 0 < p0 <= p1 < 1"));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidArgument("grid step must be positive"));
        }
        Ok(Self { p0, p1, step })
    }

    pub fn points(&self) -> Vec<f64> {
        let steps = ((self.p1 - self.p0) / self.step + 1e-9).floor() as usize;
        (0..=steps).map(|i| self.p0 + i as f64 * self.step).collect()
    }

    pub fn references<L: OracleLaw + ?Sized>(&self, law: &L) -> Result<Vec<QuantileReference>> {
        self.points()
            .into_iter()
            .map(|p| QuantileReference::from_law(law, p))
            .collect()
    }
}

/// `ψ̂_p - ψ_p - (p - F̂(ψ_p)) / f(ψ_p)`.
pub fn bahadur_remainder_at(ecdf: &EmpiricalCdf, reference: &QuantileReference) -> Result<f64> {
    let QuantileReference { p, psi, density, .. } = *reference;
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::NonPositiveDensity(density));
    }
    let est = ecdf.quantile(p)?;
    Ok(est.value - psi - (p - ecdf.eval(psi)) / density)
}

pub fn bahadur_remainder<L: OracleLaw + ?Sized>(ecdf: &EmpiricalCdf, p: f64, law: &L) -> Result<f64> {
    bahadur_remainder_at(ecdf, &QuantileReference::from_law(law, p)?)
}

/// Largest absolute remainder over precomputed references.
pub fn sup_remainder_at(ecdf: &EmpiricalCdf, references: &[QuantileReference]) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::InvalidArgument("no probabilities to evaluate"));
    }
    references
        .iter()
        .try_fold(0.0f64, |acc, r| Ok(acc.max(bahadur_remainder_at(ecdf, r)?.abs())))
}

pub fn sup_remainder<L: OracleLaw + ?Sized>(
    ecdf: &EmpiricalCdf,
    grid: &ProbabilityGrid,
    law: &L,
) -> Result<f64> {
    sup_remainder_at(ecdf, &grid.references(law)?)
}
