use super::special::{gamma_p, ln_gamma};
use crate::error::{Error, Result};

/// Bracket half-width at which quantile bisection stops.
pub const QUANTILE_TOLERANCE: f64 = 1e-12;

/// A continuous law with analytic distribution function, density and density
/// derivative.
pub trait OracleLaw {
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    fn pdf_deriv(&self, x: f64) -> f64;

    /// `inf { x : cdf(x) >= p }`, by bisection.
    fn quantile(&self, p: f64) -> Result<f64> {
        invert_cdf(|x| self.cdf(x), p)
    }
}

impl<L: OracleLaw + ?Sized> OracleLaw for &L {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn pdf_deriv(&self, x: f64) -> f64 {
        (**self).pdf_deriv(x)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        (**self).quantile(p)
    }
}

/// Inverts a nondecreasing distribution function by bisection. The bracket
/// starts at `[0, 1]` and grows geometrically until it straddles `p`.
pub fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut width = 1.0f64;
    while cdf(lo) >= p {
        width *= 2.0;
        lo = -width;
        if !lo.is_finite() {
            return Err(Error::InvalidArgument("distribution function never drops below p"));
        }
    }
    width = 1.0;
    while cdf(hi) < p {
        width *= 2.0;
        hi = lo + width;
        if !hi.is_finite() {
            return Err(Error::InvalidArgument("distribution function never reaches p"));
        }
    }
    for _ in 0..400 {
        if hi - lo <= QUANTILE_TOLERANCE * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if cdf(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The `Γ(shape, 1)` law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaw {
    shape: f64,
}

impl GammaLaw {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::InvalidArgument("gamma shape must be positive"));
        }
        Ok(Self { shape })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }
}

impl OracleLaw for GammaLaw {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_p(self.shape, x)
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        ((self.shape - 1.0) * x.ln() - x - ln_gamma(self.shape)).exp()
    }

    fn pdf_deriv(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.pdf(x) * ((self.shape - 1.0) / x - 1.0)
    }
}

/// The Poisson concentration bound `P(|Z - λ| >= t) <= 2 exp(-t² / (2(λ + t)))`
/// for `Z ~ Poi(λ)`.
pub fn poisson_tail_bound(lambda: f64, t: f64) -> f64 {
    2.0 * (-(t * t) / (2.0 * (lambda + t))).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_exponential_quantile() {
        let q = invert_cdf(|x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() }, 0.5).unwrap();
        assert!((q - core::f64::consts::LN_2).abs() < 1e-11);
        // Far tail needs bracket growth.
        let q = invert_cdf(|x| if x <= 0.0 { 0.0 } else { 1.0 - (-x / 100.0).exp() }, 0.99).unwrap();
        assert!((q - 100.0 * 100f64.ln()).abs() < 1e-9);
        // Law on the negative half-line.
        let q = invert_cdf(|x| if x >= 0.0 { 1.0 } else { x.exp() }, 0.25).unwrap();
        assert!((q - 0.25f64.ln()).abs() < 1e-11);
        assert!(invert_cdf(|x| x, 1.0).is_err());
        assert!(invert_cdf(|x| x, 0.0).is_err());
    }

    #[test]
    fn poisson_bound_values() {
        let b = poisson_tail_bound(100.0, 100.0);
        assert!((b - 2.0 * (-25.0f64).exp()).abs() < 1e-24);
        assert!((b - 2.777_588_772_3e-11).abs() < 1e-19);
        assert!((poisson_tail_bound(10.0, 1e-9) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_law_shape_one_is_exponential() {
        let g = GammaLaw::new(1.0).unwrap();
        assert!((g.cdf(2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!((g.pdf(2.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((g.pdf_deriv(2.0) + (-2.0f64).exp()).abs() < 1e-15);
        assert!(GammaLaw::new(0.0).is_err());
    }
}
