//! Laws of the distance from the origin to its kth nearest neighbor in a unit
//! intensity Poisson process, with and without one extra uniform point in a
//! ball of radius `R`.

use alloc::vec::Vec;

use super::laws::OracleLaw;
use super::special::{gamma_p, ln_factorial, unit_ball_volume};
use crate::error::{Error, Result};

/// Poisson weights below this are dropped from mixture sums.
pub const MIXTURE_TRUNCATION: f64 = 1e-12;

/// `t^m e^{-t} / m!` written to stay finite for large `m`.
fn poisson_term(t: f64, m: u32) -> f64 {
    if m == 0 {
        (-t).exp()
    } else if t <= 0.0 {
        0.0
    } else {
        (m as f64 * t.ln() - t - ln_factorial(u64::from(m))).exp()
    }
}

/// Density of `s` when `w_d (s^d - R^d)` is `Γ(m + 1, 1)`, on `(R, ∞)`.
fn shifted_gamma_pdf(s: f64, m: u32, d: usize, radius: f64) -> f64 {
    if s <= radius {
        return 0.0;
    }
    let w = unit_ball_volume(d);
    let t = w * (s.powi(d as i32) - radius.powi(d as i32));
    let h = w * d as f64 * s.powi(d as i32 - 1);
    poisson_term(t, m) * h
}

fn shifted_gamma_pdf_deriv(s: f64, m: u32, d: usize, radius: f64) -> f64 {
    if s <= radius {
        return 0.0;
    }
    let w = unit_ball_volume(d);
    let df = d as f64;
    let t = w * (s.powi(d as i32) - radius.powi(d as i32));
    let h = w * df * s.powi(d as i32 - 1);
    let dh = w * df * (df - 1.0) * s.powi(d as i32 - 2);
    let mut out = poisson_term(t, m) * (dh - h * h);
    if m > 0 {
        // m t^{m-1} e^{-t} / m! = t^{m-1} e^{-t} / (m-1)!
        out += poisson_term(t, m - 1) * h * h;
    }
    out
}

fn shifted_gamma_cdf(s: f64, m: u32, d: usize, radius: f64) -> f64 {
    if s <= radius {
        return 0.0;
    }
    let w = unit_ball_volume(d);
    gamma_p(m as f64 + 1.0, w * (s.powi(d as i32) - radius.powi(d as i32)))
}

/// Law of `d(0, V_k(0, P ∪ {0}))`: `F(s) = 1 - Σ_{j<k} e^{-w_d s^d} (w_d s^d)^j / j!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnKthLaw {
    k: u32,
    d: usize,
}

impl KnnKthLaw {
    pub fn new(k: u32, d: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1"));
        }
        if d < 1 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(Self { k, d })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.d
    }
}

impl OracleLaw for KnnKthLaw {
    fn cdf(&self, s: f64) -> f64 {
        shifted_gamma_cdf(s, self.k - 1, self.d, 0.0)
    }

    fn pdf(&self, s: f64) -> f64 {
        shifted_gamma_pdf(s, self.k - 1, self.d, 0.0)
    }

    fn pdf_deriv(&self, s: f64) -> f64 {
        shifted_gamma_pdf_deriv(s, self.k - 1, self.d, 0.0)
    }
}

pub fn knn_kth_cdf(s: f64, k: u32, d: usize) -> f64 {
    shifted_gamma_cdf(s, k.saturating_sub(1), d, 0.0)
}

pub fn knn_kth_pdf(s: f64, k: u32, d: usize) -> f64 {
    shifted_gamma_pdf(s, k.saturating_sub(1), d, 0.0)
}

pub fn knn_kth_pdf_deriv(s: f64, k: u32, d: usize) -> f64 {
    shifted_gamma_pdf_deriv(s, k.saturating_sub(1), d, 0.0)
}

/// Joint density of the ordered neighbor distances `(|V_1|, ..., |V_k|)`:
/// `e^{-w_d s_k^d} (w_d d)^k (Π s_i)^{d-1}` on `0 < s_1 < ... < s_k`.
pub fn knn_joint_pdf(s: &[f64], d: usize) -> f64 {
    let Some(&last) = s.last() else {
        return 0.0;
    };
    if s[0] <= 0.0 || s.windows(2).any(|w| w[0] >= w[1]) {
        return 0.0;
    }
    let w = unit_ball_volume(d);
    let k = s.len() as i32;
    let prod: f64 = s.iter().product();
    (-w * last.powi(d as i32)).exp() * (w * d as f64).powi(k) * prod.powi(d as i32 - 1)
}

/// Law of the kth neighbor distance of the origin given that exactly `j`
/// uniform points lie in `B(0, R)` and the process outside is Poisson.
///
/// For `j >= k` the neighbor is one of the `j` inner points (beta type on
/// `(0, R)`); for `j < k` it lies outside (shifted gamma type on `(R, ∞)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConditionalLaw {
    j: u32,
    k: u32,
    d: usize,
    radius: f64,
}

impl KnnConditionalLaw {
    pub fn new(j: u32, k: u32, d: usize, radius: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument("conditioning radius must be positive"));
        }
        Ok(Self { j, k, d, radius })
    }

    fn ln_coefficient(&self) -> f64 {
        let (j, k) = (u64::from(self.j), u64::from(self.k));
        ln_factorial(j) - ln_factorial(k - 1) - ln_factorial(j - k)
    }

    /// `(u, u', u'')` for `u = (s / R)^d`.
    fn scaled(&self, s: f64) -> (f64, f64, f64) {
        let df = self.d as f64;
        let rd = self.radius.powi(self.d as i32);
        (
            s.powi(self.d as i32) / rd,
            df * s.powi(self.d as i32 - 1) / rd,
            df * (df - 1.0) * s.powi(self.d as i32 - 2) / rd,
        )
    }
}

impl OracleLaw for KnnConditionalLaw {
    fn cdf(&self, s: f64) -> f64 {
        if self.j < self.k {
            return shifted_gamma_cdf(s, self.k - 1 - self.j, self.d, self.radius);
        }
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.radius {
            return 1.0;
        }
        // P(Binomial(j, u) >= k)
        let (u, _, _) = self.scaled(s);
        let j = u64::from(self.j);
        let (lu, l1u) = (u.ln(), (-u).ln_1p());
        let mut total = 0.0;
        for i in u64::from(self.k)..=j {
            let ln_binom = ln_factorial(j) - ln_factorial(i) - ln_factorial(j - i);
            total += (ln_binom + i as f64 * lu + (j - i) as f64 * l1u).exp();
        }
        total.min(1.0)
    }

    fn pdf(&self, s: f64) -> f64 {
        if self.j < self.k {
            return shifted_gamma_pdf(s, self.k - 1 - self.j, self.d, self.radius);
        }
        if s <= 0.0 || s >= self.radius {
            return 0.0;
        }
        let (u, du, _) = self.scaled(s);
        let a = (self.k - 1) as i32;
        let b = (self.j - self.k) as i32;
        self.ln_coefficient().exp() * u.powi(a) * (1.0 - u).powi(b) * du
    }

    fn pdf_deriv(&self, s: f64) -> f64 {
        if self.j < self.k {
            return shifted_gamma_pdf_deriv(s, self.k - 1 - self.j, self.d, self.radius);
        }
        if s <= 0.0 || s >= self.radius {
            return 0.0;
        }
        let (u, du, ddu) = self.scaled(s);
        let a = (self.k - 1) as i32;
        let b = (self.j - self.k) as i32;
        let v = 1.0 - u;
        let mut inner = u.powi(a) * v.powi(b) * ddu;
        if a > 0 {
            inner += a as f64 * u.powi(a - 1) * v.powi(b) * du * du;
        }
        if b > 0 {
            inner -= b as f64 * u.powi(a) * v.powi(b - 1) * du * du;
        }
        self.ln_coefficient().exp() * inner
    }
}

pub fn knn_conditional_pdf(s: f64, j: u32, k: u32, d: usize, radius: f64) -> Result<f64> {
    Ok(KnnConditionalLaw::new(j, k, d, radius)?.pdf(s))
}

/// Poisson mixture `Σ_j e^{-λ} λ^j / j! · g_{j + shift}` with `λ = w_d R^d`.
///
/// With `shift = 0` this reproduces [`KnnKthLaw`]; with `shift = 1` it is the
/// law of the kth neighbor distance after adding one uniform point of
/// `B(0, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnMixtureLaw {
    components: Vec<(f64, KnnConditionalLaw)>,
}

impl KnnMixtureLaw {
    pub fn new(k: u32, d: usize, radius: f64, shift: u32, truncation: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument("mixture radius must be positive"));
        }
        let lambda = unit_ball_volume(d) * radius.powi(d as i32);
        let mut components = Vec::new();
        let mut j = 0u32;
        loop {
            let weight = poisson_term(lambda, j);
            if weight >= truncation {
                components.push((weight, KnnConditionalLaw::new(j + shift, k, d, radius)?));
            } else if f64::from(j) > lambda {
                break;
            }
            j += 1;
        }
        Ok(Self { components })
    }

    /// The law of `ξ̃(0, P ∪ {0, Y})` with `Y` uniform on `B(0, R)`.
    pub fn extended(k: u32, d: usize, radius: f64) -> Result<Self> {
        Self::new(k, d, radius, 1, MIXTURE_TRUNCATION)
    }

    pub fn components(&self) -> &[(f64, KnnConditionalLaw)] {
        &self.components
    }
}

impl OracleLaw for KnnMixtureLaw {
    fn cdf(&self, s: f64) -> f64 {
        self.components.iter().map(|(w, g)| w * g.cdf(s)).sum::<f64>().min(1.0)
    }

    fn pdf(&self, s: f64) -> f64 {
        self.components.iter().map(|(w, g)| w * g.pdf(s)).sum()
    }

    fn pdf_deriv(&self, s: f64) -> f64 {
        self.components.iter().map(|(w, g)| w * g.pdf_deriv(s)).sum()
    }
}

/// Density of `ξ̃(0, P ∪ {0, Y})`, `ḡ = Σ_j p_j g_{j+1}`.
pub fn knn_extended_pdf(s: f64, k: u32, d: usize, radius: f64) -> Result<f64> {
    Ok(KnnMixtureLaw::extended(k, d, radius)?.pdf(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{LN_2, PI};

    #[test]
    fn kth_cdf_closed_forms() {
        assert_eq!(knn_kth_cdf(0.0, 1, 2), 0.0);
        let median = (LN_2 / PI).sqrt();
        assert!((knn_kth_cdf(median, 1, 2) - 0.5).abs() < 1e-14);
        let series = 1.0 - (-PI).exp() * (1.0 + PI);
        assert!((knn_kth_cdf(1.0, 2, 2) - series).abs() < 1e-14);
        assert!((knn_kth_cdf(1.0, 2, 2) - 0.8210).abs() < 5e-5);
    }

    #[test]
    fn kth_pdf_values() {
        assert_eq!(knn_kth_pdf(0.0, 1, 2), 0.0);
        assert_eq!(knn_kth_pdf(0.0, 3, 3), 0.0);
        let expected = PI * (-PI / 4.0).exp();
        assert!((knn_kth_pdf(0.5, 1, 2) - expected).abs() < 1e-14);
        assert!((knn_kth_pdf(0.5, 1, 2) - 1.432_371_872_681).abs() < 1e-11);
    }

    #[test]
    fn joint_density_support_and_k1() {
        assert_eq!(knn_joint_pdf(&[0.6, 0.4], 2), 0.0);
        assert_eq!(knn_joint_pdf(&[0.4, 0.4], 2), 0.0);
        for &s in &[0.1, 0.5, 1.3] {
            assert!((knn_joint_pdf(&[s], 2) - knn_kth_pdf(s, 1, 2)).abs() < 1e-14);
            assert!((knn_joint_pdf(&[s], 3) - knn_kth_pdf(s, 1, 3)).abs() < 1e-14);
        }
    }

    #[test]
    fn conditional_supports() {
        let inner = KnnConditionalLaw::new(4, 2, 2, 1.5).unwrap();
        assert!(inner.pdf(0.7) > 0.0);
        assert_eq!(inner.pdf(1.5), 0.0);
        assert_eq!(inner.pdf(2.0), 0.0);
        let outer = KnnConditionalLaw::new(1, 3, 2, 1.5).unwrap();
        assert_eq!(outer.pdf(1.5), 0.0);
        assert_eq!(outer.pdf(1.0), 0.0);
        assert!(outer.pdf(1.8) > 0.0);
        assert!(KnnConditionalLaw::new(1, 0, 2, 1.0).is_err());
        assert!(KnnConditionalLaw::new(1, 1, 2, 0.0).is_err());
    }

    #[test]
    fn mixture_truncation_keeps_mass() {
        let law = KnnMixtureLaw::extended(2, 2, 2f64.sqrt()).unwrap();
        let total: f64 = law.components().iter().map(|c| c.0).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}
