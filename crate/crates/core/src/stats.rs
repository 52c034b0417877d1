//! Sample moments, one-sample Kolmogorov–Smirnov distance, the
//! Anderson–Darling normality test and least-squares line fits.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::oracles::special::normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

impl Moments {
    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

pub fn moments(xs: &[f64]) -> Result<Moments> {
    if xs.len() < 2 {
        return Err(Error::InsufficientSample("moments need at least two values"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(Moments {
        count: xs.len(),
        mean,
        variance: m2 * n / (n - 1.0),
        skewness,
        kurtosis,
    })
}

/// `sup_x |F_N(x) - F(x)|` for the empirical distribution of `samples`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(ks_statistic_sorted(&sorted, cdf))
}

/// As [`ks_statistic`] for samples already sorted ascending.
pub fn ks_statistic_sorted<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AndersonDarling {
    pub statistic: f64,
    /// Small-sample adjusted statistic `A²(1 + 0.75/n + 2.25/n²)`.
    pub adjusted: f64,
    pub p_value: f64,
}

/// Anderson–Darling test of normality with mean and variance estimated from
/// the data, p-value from the D'Agostino–Stephens approximation.
pub fn anderson_darling_normal(xs: &[f64]) -> Result<AndersonDarling> {
    if xs.len() < 8 {
        return Err(Error::InsufficientSample("normality test needs at least 8 values"));
    }
    let m = moments(xs)?;
    let sd = m.variance.sqrt();
    if !(sd > 0.0) {
        return Err(Error::Degenerate("zero variance"));
    }
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m.mean) / sd).collect();
    z.sort_by(|a, b| a.total_cmp(b));
    let n = z.len();
    let nf = n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let lo = normal_cdf(z[i]).max(1e-300).ln();
        let hi = normal_cdf(-z[n - 1 - i]).max(1e-300).ln();
        s += (2.0 * (i as f64 + 1.0) - 1.0) * (lo + hi);
    }
    let a2 = -nf - s / nf;
    let adj = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if adj < 0.2 {
        1.0 - (-13.436 + 101.14 * adj - 223.73 * adj * adj).exp()
    } else if adj < 0.34 {
        1.0 - (-8.318 + 42.796 * adj - 59.938 * adj * adj).exp()
    } else if adj < 0.6 {
        (0.9177 - 4.279 * adj - 1.38 * adj * adj).exp()
    } else if adj < 10.0 {
        (1.2937 - 5.709 * adj + 0.0186 * adj * adj).exp()
    } else {
        3.7e-24
    };
    Ok(AndersonDarling {
        statistic: a2,
        adjusted: adj,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument("x and y lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientSample("line fit needs at least three points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::Degenerate("all x values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let sigma2 = rss / (n - 2.0);
    let r_squared = if syy > 0.0 { (1.0 - rss / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_se: (sigma2 / sxx).sqrt(),
        intercept_se: (sigma2 * (1.0 / n + mx * mx / sxx)).sqrt(),
        r_squared,
    })
}

/// Least squares on `(ln x, ln y)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() < 3 {
        return Err(Error::InsufficientSample("log-log fit needs at least three points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("log-log fit needs positive finite values"));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("x values must be strictly increasing"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stream_rng;
    use alloc::vec;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn exact_power_laws() {
        let xs = [1e3, 4e3, 1.6e4, 6.4e4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(-0.75)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope + 0.75).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);

        let ys: Vec<f64> = xs.iter().map(|x: &f64| 17.0 * x.powf(-0.5)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 17f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn noisy_power_law_within_two_se() {
        let mut rng = stream_rng(3, 0, 0);
        let xs: Vec<f64> = (0..12).map(|i| 100.0 * 2f64.powi(i)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| {
                let e: f64 = StandardNormal.sample(&mut rng);
                x.powf(-0.6) * (0.05 * e).exp()
            })
            .collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope + 0.6).abs() < 2.0 * fit.slope_se, "{fit:?}");
        assert!(fit.slope_se > 0.0);
    }

    #[test]
    fn loglog_rejects_bad_input() {
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 3.0, 2.0], &[1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn ks_of_exact_grid() {
        // Midpoint grid of U(0,1) has KS distance 1/(2n).
        let n = 50;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(ks_statistic(&[], |x| x).is_err());
        // Ties count as one jump.
        let d = ks_statistic(&[0.5, 0.5], |x| x).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn anderson_darling_accepts_normal_rejects_exponential() {
        let mut rng = stream_rng(21, 0, 0);
        let normal: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(anderson_darling_normal(&normal).unwrap().p_value > 0.01);
        let expo: Vec<f64> = (0..500)
            .map(|_| {
                let u: f64 = rand::Rng::random(&mut rng);
                -(1.0 - u).ln()
            })
            .collect();
        assert!(anderson_darling_normal(&expo).unwrap().p_value < 1e-6);
        assert!(matches!(
            anderson_darling_normal(&vec![2.0; 20]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn moments_of_small_sample() {
        let m = moments(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!(m.skewness.abs() < 1e-15);
    }
}
