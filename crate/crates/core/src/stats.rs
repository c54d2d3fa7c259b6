//! Small statistical helpers: running moments, one-sample KS distance,
//! chi-square goodness of fit, and sample correlation.

use crate::error::{Error, Result};
use crate::special::upper_incomplete_gamma_regularized;

/// Welford-style running mean/variance accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    sample.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in KS sample"));
    let n = sample.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        let lower = (f - i as f64 / n).abs();
        let upper = ((i + 1) as f64 / n - f).abs();
        sup = sup.max(lower).max(upper);
    }
    Ok(sup)
}

/// Asymptotic Kolmogorov survival function `P{√n·D > t}`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let t = (n as f64).sqrt() * d;
    if t < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..101 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Chi-square goodness-of-fit test of observed counts against cell
/// probabilities. Returns `(statistic, p_value)` with `len − 1` degrees of
/// freedom. Cells with expected count below `1e-12` are skipped.
pub fn chi_square_test(observed: &[u64], probabilities: &[f64]) -> Result<(f64, f64)> {
    if observed.len() != probabilities.len() || observed.is_empty() {
        return Err(Error::InvalidConfig(
            "chi-square needs matching, non-empty cells".into(),
        ));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::EmptySampleSet);
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probabilities) {
        let e = p * n as f64;
        if e < 1e-12 {
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if cells < 2 {
        return Err(Error::InvalidConfig("chi-square needs >= 2 usable cells".into()));
    }
    let df = (cells - 1) as f64;
    let p = upper_incomplete_gamma_regularized(df / 2.0, stat / 2.0)?;
    Ok((stat, p))
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidConfig(
            "correlation needs two equal samples of length >= 2".into(),
        ));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (var_a * var_b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_closed_form() {
        let mut m = RunningMoments::new();
        for i in 1..=9 {
            m.push(i as f64);
        }
        assert_eq!(m.mean(), 5.0);
        assert!((m.variance() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn ks_distance_of_exact_grid_is_small() {
        // Uniform grid quantiles against the uniform CDF.
        let n = 1000;
        let mut sample: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&mut sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn chi_square_detects_fit_and_misfit() {
        let observed = [28u64, 31, 40, 35];
        let uniform = [0.25; 4];
        let (_, p) = chi_square_test(&observed, &uniform).unwrap();
        assert!(p > 0.05);
        let skewed = [0.7, 0.1, 0.1, 0.1];
        let (_, p) = chi_square_test(&observed, &skewed).unwrap();
        assert!(p < 1e-6);
    }

    #[test]
    fn correlation_of_identical_and_opposite() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        assert!((correlation(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let c = [4.0, 3.0, 2.0, 1.0];
        assert!((correlation(&a, &c).unwrap() + 1.0).abs() < 1e-12);
    }
}
