//! Small statistical helpers: moments, regression, Kolmogorov-Smirnov tests.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Half-width of the normal-approximation 95% interval for the mean.
pub fn ci95_half_width(xs: &[f64]) -> f64 {
    1.96 * (variance(xs) / xs.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn least_squares(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if sxx > 0.0 && syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Pearson correlation over paired samples.
pub fn correlation(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Kolmogorov survival function `Q(l) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 l^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(x)
}

/// One-sample Kolmogorov-Smirnov test against `N(0, 1)`. Returns the
/// statistic and the asymptotic p-value with the usual effective-size
/// correction `(sqrt(n) + 0.12 + 0.11 / sqrt(n)) D`.
pub fn normality_test(samples: &[f64]) -> Result<(f64, f64)> {
    const MIN_SAMPLES: usize = 20;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_SAMPLES,
            found: samples.len(),
        });
    }
    if samples.iter().all(|&x| x == samples[0]) {
        return Err(Error::DegenerateSample);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = standard_normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    Ok((d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            found: a.len().min(b.len()),
        });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    Ok((d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::Normal;

    fn normal_quantiles(m: usize) -> Vec<f64> {
        let n = Normal::new(0.0, 1.0).unwrap();
        (1..=m).map(|i| n.inverse_cdf((i as f64 - 0.5) / m as f64)).collect()
    }

    #[test]
    fn exact_quantiles_have_tiny_statistic() {
        let m = 500;
        let (d, p) = normality_test(&normal_quantiles(m)).unwrap();
        assert!(d <= 1.0 / m as f64 + 1e-9, "d = {d}");
        assert!(p > 0.99);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(matches!(normality_test(&[1.0; 50]), Err(Error::DegenerateSample)));
        assert!(matches!(normality_test(&[1.0, 2.0]), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn shifted_sample_rejected() {
        let xs: Vec<f64> = normal_quantiles(200).into_iter().map(|x| x + 10.0).collect();
        let (d, p) = normality_test(&xs).unwrap();
        assert!(d > 0.99);
        assert!(p < 1e-6);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.3581) is the 5% critical point, Q(1.6276) the 1% point.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-3);
    }

    #[test]
    fn two_sample_identical() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let (d, p) = ks_two_sample(&a, &a).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn regression_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        let fit = least_squares(&pts);
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
