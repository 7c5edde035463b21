//! Small statistics toolkit for the acceptance experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// Total variation distance between two probability vectors on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Pearson chi-square goodness of fit of `counts` against `probs`.
///
/// Returns `(statistic, p_value)`. Categories with zero expected mass must
/// have zero counts and are skipped.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        let e = p * n as f64;
        stat += (c as f64 - e).powi(2) / e;
        dof += 1;
    }
    let dof = dof.saturating_sub(1).max(1);
    let pval = ChiSquared::new(dof as f64).map(|d| 1.0 - d.cdf(stat)).unwrap_or(f64::NAN);
    (stat, pval)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MeanSe {
        mean,
        se: (var / n as f64).sqrt(),
        n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleStats {
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    pub mean_diff: f64,
    /// Standard error of `mean_diff` from the two sample variances.
    pub mean_diff_se: f64,
}

/// Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value, and
/// the difference of means.
pub fn two_sample_stats(xs: &[f64], ys: &[f64]) -> Result<TwoSampleStats> {
    if xs.is_empty() || ys.is_empty() {
        return Err(invalid("samples", "both samples must be nonempty"));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let en = ((na * nb) as f64 / (na + nb) as f64).sqrt();
    let ks_pvalue = kolmogorov_q((en + 0.12 + 0.11 / en) * d);
    let ma = mean_se(xs);
    let mb = mean_se(ys);
    Ok(TwoSampleStats {
        ks_statistic: d,
        ks_pvalue,
        mean_diff: ma.mean - mb.mean,
        mean_diff_se: (ma.se.powi(2) + mb.se.powi(2)).sqrt(),
    })
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
}

/// Weighted least squares `y = intercept + slope x` with per-point standard
/// errors `sy`.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], sy: &[f64]) -> LinearFit {
    let w: Vec<f64> = sy.iter().map(|s| 1.0 / (s * s)).collect();
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let syy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * syy) / det;
    LinearFit {
        slope,
        slope_se: (sw / det).sqrt(),
        intercept: (sxx * syy - sx * sxy) / det,
    }
}

/// Ordinary least squares with the coefficient of determination.
pub fn linear_fit_r2(x: &[f64], y: &[f64]) -> (LinearFit, f64) {
    let ones = vec![1.0; x.len()];
    let fit = weighted_linear_fit(x, y, &ones);
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(x, y)| (y - fit.intercept - fit.slope * x).powi(2))
        .sum();
    (fit, 1.0 - ss_res / ss_tot)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_and_disjoint() {
        let xs = [0.1, 0.5, 0.7, 0.9];
        let s = two_sample_stats(&xs, &xs).unwrap();
        assert_eq!(s.ks_statistic, 0.0);
        assert_eq!(s.ks_pvalue, 1.0);
        let s = two_sample_stats(&[0.0], &[1.0]).unwrap();
        assert_eq!(s.ks_statistic, 1.0);
        assert_eq!(s.mean_diff, -1.0);
        assert!(two_sample_stats(&[], &[1.0]).is_err());
    }

    #[test]
    fn ks_handles_ties() {
        let s = two_sample_stats(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((s.ks_statistic - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ~ 0.049, Q(1.63) ~ 0.0098
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 5e-4);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let (stat, p) = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5]);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fits() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (fit, r2) = linear_fit_r2(&x, &y);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &y) - 1.0).abs() < 1e-12);
        assert_eq!(total_variation(&[0.5, 0.5], &[1.0, 0.0]), 0.5);
    }
}
