//! Descriptive statistics for hull-distance distributions: moments,
//! Jarque-Bera normality score, histograms, and two-sample comparisons.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct JarqueBera {
    pub statistic: f64,
    /// Chi-square(2) tail approximation: exp(-statistic / 2).
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (divisor n-1); 0 for n = 1.
    pub sample_std: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub jarque_bera: Option<JarqueBera>,
    /// Set when the sample is constant (JB omitted).
    pub degenerate: bool,
    pub histogram: Histogram,
}

/// Moments, JB statistic (n >= 8 and nonzero spread), and a uniform-width
/// histogram spanning [min, max]. Boundary values fall in the lower bin
/// except the global max, which lands in the last.
pub fn summarize(values: &[f64], bins: usize) -> Result<DistanceSummary> {
    let n = values.len();
    if n < 1 {
        return Err(Error::argument("need at least one value"));
    }
    if bins < 1 {
        return Err(Error::argument("need at least one bin"));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::argument("non-finite value"));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let sample_std = if n > 1 { (m2 * nf / (nf - 1.0)).sqrt() } else { 0.0 };
    let degenerate = m2 == 0.0;
    let (skewness, excess_kurtosis) = if degenerate {
        (0.0, 0.0)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };
    let jarque_bera = if n >= 8 && !degenerate {
        let statistic = nf / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
        Some(JarqueBera { statistic, p_value: (-statistic / 2.0).exp() })
    } else {
        None
    };

    let width = (max - min) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = if width == 0.0 || v >= max {
            bins - 1
        } else {
            // boundary values belong to the lower bin
            let t = (v - min) / width;
            let f = t.floor();
            let i = if t == f && t > 0.0 { f as usize - 1 } else { f as usize };
            i.min(bins - 1)
        };
        counts[idx] += 1;
    }

    Ok(DistanceSummary {
        n,
        mean,
        sample_std,
        min,
        max,
        skewness,
        excess_kurtosis,
        jarque_bera,
        degenerate,
        histogram: Histogram { edges, counts },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub mean_a: f64,
    pub mean_b: f64,
    pub ratio_b_over_a: f64,
    /// Mann-Whitney U for sample b against sample a.
    pub u_statistic: f64,
    /// Two-sided normal-approximation p-value with tie correction.
    pub p_value: f64,
}

/// Means, their ratio, and a two-sample Mann-Whitney rank-sum test.
pub fn compare_sets(a: &[f64], b: &[f64]) -> Result<Comparison> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::argument("both samples must be non-empty"));
    }
    let mean_a = a.iter().sum::<f64>() / a.len() as f64;
    let mean_b = b.iter().sum::<f64>() / b.len() as f64;

    // midranks over the pooled sample
    let mut pooled: Vec<(f64, usize)> = a
        .iter()
        .map(|&v| (v, 0))
        .chain(b.iter().map(|&v| (v, 1)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let total = pooled.len();
    let mut ranks = vec![0.0f64; total];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < total {
        let mut j = i;
        while j + 1 < total && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for r in ranks.iter_mut().take(j + 1).skip(i) {
            *r = rank;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let rank_sum_b: f64 = pooled
        .iter()
        .zip(&ranks)
        .filter(|((_, src), _)| *src == 1)
        .map(|(_, r)| r)
        .sum();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let u = rank_sum_b - nb * (nb + 1.0) / 2.0;
    let mean_u = na * nb / 2.0;
    let nt = na + nb;
    let var_u = na * nb / 12.0 * (nt + 1.0 - tie_term / (nt * (nt - 1.0)));
    let p_value = if var_u <= 0.0 {
        1.0
    } else {
        let z = (u - mean_u) / var_u.sqrt();
        erfc_abs_over_sqrt2(z)
    };

    Ok(Comparison {
        mean_a,
        mean_b,
        ratio_b_over_a: mean_b / mean_a,
        u_statistic: u,
        p_value,
    })
}

/// Two-sided normal tail: P(|Z| >= |z|) = erfc(|z| / sqrt(2)).
fn erfc_abs_over_sqrt2(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Abramowitz & Stegun 7.1.26-style rational approximation, accurate to
/// ~1.5e-7, which is ample for reporting rank-test p-values.
fn erfc(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    poly * (-x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_moments() {
        let s = summarize(&[1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.sample_std, 1.0);
        assert_eq!((s.min, s.max), (1.0, 3.0));
        assert_eq!(s.histogram.counts.iter().sum::<u64>(), 3);
    }

    #[test]
    fn symmetric_sample_zero_skew() {
        let s = summarize(&[-2.0, -1.0, 0.0, 1.0, 2.0], 5).unwrap();
        assert!(s.skewness.abs() <= 1e-12);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let s = summarize(&[4.0; 10], 4).unwrap();
        assert!(s.degenerate);
        assert!(s.jarque_bera.is_none());
        assert_eq!(s.histogram.counts.iter().sum::<u64>(), 10);
    }

    #[test]
    fn histogram_partition() {
        let vals = [0.0, 0.25, 0.5, 0.75, 1.0];
        let s = summarize(&vals, 4).unwrap();
        // boundaries to the lower bin except the global max
        assert_eq!(s.histogram.counts, vec![2, 1, 1, 1]);
    }

    #[test]
    fn jb_on_synthetic_normal() {
        // uniform draws mapped through an inverse-normal approximation
        let mut rng = crate::rng::Rng::seed_from_u64(100);
        let vals: Vec<f64> = (0..100_000).map(|_| inv_normal_cdf(rng.next_f64())).collect();
        let s = summarize(&vals, 50).unwrap();
        let jb = s.jarque_bera.unwrap();
        assert!(jb.p_value > 0.01, "JB {} p {}", jb.statistic, jb.p_value);
    }

    // Acklam's inverse normal CDF approximation (test-side oracle input)
    fn inv_normal_cdf(p: f64) -> f64 {
        let p = p.clamp(1e-12, 1.0 - 1e-12);
        const A: [f64; 6] = [
            -3.969683028665376e+01,
            2.209460984245205e+02,
            -2.759285104469687e+02,
            1.383577518672690e+02,
            -3.066479806614716e+01,
            2.506628277459239e+00,
        ];
        const B: [f64; 5] = [
            -5.447609879822406e+01,
            1.615858368580409e+02,
            -1.556989798598866e+02,
            6.680131188771972e+01,
            -1.328068155288572e+01,
        ];
        const C: [f64; 6] = [
            -7.784894002430293e-03,
            -3.223964580411365e-01,
            -2.400758277161838e+00,
            -2.549732539343734e+00,
            4.374664141464968e+00,
            2.938163982698783e+00,
        ];
        const D: [f64; 4] = [
            7.784695709041462e-03,
            3.224671290700398e-01,
            2.445134137142996e+00,
            3.754408661907416e+00,
        ];
        let plow = 0.02425;
        if p < plow {
            let q = (-2.0 * p.ln()).sqrt();
            (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        } else if p <= 1.0 - plow {
            let q = p - 0.5;
            let r = q * q;
            (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
                / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
        } else {
            let q = (-2.0 * (1.0 - p).ln()).sqrt();
            -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        }
    }

    #[test]
    fn compare_identical_and_scaled() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let c = compare_sets(&a, &a).unwrap();
        assert_eq!(c.ratio_b_over_a, 1.0);
        assert_eq!(c.u_statistic, 8.0); // midpoint na*nb/2
        let c = compare_sets(&[1.0, 1.0], &[10.0, 10.0]).unwrap();
        assert_eq!(c.ratio_b_over_a, 10.0);
        assert!(compare_sets(&[], &a).is_err());
    }

    #[test]
    fn clearly_shifted_samples_give_small_p() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..50).map(|i| 1000.0 + i as f64).collect();
        let c = compare_sets(&a, &b).unwrap();
        assert!(c.p_value < 1e-3, "p {}", c.p_value);
    }

    proptest! {
        #[test]
        fn moments_affine_invariant(
            vals in proptest::collection::vec(-100.0f64..100.0, 8..40),
            a in 0.1f64..10.0,
            b in -50.0f64..50.0,
        ) {
            let s1 = summarize(&vals, 5).unwrap();
            prop_assume!(!s1.degenerate);
            let mapped: Vec<f64> = vals.iter().map(|v| a * v + b).collect();
            let s2 = summarize(&mapped, 5).unwrap();
            prop_assert!((s1.skewness - s2.skewness).abs() <= 1e-8 * (1.0 + s1.skewness.abs()));
            prop_assert!((s1.excess_kurtosis - s2.excess_kurtosis).abs() <= 1e-8 * (1.0 + s1.excess_kurtosis.abs()));
        }

        #[test]
        fn every_value_in_exactly_one_bin(
            vals in proptest::collection::vec(-1000.0f64..1000.0, 1..60),
            bins in 1usize..10,
        ) {
            let s = summarize(&vals, bins).unwrap();
            prop_assert_eq!(s.histogram.counts.iter().sum::<u64>(), vals.len() as u64);
        }
    }
}
