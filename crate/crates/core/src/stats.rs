//! Verification statistics for Monte Carlo batches: centering, bootstrap
//! variance intervals, Kolmogorov-Smirnov normality and ESD distance.
//!
//! The exact expectation of the linear statistic is not available in
//! simulation, so centering uses the mean across replicates. This adds an
//! `O(1/√R)` bias that the acceptance bands absorb.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::fcdist::FussCatalanFamily;
use crate::rmt_sim::ReplicateBatch;
use crate::summation::compensated_sum;
use crate::variance::VarianceBreakdown;

pub const MIN_CENTERING_SAMPLES: usize = 30;
pub const MIN_KS_SAMPLES: usize = 100;
pub const CI_LEVEL: f64 = 0.95;

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance (two-pass, compensated).
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    compensated_sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64
}

/// `(S_r - mean S) / √predicted` for every replicate.
pub fn center_and_standardize(statistics: &[f64], predicted_variance: f64) -> Result<Vec<f64>> {
    if !(predicted_variance > 0.0 && predicted_variance.is_finite()) {
        return Err(Error::domain(
            "center_and_standardize",
            format!("predicted variance {predicted_variance} must be positive"),
        ));
    }
    if statistics.len() < MIN_CENTERING_SAMPLES {
        return Err(Error::Precondition(format!(
            "centering needs at least {MIN_CENTERING_SAMPLES} replicates, got {}",
            statistics.len()
        )));
    }
    let m = mean(statistics);
    let scale = predicted_variance.sqrt();
    Ok(statistics.iter().map(|s| (s - m) / scale).collect())
}

pub fn center_batch(batch: &ReplicateBatch, predicted_variance: f64) -> Result<Vec<f64>> {
    center_and_standardize(&batch.statistics(), predicted_variance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceInterval {
    pub variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Sample variance with a seeded percentile-bootstrap 95% interval. The
/// interval is widened if needed so that it always contains the estimate.
pub fn variance_with_ci(statistics: &[f64], resamples: usize, seed: u64) -> Result<VarianceInterval> {
    if statistics.len() < MIN_CENTERING_SAMPLES {
        return Err(Error::Precondition(format!(
            "variance interval needs at least {MIN_CENTERING_SAMPLES} values, got {}",
            statistics.len()
        )));
    }
    if resamples < 2 {
        return Err(Error::Precondition("at least two bootstrap resamples are required".into()));
    }
    let variance = sample_variance(statistics);
    let n = statistics.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot: Vec<f64> = Vec::with_capacity(resamples);
    let mut draw = vec![0.0; n];
    for _ in 0..resamples {
        for d in draw.iter_mut() {
            *d = statistics[rng.random_range(0..n)];
        }
        boot.push(sample_variance(&draw));
    }
    boot.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - CI_LEVEL);
    let lo = percentile(&boot, alpha);
    let hi = percentile(&boot, 1.0 - alpha);
    Ok(VarianceInterval {
        variance,
        ci_low: lo.min(variance),
        ci_high: hi.max(variance),
    })
}

/// Linear-interpolated percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let p = if x < 1.18 {
        // small-x form: P(K ≤ x) = √(2π)/x Σ exp(-(2k-1)² π² / (8x²))
        let c = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=20)
            .map(|k| {
                let j = f64::from(2 * k - 1);
                (c * j * j).exp()
            })
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let k = f64::from(k);
                sign * (-2.0 * k * k * x * x).exp()
            })
            .sum();
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// One-sample KS test of `values` against the standard normal.
pub fn ks_normality(values: &[f64]) -> Result<KsResult> {
    if values.len() < MIN_KS_SAMPLES {
        return Err(Error::Precondition(format!(
            "KS test needs at least {MIN_KS_SAMPLES} values, got {}",
            values.len()
        )));
    }
    let normal = Normal::standard();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let statistic = ks_sup_distance(&sorted, |x| normal.cdf(x));
    let n = sorted.len() as f64;
    let sn = n.sqrt();
    let p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * statistic);
    Ok(KsResult { statistic, p_value })
}

fn ks_sup_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            let above = (i + 1) as f64 / n - c;
            let below = c - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Sup-distance between the pooled empirical CDF of `spectra` and the
/// limiting distribution function of `family`.
pub fn esd_ks_distance(spectra: &[Vec<f64>], family: &FussCatalanFamily) -> Result<f64> {
    let mut pooled: Vec<f64> = spectra.iter().flatten().copied().collect();
    if pooled.is_empty() {
        return Err(Error::Precondition("no retained spectra".into()));
    }
    pooled.sort_by(f64::total_cmp);
    Ok(ks_sup_distance(&pooled, |x| family.cdf(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StandardizedMoments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl StandardizedMoments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let m = mean(values);
        let central = |k: i32| compensated_sum(values.iter().map(|v| (v - m).powi(k))) / n;
        let m2 = central(2);
        StandardizedMoments {
            mean: m,
            variance: sample_variance(values),
            skewness: central(3) / m2.powf(1.5),
            excess_kurtosis: central(4) / (m2 * m2) - 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltVerdict {
    pub empirical_variance: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub predicted: VarianceBreakdown,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub standardized_sample_moments: StandardizedMoments,
}

impl CltVerdict {
    pub fn assess(
        statistics: &[f64],
        predicted: VarianceBreakdown,
        bootstrap_resamples: usize,
        bootstrap_seed: u64,
    ) -> Result<Self> {
        let standardized = center_and_standardize(statistics, predicted.total)?;
        let interval = variance_with_ci(statistics, bootstrap_resamples, bootstrap_seed)?;
        let ks = ks_normality(&standardized)?;
        Ok(CltVerdict {
            empirical_variance: interval.variance,
            ci_low: interval.ci_low,
            ci_high: interval.ci_high,
            predicted,
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
            standardized_sample_moments: StandardizedMoments::of(&standardized),
        })
    }

    /// Whether `[ci_low, ci_high]` meets the band `predicted ± rel · predicted`.
    pub fn ci_overlaps_band(&self, rel: f64) -> bool {
        let p = self.predicted.total;
        self.ci_high >= p * (1.0 - rel) && self.ci_low <= p * (1.0 + rel)
    }
}
