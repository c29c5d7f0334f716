//! Moments, tail frequencies, bootstrap intervals, Kolmogorov-Smirnov tests
//! and log-log slope fits over immutable sample buffers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};
use crate::randfield::{Layer, SeedSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFreq {
    pub threshold: f64,
    pub freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub count: usize,
    pub mean: f64,
    pub centering: f64,
    /// `p -> mean |X - c|^p`
    pub central_moments: BTreeMap<u32, f64>,
    /// `p -> mean (X - c)_+^p`
    pub positive_moments: BTreeMap<u32, f64>,
    pub tail_freqs: Vec<TailFreq>,
    pub bootstrap: BTreeMap<String, (f64, f64)>,
    pub seed: Option<SeedSpec>,
}

pub fn mc_summary(samples: &[f64], centering: f64, powers: &[u32], thresholds: &[f64]) -> Result<McSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if powers.contains(&0) {
        return Err(domain("moment powers must be at least 1"));
    }
    let n = samples.len() as f64;
    let mut central_moments = BTreeMap::new();
    let mut positive_moments = BTreeMap::new();
    for &p in powers {
        let (mut abs, mut pos) = (0.0, 0.0);
        for &x in samples {
            let d = x - centering;
            let a = d.abs().powi(p as i32);
            abs += a;
            if d > 0.0 {
                pos += a;
            }
        }
        central_moments.insert(p, abs / n);
        positive_moments.insert(p, pos / n);
    }
    let tail_freqs = thresholds
        .iter()
        .map(|&t| TailFreq { threshold: t, freq: samples.iter().filter(|&&x| x >= t).count() as f64 / n })
        .collect();
    Ok(McSummary {
        count: samples.len(),
        mean: mean(samples)?,
        centering,
        central_moments,
        positive_moments,
        tail_freqs,
        bootstrap: BTreeMap::new(),
        seed: None,
    })
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Unbiased sample variance.
pub fn variance(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::EmptySample);
    }
    let m = mean(samples)?;
    Ok(samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (samples.len() - 1) as f64)
}

/// Standard error of the sample mean.
pub fn mean_se(samples: &[f64]) -> Result<f64> {
    Ok((variance(samples)? / samples.len() as f64).sqrt())
}

/// Standard error of the sample variance, from the fourth central moment.
pub fn variance_se(samples: &[f64]) -> Result<f64> {
    let n = samples.len() as f64;
    let m = mean(samples)?;
    let v = variance(samples)?;
    let m4 = samples.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    Ok(((m4 - v * v * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt())
}

/// Percentile bootstrap with `b` resamples drawn from the bootstrap
/// substream of `seed`.
pub fn bootstrap_ci<F>(samples: &[f64], statistic: F, b: usize, level: f64, seed: &SeedSpec) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if b < 100 {
        return Err(domain(format!("bootstrap needs at least 100 resamples, got {b}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("confidence level {level} outside (0,1)")));
    }
    let mut cursor = seed.stream(Layer::Bootstrap).cursor();
    let n = samples.len();
    let mut buf = vec![0.0; n];
    let mut stats: Vec<f64> = (0..b)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[cursor.next_index(n)];
            }
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile_sorted(&stats, alpha);
    let hi = quantile_sorted(&stats, 1.0 - alpha);
    // Keep the point estimate inside the reported interval.
    let point = statistic(samples);
    Ok((lo.min(point), hi.max(point)))
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&s, 0.5))
}

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidCdf(format!("cdf({x}) = {f}")));
        }
        if f < prev {
            return Err(Error::InvalidCdf(format!("cdf decreases at {x}")));
        }
        prev = f;
        d = d.max((k + 1) as f64 / n - f).max(f - k as f64 / n);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok((d, kolmogorov_q(lambda)))
}

/// Two-sample KS statistic and asymptotic p-value for independent samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
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

/// Standard deviation of `statistic` over `b` bootstrap resamples.
pub fn bootstrap_se<F>(samples: &[f64], statistic: F, b: usize, seed: &SeedSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if b < 100 {
        return Err(domain(format!("bootstrap needs at least 100 resamples, got {b}")));
    }
    let mut cursor = seed.stream(Layer::Bootstrap).cursor();
    let n = samples.len();
    let mut buf = vec![0.0; n];
    let stats: Vec<f64> = (0..b)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[cursor.next_index(n)];
            }
            statistic(&buf)
        })
        .collect();
    Ok(variance(&stats)?.sqrt())
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series converges fast for small lambda.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in (1..20).step_by(2) {
            s += (c * (k * k) as f64).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let t = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
            s += if k % 2 == 1 { t } else { -t };
            if t < 1e-17 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// KS distance to the normal law with the sample's own mean and variance.
pub fn normal_ks(samples: &[f64]) -> Result<(f64, f64)> {
    let m = mean(samples)?;
    let sd = variance(samples)?.sqrt();
    let normal = Normal::new(m, sd).map_err(|e| domain(e.to_string()))?;
    ks_test(samples, |x| normal.cdf(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    #[serde(with = "crate::serde_float")]
    pub slope: f64,
    #[serde(with = "crate::serde_float")]
    pub intercept: f64,
    #[serde(with = "crate::serde_float")]
    pub r2: f64,
    #[serde(with = "crate::serde_float")]
    pub slope_se: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(domain(format!("line fit needs at least 3 paired points, got {}", xs.len().min(ys.len()))));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("line fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).max(0.0) };
    let slope_se = (sse / (n - 2.0) / sxx).sqrt();
    Ok(LineFit { slope, intercept, r2, slope_se })
}

/// Least-squares fit of `ln value` against `ln N`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(domain("log-log fit needs positive N and values"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
}
