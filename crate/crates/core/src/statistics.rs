//! Summary quantities over persistence diagrams: multiplicative
//! persistence, its per-degree maximum, the scaling denominator
//! `(log n / log log n)^(1/k)`, least-squares fits, and histograms.

use alloc::vec::Vec;

use crate::geometry::Metric;
use crate::math;
use crate::persistence::{truncation_check, PersistenceDiagram, PersistencePair};
use crate::{invalid, Result};

/// Maximal multiplicative persistence of one degree, with the scaling
/// context needed to compare against the growth law.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPersistenceReport {
    pub k: usize,
    /// Max of death/birth over finite nonzero degree-k pairs; absent when
    /// no such pair exists, or when essential classes are present and the
    /// caller chose not to exclude them (the max is then not a finite real).
    pub pi_max: Option<f64>,
    pub argmax_pair: Option<PersistencePair>,
    pub n_intensity: f64,
    pub delta_k: f64,
    pub ratio: Option<f64>,
    pub essential_count: usize,
    pub truncated: bool,
}

/// Ordinary least squares summary.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub n_samples: usize,
}

/// death/birth of a finite pair born after radius 0.
pub fn multiplicative_persistence(pair: &PersistencePair) -> Result<f64> {
    if pair.is_essential() {
        return Err(invalid("essential classes have no finite persistence ratio"));
    }
    if !(pair.birth > 0.0) {
        return Err(invalid("persistence ratio requires birth > 0"));
    }
    Ok(pair.death / pair.birth)
}

/// The scaling denominator `(log n / log log n)^(1/k)`, natural logs.
pub fn delta_k(n: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("degree k must be at least 1"));
    }
    if !(n > core::f64::consts::E) || !n.is_finite() {
        return Err(invalid("delta_k needs n > e so that log log n > 0"));
    }
    let ln_n = math::ln(n);
    Ok(math::powf(ln_n / math::ln(ln_n), 1.0 / k as f64))
}

/// Maximal multiplicative persistence in degree `k`, reported against
/// `delta_k(n_intensity, k)`. Essential degree-k classes never contribute a
/// finite ratio: with `exclude_essential` they are ignored (the convention
/// used by every experiment here), without it their presence makes `pi_max`
/// absent since the true maximum is unbounded. The metric feeds the
/// truncation flag, which exempts the flat torus's two expected degree-1
/// classes.
pub fn max_persistence(
    diag: &PersistenceDiagram,
    k: usize,
    exclude_essential: bool,
    n_intensity: f64,
    metric: Metric,
) -> Result<MaxPersistenceReport> {
    if k == 0 {
        return Err(invalid("degree k must be at least 1"));
    }
    let delta = delta_k(n_intensity, k)?;
    let essential_count = diag.essential_count(k);
    let truncated = truncation_check(diag, k, metric);

    let mut best: Option<&PersistencePair> = None;
    if exclude_essential || essential_count == 0 {
        for p in diag.pairs(k) {
            if p.is_essential() || p.is_zero_length() {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => p.death / p.birth > b.death / b.birth,
            };
            if better {
                best = Some(p);
            }
        }
    }

    let pi_max = best.map(|p| p.death / p.birth);
    Ok(MaxPersistenceReport {
        k,
        pi_max,
        argmax_pair: best.cloned(),
        n_intensity,
        delta_k: delta,
        ratio: pi_max.map(|pi| pi / delta),
        essential_count,
        truncated,
    })
}

/// Ordinary least squares of y on x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(invalid("fit inputs must have equal length"));
    }
    if xs.len() < 2 {
        return Err(invalid("fit needs at least two samples"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(invalid("fit inputs must be finite"));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(invalid("fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss += r * r;
    }
    Ok(FitResult {
        slope,
        intercept,
        residual_rms: math::sqrt(ss / n),
        n_samples: xs.len(),
    })
}

/// Equal-width histogram over [min, max]; every bin is half-open except the
/// last, which is closed on the right so the maximum lands inside.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<(f64, f64, usize)>> {
    if values.is_empty() {
        return Err(invalid("histogram needs at least one value"));
    }
    if bins == 0 {
        return Err(invalid("histogram needs at least one bin"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid("histogram values must be finite"));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = alloc::vec![0usize; bins];
    for &v in values {
        let idx = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect())
}
