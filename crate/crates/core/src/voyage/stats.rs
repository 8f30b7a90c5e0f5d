use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::MotionRecord;

pub const KDE_GRID_POINTS: usize = 256;
/// Grid half-width beyond the data, in bandwidths.
pub const KDE_SPAN: f64 = 3.0;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn population_std(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

fn sample_std(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() || x.iter().any(|v| v.is_nan()) {
        return Err(Error::Statistics("median of empty or NaN data".into()));
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(quantile(&s, 0.5))
}

/// Mean of per-realization population standard deviations.
pub fn ensemble_std_of(channels: &[&[f64]]) -> Result<f64> {
    if channels.is_empty() || channels.iter().any(|c| c.is_empty()) {
        return Err(Error::Statistics("ensemble needs at least one non-empty realization".into()));
    }
    Ok(channels.iter().map(|c| population_std(c)).sum::<f64>() / channels.len() as f64)
}

/// Ensemble standard deviation of one motion channel (0 heave, 1 roll,
/// 2 pitch), ramp samples excluded.
pub fn ensemble_std(records: &[&MotionRecord], dof: usize) -> Result<f64> {
    let chans: Vec<&[f64]> = records
        .iter()
        .map(|r| &r.motion(dof)[r.meta.ramp_samples.min(r.len())..])
        .collect();
    ensemble_std_of(&chans)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bandwidth {
    Silverman,
    Fixed(f64),
}

/// Gaussian kernel density estimate tabulated on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kde {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub pdf: Vec<f64>,
}

impl Kde {
    /// Trapezoid integral of the tabulated pdf.
    pub fn mass(&self) -> f64 {
        crate::hull::trapz(&self.grid, &self.pdf)
    }

    /// Grid location of the largest density.
    pub fn mode(&self) -> f64 {
        let i = self
            .pdf
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.grid[i]
    }
}

/// Silverman's rule: 0.9·min(σ, IQR/1.34)·n^(−1/5).
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let sigma = sample_std(&s);
    let iqr = (quantile(&s, 0.75) - quantile(&s, 0.25)) / 1.34;
    let spread = if iqr > 0.0 { sigma.min(iqr) } else { sigma };
    0.9 * spread * (s.len() as f64).powf(-0.2)
}

/// Gaussian KDE on `points` grid nodes spanning the data ± 3 bandwidths.
///
/// The tabulated pdf is rescaled so its trapezoid integral is exactly one.
pub fn gaussian_kde(samples: &[f64], bandwidth: Bandwidth, points: usize) -> Result<Kde> {
    if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Statistics("KDE needs at least two finite samples".into()));
    }
    if points < 3 {
        return Err(Error::InvalidArgument("KDE grid needs at least 3 points".into()));
    }
    let h = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(samples),
        Bandwidth::Fixed(h) => h,
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Statistics(format!("degenerate KDE bandwidth {h}")));
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - KDE_SPAN * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + KDE_SPAN * h;
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points)
        .map(|i| if i == points - 1 { hi } else { lo + i as f64 * step })
        .collect();
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut pdf: Vec<f64> = grid
        .iter()
        .map(|g| {
            norm * samples
                .iter()
                .map(|s| (-0.5 * ((g - s) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    let mass = crate::hull::trapz(&grid, &pdf);
    pdf.iter_mut().for_each(|p| *p /= mass);
    Ok(Kde {
        bandwidth: h,
        grid,
        pdf,
    })
}

/// Absolute percentage error of `x` against `reference`.
pub fn ape(x: f64, reference: f64) -> Result<f64> {
    if x == reference {
        return Ok(0.0);
    }
    if !(reference.abs() > 0.0) || !x.is_finite() {
        return Err(Error::Statistics(format!(
            "percentage error undefined for reference {reference}"
        )));
    }
    Ok((x - reference).abs() / reference.abs() * 100.0)
}

/// Peak of the normalized cross-correlation of `a` and `b` over lags in
/// `[-max_lag, max_lag]`, and the lag (samples, `a` shifted) at which it occurs.
pub fn cross_correlation_peak(a: &[f64], b: &[f64], max_lag: usize) -> Result<(f64, i64)> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Statistics("cross-correlation needs equal-length series".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (sa, sb) = (population_std(a), population_std(b));
    if !(sa > 0.0 && sb > 0.0) {
        return Err(Error::Statistics("cross-correlation of a constant series".into()));
    }
    let n = a.len() as i64;
    let max_lag = (max_lag as i64).min(n - 1);
    let mut best = (f64::NEG_INFINITY, 0i64);
    for lag in -max_lag..=max_lag {
        let mut s = 0.0;
        for i in 0..n {
            let j = i + lag;
            if (0..n).contains(&j) {
                s += (a[j as usize] - ma) * (b[i as usize] - mb);
            }
        }
        let r = s / (n as f64 * sa * sb);
        if r > best.0 || (r == best.0 && lag.abs() < best.1.abs()) {
            best = (r, lag);
        }
    }
    Ok(best)
}
