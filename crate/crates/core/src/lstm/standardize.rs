use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-channel z-scoring by training-set statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target_mean: Vec<f64>,
    pub target_std: Vec<f64>,
}

fn channel_stats(seqs: &[&[f64]], width: usize, what: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut n = 0usize;
    let mut mean = vec![0.0; width];
    for s in seqs {
        if s.len() % width != 0 {
            return Err(Error::Dimension(format!(
                "{what} sequence length {} is not a multiple of {width}",
                s.len()
            )));
        }
        for row in s.chunks_exact(width) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
            n += 1;
        }
    }
    if n < 2 {
        return Err(Error::Standardization(format!("too few {what} samples ({n})")));
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; width];
    for s in seqs {
        for row in s.chunks_exact(width) {
            for ((acc, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
    }
    let mut std = Vec::with_capacity(width);
    for (c, v) in var.iter().enumerate() {
        let sd = (v / n as f64).sqrt();
        if !(sd > 1e-12 * (1.0 + mean[c].abs())) || !sd.is_finite() {
            return Err(Error::Standardization(format!(
                "{what} channel {c} has zero variance"
            )));
        }
        std.push(sd);
    }
    Ok((mean, std))
}

fn transform(x: &[f64], mean: &[f64], std: &[f64], forward: bool) -> Result<Vec<f64>> {
    let w = mean.len();
    if x.len() % w != 0 {
        return Err(Error::Dimension(format!(
            "sequence length {} is not a multiple of {w} channels",
            x.len()
        )));
    }
    Ok(x.chunks_exact(w)
        .flat_map(|row| {
            row.iter().enumerate().map(move |(c, v)| {
                if forward {
                    (v - mean[c]) / std[c]
                } else {
                    v * std[c] + mean[c]
                }
            })
        })
        .collect())
}

impl Standardizer {
    /// Fits population statistics over row-major training sequences.
    pub fn fit(
        inputs: &[&[f64]],
        targets: &[&[f64]],
        input_width: usize,
        target_width: usize,
    ) -> Result<Self> {
        let (input_mean, input_std) = channel_stats(inputs, input_width, "input")?;
        let (target_mean, target_std) = channel_stats(targets, target_width, "target")?;
        Ok(Self {
            input_mean,
            input_std,
            target_mean,
            target_std,
        })
    }

    pub fn input_width(&self) -> usize {
        self.input_mean.len()
    }

    pub fn target_width(&self) -> usize {
        self.target_mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_mean.len() != self.input_std.len()
            || self.target_mean.len() != self.target_std.len()
        {
            return Err(Error::Dimension("standardizer mean/std widths differ".into()));
        }
        let all = self
            .input_mean
            .iter()
            .chain(&self.input_std)
            .chain(&self.target_mean)
            .chain(&self.target_std);
        if all.clone().any(|v| !v.is_finite())
            || self.input_std.iter().chain(&self.target_std).any(|s| *s <= 0.0)
        {
            return Err(Error::Standardization("non-finite or non-positive statistic".into()));
        }
        Ok(())
    }

    pub fn apply_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        transform(x, &self.input_mean, &self.input_std, true)
    }

    pub fn invert_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        transform(x, &self.input_mean, &self.input_std, false)
    }

    pub fn apply_target(&self, y: &[f64]) -> Result<Vec<f64>> {
        transform(y, &self.target_mean, &self.target_std, true)
    }

    pub fn invert_target(&self, y: &[f64]) -> Result<Vec<f64>> {
        transform(y, &self.target_mean, &self.target_std, false)
    }
}
