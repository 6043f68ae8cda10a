//! Discrete columns as continuous ones.
//!
//! The Bernoulli trick one-hot encodes a categorical column. The Gamma trick
//! adds `ε ~ Beta(a, b)` noise to natural numbers so they can be modeled
//! (and scaled) as Gamma. Recovery matches the fitted Gamma mean minus the
//! expected noise.

use rand::distr::Bernoulli;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{fit_empirical, CanonicalParams, Family};
use crate::sampling::{column_rng, BetaSampler};

pub const DEFAULT_BETA_A: f64 = 1.1;
pub const DEFAULT_BETA_B: f64 = 30.0;
pub const DEFAULT_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub beta_a: f64,
    pub beta_b: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn new(seed: u64) -> Self {
        Self { beta_a: DEFAULT_BETA_A, beta_b: DEFAULT_BETA_B, seed }
    }

    /// `E[ε] = a / (a + b)`.
    pub fn expected(&self) -> f64 {
        self.beta_a / (self.beta_a + self.beta_b)
    }

    fn sampler(&self) -> Result<BetaSampler> {
        BetaSampler::new(self.beta_a, self.beta_b).ok_or_else(|| {
            Error::Invalid(format!(
                "noise Beta({}, {}) needs positive finite shapes",
                self.beta_a, self.beta_b
            ))
        })
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::new(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrickKind {
    /// Noise on a binary or count column.
    Gamma,
    /// One-hot, then noise on each indicator.
    BernoulliThenGamma,
    /// One-hot only; the indicators stay Bernoulli.
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrickRecord {
    pub source_column: String,
    pub trick: TrickKind,
    /// Produced columns, in category order for one-hot tricks.
    pub group: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    pub original_family: Family,
    /// Category labels in code order (categorical sources only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

/// One-hot expansion of category codes `0..k`. Returns one indicator
/// column per class; entries that are masked out stay masked (and NaN).
pub fn apply_bernoulli_trick(values: &[f64], mask: &[bool], k: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![f64::NAN; values.len()]; k];
    for (row, (&x, &present)) in values.iter().zip(mask).enumerate() {
        if !present {
            continue;
        }
        if !(x >= 0.0 && x.fract() == 0.0 && x < k as f64) {
            return Err(Error::InvalidCategory { value: x, k });
        }
        for (class, col) in out.iter_mut().enumerate() {
            col[row] = if class == x as usize { 1.0 } else { 0.0 };
        }
    }
    Ok(out)
}

/// Adds Beta noise to natural-number data and fits a Gamma to the result.
///
/// Draws come from stream `stream` of `noise.seed`. A draw is rejected if
/// it would not keep `floor(x + ε) = x`.
pub fn apply_gamma_trick(
    values: &[f64],
    mask: &[bool],
    noise: &NoiseConfig,
    stream: u64,
) -> Result<(Vec<f64>, CanonicalParams)> {
    let beta = noise.sampler()?;
    let mut rng = column_rng(noise.seed, stream);
    let mut out = vec![f64::NAN; values.len()];
    for (slot, (&x, &present)) in out.iter_mut().zip(values.iter().zip(mask)) {
        if !present {
            continue;
        }
        if !(x >= 0.0 && x.is_finite() && x.fract() == 0.0) {
            return Err(Error::InvalidCount { value: x });
        }
        *slot = loop {
            let eps = beta.sample(&mut rng);
            let noised = x + eps;
            if eps > 0.0 && eps < 1.0 && noised.floor() == x {
                break noised;
            }
        };
    }
    let fitted = fit_empirical(Family::Gamma, &out, mask)?;
    Ok((out, fitted))
}

fn gamma_mean(gamma: &CanonicalParams) -> f64 {
    gamma[0] / gamma[1]
}

/// `p = clamp(ᾱ/β̄ − E[ε], 0, 1)`.
pub fn recover_bernoulli(gamma: &CanonicalParams, noise: &NoiseConfig) -> f64 {
    (gamma_mean(gamma) - noise.expected()).clamp(0.0, 1.0)
}

/// `λ = max(δ, ᾱ/β̄ − E[ε])`.
pub fn recover_poisson(gamma: &CanonicalParams, noise: &NoiseConfig, delta: f64) -> f64 {
    delta.max(gamma_mean(gamma) - noise.expected())
}

/// Normalizes per-class means into a probability vector. An all-zero input
/// yields the uniform vector and `true`.
pub fn recover_categorical(means: &[f64]) -> (Vec<f64>, bool) {
    let total: f64 = means.iter().sum();
    if total > 0.0 {
        (means.iter().map(|m| m / total).collect(), false)
    } else {
        (vec![1.0 / means.len() as f64; means.len()], true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryKind {
    Bernoulli,
    Poisson,
}

/// Mean absolute error of draw → noise → Gamma fit → recovery, averaged
/// over a grid of true parameters with `n` samples per cell.
pub fn end_to_end_recovery_error(kind: RecoveryKind, grid: &[f64], n: usize, seed: u64) -> Result<f64> {
    let errors: Vec<f64> = grid
        .par_iter()
        .enumerate()
        .map(|(cell, &truth)| recovery_error_cell(kind, truth, n, seed, cell as u64))
        .collect::<Result<_>>()?;
    Ok(errors.iter().sum::<f64>() / errors.len() as f64)
}

fn recovery_error_cell(kind: RecoveryKind, truth: f64, n: usize, seed: u64, cell: u64) -> Result<f64> {
    let mut rng = column_rng(seed, 2 * cell);
    let data: Vec<f64> = match kind {
        RecoveryKind::Bernoulli => {
            let dist = Bernoulli::new(truth).map_err(|e| Error::Invalid(e.to_string()))?;
            (0..n).map(|_| f64::from(u8::from(dist.sample(&mut rng)))).collect()
        }
        RecoveryKind::Poisson if truth == 0.0 => vec![0.0; n],
        RecoveryKind::Poisson => {
            let dist = Poisson::new(truth).map_err(|e| Error::Invalid(e.to_string()))?;
            (0..n).map(|_| dist.sample(&mut rng)).collect()
        }
    };
    let mask = vec![true; n];
    let noise = NoiseConfig::new(seed);
    let (_, gamma) = apply_gamma_trick(&data, &mask, &noise, 2 * cell + 1)?;
    let estimate = match kind {
        RecoveryKind::Bernoulli => recover_bernoulli(&gamma, &noise),
        RecoveryKind::Poisson => recover_poisson(&gamma, &noise, DEFAULT_DELTA),
    };
    Ok((estimate - truth).abs())
}
