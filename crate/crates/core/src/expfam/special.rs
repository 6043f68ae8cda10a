//! Log-gamma, digamma and trigamma for positive real arguments.
//!
//! All three shift the argument upward with the recurrence
//! `f(x) = f(x + 1) ± term(x)` until it exceeds [`ASYMPTOTIC_FROM`], then
//! evaluate the asymptotic (Stirling / Bernoulli-number) series.

use crate::error::{Error, Result};

/// Below this the recurrence is applied before the asymptotic series.
const ASYMPTOTIC_FROM: f64 = 12.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

// B_{2k} / (2k (2k - 1)) for k = 1..8, Stirling series for ln Γ.
const LGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

// B_{2k} / (2k) for k = 1..8, asymptotic series for ψ.
const DIGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

// B_{2k} for k = 1..8, asymptotic series for ψ⁽¹⁾.
const TRIGAMMA_SERIES: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn check_domain(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::SpecialDomain { function: name, x })
    }
}

/// Evaluates `Σ c_k · z^k` for `z = 1/x²` by Horner's rule.
fn series_in_inv_square(coeffs: &[f64], x: f64) -> f64 {
    let z = 1.0 / (x * x);
    coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c) * z
}

/// Natural logarithm of the gamma function, `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_domain("log_gamma", x)?;
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut prod = 1.0;
    let mut log_shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        prod *= z;
        // keep the running product in range for tiny x
        if prod > 1e250 {
            log_shift += prod.ln();
            prod = 1.0;
        }
        z += 1.0;
    }
    log_shift += prod.ln();
    // 1/(12z) - 1/(360z³) + ... is written as (1/z)·Σ c_k z^{-2(k-1)}
    let tail = series_in_inv_square(&LGAMMA_SERIES, z) * z;
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + tail - log_shift
}

/// Digamma ψ(x) = d/dx ln Γ(x), `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_domain("digamma", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        shift += 1.0 / z;
        z += 1.0;
    }
    z.ln() - 0.5 / z - series_in_inv_square(&DIGAMMA_SERIES, z) - shift
}

/// Trigamma ψ⁽¹⁾(x) = d²/dx² ln Γ(x), `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_domain("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(x: f64) -> f64 {
    let mut z = x;
    let mut shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        shift += 1.0 / (z * z);
        z += 1.0;
    }
    let asym = 1.0 / z + 0.5 / (z * z) + series_in_inv_square(&TRIGAMMA_SERIES, z) / z;
    // add the small terms first
    asym + shift
}
