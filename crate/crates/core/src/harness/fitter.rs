use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::DatasetFrame;
use crate::error::{Error, Result};
use crate::expfam::{Family, NaturalParams};

/// Boundary offset used when a step leaves the natural domain.
pub const PROJECTION_OFFSET: f64 = 1e-6;
/// Convergence when `‖∇ℓ‖₁ ≤ CONVERGENCE_TOL · N`.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTrace {
    pub name: String,
    pub family: Family,
    pub present: usize,
    /// `ℓ(t)` for `t = 0..=iters`.
    pub log_lik: Vec<f64>,
    /// `‖∇ℓ(t)‖₁` for `t = 0..=iters`.
    pub grad_norm: Vec<f64>,
    pub iterations_to_converge: Option<usize>,
    pub final_params: NaturalParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub alpha: f64,
    pub iters: usize,
    pub columns: Vec<ColumnTrace>,
}

/// Common starting point: Normal (0, 1), Exponential λ = 1, Gamma (1, 1),
/// and the analogous unit point for the other families.
pub fn initial_natural(family: Family) -> NaturalParams {
    NaturalParams::new(match family {
        Family::Normal | Family::LogNormal => vec![0.0, -0.5],
        Family::Gamma => vec![0.0, -1.0],
        Family::InverseGaussian => vec![-0.5, -0.5],
        Family::InverseGamma => vec![-2.0, -1.0],
        Family::Exponential | Family::Rayleigh => vec![-1.0],
        Family::Bernoulli | Family::Poisson => vec![0.0],
        Family::Categorical(k) => vec![0.0; k],
    })
}

/// Pulls each coordinate that left the natural domain back to its boundary,
/// offset by [`PROJECTION_OFFSET`] toward the interior.
pub fn project(family: Family, eta: &mut [f64]) {
    let below = |x: &mut f64, bound: f64| {
        if *x >= bound {
            *x = bound - PROJECTION_OFFSET;
        }
    };
    match family {
        Family::Normal | Family::LogNormal => below(&mut eta[1], 0.0),
        Family::Gamma => {
            if eta[0] <= -1.0 {
                eta[0] = -1.0 + PROJECTION_OFFSET;
            }
            below(&mut eta[1], 0.0);
        }
        Family::InverseGaussian => {
            below(&mut eta[0], 0.0);
            below(&mut eta[1], 0.0);
        }
        Family::InverseGamma => {
            below(&mut eta[0], -1.0);
            below(&mut eta[1], 0.0);
        }
        Family::Exponential | Family::Rayleigh => below(&mut eta[0], 0.0),
        Family::Bernoulli | Family::Poisson | Family::Categorical(_) => {}
    }
}

/// Summed sufficient statistics; with them each iteration is O(1) in N.
struct Sufficient {
    n: f64,
    sum_t: Vec<f64>,
    sum_log_h: f64,
}

impl Sufficient {
    fn new(family: Family, values: &[f64], mask: &[bool]) -> Result<Self> {
        let mut sum_t = vec![0.0; family.num_params()];
        let mut sum_log_h = 0.0;
        let mut n = 0usize;
        for (&x, _) in values.iter().zip(mask).filter(|(_, m)| **m) {
            family.check_support(x)?;
            for (s, t) in sum_t.iter_mut().zip(family.sufficient_stats(x)) {
                *s += t;
            }
            sum_log_h += family.log_base_measure(x);
            n += 1;
        }
        Ok(Self { n: n as f64, sum_t, sum_log_h })
    }

    fn log_lik(&self, family: Family, eta: &[f64]) -> f64 {
        let dot: f64 = eta.iter().zip(&self.sum_t).map(|(e, t)| e * t).sum();
        self.sum_log_h + dot - self.n * family.log_partition_unchecked(eta)
    }

    fn gradient(&self, family: Family, eta: &[f64]) -> Vec<f64> {
        family
            .mean_stats_unchecked(eta)
            .iter()
            .zip(&self.sum_t)
            .map(|(m, t)| t - self.n * m)
            .collect()
    }
}

/// Plain gradient ascent on one column's natural parameters. Each step is
/// `η ← η + α·∇ℓ/N`, i.e. on the per-observation log-likelihood whose
/// smoothness the scaler controls.
pub fn fit_column(
    name: &str,
    family: Family,
    values: &[f64],
    mask: &[bool],
    alpha: f64,
    iters: usize,
    init: &NaturalParams,
) -> Result<ColumnTrace> {
    let stats = Sufficient::new(family, values, mask).map_err(|e| e.in_column(name))?;
    if stats.n == 0.0 {
        return Err(Error::DegenerateColumn { statistic: "present count", value: 0.0 }.in_column(name));
    }
    family.check_natural(init).map_err(|e| e.in_column(name))?;
    let threshold = CONVERGENCE_TOL * stats.n;
    let mut eta = init.as_slice().to_vec();
    let mut log_lik = Vec::with_capacity(iters + 1);
    let mut grad_norm = Vec::with_capacity(iters + 1);
    let mut converged = None;
    for t in 0..=iters {
        let ll = stats.log_lik(family, &eta);
        let g = stats.gradient(family, &eta);
        let norm: f64 = g.iter().map(|x| x.abs()).sum();
        if !ll.is_finite() || !norm.is_finite() {
            return Err(Error::Divergence { column: name.to_string(), iteration: t });
        }
        log_lik.push(ll);
        grad_norm.push(norm);
        if converged.is_none() && norm <= threshold {
            converged = Some(t);
        }
        if t == iters {
            break;
        }
        for (e, gi) in eta.iter_mut().zip(&g) {
            *e += alpha * gi / stats.n;
        }
        project(family, &mut eta);
    }
    Ok(ColumnTrace {
        name: name.to_string(),
        family,
        present: stats.n as usize,
        log_lik,
        grad_norm,
        iterations_to_converge: converged,
        final_params: NaturalParams::new(eta),
    })
}

/// Fits every column independently from [`initial_natural`] with the
/// shared step `alpha` for exactly `iters` steps.
pub fn fit_columns(frame: &DatasetFrame, alpha: f64, iters: usize) -> Result<FitTrace> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Invalid(format!("learning rate must be positive, got {alpha}")));
    }
    let columns = frame
        .columns
        .par_iter()
        .map(|c| {
            let family = c.spec.family;
            fit_column(&c.spec.name, family, &c.values, &c.mask, alpha, iters, &initial_natural(family))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FitTrace { alpha, iters, columns })
}
