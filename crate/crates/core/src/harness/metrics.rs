use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fitter::FitTrace;
use crate::dataio::{format_value, DatasetFrame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    /// Per step `t`: `max_d |r_d(t) − mean_d r_d(t)|` with the normalized
    /// improvement `r_d(t) = (ℓ_d(t+1) − ℓ_d(t)) / |ℓ_d(0)|`.
    pub improvement_dispersion: Vec<f64>,
    /// `max_d ‖∇ℓ_d(0)‖₁ / min_d ‖∇ℓ_d(0)‖₁`.
    pub gradient_norm_ratio: f64,
    /// `max_d t_d / max(min_d t_d, 1)` over convergence iterations; `None`
    /// if some column did not converge.
    pub convergence_spread: Option<f64>,
    pub iterations_to_converge: Vec<Option<usize>>,
}

pub fn balance_report(trace: &FitTrace) -> Result<BalanceReport> {
    if trace.columns.is_empty() {
        return Err(Error::Invalid("empty trace".into()));
    }
    let mut normalized = Vec::with_capacity(trace.columns.len());
    for c in &trace.columns {
        let l0 = c.log_lik[0].abs();
        if l0 == 0.0 {
            return Err(Error::DegenerateNormalization { column: c.name.clone() });
        }
        normalized.push(c.log_lik.windows(2).map(|w| (w[1] - w[0]) / l0).collect::<Vec<f64>>());
    }
    let steps = normalized[0].len();
    let d = normalized.len() as f64;
    let improvement_dispersion = (0..steps)
        .map(|t| {
            let mean = normalized.iter().map(|r| r[t]).sum::<f64>() / d;
            normalized.iter().map(|r| (r[t] - mean).abs()).fold(0.0, f64::max)
        })
        .collect();

    let g0: Vec<f64> = trace.columns.iter().map(|c| c.grad_norm[0]).collect();
    let g_max = g0.iter().copied().fold(0.0, f64::max);
    let g_min = g0.iter().copied().fold(f64::INFINITY, f64::min);
    let gradient_norm_ratio = if g_max == g_min { 1.0 } else { g_max / g_min };

    let iterations_to_converge: Vec<Option<usize>> = trace.columns.iter().map(|c| c.iterations_to_converge).collect();
    let convergence_spread = iterations_to_converge
        .iter()
        .copied()
        .collect::<Option<Vec<usize>>>()
        .map(|its| {
            let max = *its.iter().max().expect("non-empty") as f64;
            let min = (*its.iter().min().expect("non-empty")).max(1) as f64;
            (max / min).max(1.0)
        });
    Ok(BalanceReport { improvement_dispersion, gradient_norm_ratio, convergence_spread, iterations_to_converge })
}

/// One row per step with `loglik` and `gradnorm` per column.
pub fn trace_to_csv(trace: &FitTrace) -> String {
    let mut out = String::from("t");
    for c in &trace.columns {
        let _ = write!(out, ",{0}.loglik,{0}.gradnorm", c.name);
    }
    out.push('\n');
    for t in 0..=trace.iters {
        let _ = write!(out, "{t}");
        for c in &trace.columns {
            let _ = write!(out, ",{},{}", format_value(c.log_lik[t]), format_value(c.grad_norm[t]));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationMetric {
    Nrmse,
    ErrorRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnImputationError {
    pub column: String,
    pub metric: ImputationMetric,
    pub missing: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub per_column: Vec<ColumnImputationError>,
    pub mean: f64,
}

/// Imputation error on the cells missing from `observed`: for numeric
/// columns `(1/N_miss)·‖x − x̂‖₂ / (max x − min x)`, for nominal columns the
/// misclassification rate; `mean` averages over columns.
pub fn imputation_metrics(truth: &DatasetFrame, observed: &DatasetFrame, imputed: &DatasetFrame) -> Result<ImputationReport> {
    if truth.columns.len() != observed.columns.len()
        || truth.columns.len() != imputed.columns.len()
        || truth.n_rows != observed.n_rows
        || truth.n_rows != imputed.n_rows
    {
        return Err(Error::Invalid("truth, observed and imputed frames are not aligned".into()));
    }
    let mut per_column = Vec::with_capacity(truth.columns.len());
    for ((t, o), i) in truth.columns.iter().zip(&observed.columns).zip(&imputed.columns) {
        let name = &t.spec.name;
        let missing: Vec<usize> = (0..truth.n_rows).filter(|&r| !o.mask[r]).collect();
        let n_miss = missing.len();
        let (metric, error) = if t.spec.kind.is_nominal() {
            let wrong = missing.iter().filter(|&&r| t.values[r] != i.values[r]).count();
            (ImputationMetric::ErrorRate, if n_miss == 0 { 0.0 } else { wrong as f64 / n_miss as f64 })
        } else {
            let max = t.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = t.values.iter().copied().fold(f64::INFINITY, f64::min);
            let range = max - min;
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN range is degenerate too
            if !(range > 0.0) {
                return Err(Error::DegenerateRange { column: name.clone() });
            }
            let sq: f64 = missing.iter().map(|&r| (t.values[r] - i.values[r]).powi(2)).sum();
            let error = if n_miss == 0 { 0.0 } else { sq.sqrt() / n_miss as f64 / range };
            (ImputationMetric::Nrmse, error)
        };
        per_column.push(ColumnImputationError { column: name.clone(), metric, missing: n_miss, error });
    }
    let mean = per_column.iter().map(|c| c.error).sum::<f64>() / per_column.len().max(1) as f64;
    Ok(ImputationReport { per_column, mean })
}
