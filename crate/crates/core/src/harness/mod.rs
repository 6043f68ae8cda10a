//! Desk-scale measurement of balanced learning: synthetic data, independent
//! per-column gradient ascent with a shared step size, balance diagnostics
//! and imputation metrics.

mod fitter;
mod metrics;
mod synthetic;

pub use fitter::{
    fit_column, fit_columns, initial_natural, project, ColumnTrace, FitTrace, CONVERGENCE_TOL, PROJECTION_OFFSET,
};
pub use metrics::{
    balance_report, imputation_metrics, trace_to_csv, BalanceReport, ColumnImputationError, ImputationMetric,
    ImputationReport,
};
pub use synthetic::{
    balance_fixture, balance_fixture_columns, generate_synthetic, sample_family, SyntheticColumn, SyntheticData,
};

use crate::dataio::DatasetFrame;
use crate::error::Result;
use crate::pipeline::{scale_frame, ScaleConfig};

/// Scales `frame` with `config`, fits the scaled columns with the
/// configured step and summarizes balance.
pub fn run_balance(frame: &DatasetFrame, config: &ScaleConfig, iters: usize) -> Result<(FitTrace, BalanceReport)> {
    let run = scale_frame(frame, config)?;
    if let Some(err) = run.failures.into_iter().next() {
        return Err(err);
    }
    let trace = fit_columns(&run.frame, config.alpha, iters)?;
    let report = balance_report(&trace)?;
    Ok((trace, report))
}
