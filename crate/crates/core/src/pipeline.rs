//! One scaling run: tricks, per-column planning, data transform and the
//! metadata sidecar.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataio::{Column, ColumnMetadata, ColumnSpec, DatasetFrame, Kind, ScalingMetadata, METADATA_VERSION};
use crate::error::{Error, Result};
use crate::expfam::Family;
use crate::scaler::{plan_dataset, ScalingMethod, ScalingTarget};
use crate::smoothness::estimate;
use crate::tricks::{apply_bernoulli_trick, apply_gamma_trick, NoiseConfig, TrickKind, TrickRecord};

/// Which discrete-to-continuous conversion to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrickMode {
    None,
    /// One-hot categoricals; discrete columns stay unscaled.
    Bern,
    /// One-hot categoricals, then noise every discrete column into a Gamma.
    Gamma,
}

impl TrickMode {
    pub const ALL: [TrickMode; 3] = [TrickMode::None, TrickMode::Bern, TrickMode::Gamma];
}

impl fmt::Display for TrickMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrickMode::None => "none",
            TrickMode::Bern => "bern",
            TrickMode::Gamma => "gamma",
        })
    }
}

impl FromStr for TrickMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrickMode::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown trick `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleConfig {
    pub method: ScalingMethod,
    pub trick: TrickMode,
    pub alpha: f64,
    pub seed: u64,
    pub allow_unscaled_discrete: bool,
    pub beta_a: f64,
    pub beta_b: f64,
}

impl ScaleConfig {
    pub fn new(method: ScalingMethod, trick: TrickMode) -> Self {
        Self {
            method,
            trick,
            alpha: 1e-3,
            seed: 0,
            allow_unscaled_discrete: false,
            beta_a: crate::tricks::DEFAULT_BETA_A,
            beta_b: crate::tricks::DEFAULT_BETA_B,
        }
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig { beta_a: self.beta_a, beta_b: self.beta_b, seed: self.seed }
    }
}

/// Result of [`scale_frame`]. Columns listed in `failures` are left
/// unscaled in `frame` and absent from `metadata`.
#[derive(Debug)]
pub struct ScaleRun {
    pub frame: DatasetFrame,
    pub metadata: ScalingMetadata,
    pub failures: Vec<Error>,
}

/// Expands and noises discrete columns. Noise for output column `i` comes
/// from stream `i` of the seed.
pub fn apply_tricks(frame: &DatasetFrame, mode: TrickMode, noise: &NoiseConfig) -> Result<(DatasetFrame, Vec<TrickRecord>)> {
    let mut out = Vec::new();
    let mut records = Vec::new();
    for col in &frame.columns {
        let spec = &col.spec;
        let name = &spec.name;
        match (mode, spec.family) {
            (TrickMode::None, _) | (_, Family::Normal | Family::LogNormal) => out.push(col.clone()),
            (_, f) if f.is_continuous() => out.push(col.clone()),
            (TrickMode::Bern, Family::Bernoulli | Family::Poisson) => out.push(col.clone()),
            (_, Family::Categorical(k)) => {
                let one_hot = apply_bernoulli_trick(&col.values, &col.mask, k).map_err(|e| e.in_column(name))?;
                let trick = match mode {
                    TrickMode::Gamma => TrickKind::BernoulliThenGamma,
                    _ => TrickKind::Bernoulli,
                };
                let mut group = Vec::with_capacity(k);
                for (class, values) in one_hot.into_iter().enumerate() {
                    let member = format!("{name}#{class}");
                    let column = derived_column(&member, spec, trick, k, values, &col.mask, noise, out.len() as u64)?;
                    group.push(member);
                    out.push(column);
                }
                records.push(TrickRecord {
                    source_column: name.clone(),
                    trick,
                    group,
                    noise: (trick != TrickKind::Bernoulli).then_some(*noise),
                    original_family: spec.family,
                    categories: spec.categories.clone(),
                });
            }
            (_, original) => {
                let column = derived_column(
                    name,
                    spec,
                    TrickKind::Gamma,
                    1,
                    col.values.clone(),
                    &col.mask,
                    noise,
                    out.len() as u64,
                )?;
                out.push(column);
                records.push(TrickRecord {
                    source_column: name.clone(),
                    trick: TrickKind::Gamma,
                    group: vec![name.clone()],
                    noise: Some(*noise),
                    original_family: original,
                    categories: Vec::new(),
                });
            }
        }
    }
    Ok((DatasetFrame::new(out)?, records))
}

#[allow(clippy::too_many_arguments)]
fn derived_column(
    name: &str,
    source: &ColumnSpec,
    trick: TrickKind,
    group_size: usize,
    values: Vec<f64>,
    mask: &[bool],
    noise: &NoiseConfig,
    stream: u64,
) -> Result<Column> {
    let (kind, family, values) = match trick {
        TrickKind::Bernoulli => (Kind::Binary, Family::Bernoulli, values),
        _ => {
            let (noised, _) = apply_gamma_trick(&values, mask, noise, stream).map_err(|e| e.in_column(name))?;
            (Kind::PositiveReal, Family::Gamma, noised)
        }
    };
    let mut spec = ColumnSpec::new(name, kind, family);
    spec.trick = Some(trick);
    spec.source = Some(source.name.clone());
    spec.group_size = group_size;
    Ok(Column::new(spec, values, mask.to_vec()))
}

/// Runs tricks and scaling on a frame. `L*` counts the frame's columns
/// before any expansion.
pub fn scale_frame(frame: &DatasetFrame, config: &ScaleConfig) -> Result<ScaleRun> {
    if config.method == ScalingMethod::Lip && config.trick == TrickMode::None && !config.allow_unscaled_discrete {
        if let Some(col) = frame.columns.iter().find(|c| c.spec.family.is_discrete()) {
            return Err(Error::UnscaledDiscrete { column: col.spec.name.clone() });
        }
    }
    let target = ScalingTarget::from_learning_rate(config.alpha, frame.columns.len())?;
    let (mut expanded, tricks) = apply_tricks(frame, config.trick, &config.noise())?;
    for col in &mut expanded.columns {
        col.spec.scaling_method = if col.spec.family.is_continuous() { config.method } else { ScalingMethod::None };
    }

    let plans = plan_dataset(&expanded, &target);
    let mut columns_meta = Vec::new();
    let mut failures = Vec::new();
    for (col, plan) in expanded.columns.iter_mut().zip(plans) {
        let plan = match plan {
            Ok(p) => p,
            Err(e) => {
                failures.push(e);
                continue;
            }
        };
        let family = col.spec.family;
        let mut local_at_scaled = None;
        if let Some(result) = &plan.result {
            if plan.omega != 1.0 {
                transform_present(col, plan.omega).map_err(|e| e.in_column(&col.spec.name))?;
            }
            local_at_scaled = Some(estimate(family, &result.achieved.at_params).map_err(|e| e.in_column(&col.spec.name))?);
        }
        col.spec.omega = plan.omega;
        columns_meta.push(ColumnMetadata {
            spec: col.spec.clone(),
            fitted: plan.fitted,
            l_target: plan.result.as_ref().map(|_| plan.l_target),
            solver: plan.result.as_ref().map(|r| r.method),
            achieved: plan.result.as_ref().map(|r| r.achieved.clone()),
            local_at_scaled,
            warnings: plan.result.and_then(|r| r.warning).into_iter().collect(),
        });
    }
    let metadata = ScalingMetadata {
        version: METADATA_VERSION.to_string(),
        method: config.method,
        trick: config.trick,
        target,
        columns: columns_meta,
        tricks,
    };
    Ok(ScaleRun { frame: expanded, metadata, failures })
}

fn transform_present(col: &mut Column, omega: f64) -> Result<()> {
    let family = col.spec.family;
    for (x, present) in col.values.iter_mut().zip(&col.mask) {
        if *present {
            *x = family.transform_data(&[*x], omega)?[0];
        }
    }
    Ok(())
}
