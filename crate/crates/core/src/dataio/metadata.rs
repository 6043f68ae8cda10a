//! The scaling sidecar: everything needed to map parameters learned on the
//! scaled data back to the original columns, without the data itself.
//! The schema is described in `docs/metadata.md`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ColumnSpec;
use crate::error::{Error, Result};
use crate::expfam::{CanonicalParams, Family, NaturalParams};
use crate::pipeline::TrickMode;
use crate::scaler::{ScalingMethod, ScalingTarget, SolveMethod};
use crate::smoothness::SmoothnessEstimate;
use crate::tricks::{recover_bernoulli, recover_categorical, recover_poisson, TrickKind, TrickRecord};

pub const METADATA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingMetadata {
    pub version: String,
    pub method: ScalingMethod,
    pub trick: TrickMode,
    pub target: ScalingTarget,
    /// One entry per output column, in output order.
    pub columns: Vec<ColumnMetadata>,
    #[serde(default)]
    pub tricks: Vec<TrickRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMetadata {
    #[serde(flatten)]
    pub spec: ColumnSpec,
    /// Empirical fit on the unscaled (post-trick) column.
    pub fitted: CanonicalParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolveMethod>,
    /// Smoothness the scaling law assigns to the scaled column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub achieved: Option<SmoothnessEstimate>,
    /// Local estimate re-evaluated at the scaled parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_at_scaled: Option<SmoothnessEstimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ScalingMetadata {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let meta: Self = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("metadata: {e}")))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata is always serializable");
        s.push('\n');
        s
    }

    fn validate(&self) -> Result<()> {
        if self.version != METADATA_VERSION {
            return Err(Error::Invalid(format!(
                "metadata version `{}` is not supported (expected `{METADATA_VERSION}`)",
                self.version
            )));
        }
        for c in &self.columns {
            let s = &c.spec;
            if !(s.omega > 0.0 && s.omega.is_finite()) {
                return Err(Error::InvalidScale(s.omega).in_column(&s.name));
            }
            if s.omega != 1.0 && s.family.is_discrete() {
                return Err(Error::UnsupportedFamily { family: s.family, operation: "scaling" }.in_column(&s.name));
            }
        }
        for t in &self.tricks {
            for member in &t.group {
                let col = self.column(member).ok_or_else(|| Error::MetadataMismatch { column: member.clone() })?;
                let expected = match t.trick {
                    TrickKind::Bernoulli => Family::Bernoulli,
                    _ => Family::Gamma,
                };
                if col.spec.family != expected {
                    return Err(Error::Invalid(format!(
                        "trick group member `{member}` is modeled as {}, expected {expected}",
                        col.spec.family
                    )));
                }
            }
            let group_ok = match t.original_family {
                Family::Categorical(k) => t.group.len() == k && t.trick != TrickKind::Gamma,
                Family::Bernoulli | Family::Poisson => t.group.len() == 1 && t.trick == TrickKind::Gamma,
                _ => false,
            };
            if !group_ok {
                return Err(Error::Invalid(format!(
                    "trick record for `{}` does not match {}",
                    t.source_column, t.original_family
                )));
            }
            if t.trick != TrickKind::Bernoulli && t.noise.is_none() {
                return Err(Error::Invalid(format!("trick record for `{}` has no noise", t.source_column)));
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnMetadata> {
        self.columns.iter().find(|c| c.spec.name == name)
    }
}

pub fn write_metadata(meta: &ScalingMetadata, path: &Path) -> Result<()> {
    std::fs::write(path, meta.to_json_string()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_metadata(path: &Path) -> Result<ScalingMetadata> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    ScalingMetadata::from_json_str(&text).map_err(|e| match e {
        Error::Invalid(msg) => Error::Invalid(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses learned scaled-space parameters: a JSON object mapping each
/// output column name to its natural-parameter vector.
pub fn parse_learned_params(text: &str) -> Result<BTreeMap<String, NaturalParams>> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("learned parameters: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredColumn {
    pub column: String,
    pub family: Family,
    pub params: CanonicalParams,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Maps scaled-space natural parameters back to original-space canonical
/// parameters, undoing scaling and then any trick. One entry per input
/// column, in input order.
pub fn recover_parameters(
    meta: &ScalingMetadata,
    scaled: &BTreeMap<String, NaturalParams>,
    delta: f64,
) -> Result<Vec<RecoveredColumn>> {
    if let Some(extra) = scaled.keys().find(|k| meta.column(k).is_none()) {
        return Err(Error::Invalid(format!("learned parameters for unknown column `{extra}`")));
    }
    let canonical = |name: &str| -> Result<CanonicalParams> {
        let col = meta.column(name).ok_or_else(|| Error::MetadataMismatch { column: name.to_string() })?;
        let eta = scaled.get(name).ok_or_else(|| Error::MetadataMismatch { column: name.to_string() })?;
        let family = col.spec.family;
        let unscaled = if family.is_continuous() {
            family.unscale_natural(eta, col.spec.omega).map_err(|e| e.in_column(name))?
        } else {
            eta.clone()
        };
        family.from_natural(&unscaled).map_err(|e| e.in_column(name))
    };

    let mut out = Vec::new();
    let mut done = std::collections::HashSet::new();
    for col in &meta.columns {
        let spec = &col.spec;
        let Some(source) = &spec.source else {
            out.push(RecoveredColumn {
                column: spec.name.clone(),
                family: spec.family,
                params: canonical(&spec.name)?,
                categories: spec.categories.clone(),
                warning: None,
            });
            continue;
        };
        if !done.insert(source.clone()) {
            continue;
        }
        let record = meta
            .tricks
            .iter()
            .find(|t| &t.source_column == source)
            .ok_or_else(|| Error::MetadataMismatch { column: source.clone() })?;
        let noise = record.noise.unwrap_or_default();
        let members: Vec<CanonicalParams> = record.group.iter().map(|m| canonical(m)).collect::<Result<_>>()?;
        let (params, warning) = match (record.original_family, record.trick) {
            (Family::Bernoulli, _) => (vec![recover_bernoulli(&members[0], &noise)], None),
            (Family::Poisson, _) => (vec![recover_poisson(&members[0], &noise, delta)], None),
            (Family::Categorical(_), trick) => {
                let means: Vec<f64> = members
                    .iter()
                    .map(|p| match trick {
                        TrickKind::Bernoulli => p[0],
                        _ => recover_bernoulli(p, &noise),
                    })
                    .collect();
                let (pi, degenerate) = recover_categorical(&means);
                let warning = degenerate.then(|| "all class means are zero; returning uniform".to_string());
                (pi, warning)
            }
            (other, _) => {
                return Err(Error::UnsupportedFamily { family: other, operation: "trick recovery" }.in_column(source))
            }
        };
        out.push(RecoveredColumn {
            column: source.clone(),
            family: record.original_family,
            params: CanonicalParams::new(params),
            categories: record.categories.clone(),
            warning,
        });
    }
    Ok(out)
}
