//! Per-column type hints.
//!
//! A hints document is a JSON object keyed by column name. Each value is
//! either a kind string or an object with optional `kind` and `family`:
//!
//! ```json
//! { "age": "count", "income": { "kind": "positive_real", "family": "gamma" } }
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expfam::Family;

/// Kind as written in a hint; categorical may leave `K` to the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindHint {
    Real,
    PositiveReal,
    Count,
    Binary,
    Categorical(Option<usize>),
}

impl FromStr for KindHint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "real" => KindHint::Real,
            "positive_real" => KindHint::PositiveReal,
            "count" => KindHint::Count,
            "binary" => KindHint::Binary,
            "categorical" => KindHint::Categorical(None),
            other => {
                let k: usize = other
                    .strip_prefix("categorical(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .and_then(|k| k.trim().parse().ok())
                    .ok_or_else(|| Error::Invalid(format!("unknown column kind `{other}`")))?;
                if k < 2 {
                    return Err(Error::Invalid(format!("categorical needs K >= 2, got {k}")));
                }
                KindHint::Categorical(Some(k))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ColumnHint {
    pub kind: Option<KindHint>,
    pub family: Option<Family>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawHint {
    Kind(String),
    Full {
        #[serde(default)]
        kind: Option<String>,
        #[serde(default)]
        family: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Hints {
    pub columns: BTreeMap<String, ColumnHint>,
}

impl Hints {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, RawHint> = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("hints: {e}")))?;
        let mut columns = BTreeMap::new();
        for (name, hint) in raw {
            let in_column = |e: Error| e.in_column(name.clone());
            let (kind, family) = match hint {
                RawHint::Kind(k) => (Some(k), None),
                RawHint::Full { kind, family } => (kind, family),
            };
            let hint = ColumnHint {
                kind: kind.map(|k| k.parse()).transpose().map_err(in_column)?,
                family: family.map(|f| f.parse()).transpose().map_err(in_column)?,
            };
            columns.insert(name, hint);
        }
        Ok(Self { columns })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_json_str(&text).map_err(|e| match e {
            Error::Invalid(msg) => Error::Invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn get(&self, column: &str) -> Option<&ColumnHint> {
        self.columns.get(column)
    }
}
