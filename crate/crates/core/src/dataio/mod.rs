//! Tabular data in and out: column kinds, CSV reading with optional type
//! hints, scaled-data writing and the scaling metadata sidecar.

mod csv_io;
mod hints;
mod metadata;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expfam::Family;
use crate::scaler::ScalingMethod;
use crate::tricks::TrickKind;

pub use csv_io::{format_value, read_csv, read_csv_from, write_csv, write_scaled};
pub use hints::{ColumnHint, Hints, KindHint};
pub use metadata::{
    parse_learned_params, read_metadata, recover_parameters, write_metadata, ColumnMetadata,
    RecoveredColumn, ScalingMetadata, METADATA_VERSION,
};

/// Declared data type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Real,
    PositiveReal,
    Count,
    Binary,
    Categorical(usize),
}

impl Kind {
    /// The default likelihood for each kind.
    pub fn default_family(self) -> Family {
        match self {
            Kind::Real => Family::Normal,
            Kind::PositiveReal => Family::LogNormal,
            Kind::Count => Family::Poisson,
            Kind::Binary => Family::Bernoulli,
            Kind::Categorical(k) => Family::Categorical(k),
        }
    }

    /// Whether `family` is a sensible model for data of this kind.
    pub fn admits(self, family: Family) -> bool {
        match self {
            Kind::Real => family == Family::Normal,
            Kind::PositiveReal => family.is_continuous(),
            Kind::Count => family == Family::Poisson,
            Kind::Binary => family == Family::Bernoulli,
            Kind::Categorical(k) => family == Family::Categorical(k),
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Kind::Binary | Kind::Categorical(_))
    }

    /// The kind whose default family is `family`, used for generated data.
    pub fn of_family(family: Family) -> Kind {
        match family {
            Family::Normal => Kind::Real,
            Family::Bernoulli => Kind::Binary,
            Family::Poisson => Kind::Count,
            Family::Categorical(k) => Kind::Categorical(k),
            _ => Kind::PositiveReal,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Real => f.write_str("real"),
            Kind::PositiveReal => f.write_str("positive_real"),
            Kind::Count => f.write_str("count"),
            Kind::Binary => f.write_str("binary"),
            Kind::Categorical(k) => write!(f, "categorical({k})"),
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<KindHint>()? {
            KindHint::Real => Ok(Kind::Real),
            KindHint::PositiveReal => Ok(Kind::PositiveReal),
            KindHint::Count => Ok(Kind::Count),
            KindHint::Binary => Ok(Kind::Binary),
            KindHint::Categorical(Some(k)) => Ok(Kind::Categorical(k)),
            KindHint::Categorical(None) => Err(Error::Invalid(format!("kind `{s}` needs K"))),
        }
    }
}

impl Serialize for Kind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Kind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

fn default_group_size() -> usize {
    1
}

fn default_omega() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: Kind,
    pub family: Family,
    /// Trick that produced this column, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trick: Option<TrickKind>,
    /// Column of the input this one was derived from by a trick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Number of columns sharing the source's smoothness budget.
    #[serde(default = "default_group_size")]
    pub group_size: usize,
    pub scaling_method: ScalingMethod,
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Category labels in code order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: Kind, family: Family) -> Self {
        Self {
            name: name.into(),
            kind,
            family,
            trick: None,
            source: None,
            group_size: 1,
            scaling_method: ScalingMethod::None,
            omega: 1.0,
            categories: Vec::new(),
        }
    }
}

/// One column: values with a presence mask. Missing values are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub spec: ColumnSpec,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl Column {
    pub fn new(spec: ColumnSpec, values: Vec<f64>, mask: Vec<bool>) -> Self {
        debug_assert_eq!(values.len(), mask.len());
        Self { spec, values, mask }
    }

    pub fn present(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.mask).filter(|(_, m)| **m).map(|(x, _)| *x)
    }

    pub fn present_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetFrame {
    pub columns: Vec<Column>,
    pub n_rows: usize,
}

impl DatasetFrame {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.values.len());
        for c in &columns {
            if c.values.len() != n_rows || c.mask.len() != n_rows {
                return Err(Error::Invalid(format!(
                    "column `{}` has {} values and {} mask entries; expected {n_rows}",
                    c.spec.name,
                    c.values.len(),
                    c.mask.len()
                )));
            }
        }
        Ok(Self { columns, n_rows })
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.spec.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.spec.name.as_str())
    }
}

fn parse_finite(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Guesses a column's kind from its non-empty cells.
///
/// binary ⊂ count ⊂ positive_real ⊂ real by the rules: `{0,1}` is binary,
/// non-negative integers with more than two distinct values are counts,
/// numbers all above zero are positive reals, other numbers are reals and
/// anything non-numeric is categorical.
pub fn infer_kind<S: AsRef<str>>(values: &[S]) -> Result<Kind> {
    let present: Vec<&str> = values.iter().map(|s| s.as_ref().trim()).filter(|s| !s.is_empty()).collect();
    if present.is_empty() {
        return Err(Error::DegenerateColumn { statistic: "present count", value: 0.0 });
    }
    let numbers: Option<Vec<f64>> = present.iter().map(|s| parse_finite(s)).collect();
    let Some(mut numbers) = numbers else {
        return Ok(Kind::Categorical(category_labels(&present).len()));
    };
    numbers.sort_by(f64::total_cmp);
    numbers.dedup();
    if numbers.iter().all(|x| *x == 0.0 || *x == 1.0) {
        return Ok(Kind::Binary);
    }
    if numbers.len() > 2 && numbers.iter().all(|x| *x >= 0.0 && x.fract() == 0.0) {
        return Ok(Kind::Count);
    }
    if numbers.iter().all(|x| *x > 0.0) {
        return Ok(Kind::PositiveReal);
    }
    Ok(Kind::Real)
}

/// Distinct labels in ascending order: numeric order when every label is a
/// number, byte order otherwise.
pub fn category_labels(tokens: &[&str]) -> Vec<String> {
    let mut labels: Vec<&str> = tokens.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let numeric: Option<Vec<f64>> = labels.iter().map(|s| parse_finite(s)).collect();
    if let Some(nums) = numeric {
        let mut paired: Vec<(f64, &str)> = nums.into_iter().zip(labels.iter().copied()).collect();
        paired.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        return paired.into_iter().map(|(_, s)| s.to_string()).collect();
    }
    labels.into_iter().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inference_examples() {
        assert_eq!(infer_kind(&["1", "0", "1"]).unwrap(), Kind::Binary);
        assert_eq!(infer_kind(&["2.5", "-1.0"]).unwrap(), Kind::Real);
        assert_eq!(infer_kind(&["3", "0", "7", "2"]).unwrap(), Kind::Count);
        assert_eq!(infer_kind(&["3", "", "7"]).unwrap(), Kind::PositiveReal);
        assert_eq!(infer_kind(&["0", "4"]).unwrap(), Kind::Real);
        assert_eq!(infer_kind(&["a", "b", "a", "c"]).unwrap(), Kind::Categorical(3));
        assert_eq!(infer_kind(&["1.5", "x"]).unwrap(), Kind::Categorical(2));
        assert!(matches!(infer_kind(&["", " "]), Err(Error::DegenerateColumn { .. })));
    }

    #[test]
    fn kind_families_follow_the_selection_table() {
        assert_eq!(Kind::Real.default_family(), Family::Normal);
        assert_eq!(Kind::PositiveReal.default_family(), Family::LogNormal);
        assert_eq!(Kind::Count.default_family(), Family::Poisson);
        assert_eq!(Kind::Binary.default_family(), Family::Bernoulli);
        assert_eq!(Kind::Categorical(3).default_family(), Family::Categorical(3));
        assert!(Kind::PositiveReal.admits(Family::Gamma));
        assert!(!Kind::Real.admits(Family::Gamma));
    }

    #[test]
    fn kind_strings() {
        for k in [Kind::Real, Kind::PositiveReal, Kind::Count, Kind::Binary, Kind::Categorical(4)] {
            assert_eq!(k.to_string().parse::<Kind>().unwrap(), k);
        }
        assert!("categorical".parse::<Kind>().is_err());
    }

    #[test]
    fn labels_sort_numerically_when_numeric() {
        assert_eq!(category_labels(&["10", "9", "10", "1"]), vec!["1", "9", "10"]);
        assert_eq!(category_labels(&["b", "a", "B"]), vec!["B", "a", "b"]);
    }

    proptest! {
        #[test]
        fn inference_depends_only_on_the_multiset(
            mut tokens in prop::collection::vec(
                prop_oneof![
                    (0u8..5).prop_map(|x| x.to_string()),
                    (-5.0f64..5.0).prop_map(|x| format!("{x:.2}")),
                    Just(String::new()),
                    Just("z".to_string()),
                ],
                1..20,
            ),
            rotate in 0usize..20,
        ) {
            let a = infer_kind(&tokens);
            let len = tokens.len();
            tokens.rotate_left(rotate % len);
            tokens.reverse();
            let b = infer_kind(&tokens);
            prop_assert_eq!(a.ok(), b.ok());
        }
    }
}
