//! Exponential-family likelihoods in natural parameterization.
//!
//! Each [`Family`] knows its sufficient statistics `T(x)`, base measure
//! `h(x)`, log-partition `A(η)` and the maps between canonical and natural
//! parameters. Continuous families also carry a [`ScalingLaw`]: scaling the
//! data by `ω` factorizes every sufficient statistic as
//! `T_i(x̃) = f_i(ω)·T_i(x) + g_i(ω)`, so the likelihood of the scaled data
//! is the same family with natural parameters `η̃_i = η_i / f_i(ω)`.

mod fit;
pub mod special;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use special::{digamma_unchecked, log_gamma_unchecked};

pub use fit::fit_empirical;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    LogNormal,
    Gamma,
    InverseGaussian,
    InverseGamma,
    Exponential,
    Rayleigh,
    Bernoulli,
    Poisson,
    Categorical(usize),
}

impl Family {
    pub const CONTINUOUS: [Family; 7] = [
        Family::Normal,
        Family::LogNormal,
        Family::Gamma,
        Family::InverseGaussian,
        Family::InverseGamma,
        Family::Exponential,
        Family::Rayleigh,
    ];

    pub fn categorical(k: usize) -> Result<Family> {
        if k >= 2 {
            Ok(Family::Categorical(k))
        } else {
            Err(Error::Invalid(format!("categorical needs K >= 2, got {k}")))
        }
    }

    /// Number of natural parameters `I`.
    pub fn num_params(self) -> usize {
        match self {
            Family::Normal
            | Family::LogNormal
            | Family::Gamma
            | Family::InverseGaussian
            | Family::InverseGamma => 2,
            Family::Exponential | Family::Rayleigh | Family::Bernoulli | Family::Poisson => 1,
            Family::Categorical(k) => k,
        }
    }

    pub fn is_continuous(self) -> bool {
        !self.is_discrete()
    }

    pub fn is_discrete(self) -> bool {
        matches!(
            self,
            Family::Bernoulli | Family::Poisson | Family::Categorical(_)
        )
    }

    pub fn scaling_law(self) -> Option<ScalingLaw> {
        self.is_continuous().then_some(ScalingLaw { family: self })
    }

    fn require_scaling(self, operation: &'static str) -> Result<ScalingLaw> {
        self.scaling_law()
            .ok_or(Error::UnsupportedFamily { family: self, operation })
    }

    pub fn canonical_fields(self) -> &'static [&'static str] {
        match self {
            Family::Normal | Family::LogNormal => &["mu", "sigma2"],
            Family::Gamma | Family::InverseGamma => &["alpha", "beta"],
            Family::InverseGaussian => &["mu", "lambda"],
            Family::Exponential | Family::Poisson => &["lambda"],
            Family::Rayleigh => &["sigma"],
            Family::Bernoulli => &["p"],
            Family::Categorical(_) => &["pi"],
        }
    }

    fn invalid(self, field: &'static str, value: f64) -> Error {
        Error::InvalidParameter { family: self, field, value }
    }

    fn check_len(self, got: usize) -> Result<()> {
        let expected = self.num_params();
        if got == expected {
            Ok(())
        } else {
            Err(Error::ParameterCount { family: self, expected, got })
        }
    }

    pub fn check_canonical(self, canon: &CanonicalParams) -> Result<()> {
        let v = canon.as_slice();
        self.check_len(v.len())?;
        let positive = |field, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(self.invalid(field, x))
            }
        };
        match self {
            Family::Normal | Family::LogNormal => {
                if !v[0].is_finite() {
                    return Err(self.invalid("mu", v[0]));
                }
                positive("sigma2", v[1])
            }
            Family::Gamma | Family::InverseGamma => {
                positive("alpha", v[0])?;
                positive("beta", v[1])
            }
            Family::InverseGaussian => {
                positive("mu", v[0])?;
                positive("lambda", v[1])
            }
            Family::Exponential | Family::Poisson => positive("lambda", v[0]),
            Family::Rayleigh => positive("sigma", v[0]),
            Family::Bernoulli => {
                if (0.0..=1.0).contains(&v[0]) {
                    Ok(())
                } else {
                    Err(self.invalid("p", v[0]))
                }
            }
            Family::Categorical(_) => {
                if let Some(&bad) = v.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(self.invalid("pi", bad));
                }
                let sum: f64 = v.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(self.invalid("pi", sum));
                }
                Ok(())
            }
        }
    }

    pub fn check_natural(self, nat: &NaturalParams) -> Result<()> {
        let v = nat.as_slice();
        self.check_len(v.len())?;
        if let Some(&bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(self.invalid("eta", bad));
        }
        let below = |field, x: f64, bound: f64| {
            if x < bound {
                Ok(())
            } else {
                Err(self.invalid(field, x))
            }
        };
        match self {
            Family::Normal | Family::LogNormal => below("eta2", v[1], 0.0),
            Family::Gamma => {
                if v[0] <= -1.0 {
                    return Err(self.invalid("eta1", v[0]));
                }
                below("eta2", v[1], 0.0)
            }
            Family::InverseGaussian => {
                below("eta1", v[0], 0.0)?;
                below("eta2", v[1], 0.0)
            }
            Family::InverseGamma => {
                below("eta1", v[0], -1.0)?;
                below("eta2", v[1], 0.0)
            }
            Family::Exponential | Family::Rayleigh => below("eta1", v[0], 0.0),
            Family::Bernoulli | Family::Poisson | Family::Categorical(_) => Ok(()),
        }
    }

    pub fn in_support(self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            Family::Normal => true,
            Family::LogNormal
            | Family::Gamma
            | Family::InverseGaussian
            | Family::InverseGamma
            | Family::Rayleigh => x > 0.0,
            Family::Exponential => x >= 0.0,
            Family::Bernoulli => x == 0.0 || x == 1.0,
            Family::Poisson => x >= 0.0 && x.fract() == 0.0,
            Family::Categorical(k) => x >= 0.0 && x.fract() == 0.0 && x < k as f64,
        }
    }

    pub fn check_support(self, x: f64) -> Result<()> {
        if self.in_support(x) {
            Ok(())
        } else {
            Err(Error::OutOfSupport { family: self, x })
        }
    }

    /// Sufficient statistics `T(x)`; `x` must be in the support.
    pub fn sufficient_stats(self, x: f64) -> Vec<f64> {
        match self {
            Family::Normal => vec![x, x * x],
            Family::LogNormal => {
                let l = x.ln();
                vec![l, l * l]
            }
            Family::Gamma => vec![x.ln(), x],
            Family::InverseGaussian => vec![x, 1.0 / x],
            Family::InverseGamma => vec![x.ln(), 1.0 / x],
            Family::Exponential | Family::Bernoulli | Family::Poisson => vec![x],
            Family::Rayleigh => vec![0.5 * x * x],
            Family::Categorical(k) => {
                let mut t = vec![0.0; k];
                t[x as usize] = 1.0;
                t
            }
        }
    }

    /// `ln h(x)`.
    pub fn log_base_measure(self, x: f64) -> f64 {
        match self {
            Family::Normal => -0.5 * LN_2PI,
            Family::LogNormal => -x.ln() - 0.5 * LN_2PI,
            Family::InverseGaussian => -0.5 * (LN_2PI + 3.0 * x.ln()),
            Family::Rayleigh => x.ln(),
            Family::Poisson => -log_gamma_unchecked(x + 1.0),
            Family::Gamma
            | Family::InverseGamma
            | Family::Exponential
            | Family::Bernoulli
            | Family::Categorical(_) => 0.0,
        }
    }

    /// Log-partition `A(η)`; `nat` must be valid.
    pub fn log_partition_unchecked(self, eta: &[f64]) -> f64 {
        match self {
            Family::Normal | Family::LogNormal => {
                -eta[0] * eta[0] / (4.0 * eta[1]) - 0.5 * (-2.0 * eta[1]).ln()
            }
            Family::Gamma => {
                let shape = eta[0] + 1.0;
                log_gamma_unchecked(shape) - shape * (-eta[1]).ln()
            }
            Family::InverseGaussian => {
                -2.0 * (eta[0] * eta[1]).sqrt() - 0.5 * (-2.0 * eta[1]).ln()
            }
            Family::InverseGamma => {
                let shape = -eta[0] - 1.0;
                log_gamma_unchecked(shape) - shape * (-eta[1]).ln()
            }
            Family::Exponential | Family::Rayleigh => -(-eta[0]).ln(),
            Family::Bernoulli => softplus(eta[0]),
            Family::Poisson => eta[0].exp(),
            Family::Categorical(_) => log_sum_exp(eta),
        }
    }

    pub fn log_partition(self, nat: &NaturalParams) -> Result<f64> {
        self.check_natural(nat)?;
        Ok(self.log_partition_unchecked(nat.as_slice()))
    }

    /// Gradient of the log-partition, `∇A(η) = E[T(x)]`.
    pub fn mean_stats_unchecked(self, eta: &[f64]) -> Vec<f64> {
        match self {
            Family::Normal | Family::LogNormal => {
                let mu = -eta[0] / (2.0 * eta[1]);
                let var = -0.5 / eta[1];
                vec![mu, mu * mu + var]
            }
            Family::Gamma => {
                let (shape, rate) = (eta[0] + 1.0, -eta[1]);
                vec![digamma_unchecked(shape) - rate.ln(), shape / rate]
            }
            Family::InverseGaussian => {
                let mu = (eta[1] / eta[0]).sqrt();
                let lambda = -2.0 * eta[1];
                vec![mu, 1.0 / mu + 1.0 / lambda]
            }
            Family::InverseGamma => {
                let (shape, scale) = (-eta[0] - 1.0, -eta[1]);
                vec![scale.ln() - digamma_unchecked(shape), shape / scale]
            }
            Family::Exponential | Family::Rayleigh => vec![-1.0 / eta[0]],
            Family::Bernoulli => vec![sigmoid(eta[0])],
            Family::Poisson => vec![eta[0].exp()],
            Family::Categorical(_) => softmax(eta),
        }
    }

    /// Maps canonical parameters θ to natural parameters η.
    pub fn to_natural(self, canon: &CanonicalParams) -> Result<NaturalParams> {
        self.check_canonical(canon)?;
        let v = canon.as_slice();
        let eta = match self {
            Family::Normal | Family::LogNormal => vec![v[0] / v[1], -0.5 / v[1]],
            Family::Gamma => vec![v[0] - 1.0, -v[1]],
            Family::InverseGaussian => vec![-v[1] / (2.0 * v[0] * v[0]), -0.5 * v[1]],
            Family::InverseGamma => vec![-v[0] - 1.0, -v[1]],
            Family::Exponential => vec![-v[0]],
            Family::Rayleigh => vec![-1.0 / (v[0] * v[0])],
            Family::Bernoulli => {
                let p = v[0];
                if p <= 0.0 || p >= 1.0 {
                    return Err(self.invalid("p", p));
                }
                vec![(p / (1.0 - p)).ln()]
            }
            Family::Poisson => vec![v[0].ln()],
            Family::Categorical(_) => {
                if let Some(&zero) = v.iter().find(|p| **p <= 0.0) {
                    return Err(self.invalid("pi", zero));
                }
                v.iter().map(|p| p.ln()).collect()
            }
        };
        Ok(NaturalParams(eta))
    }

    /// Maps natural parameters η back to canonical parameters θ.
    pub fn from_natural(self, nat: &NaturalParams) -> Result<CanonicalParams> {
        self.check_natural(nat)?;
        let e = nat.as_slice();
        let theta = match self {
            Family::Normal | Family::LogNormal => vec![-e[0] / (2.0 * e[1]), -0.5 / e[1]],
            Family::Gamma => vec![e[0] + 1.0, -e[1]],
            Family::InverseGaussian => vec![(e[1] / e[0]).sqrt(), -2.0 * e[1]],
            Family::InverseGamma => vec![-e[0] - 1.0, -e[1]],
            Family::Exponential => vec![-e[0]],
            Family::Rayleigh => vec![(-1.0 / e[0]).sqrt()],
            Family::Bernoulli => vec![sigmoid(e[0])],
            Family::Poisson => vec![e[0].exp()],
            Family::Categorical(_) => softmax(e),
        };
        Ok(CanonicalParams(theta))
    }

    /// `ln p(x; η) = ln h(x) + ηᵀT(x) − A(η)`.
    pub fn log_pdf(self, nat: &NaturalParams, x: f64) -> Result<f64> {
        self.check_natural(nat)?;
        self.check_support(x)?;
        Ok(self.log_pdf_unchecked(nat.as_slice(), x))
    }

    pub(crate) fn log_pdf_unchecked(self, eta: &[f64], x: f64) -> f64 {
        let t = self.sufficient_stats(x);
        let dot: f64 = eta.iter().zip(&t).map(|(e, t)| e * t).sum();
        self.log_base_measure(x) + dot - self.log_partition_unchecked(eta)
    }

    /// Natural parameters of the data scaled by `omega`: `η̃_i = η_i / f_i(ω)`.
    pub fn scale_natural(self, nat: &NaturalParams, omega: f64) -> Result<NaturalParams> {
        let law = self.require_scaling("scaling")?;
        check_omega(omega)?;
        self.check_len(nat.len())?;
        let f = law.factors(omega);
        Ok(NaturalParams(
            nat.as_slice().iter().zip(&f).map(|(e, f)| e / f).collect(),
        ))
    }

    /// Inverse of [`Family::scale_natural`]: `η = f(ω) ⊙ η̃`.
    pub fn unscale_natural(self, nat_scaled: &NaturalParams, omega: f64) -> Result<NaturalParams> {
        let law = self.require_scaling("scaling")?;
        check_omega(omega)?;
        self.check_len(nat_scaled.len())?;
        let f = law.factors(omega);
        Ok(NaturalParams(
            nat_scaled.as_slice().iter().zip(&f).map(|(e, f)| e * f).collect(),
        ))
    }

    /// Applies the family's data transform element-wise.
    pub fn transform_data(self, data: &[f64], omega: f64) -> Result<Vec<f64>> {
        let law = self.require_scaling("scaling")?;
        check_omega(omega)?;
        data.iter().map(|&x| law.transform(x, omega)).collect()
    }

    /// Inverse of [`Family::transform_data`].
    pub fn untransform_data(self, data: &[f64], omega: f64) -> Result<Vec<f64>> {
        let law = self.require_scaling("scaling")?;
        check_omega(omega)?;
        data.iter().map(|&x| law.transform(x, 1.0 / omega)).collect()
    }

    /// Values on which location/scale statistics are measured: `ln x` for
    /// the log-normal (where scaling acts linearly), `x` otherwise.
    pub fn statistic_domain(self, x: f64) -> f64 {
        match self {
            Family::LogNormal => x.ln(),
            _ => x,
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScale(omega))
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub(crate) fn softmax(v: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(v);
    v.iter().map(|x| (x - lse).exp()).collect()
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Normal => f.write_str("normal"),
            Family::LogNormal => f.write_str("lognormal"),
            Family::Gamma => f.write_str("gamma"),
            Family::InverseGaussian => f.write_str("inverse_gaussian"),
            Family::InverseGamma => f.write_str("inverse_gamma"),
            Family::Exponential => f.write_str("exponential"),
            Family::Rayleigh => f.write_str("rayleigh"),
            Family::Bernoulli => f.write_str("bernoulli"),
            Family::Poisson => f.write_str("poisson"),
            Family::Categorical(k) => write!(f, "categorical({k})"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "normal" => Family::Normal,
            "lognormal" => Family::LogNormal,
            "gamma" => Family::Gamma,
            "inverse_gaussian" => Family::InverseGaussian,
            "inverse_gamma" => Family::InverseGamma,
            "exponential" => Family::Exponential,
            "rayleigh" => Family::Rayleigh,
            "bernoulli" => Family::Bernoulli,
            "poisson" => Family::Poisson,
            other => {
                let k = other
                    .strip_prefix("categorical(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| Error::Invalid(format!("unknown family `{other}`")))?;
                Family::categorical(k)?
            }
        })
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Family {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the data itself is mapped by a scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataTransform {
    /// `x̃ = ω·x`
    Linear,
    /// `x̃ = x^ω`
    Power,
}

/// Sufficient-statistic factorization `T_i(x̃) = f_i(ω)·T_i(x) + g_i(ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingLaw {
    family: Family,
}

impl ScalingLaw {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn data_transform(&self) -> DataTransform {
        match self.family {
            Family::LogNormal => DataTransform::Power,
            _ => DataTransform::Linear,
        }
    }

    /// Multiplicative factors `f_i(ω)`.
    pub fn factors(&self, omega: f64) -> Vec<f64> {
        match self.family {
            Family::Normal | Family::LogNormal => vec![omega, omega * omega],
            Family::Gamma => vec![1.0, omega],
            Family::InverseGaussian => vec![omega, 1.0 / omega],
            Family::InverseGamma => vec![1.0, 1.0 / omega],
            Family::Exponential => vec![omega],
            Family::Rayleigh => vec![omega * omega],
            _ => unreachable!("discrete families have no scaling law"),
        }
    }

    /// Additive offsets `g_i(ω)`.
    pub fn offsets(&self, omega: f64) -> Vec<f64> {
        match self.family {
            Family::Gamma | Family::InverseGamma => vec![omega.ln(), 0.0],
            f => vec![0.0; f.num_params()],
        }
    }

    fn transform(&self, x: f64, omega: f64) -> Result<f64> {
        match self.data_transform() {
            DataTransform::Linear => Ok(omega * x),
            DataTransform::Power => {
                if x > 0.0 {
                    Ok(x.powf(omega))
                } else {
                    Err(Error::OutOfSupport { family: self.family, x })
                }
            }
        }
    }
}

macro_rules! param_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: impl Into<Vec<f64>>) -> Self {
                Self(values.into())
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl<const N: usize> From<[f64; N]> for $name {
            fn from(v: [f64; N]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

param_vector!(
    /// Canonical parameters θ, e.g. `(μ, σ²)` or `(α, β)` with rate `β`.
    CanonicalParams
);
param_vector!(
    /// Natural parameters η.
    NaturalParams
);

/// Standard deviation of `x` under the model, used by standardization.
/// For the log-normal this is the standard deviation of `ln x`.
pub fn model_std(family: Family, canon: &CanonicalParams) -> Result<f64> {
    family.check_canonical(canon)?;
    let v = canon.as_slice();
    match family {
        Family::Normal | Family::LogNormal => Ok(v[1].sqrt()),
        Family::Gamma => Ok(v[0].sqrt() / v[1]),
        Family::InverseGaussian => Ok((v[0].powi(3) / v[1]).sqrt()),
        Family::InverseGamma => {
            let (a, b) = (v[0], v[1]);
            if a <= 2.0 {
                return Err(family.invalid("alpha", a));
            }
            Ok(b / ((a - 1.0) * (a - 2.0).sqrt()))
        }
        Family::Exponential => Ok(1.0 / v[0]),
        Family::Rayleigh => Ok(v[0] * ((4.0 - PI) / 2.0).sqrt()),
        _ => Err(Error::UnsupportedFamily { family, operation: "standardization" }),
    }
}
