//! Per-column scale factors.
//!
//! `lip` picks `ω*` so the column's scaled smoothness equals a common
//! target `L*`; `std`, `max` and `iqr` are the classical baselines.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::DatasetFrame;
use crate::error::{Error, Result};
use crate::expfam::{fit_empirical, CanonicalParams, Family, NaturalParams};
use crate::smoothness::{estimate, scaled, scaled_total, SmoothnessEstimate};

/// Target smoothness `L* = 1/(D·α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingTarget {
    pub l_star: f64,
    pub alpha: f64,
    pub d_dims: usize,
}

impl ScalingTarget {
    pub fn from_learning_rate(alpha: f64, d_dims: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Invalid(format!("learning rate must be positive, got {alpha}")));
        }
        if d_dims == 0 {
            return Err(Error::Invalid("dataset has no columns".into()));
        }
        Ok(Self { l_star: 1.0 / (d_dims as f64 * alpha), alpha, d_dims })
    }

    /// A bare target, as if `D = 1` and `α = 1/L*`.
    pub fn with_l_star(l_star: f64) -> Result<Self> {
        if !(l_star > 0.0 && l_star.is_finite()) {
            return Err(Error::Invalid(format!("target smoothness must be positive, got {l_star}")));
        }
        Ok(Self { l_star, alpha: 1.0 / l_star, d_dims: 1 })
    }

    /// Share of the target for one member of a group of `k` columns.
    pub fn budget(&self, k: usize) -> f64 {
        self.l_star / k.max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMethod {
    None,
    Std,
    Max,
    Iqr,
    Lip,
}

impl ScalingMethod {
    pub const ALL: [ScalingMethod; 5] = [
        ScalingMethod::None,
        ScalingMethod::Std,
        ScalingMethod::Max,
        ScalingMethod::Iqr,
        ScalingMethod::Lip,
    ];
}

impl fmt::Display for ScalingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingMethod::None => "none",
            ScalingMethod::Std => "std",
            ScalingMethod::Max => "max",
            ScalingMethod::Iqr => "iqr",
            ScalingMethod::Lip => "lip",
        })
    }
}

impl FromStr for ScalingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalingMethod::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown scaling method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    Bisection,
    /// Best achievable ω when the target has no root.
    GoldenSection,
    /// A baseline statistic (std, max, iqr).
    Statistic,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub omega: f64,
    /// Scaled smoothness `|f_i|·Σ_j|f_j|·L_i` at `ω`.
    pub achieved: SmoothnessEstimate,
    pub method: SolveMethod,
    /// `|achieved.total − target|`.
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ScalingResult {
    fn new(
        family: Family,
        base: &SmoothnessEstimate,
        omega: f64,
        method: SolveMethod,
        l_target: f64,
    ) -> Result<Self> {
        let achieved = scaled(family, base, omega)?;
        let residual = (achieved.total - l_target).abs();
        Ok(Self { omega, achieved, method, residual, warning: None })
    }
}

const MAX_DOUBLINGS: i32 = 60;
const MAX_BISECTIONS: usize = 200;
const GOLDEN_LO: f64 = 1e-6;
const GOLDEN_HI: f64 = 1e6;

/// Solves `L̃(ω) = L*` for `ω`.
///
/// Exponential, Gamma and (log-)Normal use their closed forms; the other
/// families bisect on the scaled total.
pub fn solve_omega(family: Family, nat: &NaturalParams, l_star: f64) -> Result<ScalingResult> {
    check_target(l_star)?;
    let base = estimate(family, nat)?;
    solve_from_estimate(family, &base, l_star)
}

fn check_target(l_star: f64) -> Result<()> {
    if l_star > 0.0 && l_star.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("target smoothness must be positive, got {l_star}")))
    }
}

fn solve_from_estimate(family: Family, base: &SmoothnessEstimate, l_star: f64) -> Result<ScalingResult> {
    if base.total == l_star {
        return ScalingResult::new(family, base, 1.0, SolveMethod::ClosedForm, l_star);
    }
    let l = &base.per_param;
    let omega = match family {
        Family::Exponential => (l_star / l[0]).sqrt(),
        Family::Gamma => {
            if l_star <= l[0] {
                return Err(Error::InfeasibleTarget { l_star, l1: l[0] });
            }
            // (1 + ω)(L₁ + L₂ω) = L*, written without cancellation
            let (l1, l2) = (l[0], l[1]);
            let disc = ((l1 - l2).powi(2) + 4.0 * l2 * l_star).sqrt();
            2.0 * (l_star - l1) / (l1 + l2 + disc)
        }
        Family::Normal | Family::LogNormal => solve_quartic_positive_root(l[0], l[1], l_star),
        _ => return solve_omega_bisection_from(family, base, l_star),
    };
    ScalingResult::new(family, base, omega, SolveMethod::ClosedForm, l_star)
}

/// Bisection on `ω ↦ L̃(ω) − L*` for any continuous family. Brackets are
/// searched by doubling and halving from `ω = 1`; if roots exist on both
/// sides, the one nearest 1 in log space wins.
pub fn solve_omega_bisection(family: Family, nat: &NaturalParams, l_star: f64) -> Result<ScalingResult> {
    check_target(l_star)?;
    let base = estimate(family, nat)?;
    solve_omega_bisection_from(family, &base, l_star)
}

fn solve_omega_bisection_from(
    family: Family,
    base: &SmoothnessEstimate,
    l_star: f64,
) -> Result<ScalingResult> {
    let h = |w: f64| scaled_total(family, base, w) - l_star;
    let h1 = h(1.0);
    if h1 == 0.0 {
        return ScalingResult::new(family, base, 1.0, SolveMethod::Bisection, l_star);
    }
    let mut best: Option<f64> = None;
    for dir in [1.0f64, -1.0] {
        let (mut prev_w, mut prev_h) = (1.0, h1);
        for k in 1..=MAX_DOUBLINGS {
            let w = 2f64.powi(dir as i32 * k);
            let hw = h(w);
            if hw == 0.0 || hw.signum() != prev_h.signum() {
                let root = if hw == 0.0 { w } else { bisect(&h, prev_w, w) };
                if best.is_none_or(|b| root.ln().abs() < b.ln().abs()) {
                    best = Some(root);
                }
                break;
            }
            (prev_w, prev_h) = (w, hw);
        }
    }
    if best.is_none() && h1 > 0.0 {
        // L̃ is a positive combination of powers of ω, hence convex in ln ω:
        // both roots may sit inside one octave around the minimum.
        let u_min = golden_min(|u| h(u.exp()), -(MAX_DOUBLINGS as f64) * LN_2, MAX_DOUBLINGS as f64 * LN_2);
        let w_min = u_min.exp();
        let h_min = h(w_min);
        if h_min == 0.0 {
            best = Some(w_min);
        } else if h_min < 0.0 {
            best = Some(bisect(&h, 1.0, w_min));
        }
    }
    let omega = best.ok_or(Error::NoRoot { family, l_star })?;
    ScalingResult::new(family, base, omega, SolveMethod::Bisection, l_star)
}

/// Golden-section minimizer of a unimodal function on `[a, b]`.
fn golden_min(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-12 {
        if gc < gd {
            (b, d, gd) = (d, c, gc);
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            (a, c, gc) = (c, d, gd);
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

/// Bisects to full double precision between points of opposite sign.
fn bisect(h: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let lo_sign = h(lo).signum();
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm == 0.0 {
            return mid;
        }
        if hm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if h(lo).abs() <= h(hi).abs() {
        lo
    } else {
        hi
    }
}

/// The unique positive root of `Q(ω) = L₂ω⁴ + (L₁+L₂)ω³ + L₁ω² − L*`.
pub fn solve_quartic_positive_root(l1: f64, l2: f64, l_star: f64) -> f64 {
    let q = |w: f64| quartic(l1, l2, l_star, w);
    let mut hi = 1.0;
    while q(hi) <= 0.0 {
        hi *= 2.0;
    }
    bisect(&q, 0.0, hi)
}

pub fn quartic(l1: f64, l2: f64, l_star: f64, w: f64) -> f64 {
    ((l2 * w + (l1 + l2)) * w + l1) * w * w - l_star
}

/// Minimizes `(L̃(ω) − L*)²` over `ln ω ∈ [ln 1e-6, ln 1e6]`.
pub fn best_effort_omega(family: Family, base: &SmoothnessEstimate, l_star: f64) -> Result<ScalingResult> {
    let loss = |u: f64| (scaled_total(family, base, u.exp()) - l_star).powi(2);
    let omega = golden_min(loss, GOLDEN_LO.ln(), GOLDEN_HI.ln()).exp();
    let mut result = ScalingResult::new(family, base, omega, SolveMethod::GoldenSection, l_star)?;
    result.warning = Some(format!(
        "target L* = {l_star} is not reachable; closest achievable smoothness is {}",
        result.achieved.total
    ));
    Ok(result)
}

/// [`solve_omega`], falling back to [`best_effort_omega`] when the target
/// has no root.
pub fn solve_or_best_effort(family: Family, base: &SmoothnessEstimate, l_star: f64) -> Result<ScalingResult> {
    check_target(l_star)?;
    match solve_from_estimate(family, base, l_star) {
        Err(Error::InfeasibleTarget { .. } | Error::NoRoot { .. }) => {
            best_effort_omega(family, base, l_star)
        }
        other => other,
    }
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `ω` for the baseline methods: `1/std` (population), `1/max|x|` or
/// `1/iqr`, measured on `ln x` for the log-normal.
pub fn baseline_omega(method: ScalingMethod, family: Family, data: &[f64], mask: &[bool]) -> Result<f64> {
    let xs: Vec<f64> = data
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(x, _)| family.statistic_domain(*x))
        .collect();
    if xs.len() < 2 {
        return Err(Error::DegenerateColumn { statistic: "present count", value: xs.len() as f64 });
    }
    let (statistic, value) = match method {
        ScalingMethod::None | ScalingMethod::Lip => return Err(Error::Invalid(format!(
            "`{method}` is not a baseline statistic"
        ))),
        ScalingMethod::Std => {
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            ("std", (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt())
        }
        ScalingMethod::Max => ("max |x|", xs.iter().fold(0.0f64, |a, x| a.max(x.abs()))),
        ScalingMethod::Iqr => {
            let mut sorted = xs;
            sorted.sort_by(f64::total_cmp);
            ("iqr", quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25))
        }
    };
    if value > 0.0 && value.is_finite() {
        Ok(1.0 / value)
    } else {
        Err(Error::DegenerateColumn { statistic, value })
    }
}

/// Outcome of planning one column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPlan {
    pub omega: f64,
    /// Empirical fit on the unscaled data.
    pub fitted: CanonicalParams,
    /// Local smoothness at the fit; `None` for discrete families.
    pub base: Option<SmoothnessEstimate>,
    /// `None` for discrete families, which are never scaled.
    pub result: Option<ScalingResult>,
    pub l_target: f64,
}

/// Fits, estimates and scales one column.
pub fn plan_column(
    family: Family,
    data: &[f64],
    mask: &[bool],
    method: ScalingMethod,
    l_target: f64,
) -> Result<ColumnPlan> {
    let fitted = fit_empirical(family, data, mask)?;
    if family.is_discrete() {
        return Ok(ColumnPlan { omega: 1.0, fitted, base: None, result: None, l_target });
    }
    let nat = family.to_natural(&fitted)?;
    let base = estimate(family, &nat)?;
    let result = match method {
        ScalingMethod::None => ScalingResult::new(family, &base, 1.0, SolveMethod::Identity, l_target)?,
        ScalingMethod::Lip => solve_or_best_effort(family, &base, l_target)?,
        baseline => {
            let omega = baseline_omega(baseline, family, data, mask)?;
            ScalingResult::new(family, &base, omega, SolveMethod::Statistic, l_target)?
        }
    };
    Ok(ColumnPlan { omega: result.omega, fitted, base: Some(base), result: Some(result), l_target })
}

/// Plans every column of a frame; each column gets `L*` divided by the size
/// of its trick group. Failures are reported per column with the column
/// name attached, in column order.
pub fn plan_dataset(frame: &DatasetFrame, target: &ScalingTarget) -> Vec<Result<ColumnPlan>> {
    frame
        .columns
        .par_iter()
        .map(|col| {
            let spec = &col.spec;
            plan_column(
                spec.family,
                &col.values,
                &col.mask,
                spec.scaling_method,
                target.budget(spec.group_size),
            )
            .map_err(|e| e.in_column(&spec.name))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn nat(family: Family, canon: &[f64]) -> NaturalParams {
        family.to_natural(&CanonicalParams::new(canon.to_vec())).unwrap()
    }

    #[test]
    fn target_from_learning_rate() {
        let t = ScalingTarget::from_learning_rate(0.5, 2).unwrap();
        assert_eq!(t.l_star, 1.0);
        assert_eq!(t.budget(4), 0.25);
        assert!(ScalingTarget::from_learning_rate(0.0, 2).is_err());
        assert!(ScalingTarget::from_learning_rate(1e-3, 0).is_err());
    }

    #[test]
    fn exponential_closed_form() {
        let r = solve_omega(Family::Exponential, &nat(Family::Exponential, &[1.0]), 4.0).unwrap();
        assert_eq!(r.omega, 2.0);
        assert_eq!(r.method, SolveMethod::ClosedForm);
        assert_relative_eq!(r.achieved.total, 4.0, max_relative = 1e-15);
    }

    #[test]
    fn gamma_closed_form() {
        let r = solve_omega(Family::Gamma, &nat(Family::Gamma, &[4.0, 2.0]), 2.0).unwrap();
        // root of (1 + ω)(L₁ + 1.5ω) = 2 with L₁ from trigamma(4), mpmath
        assert_relative_eq!(r.omega, 0.472_893_518_629_278_5, max_relative = 1e-12);
        let check = (1.0 + r.omega) * (0.648_531_132_788_654 + 1.5 * r.omega);
        assert_relative_eq!(check, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn gamma_infeasible_below_l1() {
        let eta = nat(Family::Gamma, &[4.0, 2.0]);
        let l1 = estimate(Family::Gamma, &eta).unwrap().per_param[0];
        let err = solve_omega(Family::Gamma, &eta, l1).unwrap_err();
        assert!(matches!(err, Error::InfeasibleTarget { l1: got, .. } if got == l1));
        let base = estimate(Family::Gamma, &eta).unwrap();
        let r = solve_or_best_effort(Family::Gamma, &base, 0.5 * l1).unwrap();
        assert_eq!(r.method, SolveMethod::GoldenSection);
        assert!(r.warning.is_some());
        assert!(r.omega < 1e-5);
    }

    #[test]
    fn at_target_returns_identity() {
        let eta = nat(Family::InverseGaussian, &[1.3, 2.0]);
        let total = estimate(Family::InverseGaussian, &eta).unwrap().total;
        assert_eq!(solve_omega(Family::InverseGaussian, &eta, total).unwrap().omega, 1.0);
        let eta = nat(Family::Normal, &[0.0, 1.0]);
        assert_eq!(solve_omega(Family::Normal, &eta, 3.0).unwrap().omega, 1.0);
    }

    #[test]
    fn inverse_gaussian_roots_within_one_octave() {
        // L̃(ω) = L₁ω² + L₁ + L₂ + L₂/ω², minimal at ω⁴ = L₂/L₁
        let eta = nat(Family::InverseGaussian, &[1.0, 3.0]);
        let base = estimate(Family::InverseGaussian, &eta).unwrap();
        let (l1, l2) = (base.per_param[0], base.per_param[1]);
        let w_min = (l2 / l1).powf(0.25);
        assert!(w_min > 1.0 && w_min < 2.0, "{w_min}");
        let w0 = w_min * 1.05;
        let l_star = scaled(Family::InverseGaussian, &base, w0).unwrap().total;
        // the mirror root w_min²/w0 is the one nearer 1
        let r = solve_omega(Family::InverseGaussian, &eta, l_star).unwrap();
        assert_relative_eq!(r.omega, w_min * w_min / w0, max_relative = 1e-10);
        assert!(r.residual <= 1e-10 * l_star);
        let below = scaled(Family::InverseGaussian, &base, w_min).unwrap().total * (1.0 - 1e-9);
        assert!(matches!(solve_omega(Family::InverseGaussian, &eta, below), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn quartic_examples() {
        assert_eq!(solve_quartic_positive_root(0.0, 1.0, 2.0), 1.0);
        // Q(1) = 3 for l1 = 1, l2 = 2, L* = 3, so the root lies below 1
        let w = solve_quartic_positive_root(1.0, 2.0, 3.0);
        assert!(w < 1.0);
        assert!(quartic(1.0, 2.0, 3.0, w).abs() <= 1e-10 * 3.0);
        // ω²(ω + 1)² = 3, so ω = (√(1 + 4√3) − 1)/2
        let w = solve_quartic_positive_root(1.0, 1.0, 3.0);
        assert_relative_eq!(w, 0.907_853_262_086_953_9, max_relative = 1e-14);
        assert!(quartic(1.0, 1.0, 3.0, w).abs() <= 1e-10 * 3.0);
    }

    #[test]
    fn inverse_gamma_without_root_reports_no_root() {
        // L̃(ω) = (1 + 1/ω)(L₁ + L₂/ω) decreases to L₁
        let eta = nat(Family::InverseGamma, &[3.0, 2.0]);
        let l1 = estimate(Family::InverseGamma, &eta).unwrap().per_param[0];
        let err = solve_omega(Family::InverseGamma, &eta, 0.9 * l1).unwrap_err();
        assert!(matches!(err, Error::NoRoot { .. }));
    }

    #[test]
    fn baseline_examples() {
        let all = |n| vec![true; n];
        assert_eq!(baseline_omega(ScalingMethod::Std, Family::Normal, &[-2.0, 2.0], &all(2)).unwrap(), 0.5);
        assert_eq!(
            baseline_omega(ScalingMethod::Max, Family::Normal, &[1.0, -4.0, 3.0], &all(3)).unwrap(),
            0.25
        );
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(baseline_omega(ScalingMethod::Iqr, Family::Normal, &d, &all(5)).unwrap(), 0.5);
        let err = baseline_omega(ScalingMethod::Std, Family::Normal, &[3.0, 3.0], &all(2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn { statistic: "std", .. }));
    }

    #[test]
    fn quantiles_match_numpy_linear() {
        // numpy.quantile(..., method="linear")
        let s = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        assert_relative_eq!(quantile_sorted(&s, 0.25), 2.5, max_relative = 1e-15);
        assert_relative_eq!(quantile_sorted(&s, 0.75), 14.0, max_relative = 1e-15);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    fn instance() -> impl Strategy<Value = (Family, Vec<f64>, f64)> {
        let pos = || 0.2f64..5.0;
        let l_star = || (-3.0f64..5.0).prop_map(f64::exp);
        prop_oneof![
            (-3.0f64..3.0, pos(), l_star()).prop_map(|(m, v, l)| (Family::Normal, vec![m, v], l)),
            (-3.0f64..3.0, pos(), l_star()).prop_map(|(m, v, l)| (Family::LogNormal, vec![m, v], l)),
            (0.5f64..20.0, pos(), l_star()).prop_map(|(a, b, l)| (Family::Gamma, vec![a, b], l)),
            (pos(), l_star()).prop_map(|(r, l)| (Family::Exponential, vec![r], l)),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn closed_form_agrees_with_bisection((family, canon, l_star) in instance()) {
            let eta = nat(family, &canon);
            let cf = match solve_omega(family, &eta, l_star) {
                Ok(r) => r,
                Err(Error::InfeasibleTarget { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let bi = solve_omega_bisection(family, &eta, l_star).unwrap();
            prop_assert!((cf.omega - bi.omega).abs() <= 1e-8 * cf.omega);
            prop_assert!(cf.residual <= 1e-8 * l_star.max(1.0));
            prop_assert!(bi.residual <= 1e-8 * l_star.max(1.0));
        }

        #[test]
        fn baseline_statistic_is_one_after_scaling(
            xs in prop::collection::vec(-50.0f64..50.0, 3..40),
            m in prop_oneof![Just(ScalingMethod::Std), Just(ScalingMethod::Max), Just(ScalingMethod::Iqr)],
        ) {
            let mask = vec![true; xs.len()];
            let Ok(w) = baseline_omega(m, Family::Normal, &xs, &mask) else { return Ok(()) };
            let scaled: Vec<f64> = xs.iter().map(|x| w * x).collect();
            let again = baseline_omega(m, Family::Normal, &scaled, &mask).unwrap();
            prop_assert!((again - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn exponential_and_gamma_totals_increase(
            a in 0.5f64..20.0, b in 0.2f64..5.0, u in -5.0f64..5.0, du in 1e-3f64..1.0,
        ) {
            for (family, canon) in [(Family::Exponential, vec![b]), (Family::Gamma, vec![a, b])] {
                let base = estimate(family, &nat(family, &canon)).unwrap();
                let lo = scaled_total(family, &base, u.exp());
                let hi = scaled_total(family, &base, (u + du).exp());
                prop_assert!(hi > lo);
            }
        }
    }
}
