//! Local smoothness of a column's log-likelihood in natural parameters.
//!
//! The per-parameter constant is the 1-norm of the corresponding Hessian
//! row at the fitted point,
//! `L_i = Σ_j |∂²A/∂η_j∂η_i|`, and the column is `L = Σ_i L_i` smooth.
//! [`estimate`] uses per-family closed forms; [`estimate_fd`] differentiates
//! the log-partition numerically and serves as an independent check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::special::trigamma_unchecked;
use crate::expfam::{model_std, CanonicalParams, Family, NaturalParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessEstimate {
    pub per_param: Vec<f64>,
    pub total: f64,
    pub at_params: NaturalParams,
}

impl SmoothnessEstimate {
    pub fn new(per_param: Vec<f64>, at_params: NaturalParams) -> Self {
        let total = per_param.iter().sum();
        Self { per_param, total, at_params }
    }
}

fn require_continuous(family: Family) -> Result<()> {
    if family.is_continuous() {
        Ok(())
    } else {
        Err(Error::UnsupportedFamily {
            family,
            operation: "smoothness estimation (apply a trick first)",
        })
    }
}

/// Closed-form local smoothness at `nat`.
pub fn estimate(family: Family, nat: &NaturalParams) -> Result<SmoothnessEstimate> {
    require_continuous(family)?;
    let theta = family.from_natural(nat)?;
    let v = theta.as_slice();
    let per_param = match family {
        Family::Normal | Family::LogNormal => {
            let (mu, var) = (v[0].abs(), v[1]);
            vec![var + 2.0 * mu * var, 2.0 * var * (mu + var + 2.0 * mu * mu)]
        }
        Family::Gamma => {
            let (a, b) = (v[0], v[1]);
            vec![
                (1.0 + (1.0 - a) * trigamma_unchecked(a)).abs() + 1.0 / b,
                a / (b * b) + 1.0 / b,
            ]
        }
        Family::InverseGamma => {
            let (a, b) = (v[0], v[1]);
            vec![
                (1.0 - (a + 1.0) * trigamma_unchecked(a)).abs() + 1.0 / b,
                1.0 / b + a / (b * b),
            ]
        }
        Family::InverseGaussian => {
            let (mu, lambda) = (v[0], v[1]);
            vec![
                mu.powi(3) / lambda + mu / lambda,
                mu / lambda + (2.0 * mu + lambda) / (mu * lambda * lambda),
            ]
        }
        Family::Exponential => vec![1.0 / (v[0] * v[0])],
        Family::Rayleigh => vec![v[0].powi(4)],
        _ => unreachable!(),
    };
    Ok(SmoothnessEstimate::new(per_param, nat.clone()))
}

const FD_REL_STEP: f64 = 1e-4;
const FD_GUARD: f64 = 10.0;
const FD_MAX_SHRINKS: usize = 8;

/// Finite-difference local smoothness: second-order central differences of
/// `A(η)` with one Richardson extrapolation step.
pub fn estimate_fd(family: Family, nat: &NaturalParams) -> Result<SmoothnessEstimate> {
    require_continuous(family)?;
    family.check_natural(nat)?;
    let eta = nat.as_slice();
    let n = eta.len();
    let mut steps: Vec<f64> = eta.iter().map(|e| FD_REL_STEP * e.abs().max(1.0)).collect();

    let mut shrinks = 0;
    while !stencil_is_valid(family, eta, &steps) {
        if shrinks == FD_MAX_SHRINKS {
            return Err(Error::StepUnderflow { family });
        }
        steps.iter_mut().for_each(|h| *h *= 0.5);
        shrinks += 1;
    }

    let a = |point: &[f64]| family.log_partition_unchecked(point);
    let hessian_entry = |i: usize, j: usize, scale: f64| {
        let (hi, hj) = (steps[i] * scale, steps[j] * scale);
        let mut p = eta.to_vec();
        if i == j {
            p[i] = eta[i] + hi;
            let plus = a(&p);
            p[i] = eta[i] - hi;
            let minus = a(&p);
            (plus - 2.0 * a(eta) + minus) / (hi * hi)
        } else {
            let mut corner = |si: f64, sj: f64| {
                p[i] = eta[i] + si * hi;
                p[j] = eta[j] + sj * hj;
                a(&p)
            };
            (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0))
                / (4.0 * hi * hj)
        }
    };

    let per_param = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let coarse = hessian_entry(i, j, 1.0);
                    let fine = hessian_entry(i, j, 0.5);
                    ((4.0 * fine - coarse) / 3.0).abs()
                })
                .sum()
        })
        .collect();
    Ok(SmoothnessEstimate::new(per_param, nat.clone()))
}

fn stencil_is_valid(family: Family, eta: &[f64], steps: &[f64]) -> bool {
    let n = eta.len();
    let offsets = [-FD_GUARD, 0.0, FD_GUARD];
    let mut p = eta.to_vec();
    for i in 0..n {
        for j in 0..n {
            for si in offsets {
                for sj in offsets {
                    p.copy_from_slice(eta);
                    p[i] += si * steps[i];
                    p[j] += sj * steps[j];
                    if family.check_natural(&NaturalParams::new(p.clone())).is_err() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Smoothness of the scaled likelihood implied by the scaling law:
/// `L̃_i(ω) = |f_i(ω)| · Σ_j |f_j(ω)| · L_i`.
///
/// This bounds (and for one-parameter families equals) the local estimate
/// re-evaluated at the scaled parameters.
pub fn scaled(family: Family, base: &SmoothnessEstimate, omega: f64) -> Result<SmoothnessEstimate> {
    let at = family.scale_natural(&base.at_params, omega)?;
    let f = family.scaling_law().expect("checked by scale_natural").factors(omega);
    let norm: f64 = f.iter().map(|x| x.abs()).sum();
    let per_param = base
        .per_param
        .iter()
        .zip(&f)
        .map(|(l, fi)| fi.abs() * norm * l)
        .collect();
    Ok(SmoothnessEstimate::new(per_param, at))
}

/// Total of [`scaled`] without allocating; used inside root finders.
pub(crate) fn scaled_total(family: Family, base: &SmoothnessEstimate, omega: f64) -> f64 {
    let f = family.scaling_law().expect("continuous family").factors(omega);
    let norm: f64 = f.iter().map(|x| x.abs()).sum();
    base.per_param.iter().zip(&f).map(|(l, fi)| fi.abs() * l).sum::<f64>() * norm
}

/// Local smoothness after scaling the data to unit model variance
/// (`ω = 1/std`, with the log-normal standardized in log space).
pub fn smoothness_after_standardization(
    family: Family,
    canon: &CanonicalParams,
) -> Result<SmoothnessEstimate> {
    require_continuous(family)?;
    let omega = 1.0 / model_std(family, canon)?;
    let nat = family.to_natural(canon)?;
    estimate(family, &family.scale_natural(&nat, omega)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::special::trigamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn nat(family: Family, canon: &[f64]) -> NaturalParams {
        family.to_natural(&CanonicalParams::new(canon.to_vec())).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let s = estimate(Family::Normal, &nat(Family::Normal, &[0.0, 1.0])).unwrap();
        assert_eq!(s.per_param, vec![1.0, 2.0]);
        assert_eq!(s.total, 3.0);

        let s = estimate(Family::Exponential, &nat(Family::Exponential, &[1.0])).unwrap();
        assert_eq!(s.total, 1.0);

        // |1 + (1 − 4)·ψ⁽¹⁾(4)| + 1/2 with ψ⁽¹⁾(4) = 0.28382295573711532536
        let s = estimate(Family::Gamma, &nat(Family::Gamma, &[4.0, 2.0])).unwrap();
        assert_relative_eq!(s.per_param[0], 0.648_531_132_788_654, max_relative = 1e-12);
        assert_eq!(s.per_param[1], 1.5);
    }

    #[test]
    fn discrete_families_are_rejected() {
        let err = estimate(Family::Poisson, &[0.0].into()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFamily { .. }));
        assert!(estimate_fd(Family::Bernoulli, &[0.0].into()).is_err());
    }

    #[test]
    fn finite_difference_examples() {
        let s = estimate_fd(Family::Normal, &nat(Family::Normal, &[0.0, 1.0])).unwrap();
        assert_relative_eq!(s.total, 3.0, max_relative = 1e-5);

        let sigma2 = 2.0 / (4.0 - PI);
        let s = estimate_fd(Family::Rayleigh, &nat(Family::Rayleigh, &[sigma2.sqrt()])).unwrap();
        assert_relative_eq!(s.total, 5.428_416_224_316_322, max_relative = 1e-5);
    }

    #[test]
    fn gamma_finite_differences_follow_the_log_partition() {
        // The closed form keeps |1 + (1 − α)ψ⁽¹⁾(α)| on the η₁ diagonal; the
        // log-partition's true second derivative there is ψ⁽¹⁾(α). The
        // off-diagonal and η₂ terms agree.
        let eta = nat(Family::Gamma, &[4.0, 2.0]);
        let fd = estimate_fd(Family::Gamma, &eta).unwrap();
        let cf = estimate(Family::Gamma, &eta).unwrap();
        let exact_l1 = trigamma(4.0).unwrap() + 0.5;
        assert_relative_eq!(fd.per_param[0], exact_l1, max_relative = 1e-5);
        assert_relative_eq!(fd.per_param[1], cf.per_param[1], max_relative = 1e-5);

        let eta = nat(Family::InverseGamma, &[3.0, 1.5]);
        let fd = estimate_fd(Family::InverseGamma, &eta).unwrap();
        let cf = estimate(Family::InverseGamma, &eta).unwrap();
        let exact_l1 = trigamma(3.0).unwrap() + 1.0 / 1.5;
        assert_relative_eq!(fd.per_param[0], exact_l1, max_relative = 1e-5);
        assert_relative_eq!(fd.per_param[1], cf.per_param[1], max_relative = 1e-5);
    }

    #[test]
    fn step_underflow_near_boundary() {
        // η₂ = −1e-9 sits far inside 10·h of the boundary η₂ < 0.
        let err = estimate_fd(Family::Normal, &[0.0, -1e-9].into()).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. }));
    }

    #[test]
    fn standardized_anchors() {
        let s = smoothness_after_standardization(Family::Gamma, &[4.0, 0.37].into()).unwrap();
        assert_relative_eq!(s.per_param[1], 1.5, max_relative = 1e-12);
        let s = smoothness_after_standardization(Family::Exponential, &[123.0].into()).unwrap();
        assert_relative_eq!(s.total, 1.0, max_relative = 1e-12);
        let s = smoothness_after_standardization(Family::Rayleigh, &[0.07].into()).unwrap();
        assert_relative_eq!(s.total, (2.0 / (4.0 - PI)).powi(2), max_relative = 1e-12);
        let s = smoothness_after_standardization(Family::Normal, &[1.0, 4.0].into()).unwrap();
        assert_relative_eq!(s.per_param[0], 1.0 + 2.0 * 0.5, max_relative = 1e-12);
        assert!(smoothness_after_standardization(Family::InverseGamma, &[1.5, 1.0].into()).is_err());
    }

    #[test]
    fn gamma_scale_invariant_term_decreases() {
        let term = |a: f64| (1.0 + (1.0 - a) * trigamma(a).unwrap()).abs();
        let mut prev = term(1.0);
        for i in 1..400 {
            let a = 1.0 + i as f64 * 0.25;
            let cur = term(a);
            assert!(cur < prev, "not decreasing at alpha = {a}");
            prev = cur;
        }
    }

    fn canonical_strategy() -> impl Strategy<Value = (Family, Vec<f64>)> {
        let pos = || 0.2f64..5.0;
        prop_oneof![
            (-3.0f64..3.0, pos()).prop_map(|(m, v)| (Family::Normal, vec![m, v])),
            (-3.0f64..3.0, pos()).prop_map(|(m, v)| (Family::LogNormal, vec![m, v])),
            (0.5f64..20.0, pos()).prop_map(|(a, b)| (Family::Gamma, vec![a, b])),
            (pos(), pos()).prop_map(|(m, l)| (Family::InverseGaussian, vec![m, l])),
            (0.5f64..20.0, pos()).prop_map(|(a, b)| (Family::InverseGamma, vec![a, b])),
            pos().prop_map(|l| (Family::Exponential, vec![l])),
            pos().prop_map(|s| (Family::Rayleigh, vec![s])),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn total_is_sum_and_entries_non_negative((family, canon) in canonical_strategy()) {
            let s = estimate(family, &nat(family, &canon)).unwrap();
            let sum: f64 = s.per_param.iter().sum();
            prop_assert!((s.total - sum).abs() <= 1e-12 * s.total.max(1.0));
            prop_assert!(s.per_param.iter().all(|l| l.is_finite() && *l >= 0.0));
        }

        #[test]
        fn closed_form_matches_finite_differences((family, canon) in canonical_strategy()) {
            let eta = nat(family, &canon);
            let cf = estimate(family, &eta).unwrap();
            let fd = estimate_fd(family, &eta).unwrap();
            // Gamma-type families: only the η₂ row shares the closed form.
            let first = match family {
                Family::Gamma | Family::InverseGamma => 1,
                _ => 0,
            };
            for i in first..cf.per_param.len() {
                let (a, b) = (cf.per_param[i], fd.per_param[i]);
                prop_assert!((a - b).abs() <= 1e-5 * a.abs().max(b.abs()),
                    "{family} L{} closed {a} vs fd {b}", i + 1);
            }
        }

        #[test]
        fn scaled_law_bounds_local_reestimate(
            (family, canon) in canonical_strategy(),
            log_omega in -2.3f64..2.3,
        ) {
            let omega = log_omega.exp();
            let eta = nat(family, &canon);
            let base = estimate(family, &eta).unwrap();
            let law = scaled(family, &base, omega).unwrap();
            let local = estimate(family, &family.scale_natural(&eta, omega).unwrap()).unwrap();
            for (l, r) in law.per_param.iter().zip(&local.per_param) {
                if family.num_params() == 1 {
                    prop_assert!((l - r).abs() <= 1e-8 * l.abs().max(r.abs()));
                } else {
                    prop_assert!(*r <= l * (1.0 + 1e-12));
                }
            }
            prop_assert!((scaled_total(family, &base, omega) - law.total).abs() <= 1e-12 * law.total);
        }

        #[test]
        fn standardized_anchor_invariance(scale in 1e-3f64..1e3, alpha in 0.5f64..50.0) {
            let s = smoothness_after_standardization(Family::Exponential, &[scale].into()).unwrap();
            prop_assert!((s.total - 1.0).abs() <= 1e-9);
            let s = smoothness_after_standardization(Family::Rayleigh, &[scale].into()).unwrap();
            prop_assert!((s.total - (2.0 / (4.0 - PI)).powi(2)).abs() <= 1e-9);
            let s = smoothness_after_standardization(Family::Normal, &[0.0, scale].into()).unwrap();
            prop_assert!((s.total - 3.0).abs() <= 1e-9);
            let s = smoothness_after_standardization(Family::Gamma, &[alpha, scale].into()).unwrap();
            prop_assert!((s.per_param[1] - (1.0 + 1.0 / alpha.sqrt())).abs() <= 1e-9);
        }
    }
}
