#![allow(dead_code)]

use lipstd_core::{CanonicalParams, Family};
use proptest::prelude::*;

/// Well-conditioned canonical parameters for a continuous family.
pub fn canonical(family: Family) -> BoxedStrategy<CanonicalParams> {
    let two = |a: std::ops::Range<f64>, b: std::ops::Range<f64>| {
        (a, b).prop_map(|(x, y)| CanonicalParams::new(vec![x, y])).boxed()
    };
    let one = |a: std::ops::Range<f64>| a.prop_map(|x| CanonicalParams::new(vec![x])).boxed();
    match family {
        Family::Normal | Family::LogNormal => two(-5.0..5.0, 0.1..10.0),
        Family::Gamma | Family::InverseGamma => two(0.5..20.0, 0.1..10.0),
        Family::InverseGaussian => two(0.2..5.0, 0.2..20.0),
        Family::Exponential => one(0.1..10.0),
        Family::Rayleigh => one(0.2..5.0),
        Family::Bernoulli => one(0.01..0.99),
        Family::Poisson => one(0.05..50.0),
        Family::Categorical(k) => proptest::collection::vec(0.05..1.0f64, k)
            .prop_map(|w| {
                let s: f64 = w.iter().sum();
                CanonicalParams::new(w.into_iter().map(|x| x / s).collect::<Vec<_>>())
            })
            .boxed(),
    }
}

pub fn continuous_family() -> impl Strategy<Value = Family> {
    proptest::sample::select(Family::CONTINUOUS.to_vec())
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
