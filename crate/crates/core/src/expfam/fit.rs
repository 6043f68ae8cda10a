use super::{CanonicalParams, Family};
use crate::error::{Error, Result};

/// Closed-form point estimate of a family's parameters from the present
/// observations (`mask[i] == true`). Variances use the population (1/N)
/// convention.
///
/// Gamma shape uses the log-moment approximation
/// `α = (3 − s + √((s − 3)² + 24 s)) / (12 s)`, `s = ln(mean) − mean(ln x)`.
pub fn fit_empirical(family: Family, data: &[f64], mask: &[bool]) -> Result<CanonicalParams> {
    if data.len() != mask.len() {
        return Err(Error::Invalid(format!(
            "data has {} values but mask has {}",
            data.len(),
            mask.len()
        )));
    }
    let present: Vec<f64> = data
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(x, _)| *x)
        .collect();
    if present.len() < 2 {
        return Err(Error::DegenerateColumn {
            statistic: "present count",
            value: present.len() as f64,
        });
    }
    if let Some(&x) = present.iter().find(|x| !family.in_support(**x)) {
        return Err(Error::OutOfSupport { family, x });
    }
    fit_present(family, &present)
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    xs.sum::<f64>() / n
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs.iter().copied());
    let var = mean(xs.iter().map(|x| (x - m) * (x - m)));
    (m, var)
}

fn positive_stat(statistic: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateColumn { statistic, value })
    }
}

fn fit_gamma(xs: impl Iterator<Item = f64> + Clone) -> Result<(f64, f64)> {
    let n = xs.clone().count() as f64;
    let m = xs.clone().sum::<f64>() / n;
    let mean_log = xs.map(f64::ln).sum::<f64>() / n;
    let s = positive_stat("log-moment gap s", m.ln() - mean_log)?;
    let shape = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    Ok((shape, shape / m))
}

fn fit_present(family: Family, xs: &[f64]) -> Result<CanonicalParams> {
    let theta = match family {
        Family::Normal => {
            let (m, var) = mean_and_var(xs);
            vec![m, positive_stat("variance", var)?]
        }
        Family::LogNormal => {
            let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let (m, var) = mean_and_var(&logs);
            vec![m, positive_stat("variance of ln x", var)?]
        }
        Family::Exponential => {
            let m = positive_stat("mean", mean(xs.iter().copied()))?;
            vec![1.0 / m]
        }
        Family::Rayleigh => {
            let ms = mean(xs.iter().map(|x| x * x));
            vec![(0.5 * positive_stat("mean square", ms)?).sqrt()]
        }
        Family::InverseGaussian => {
            let m = mean(xs.iter().copied());
            let mean_inv = mean(xs.iter().map(|x| 1.0 / x));
            let gap = positive_stat("mean(1/x) - 1/mean", mean_inv - 1.0 / m)?;
            vec![m, 1.0 / gap]
        }
        Family::Gamma => {
            let (a, b) = fit_gamma(xs.iter().copied())?;
            vec![a, b]
        }
        Family::InverseGamma => {
            let (a, b) = fit_gamma(xs.iter().map(|x| 1.0 / x))?;
            vec![a, b]
        }
        Family::Bernoulli => vec![mean(xs.iter().copied())],
        Family::Poisson => vec![positive_stat("mean", mean(xs.iter().copied()))?],
        Family::Categorical(k) => {
            let mut counts = vec![0.0; k];
            for &x in xs {
                counts[x as usize] += 1.0;
            }
            let n = xs.len() as f64;
            counts.iter().map(|c| c / n).collect()
        }
    };
    Ok(CanonicalParams::new(theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma};

    fn all(n: usize) -> Vec<bool> {
        vec![true; n]
    }

    #[test]
    fn normal_population_variance() {
        let c = fit_empirical(Family::Normal, &[-1.0, 1.0], &all(2)).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn exponential_rate() {
        let c = fit_empirical(Family::Exponential, &[1.0, 3.0], &all(2)).unwrap();
        assert_eq!(c.as_slice(), &[0.5]);
    }

    #[test]
    fn masked_entries_are_ignored() {
        let c = fit_empirical(Family::Normal, &[-1.0, 1e9, 1.0], &[true, false, true]).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn gamma_recovers_shape_and_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dist = Gamma::new(4.0, 0.5).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| dist.sample(&mut rng)).collect();
        let c = fit_empirical(Family::Gamma, &xs, &all(xs.len())).unwrap();
        assert!((c[0] - 4.0).abs() < 0.15, "alpha = {}", c[0]);
        assert!((c[1] - 2.0).abs() < 0.1, "beta = {}", c[1]);
    }

    #[test]
    fn inverse_gamma_fits_reciprocal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let dist = Gamma::new(6.0, 1.0 / 3.0).unwrap();
        let xs: Vec<f64> = (0..20_000).map(|_| 1.0 / dist.sample(&mut rng)).collect();
        let c = fit_empirical(Family::InverseGamma, &xs, &all(xs.len())).unwrap();
        assert!((c[0] - 6.0).abs() < 0.25, "alpha = {}", c[0]);
        assert!((c[1] - 3.0).abs() < 0.15, "beta = {}", c[1]);
    }

    #[test]
    fn degenerate_columns_carry_the_statistic() {
        let err = fit_empirical(Family::Normal, &[2.0, 2.0, 2.0], &all(3)).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn { statistic: "variance", value } if value == 0.0));
        let err = fit_empirical(Family::Gamma, &[3.0, 3.0], &all(2)).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn { statistic: "log-moment gap s", .. }));
        let err = fit_empirical(Family::Normal, &[1.0, 2.0], &[true, false]).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn { statistic: "present count", .. }));
    }

    #[test]
    fn support_is_enforced() {
        let err = fit_empirical(Family::Gamma, &[1.0, -2.0], &all(2)).unwrap_err();
        assert!(matches!(err, Error::OutOfSupport { .. }));
    }
}
