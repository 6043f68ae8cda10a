use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, InverseGaussian, LogNormal, Normal, Poisson};

use crate::dataio::{Column, ColumnSpec, DatasetFrame, Kind};
use crate::error::{Error, Result};
use crate::expfam::{CanonicalParams, Family};
use crate::sampling::column_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticColumn {
    pub name: String,
    pub family: Family,
    pub params: CanonicalParams,
}

impl SyntheticColumn {
    pub fn new(name: impl Into<String>, family: Family, params: impl Into<Vec<f64>>) -> Self {
        Self { name: name.into(), family, params: CanonicalParams::new(params) }
    }
}

/// Generated data: `observed` has NaN and a false mask where cells were
/// dropped; `truth` keeps every value.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub observed: DatasetFrame,
    pub truth: DatasetFrame,
    pub columns: Vec<SyntheticColumn>,
}

fn distr_err(e: impl std::fmt::Display) -> Error {
    Error::Invalid(e.to_string())
}

/// `n` i.i.d. draws from a family with canonical parameters `params`.
pub fn sample_family<R: Rng + ?Sized>(family: Family, params: &CanonicalParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    family.check_canonical(params)?;
    let v = params.as_slice();
    let draw = |d: &dyn Fn(&mut R) -> f64, rng: &mut R| (0..n).map(|_| d(rng)).collect::<Vec<f64>>();
    Ok(match family {
        Family::Normal => {
            let d = Normal::new(v[0], v[1].sqrt()).map_err(distr_err)?;
            draw(&|r| d.sample(r), rng)
        }
        Family::LogNormal => {
            let d = LogNormal::new(v[0], v[1].sqrt()).map_err(distr_err)?;
            draw(&|r| d.sample(r), rng)
        }
        Family::Gamma => {
            let d = Gamma::new(v[0], 1.0 / v[1]).map_err(distr_err)?;
            draw(&|r| d.sample(r), rng)
        }
        Family::InverseGamma => {
            let d = Gamma::new(v[0], 1.0 / v[1]).map_err(distr_err)?;
            draw(&|r| 1.0 / d.sample(r), rng)
        }
        Family::InverseGaussian => {
            let d = InverseGaussian::new(v[0], v[1]).map_err(distr_err)?;
            draw(&|r| d.sample(r), rng)
        }
        Family::Exponential => {
            let d = Exp::new(v[0]).map_err(distr_err)?;
            draw(&|r| d.sample(r), rng)
        }
        Family::Rayleigh => {
            let sigma = v[0];
            draw(&|r| sigma * (-2.0 * (1.0 - r.random::<f64>()).ln()).sqrt(), rng)
        }
        Family::Bernoulli => {
            let p = v[0];
            draw(&|r| f64::from(u8::from(r.random::<f64>() < p)), rng)
        }
        Family::Poisson => {
            let d = Poisson::new(v[0]).map_err(distr_err)?;
            draw(&|r| d.sample(r), rng)
        }
        Family::Categorical(_) => {
            let d = WeightedIndex::new(v).map_err(distr_err)?;
            draw(&|r| d.sample(r) as f64, rng)
        }
    })
}

/// Draws each column from its own stream and drops each cell with
/// probability `missing_rate`.
pub fn generate_synthetic(columns: &[SyntheticColumn], n_rows: usize, seed: u64, missing_rate: f64) -> Result<SyntheticData> {
    if !(0.0..1.0).contains(&missing_rate) {
        return Err(Error::Invalid(format!("missing rate must be in [0, 1), got {missing_rate}")));
    }
    let mut observed = Vec::with_capacity(columns.len());
    let mut truth = Vec::with_capacity(columns.len());
    for (i, col) in columns.iter().enumerate() {
        let mut rng = column_rng(seed, 2 * i as u64);
        let values = sample_family(col.family, &col.params, n_rows, &mut rng).map_err(|e| e.in_column(&col.name))?;
        let mut miss_rng = column_rng(seed, 2 * i as u64 + 1);
        let mask: Vec<bool> = (0..n_rows)
            .map(|_| missing_rate == 0.0 || miss_rng.random::<f64>() >= missing_rate)
            .collect();
        let mut spec = ColumnSpec::new(&col.name, Kind::of_family(col.family), col.family);
        if let Family::Categorical(k) = col.family {
            spec.categories = (0..k).map(|c| c.to_string()).collect();
        }
        let dropped = values.iter().zip(&mask).map(|(x, m)| if *m { *x } else { f64::NAN }).collect();
        observed.push(Column::new(spec.clone(), dropped, mask));
        truth.push(Column::new(spec, values, vec![true; n_rows]));
    }
    Ok(SyntheticData {
        observed: DatasetFrame::new(observed)?,
        truth: DatasetFrame::new(truth)?,
        columns: columns.to_vec(),
    })
}

/// Mixed fixture for the balance demonstration: Normal(μ = 50, σ = 100),
/// Exponential(λ = 10) and Categorical(0.1, 0.2, 0.3, 0.4).
pub fn balance_fixture_columns() -> Vec<SyntheticColumn> {
    vec![
        SyntheticColumn::new("normal", Family::Normal, [50.0, 100.0 * 100.0]),
        SyntheticColumn::new("exponential", Family::Exponential, [10.0]),
        SyntheticColumn::new("categorical", Family::Categorical(4), [0.1, 0.2, 0.3, 0.4]),
    ]
}

pub fn balance_fixture(n_rows: usize, seed: u64) -> Result<SyntheticData> {
    generate_synthetic(&balance_fixture_columns(), n_rows, seed, 0.0)
}
