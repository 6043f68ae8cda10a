//! Lipschitz standardization for mixed-type tabular data.
//!
//! Every column is modeled by an exponential-family likelihood. The crate
//! estimates the local smoothness of each column's log-likelihood in natural
//! parameters, picks a per-column scale factor so that all columns share a
//! common target smoothness `L* = 1/(D·α)`, converts discrete columns into
//! continuous ones (Bernoulli and Gamma tricks) so they can be scaled too,
//! and maps parameters learned on the scaled data back to the original
//! likelihoods.
//!
//! Modules, bottom-up:
//!
//! * [`expfam`] - families, parameter maps, scaling laws, special functions
//! * [`smoothness`] - local smoothness estimates (closed form and finite differences)
//! * [`scaler`] - scale-factor solvers and the baseline scalers
//! * [`tricks`] - discrete-to-continuous transforms and parameter recovery
//! * [`dataio`] - CSV ingestion, metadata sidecar, parameter recovery
//! * [`pipeline`] - the end-to-end scaling run used by the CLI
//! * [`harness`] - synthetic data, gradient-ascent fitting, balance diagnostics

pub mod dataio;
pub mod error;
pub mod expfam;
pub mod harness;
pub mod pipeline;
pub mod sampling;
pub mod scaler;
pub mod smoothness;
pub mod tricks;

pub use error::{Error, Result};
pub use expfam::{CanonicalParams, Family, NaturalParams};
