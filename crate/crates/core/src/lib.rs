//! Collective-risk modelling: severity discretisation, aggregate loss distributions,
//! reinsurance costing, dependent sums via copulas, and claims reserving.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected; quadrature tables
// keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod aggregate_engine;
pub mod cli;
pub mod copulas;
pub mod discretize;
pub mod distributions;
pub mod error;
pub mod lossaggregation;
pub mod lossmodel;
pub mod lossreserve;
pub mod numeric;
pub mod rng;

pub use error::{Error, Result, Warning};
