//! Fit ten parametric distribution families to univariate precipitation
//! records by maximum likelihood, score each fit with goodness-of-fit tests
//! and information criteria, and select a best-fit family per station.

// `!(x > 0.0)` is used on purpose to route NaN into the rejection branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod distributions;
pub mod error;
pub mod fit;
pub mod gof;
pub mod ingest;
pub mod lmoments;
pub mod optimize;
pub mod report;
pub mod select;
pub mod special;

pub use distributions::{Distribution, FamilyId, ParamVector, Support};
pub use error::{Error, Result};
pub use fit::{fit_mle, FitConfig, FittedModel};
