//! Welfare guarantees for the first-price auction with independent values.
//!
//! The crate certifies the welfare constant of the first-price auction by a
//! nested quadrature/minimization pipeline ([`bounds`]), solves and verifies
//! Bayes-Nash equilibria of concrete instances ([`equilibrium`]), and measures
//! equilibrium welfare and audits every intermediate inequality of the
//! welfare argument on those equilibria ([`welfare`]).
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases below fix it to `f64`, which is what the CLI uses.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod numerics;
pub mod report;
mod scalar;
pub mod welfare;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tolerances = numerics::ToleranceConfig<f64>;
pub type Distribution = model::DistributionSpec<f64>;
pub type Instance = model::AuctionInstance<f64>;
pub type Strategy = model::BidStrategy<f64>;
pub type Outcome = model::SampleOutcome<f64>;
pub type Bounds = bounds::BoundReport<f64>;

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
