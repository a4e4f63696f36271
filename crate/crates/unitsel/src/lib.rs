//! Identifiability and exact bounds for unit-selection benefit functions
//! with nonbinary treatments and outcomes.
//!
//! Given experimental data `P(y | do(x))` and observational data `P(x, y)`
//! for an `m`-valued treatment and `n`-valued outcome, plus a benefit vector
//! over the `n^m` counterfactual response types, this crate either
//! identifies the exact value of the benefit function from experimental
//! data alone or computes exact rational bounds on it. An independent
//! linear-programming oracle over canonical response types provides tight
//! reference intervals, and a simulation harness measures bound quality on
//! randomly generated populations.
//!
//! All computation uses exact rational arithmetic; decimals only ever
//! appear in output formatting.

pub mod dataset;
pub mod engine;
pub mod lp;
pub mod model;
pub mod pc_bounds;
pub mod rational;
pub mod sim;

pub use model::{
    validate, BenefitFunction, BenefitTerm, ExperimentalDistribution, Interval, ModelError,
    ObservationalDistribution, ResponseAssignment, ValidationReport,
};
pub use rational::Rational;
