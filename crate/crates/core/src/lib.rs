//! Exact, sampling-free evaluation of treatment offset models for conditional
//! average treatment effects on binary structural causal models.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below pin the common instantiations.
// `!(a > b)` is deliberate throughout: it is true for NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod dgm;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod likelihood;
pub mod metrics;
pub mod numeric;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ScmSpec64 = dgm::ScmSpec<f64>;
pub type JointTable64 = dgm::JointTable<f64>;
pub type ModelParams64 = likelihood::ModelParams<f64>;
pub type FitResult64 = estimators::FitResult<f64>;
pub type FitOptions64 = estimators::FitOptions<f64>;
pub type CatePrediction64 = metrics::CatePrediction<f64>;
pub type InterventionalTable64 = causal::InterventionalTable<f64>;
pub type CollapsibilityRow64 = causal::CollapsibilityRow<f64>;

pub type ScmSpec32 = dgm::ScmSpec<f32>;
pub type JointTable32 = dgm::JointTable<f32>;
pub type ModelParams32 = likelihood::ModelParams<f32>;
pub type FitResult32 = estimators::FitResult<f32>;
