//! Crowdsourced binary labeling under the d-type worker-task specialization model.
//!
//! Each task and each worker carries one of `d` types. A worker answers a task of
//! its own type correctly with probability `p` and any other task with probability
//! `q`, where `1/2 <= q < p <= 1`. This crate provides:
//!
//! - [`model`]: ground-truth sampling, task assignment and noisy answer generation
//! - [`voting`]: plain and weighted majority voting with Hoeffding error bounds
//! - [`budgets`]: closed-form query budgets and stage-one parameter recommendations
//! - [`cluster`]: worker clustering, both threshold-based and SDP-based
//! - [`inference`]: type matching and the label inference pipelines
//!
//! The numerical core is generic over the floating-point type through [`Scalar`];
//! the `*64` aliases below fix it to `f64`, which is what the harness uses.

pub mod budgets;
pub mod cluster;
pub mod error;
pub mod inference;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod voting;

pub use error::{Error, Result};
pub use rng::{Seed, Stream};
pub use scalar::Scalar;

pub use cluster::{Clustering, StageOneBlock};
pub use model::{AnswerMatrix, AssignmentPlan, Label, World};

pub type ModelParams64 = model::ModelParams<f64>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type BudgetReport64 = budgets::BudgetReport<f64>;
pub type StageOneRecommendation64 = budgets::StageOneRecommendation<f64>;
pub type WeightVector64 = voting::WeightVector<f64>;
pub type EdgeDensityEstimates64 = cluster::sdp::EdgeDensityEstimates<f64>;
pub type SdpSolution64 = cluster::sdp::SdpSolution<f64>;
pub type SdpConfig64 = cluster::sdp::SdpConfig<f64>;
pub type ReliabilityEstimates64 = inference::ReliabilityEstimates<f64>;
pub type SymMatrix64 = linalg::SymMatrix<f64>;
