//! Open-environment evaluation for tabular models.
//!
//! This crate builds the four open-environment challenge scenarios for a
//! tabular dataset (emerging new classes, decremental/incremental features,
//! changing data distributions, varied learning objectives), scores model
//! predictions under each of them, and quantifies distribution shift with
//! numerical metrics (optimal-transport dataset distance under a Gaussian
//! approximation, Frechet dataset distance, label shift, and a
//! generalization-gap decomposition into covariate- and concept-shift terms).
//!
//! The crate is model-agnostic: built-in k-NN, logistic-regression and MLP
//! baselines make every pipeline runnable end to end, while external models
//! participate through prediction and embedding files.

pub mod data;
pub mod error;
pub mod metrics;
pub mod models;
pub mod report;
pub mod scenario;
pub mod shift;

pub use error::{Error, Result};
