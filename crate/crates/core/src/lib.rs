//! Interpretable recession indicators from Treasury term spreads.
//!
//! The crate builds the 36 pairwise spreads between nine constant-maturity
//! tenors, fits random-forest and gradient-boosting classifiers of NBER
//! recession months, and explains them with decile lift, exact tree Shapley
//! values and extracted threshold rules.

pub mod boosting;
pub mod cli;
pub mod data;
pub mod forest;
pub mod lift;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod rules;
pub mod shap;
pub mod svg;
pub mod tree;
