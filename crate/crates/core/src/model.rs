//! Shared model plumbing: errors, predictions and the JSON model envelope.

use serde::{Deserialize, Serialize};

use crate::boosting::GbmModel;
use crate::forest::ForestModel;
use crate::matrix::FeatureMatrix;
use crate::tree::{Tree, TreeError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("fit error: {0}")]
    Fit(String),
    #[error("expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite training deviance at iteration {iteration}")]
    Numeric { iteration: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    /// Probability-like score in [0, 1].
    pub score: f64,
    pub label: u8,
}

/// Either ensemble, tagged by `kind` in its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Forest(ForestModel),
    Gbm(GbmModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Forest(_) => "forest",
            Model::Gbm(_) => "gbm",
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::Forest(m) => &m.feature_names,
            Model::Gbm(m) => &m.feature_names,
        }
    }

    /// The model output as `offset + sum(weight * tree(x))`: mean leaf
    /// probability for a forest, log-odds margin for boosting.
    pub fn weighted_trees(&self) -> (f64, Vec<(f64, &Tree)>) {
        match self {
            Model::Forest(m) => {
                let w = 1.0 / m.trees.len() as f64;
                (0.0, m.trees.iter().map(|t| (w, t)).collect())
            }
            Model::Gbm(m) => (m.f0, m.stages.iter().map(|s| (m.nu * s.rho, &s.tree)).collect()),
        }
    }

    pub fn trees(&self) -> Vec<&Tree> {
        self.weighted_trees().1.into_iter().map(|(_, t)| t).collect()
    }

    /// Explained output: forest score or boosting margin.
    pub fn output(&self, x: &[f64]) -> Result<f64, ModelError> {
        match self {
            Model::Forest(m) => m.score(x),
            Model::Gbm(m) => m.margin(x),
        }
    }

    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<Prediction, ModelError> {
        match self {
            Model::Forest(m) => m.predict(x, threshold),
            Model::Gbm(m) => m.predict(x, threshold),
        }
    }

    pub fn predict_labels(&self, x: &FeatureMatrix, threshold: f64) -> Result<Vec<u8>, ModelError> {
        x.rows().map(|r| self.predict(r, threshold).map(|p| p.label)).collect()
    }

    /// Class predicted by a leaf value when rules are read off the trees.
    pub fn leaf_class(&self, value: f64) -> u8 {
        match self {
            Model::Forest(_) => u8::from(value >= 0.5),
            Model::Gbm(_) => u8::from(value > 0.0),
        }
    }

    /// Unit of the explained output.
    pub fn output_unit(&self) -> &'static str {
        match self {
            Model::Forest(_) => "probability",
            Model::Gbm(_) => "log-odds",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<(), ModelError> {
    if x.len() != expected {
        return Err(ModelError::Dimension { expected, got: x.len() });
    }
    Ok(())
}
