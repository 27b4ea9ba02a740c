//! Bagged random-forest classifier.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::model::{check_dim, ModelError, Prediction};
use crate::rng::child_rng;
use crate::tree::{fit_tree_on_rows, SplitCriterion, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean of leaf class probabilities.
    #[default]
    MeanProbability,
    /// Fraction of trees whose leaf probability is at least 0.5.
    HardVote,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub params: TreeParams,
    /// Disabling the bootstrap trains every tree on the full sample.
    pub bootstrap: bool,
    pub aggregation: Aggregation,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 500,
            params: TreeParams::forest_default(),
            bootstrap: true,
            aggregation: Aggregation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub seed: u64,
    #[serde(rename = "B")]
    pub n_trees: usize,
    pub mtry: usize,
    pub bootstrap: bool,
    #[serde(default)]
    pub aggregation: Aggregation,
    pub params: TreeParams,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

/// Fits `config.n_trees` Gini trees, tree `i` on a bootstrap sample drawn
/// from stream `i` of `seed`. The result does not depend on thread count.
pub fn fit_forest(train: &Dataset, config: &ForestConfig, seed: u64) -> Result<ForestModel, ModelError> {
    if config.n_trees == 0 {
        return Err(ModelError::Fit("forest needs at least one tree".into()));
    }
    if train.is_empty() || !train.has_both_classes() {
        return Err(ModelError::Fit("training target must contain both classes".into()));
    }
    let params = TreeParams { criterion: SplitCriterion::Gini, ..config.params };
    let y = train.target_f64();
    let weights = vec![1.0; train.len()];
    let n = train.len();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(seed, i as u64);
            let rows: Vec<usize> =
                if config.bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
            fit_tree_on_rows(&train.features, &y, &weights, &rows, &params, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ForestModel {
        seed,
        n_trees: config.n_trees,
        mtry: params.mtry,
        bootstrap: config.bootstrap,
        aggregation: config.aggregation,
        params,
        feature_names: train.feature_names.clone(),
        trees,
    })
}

impl ForestModel {
    /// Ensemble score per the configured aggregation.
    pub fn score(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.feature_names.len(), x)?;
        let mut sum = 0.0;
        for t in &self.trees {
            let p = t.predict(x)?;
            sum += match self.aggregation {
                Aggregation::MeanProbability => p,
                Aggregation::HardVote => f64::from(u8::from(p >= 0.5)),
            };
        }
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<Prediction, ModelError> {
        let score = self.score(x)?;
        Ok(Prediction { score, label: u8::from(score >= threshold) })
    }
}
