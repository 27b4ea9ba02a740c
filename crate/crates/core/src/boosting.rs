//! Gradient boosting with logistic deviance and regression-tree base learners.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::model::{check_dim, ModelError, Prediction};
use crate::rng::child_rng;
use crate::tree::{fit_tree, SplitCriterion, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    LogisticDeviance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LeafMode {
    /// Tree leaves hold mean gradients; one step size per stage by line search.
    #[default]
    LineSearch,
    /// Leaves replaced by second-order values `G / (H + lambda)`; step size 1.
    Newton { lambda: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbmConfig {
    pub n_stages: usize,
    pub nu: f64,
    pub params: TreeParams,
    pub leaf_mode: LeafMode,
}

impl Default for GbmConfig {
    fn default() -> Self {
        Self { n_stages: 300, nu: 0.1, params: TreeParams::boosting_default(), leaf_mode: LeafMode::LineSearch }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub rho: f64,
    pub tree: Tree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub f0: f64,
    pub nu: f64,
    #[serde(rename = "M")]
    pub n_stages: usize,
    pub loss: Loss,
    #[serde(default)]
    pub leaf_mode: LeafMode,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub stages: Vec<Stage>,
}

/// Training deviance before the first stage and after each stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainTrace {
    pub deviance: Vec<f64>,
}

impl TrainTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,deviance\n");
        for (i, d) in self.deviance.iter().enumerate() {
            out.push_str(&format!("{i},{d:.12}\n"));
        }
        out
    }
}

pub fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^f) - y f`.
pub fn logistic_loss(y: f64, f: f64) -> f64 {
    f.max(0.0) + (-f.abs()).exp().ln_1p() - y * f
}

/// Twice the mean logistic loss.
pub fn deviance(y: &[f64], f: &[f64]) -> f64 {
    2.0 * y.iter().zip(f).map(|(&y, &f)| logistic_loss(y, f)).sum::<f64>() / y.len() as f64
}

/// Loss of moving margins `f` by `rho * h`.
pub fn step_loss(y: &[f64], f: &[f64], h: &[f64], rho: f64) -> f64 {
    y.iter().zip(f).zip(h).map(|((&y, &f), &h)| logistic_loss(y, f + rho * h)).sum()
}

pub const LINE_SEARCH_MAX: f64 = 8.0;
pub const LINE_SEARCH_TOL: f64 = 1e-6;

/// Golden-section minimisation of `g` on `[lo, hi]`.
pub fn golden_section<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut gc, mut gd) = (g(c), g(d));
    while hi - lo > tol {
        if gc <= gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - inv_phi * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + inv_phi * (hi - lo);
            gd = g(d);
        }
    }
    (lo + hi) / 2.0
}

/// Step size on `[0, 8]`; falls back to 0 when the search does not beat it.
pub fn line_search(y: &[f64], f: &[f64], h: &[f64]) -> f64 {
    let rho = golden_section(|r| step_loss(y, f, h, r), 0.0, LINE_SEARCH_MAX, LINE_SEARCH_TOL);
    if step_loss(y, f, h, rho) > step_loss(y, f, h, 0.0) {
        0.0
    } else {
        rho
    }
}

/// Fits `config.n_stages` stages. Feature sampling, if enabled, draws from
/// stream 0 of `seed`.
pub fn fit_gbm(train: &Dataset, config: &GbmConfig, seed: u64) -> Result<(GbmModel, TrainTrace), ModelError> {
    if !(config.nu > 0.0 && config.nu <= 1.0) {
        return Err(ModelError::Fit(format!("shrinkage must lie in (0, 1], got {}", config.nu)));
    }
    if let LeafMode::Newton { lambda } = config.leaf_mode {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ModelError::Fit(format!("lambda must be finite and non-negative, got {lambda}")));
        }
    }
    if train.is_empty() || !train.has_both_classes() {
        return Err(ModelError::Fit("training target must contain both classes".into()));
    }
    let params = TreeParams { criterion: SplitCriterion::VarianceReduction, ..config.params };
    params.validate()?;
    let y = train.target_f64();
    let n = y.len();
    let p = y.iter().sum::<f64>() / n as f64;
    let f0 = (p / (1.0 - p)).ln();
    let mut f = vec![f0; n];
    let weights = vec![1.0; n];
    let mut rng = child_rng(seed, 0);
    let mut trace = TrainTrace { deviance: vec![deviance(&y, &f)] };
    let mut stages = Vec::with_capacity(config.n_stages);

    for iteration in 1..=config.n_stages {
        let residual: Vec<f64> = y.iter().zip(&f).map(|(&y, &f)| y - sigmoid(f)).collect();
        let mut tree = fit_tree(&train.features, &residual, &weights, &params, &mut rng)?;
        let leaves: Vec<usize> = train.features.rows().map(|x| tree.leaf_index(x)).collect();
        let rho = match config.leaf_mode {
            LeafMode::LineSearch => {
                let h: Vec<f64> = leaves.iter().map(|&l| tree.leaf_value(l)).collect();
                line_search(&y, &f, &h)
            }
            LeafMode::Newton { lambda } => {
                let mut sums = vec![(0.0, 0.0); tree.nodes().len()];
                for ((&l, &r), &fi) in leaves.iter().zip(&residual).zip(&f) {
                    let s = sigmoid(fi);
                    sums[l].0 += r;
                    sums[l].1 += s * (1.0 - s);
                }
                for (id, &(g, h)) in sums.iter().enumerate() {
                    if tree.node(id).is_leaf() {
                        let denom = h + lambda;
                        tree.set_leaf_value(id, if denom > 0.0 { g / denom } else { 0.0 });
                    }
                }
                1.0
            }
        };
        let step = config.nu * rho;
        for (fi, &l) in f.iter_mut().zip(&leaves) {
            *fi += step * tree.leaf_value(l);
        }
        let dev = deviance(&y, &f);
        if !dev.is_finite() {
            return Err(ModelError::Numeric { iteration });
        }
        trace.deviance.push(dev);
        stages.push(Stage { rho, tree });
    }

    let model = GbmModel {
        f0,
        nu: config.nu,
        n_stages: config.n_stages,
        loss: Loss::LogisticDeviance,
        leaf_mode: config.leaf_mode,
        seed,
        feature_names: train.feature_names.clone(),
        stages,
    };
    Ok((model, trace))
}

impl GbmModel {
    /// A model with no stages.
    pub fn constant(f0: f64, nu: f64, feature_names: Vec<String>) -> Self {
        Self {
            f0,
            nu,
            n_stages: 0,
            loss: Loss::LogisticDeviance,
            leaf_mode: LeafMode::LineSearch,
            seed: 0,
            feature_names,
            stages: Vec::new(),
        }
    }

    /// `f0 + sum(nu * rho_t * tree_t(x))`.
    pub fn margin(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.feature_names.len(), x)?;
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(crate::tree::TreeError::Predict(format!("feature {j} is not finite")).into());
        }
        let mut m = self.f0;
        for s in &self.stages {
            m += self.nu * s.rho * s.tree.predict(x)?;
        }
        Ok(m)
    }

    pub fn predict(&self, x: &[f64], threshold: f64) -> Result<Prediction, ModelError> {
        let score = sigmoid(self.margin(x)?);
        Ok(Prediction { score, label: u8::from(score >= threshold) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;

    #[test]
    fn loss_and_sigmoid_are_stable() {
        assert!((sigmoid(2.0) - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!((logistic_loss(1.0, 0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(logistic_loss(0.0, 800.0).is_finite());
    }

    #[test]
    fn constant_model_scores_base_rate() {
        let p: f64 = 0.2;
        let m = GbmModel::constant((p / (1.0 - p)).ln(), 0.1, vec!["a".into()]);
        assert!((m.predict(&[3.0], 0.5).unwrap().score - p).abs() < 1e-15);
    }

    #[test]
    fn closed_form_stump() {
        let params = TreeParams::boosting_default();
        let leaf = |v| Node::Leaf { prediction: v, n_train: 1, class_counts: None };
        let tree = Tree::from_nodes(
            vec![Node::Split { feature: 0, threshold: 0.0, left: 1, right: 2, n_train: 2 }, leaf(-1.0), leaf(2.0)],
            params,
        )
        .unwrap();
        let mut m = GbmModel::constant(0.0, 1.0, vec!["a".into()]);
        m.stages.push(Stage { rho: 1.0, tree });
        let p = m.predict(&[1.0], 0.5).unwrap();
        assert_eq!(m.margin(&[1.0]).unwrap(), 2.0);
        assert!((p.score - 0.8808).abs() < 1e-4);
        assert!(m.margin(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn golden_section_finds_quadratic_minimum() {
        let x = golden_section(|r| (r - 1.3).powi(2), 0.0, 8.0, 1e-8);
        assert!((x - 1.3).abs() < 1e-7);
    }
}
