//! Exact Shapley attributions for tree ensembles and the summaries built on them.
//!
//! The value of a feature coalition `S` for one tree is the path-dependent
//! conditional expectation: at a split on a feature in `S` follow the
//! instance, otherwise average both children weighted by training cover.
//! Expanding that recursion, every leaf contributes a product game over the
//! features on its path, so attributions are computed leaf by leaf from one
//! polynomial per leaf.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{CorrMatrix, Dataset, Month};
use crate::matrix::FeatureMatrix;
use crate::model::Model;
use crate::tree::{Node, Tree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapError {
    #[error("tree {tree} uses {used} distinct features, above the enumeration cap of {cap}; use shallower trees or the leaf-product algorithm")]
    TooManyFeatures { tree: usize, used: usize, cap: usize },
    #[error("model expects {expected} features, data has {got}")]
    Dimension { expected: usize, got: usize },
    #[error("node {node} of tree {tree} has zero training cover")]
    ZeroCover { tree: usize, node: usize },
    #[error("no instances to explain")]
    Empty,
    #[error("feature index {0} out of range")]
    Feature(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapAlgorithm {
    /// Per-leaf product games; polynomial in tree size.
    #[default]
    LeafProduct,
    /// Explicit sum over all subsets of each tree's used features.
    SubsetEnumeration { cap: usize },
}

pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapMatrix {
    /// `[n × p]` attributions.
    pub values: FeatureMatrix,
    pub base_value: f64,
    pub instance_dates: Vec<Month>,
    pub feature_names: Vec<String>,
    /// "log-odds" or "probability".
    pub unit: String,
}

impl ShapMatrix {
    pub fn n_instances(&self) -> usize {
        self.values.n_rows()
    }

    /// `date,feature,value` rows.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("date,feature,value\n");
        for (i, row) in self.values.rows().enumerate() {
            for (name, v) in self.feature_names.iter().zip(row) {
                out.push_str(&format!("{},{name},{v}\n", self.instance_dates[i]));
            }
        }
        out
    }

    /// One row per instance with a trailing `base_value` column.
    pub fn to_wide_csv(&self) -> String {
        let mut out = format!("date,{},base_value\n", self.feature_names.join(","));
        for (i, row) in self.values.rows().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{},{},{}\n", self.instance_dates[i], cells.join(","), self.base_value));
        }
        out
    }
}

/// Cover-weighted expectation of the tree output with every feature marginalized.
pub fn tree_expectation(tree: &Tree) -> f64 {
    fn go(t: &Tree, id: usize) -> f64 {
        match *t.node(id) {
            Node::Leaf { prediction, .. } => prediction,
            Node::Split { left, right, n_train, .. } => {
                let (nl, nr) = (t.node(left).n_train() as f64, t.node(right).n_train() as f64);
                let total = n_train as f64;
                (nl * go(t, left) + nr * go(t, right)) / total
            }
        }
    }
    go(tree, tree.root())
}

fn check_covers(tree: &Tree, index: usize) -> Result<(), ShapError> {
    for (node, n) in tree.nodes().iter().enumerate() {
        if let Node::Split { n_train: 0, .. } = n {
            return Err(ShapError::ZeroCover { tree: index, node });
        }
    }
    Ok(())
}

/// Adds `weight ×` the attributions of `tree` at `x` into `phi`.
pub fn tree_shap_into(tree: &Tree, x: &[f64], weight: f64, phi: &mut [f64]) {
    let mut path: Vec<(usize, f64, f64)> = Vec::new();
    leaf_walk(tree, tree.root(), x, weight, &mut path, phi);
}

// `path` holds (feature, a, b) per distinct feature: `a` is 1 when the
// instance follows every split on that feature along the path, `b` the
// product of cover ratios.
fn leaf_walk(tree: &Tree, id: usize, x: &[f64], weight: f64, path: &mut Vec<(usize, f64, f64)>, phi: &mut [f64]) {
    match *tree.node(id) {
        Node::Leaf { prediction, .. } => leaf_contribution(path, weight * prediction, phi),
        Node::Split { feature, threshold, left, right, n_train } => {
            let goes_left = x[feature] <= threshold;
            for (child, is_left) in [(left, true), (right, false)] {
                let a = f64::from(u8::from(goes_left == is_left));
                let b = tree.node(child).n_train() as f64 / n_train as f64;
                match path.iter().position(|e| e.0 == feature) {
                    Some(k) => {
                        let saved = path[k];
                        path[k] = (feature, saved.1 * a, saved.2 * b);
                        leaf_walk(tree, child, x, weight, path, phi);
                        path[k] = saved;
                    }
                    None => {
                        path.push((feature, a, b));
                        leaf_walk(tree, child, x, weight, path, phi);
                        path.pop();
                    }
                }
            }
        }
    }
}

/// Shapley values of the game `v(S) = value · Π_{f∈S} a_f · Π_{f∉S} b_f`.
fn leaf_contribution(path: &[(usize, f64, f64)], value: f64, phi: &mut [f64]) {
    let m = path.len();
    if m == 0 || value == 0.0 {
        return;
    }
    // Coefficients of Π (b_j + a_j z), lowest degree first.
    let mut poly = vec![0.0; m + 1];
    poly[0] = 1.0;
    for (deg, &(_, a, b)) in path.iter().enumerate() {
        for k in (0..=deg + 1).rev() {
            let lower = if k > 0 { poly[k - 1] } else { 0.0 };
            poly[k] = poly[k] * b + lower * a;
        }
    }
    let weights = shapley_weights(m);
    let mut q = vec![0.0; m];
    for &(feature, a, b) in path {
        if a == b {
            continue;
        }
        if a == 1.0 {
            // Divide by (b + z) from the top coefficient down.
            q[m - 1] = poly[m];
            for k in (1..m).rev() {
                q[k - 1] = poly[k] - b * q[k];
            }
        } else {
            for k in 0..m {
                q[k] = poly[k] / b;
            }
        }
        let s: f64 = q.iter().zip(&weights).map(|(c, w)| c * w).sum();
        phi[feature] += value * (a - b) * s;
    }
}

/// `k! (m-k-1)! / m!` for `k = 0..m`.
fn shapley_weights(m: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(m);
    let mut binom = 1.0; // C(m-1, k)
    for k in 0..m {
        w.push(1.0 / (m as f64 * binom));
        binom = binom * (m - 1 - k) as f64 / (k + 1) as f64;
    }
    w
}

/// Value of coalition `in_s` for one tree under the path-dependent expectation.
pub fn coalition_value(tree: &Tree, x: &[f64], in_s: &dyn Fn(usize) -> bool) -> f64 {
    fn go(t: &Tree, id: usize, x: &[f64], in_s: &dyn Fn(usize) -> bool) -> f64 {
        match *t.node(id) {
            Node::Leaf { prediction, .. } => prediction,
            Node::Split { feature, threshold, left, right, n_train } => {
                if in_s(feature) {
                    go(t, if x[feature] <= threshold { left } else { right }, x, in_s)
                } else {
                    let (nl, nr) = (t.node(left).n_train() as f64, t.node(right).n_train() as f64);
                    (nl * go(t, left, x, in_s) + nr * go(t, right, x, in_s)) / n_train as f64
                }
            }
        }
    }
    go(tree, tree.root(), x, in_s)
}

/// Subset-enumeration attributions over the features `tree` uses.
pub fn tree_shap_enumerated_into(tree: &Tree, x: &[f64], weight: f64, phi: &mut [f64]) {
    let used = tree.used_features();
    let m = used.len();
    if m == 0 {
        return;
    }
    let values: Vec<f64> = (0..1usize << m)
        .map(|mask| {
            coalition_value(tree, x, &|f| used.iter().position(|&u| u == f).is_some_and(|k| mask >> k & 1 == 1))
        })
        .collect();
    let weights = shapley_weights(m);
    for (k, &feature) in used.iter().enumerate() {
        let mut total = 0.0;
        for mask in 0..1usize << m {
            if mask >> k & 1 == 0 {
                let size = mask.count_ones() as usize;
                total += weights[size] * (values[mask | 1 << k] - values[mask]);
            }
        }
        phi[feature] += weight * total;
    }
}

/// Attributions of the ensemble output for every row of `x`.
pub fn shap_values(
    model: &Model,
    x: &FeatureMatrix,
    dates: &[Month],
    algorithm: ShapAlgorithm,
) -> Result<ShapMatrix, ShapError> {
    let p = model.feature_names().len();
    if x.n_cols() != p {
        return Err(ShapError::Dimension { expected: p, got: x.n_cols() });
    }
    if x.n_rows() == 0 {
        return Err(ShapError::Empty);
    }
    let (offset, trees) = model.weighted_trees();
    for (i, (_, t)) in trees.iter().enumerate() {
        check_covers(t, i)?;
        if let ShapAlgorithm::SubsetEnumeration { cap } = algorithm {
            let used = t.used_features().len();
            if used > cap {
                return Err(ShapError::TooManyFeatures { tree: i, used, cap });
            }
        }
    }
    let base_value = offset + trees.iter().map(|(w, t)| w * tree_expectation(t)).sum::<f64>();
    let rows: Vec<Vec<f64>> = (0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let mut phi = vec![0.0; p];
            for &(w, t) in &trees {
                match algorithm {
                    ShapAlgorithm::LeafProduct => tree_shap_into(t, x.row(i), w, &mut phi),
                    ShapAlgorithm::SubsetEnumeration { .. } => tree_shap_enumerated_into(t, x.row(i), w, &mut phi),
                }
            }
            phi
        })
        .collect();
    Ok(ShapMatrix {
        values: FeatureMatrix::from_rows(&rows).expect("rows have equal length"),
        base_value,
        instance_dates: dates.to_vec(),
        feature_names: model.feature_names().to_vec(),
        unit: model.output_unit().to_string(),
    })
}

/// Attributions for every instance of a dataset.
pub fn explain_dataset(model: &Model, ds: &Dataset, algorithm: ShapAlgorithm) -> Result<ShapMatrix, ShapError> {
    shap_values(model, &ds.features, &ds.dates, algorithm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub index: usize,
    pub mean_abs_shap: f64,
    pub rank: usize,
}

/// Features by descending mean |φ|, ties by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRanking {
    pub entries: Vec<ImportanceEntry>,
}

impl ImportanceRanking {
    pub fn top(&self, k: usize) -> Vec<&str> {
        self.entries.iter().take(k).map(|e| e.feature.as_str()).collect()
    }

    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.rank)
    }

    pub fn get(&self, feature: &str) -> Option<&ImportanceEntry> {
        self.entries.iter().find(|e| e.feature == feature)
    }
}

pub fn importance(shap: &ShapMatrix) -> ImportanceRanking {
    let n = shap.n_instances().max(1) as f64;
    let mut entries: Vec<ImportanceEntry> = shap
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| ImportanceEntry {
            feature: name.clone(),
            index: j,
            mean_abs_shap: shap.values.rows().map(|r| r[j].abs()).sum::<f64>() / n,
            rank: 0,
        })
        .collect();
    entries.sort_by(|a, b| b.mean_abs_shap.total_cmp(&a.mean_abs_shap).then_with(|| a.feature.cmp(&b.feature)));
    for (k, e) in entries.iter_mut().enumerate() {
        e.rank = k + 1;
    }
    ImportanceRanking { entries }
}

/// Train and test importances side by side, ordered by the test ranking.
pub fn importance_csv(train: &ImportanceRanking, test: &ImportanceRanking) -> String {
    let mut out = String::from("feature,train_mean_abs_shap,test_mean_abs_shap,train_rank,test_rank\n");
    for e in &test.entries {
        let tr = train.get(&e.feature);
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{}\n",
            e.feature,
            tr.map_or(f64::NAN, |t| t.mean_abs_shap),
            e.mean_abs_shap,
            tr.map_or(0, |t| t.rank),
            e.rank
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencePoint {
    pub date: Month,
    pub value: f64,
    pub shap: f64,
    pub partner_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencePoints {
    pub feature: String,
    pub partner: String,
    pub partner_coefficient: f64,
    pub points: Vec<DependencePoint>,
    /// Local linear smoother evaluated at each distinct feature value.
    pub smooth: Vec<(f64, f64)>,
}

impl DependencePoints {
    pub fn to_csv(&self) -> String {
        let mut out = format!("date,{},shap,{}\n", self.feature, self.partner);
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.date, p.value, p.shap, p.partner_value));
        }
        out
    }

    pub fn smooth_csv(&self) -> String {
        let mut out = format!("{},fitted_shap\n", self.feature);
        for (x, y) in &self.smooth {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}

pub const LOESS_SPAN: f64 = 0.5;

/// `(x_j, φ_j)` pairs for feature `j` with the values of its most correlated partner.
pub fn dependence(shap: &ShapMatrix, ds: &Dataset, j: usize, corr: &CorrMatrix) -> Result<DependencePoints, ShapError> {
    if j >= ds.n_features() || j >= shap.values.n_cols() {
        return Err(ShapError::Feature(j));
    }
    if shap.n_instances() != ds.len() {
        return Err(ShapError::Dimension { expected: ds.len(), got: shap.n_instances() });
    }
    let (partner, coefficient) = corr.most_correlated(j);
    let points: Vec<DependencePoint> = (0..ds.len())
        .map(|i| DependencePoint {
            date: ds.dates[i],
            value: ds.features.get(i, j),
            shap: shap.values.get(i, j),
            partner_value: ds.features.get(i, partner),
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.shap).collect();
    Ok(DependencePoints {
        feature: ds.feature_names[j].clone(),
        partner: ds.feature_names[partner].clone(),
        partner_coefficient: coefficient,
        points,
        smooth: loess(&xs, &ys, LOESS_SPAN),
    })
}

/// Locally weighted linear regression with tricube weights over the nearest
/// `ceil(span · n)` points, evaluated at each distinct `x`.
pub fn loess(xs: &[f64], ys: &[f64], span: f64) -> Vec<(f64, f64)> {
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let q = ((span * n as f64).ceil() as usize).clamp(1, n);
    let mut grid: Vec<f64> = xs.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut dist = vec![0.0; n];
    grid.into_iter()
        .map(|x0| {
            for (d, &x) in dist.iter_mut().zip(xs) {
                *d = (x - x0).abs();
            }
            let mut sorted = dist.clone();
            sorted.sort_by(f64::total_cmp);
            let h = sorted[q - 1];
            let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for ((&d, &x), &y) in dist.iter().zip(xs).zip(ys) {
                let w = if h > 0.0 {
                    if d >= h {
                        0.0
                    } else {
                        (1.0 - (d / h).powi(3)).powi(3)
                    }
                } else {
                    f64::from(u8::from(d == 0.0))
                };
                sw += w;
                sx += w * x;
                sy += w * y;
                sxx += w * x * x;
                sxy += w * x * y;
            }
            let mean_x = sx / sw;
            let mean_y = sy / sw;
            let var = sxx / sw - mean_x * mean_x;
            let fitted = if var > 1e-12 * (1.0 + mean_x * mean_x) {
                let slope = (sxy / sw - mean_x * mean_y) / var;
                mean_y + slope * (x0 - mean_x)
            } else {
                mean_y
            };
            (x0, fitted)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryPoint {
    pub date: Month,
    pub shap: f64,
    pub value: f64,
    /// Position of the value within its column, in [0, 1].
    pub quantile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    pub feature: String,
    pub rank: usize,
    pub points: Vec<SummaryPoint>,
}

/// Within-column quantiles `rank / (n - 1)`, tied values sharing their mean rank.
pub fn column_quantiles(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut q = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let mean_rank = (start + end) as f64 / 2.0;
        for &i in &order[start..=end] {
            q[i] = mean_rank / (n - 1) as f64;
        }
        start = end + 1;
    }
    q
}

/// Points behind a beeswarm summary, features in importance order.
pub fn contribution_summary(shap: &ShapMatrix, ds: &Dataset) -> Result<Vec<FeatureSummary>, ShapError> {
    if shap.n_instances() == 0 {
        return Err(ShapError::Empty);
    }
    if shap.n_instances() != ds.len() {
        return Err(ShapError::Dimension { expected: ds.len(), got: shap.n_instances() });
    }
    let ranking = importance(shap);
    Ok(ranking
        .entries
        .iter()
        .map(|e| {
            let column = ds.features.column(e.index);
            let quantiles = column_quantiles(&column);
            FeatureSummary {
                feature: e.feature.clone(),
                rank: e.rank,
                points: (0..ds.len())
                    .map(|i| SummaryPoint {
                        date: ds.dates[i],
                        shap: shap.values.get(i, e.index),
                        value: column[i],
                        quantile: quantiles[i],
                    })
                    .collect(),
            }
        })
        .collect())
}

pub fn contribution_summary_csv(summary: &[FeatureSummary]) -> String {
    let mut out = String::from("feature,rank,date,value,shap,quantile\n");
    for f in summary {
        for p in &f.points {
            out.push_str(&format!("{},{},{},{},{},{:.6}\n", f.feature, f.rank, p.date, p.value, p.shap, p.quantile));
        }
    }
    out
}
