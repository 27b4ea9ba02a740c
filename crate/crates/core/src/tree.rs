//! Binary CART trees: the shared base learner of both ensembles.
//!
//! Routing is `x[feature] <= threshold` to the left child, otherwise right.
//! Candidate thresholds are midpoints between consecutive distinct sorted
//! values; equal-quality splits resolve to the lower feature index and then
//! the lower threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitCriterion {
    /// Weighted Gini impurity on a {0,1} target; leaves hold the positive fraction.
    Gini,
    /// Weighted squared-error reduction; leaves hold the weighted mean.
    VarianceReduction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features drawn per node; values at or above the feature count disable sampling.
    pub mtry: usize,
    pub criterion: SplitCriterion,
}

impl TreeParams {
    pub fn forest_default() -> Self {
        Self { max_depth: 12, min_samples_leaf: 5, mtry: 6, criterion: SplitCriterion::Gini }
    }

    pub fn boosting_default() -> Self {
        Self { max_depth: 6, min_samples_leaf: 5, mtry: 36, criterion: SplitCriterion::VarianceReduction }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_depth == 0 {
            return Err(TreeError::Params("max_depth must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(TreeError::Params("min_samples_leaf must be at least 1".into()));
        }
        if self.mtry == 0 {
            return Err(TreeError::Params("mtry must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("fit error: {0}")]
    Fit(String),
    #[error("invalid tree parameters: {0}")]
    Params(String),
    #[error("predict error: {0}")]
    Predict(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_train: u64,
    },
    Leaf {
        prediction: f64,
        n_train: u64,
        /// `[negatives, positives]` among training rows; classification only.
        class_counts: Option<[u64; 2]>,
    },
}

impl Node {
    pub fn n_train(&self) -> u64 {
        match *self {
            Node::Split { n_train, .. } | Node::Leaf { n_train, .. } => n_train,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

/// A fitted tree. Node 0 is the root; nodes are stored in pre-order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRecord", into = "TreeRecord")]
pub struct Tree {
    nodes: Vec<Node>,
    params: TreeParams,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    /// A single-leaf tree.
    pub fn constant(prediction: f64, n_train: u64, params: TreeParams) -> Self {
        Self { nodes: vec![Node::Leaf { prediction, n_train, class_counts: None }], params }
    }

    /// Builds a tree from explicit nodes (root at index 0), checking structure.
    pub fn from_nodes(nodes: Vec<Node>, params: TreeParams) -> Result<Self, TreeError> {
        validate_structure(&nodes)?;
        Ok(Self { nodes, params })
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn n_internal(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, id: usize) -> usize {
            match *t.node(id) {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Distinct split features, ascending.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Split { feature, .. } => Some(feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.used_features().last().copied()
    }

    /// Node id of the leaf that `x` routes to. Does not validate `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_value(&self, id: usize) -> f64 {
        match self.nodes[id] {
            Node::Leaf { prediction, .. } => prediction,
            Node::Split { .. } => panic!("node {id} is not a leaf"),
        }
    }

    pub(crate) fn set_leaf_value(&mut self, id: usize, value: f64) {
        if let Node::Leaf { prediction, .. } = &mut self.nodes[id] {
            *prediction = value;
        }
    }

    /// Routes `x` to a leaf and returns its prediction.
    pub fn predict(&self, x: &[f64]) -> Result<f64, TreeError> {
        if let Some(f) = self.max_feature() {
            if x.len() <= f {
                return Err(TreeError::Predict(format!(
                    "input has {} features but the tree splits on index {f}",
                    x.len()
                )));
            }
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(TreeError::Predict(format!("feature {j} is not finite ({})", x[j])));
        }
        Ok(self.leaf_value(self.leaf_index(x)))
    }
}

/// Fits a tree on every row of `x`.
pub fn fit_tree<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    y: &[f64],
    weights: &[f64],
    params: &TreeParams,
    rng: &mut R,
) -> Result<Tree, TreeError> {
    let rows: Vec<usize> = (0..x.n_rows()).collect();
    fit_tree_on_rows(x, y, weights, &rows, params, rng)
}

/// Fits a tree on the multiset `rows` of row indices (duplicates allowed, as
/// in a bootstrap sample).
pub fn fit_tree_on_rows<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    y: &[f64],
    weights: &[f64],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
) -> Result<Tree, TreeError> {
    params.validate()?;
    if x.n_rows() == 0 || rows.is_empty() {
        return Err(TreeError::Fit("empty training set".into()));
    }
    if y.len() != x.n_rows() || weights.len() != x.n_rows() {
        return Err(TreeError::Fit(format!(
            "{} rows but {} targets and {} weights",
            x.n_rows(),
            y.len(),
            weights.len()
        )));
    }
    if let Some(&i) = rows.iter().find(|&&i| i >= x.n_rows()) {
        return Err(TreeError::Fit(format!("row index {i} out of range")));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(TreeError::Fit("non-finite feature or target value".into()));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(TreeError::Fit("weights must be finite and non-negative".into()));
    }
    if rows.iter().map(|&i| weights[i]).sum::<f64>() <= 0.0 {
        return Err(TreeError::Fit("weights sum to zero".into()));
    }
    if params.criterion == SplitCriterion::Gini && y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(TreeError::Fit("Gini criterion needs a 0/1 target".into()));
    }

    let mut builder = Builder { x, y, weights, params, nodes: Vec::new() };
    builder.grow(rows.to_vec(), 0, rng);
    Ok(Tree { nodes: builder.nodes, params: *params })
}

/// Weighted sufficient statistics of a row set.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NodeStats {
    pub w: f64,
    pub wy: f64,
    pub wyy: f64,
}

impl NodeStats {
    pub fn add(&mut self, w: f64, y: f64) {
        self.w += w;
        self.wy += w * y;
        self.wyy += w * y * y;
    }

    pub fn sub(self, o: NodeStats) -> NodeStats {
        NodeStats { w: self.w - o.w, wy: self.wy - o.wy, wyy: self.wyy - o.wyy }
    }

    /// Total (weight-scaled) impurity: `W * gini` or the sum of squared errors.
    pub fn impurity(&self, criterion: SplitCriterion) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        match criterion {
            SplitCriterion::Gini => 2.0 * self.wy * (self.w - self.wy) / self.w,
            SplitCriterion::VarianceReduction => (self.wyy - self.wy * self.wy / self.w).max(0.0),
        }
    }

    /// Scale for improvement tolerances.
    pub fn scale(&self, criterion: SplitCriterion) -> f64 {
        match criterion {
            SplitCriterion::Gini => self.w.max(1.0),
            SplitCriterion::VarianceReduction => self.wyy.max(1.0),
        }
    }
}

/// Improvements within this relative margin count as ties.
pub(crate) const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    improvement: f64,
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [f64],
    weights: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn stats(&self, rows: &[usize]) -> NodeStats {
        let mut s = NodeStats::default();
        for &i in rows {
            s.add(self.weights[i], self.y[i]);
        }
        s
    }

    fn grow<R: Rng + ?Sized>(&mut self, rows: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let id = self.nodes.len();
        let stats = self.stats(&rows);
        self.nodes.push(self.leaf(&rows, stats));

        let criterion = self.params.criterion;
        let can_split = depth < self.params.max_depth
            && rows.len() >= 2 * self.params.min_samples_leaf
            && stats.impurity(criterion) > TIE_TOLERANCE * stats.scale(criterion);
        if !can_split {
            return id;
        }
        let features = self.draw_features(rng);
        let Some(best) = self.best_split(&rows, stats, &features) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x.get(i, best.feature) <= best.threshold);
        let left = self.grow(left_rows, depth + 1, rng);
        let right = self.grow(right_rows, depth + 1, rng);
        self.nodes[id] =
            Node::Split { feature: best.feature, threshold: best.threshold, left, right, n_train: rows.len() as u64 };
        id
    }

    fn leaf(&self, rows: &[usize], stats: NodeStats) -> Node {
        let prediction = if stats.w > 0.0 { stats.wy / stats.w } else { 0.0 };
        let class_counts = (self.params.criterion == SplitCriterion::Gini).then(|| {
            let pos = rows.iter().filter(|&&i| self.y[i] == 1.0).count() as u64;
            [rows.len() as u64 - pos, pos]
        });
        Node::Leaf { prediction, n_train: rows.len() as u64, class_counts }
    }

    fn draw_features<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let p = self.x.n_cols();
        if self.params.mtry >= p {
            return (0..p).collect();
        }
        let mut f = rand::seq::index::sample(rng, p, self.params.mtry).into_vec();
        f.sort_unstable();
        f
    }

    fn best_split(&self, rows: &[usize], parent: NodeStats, features: &[usize]) -> Option<Candidate> {
        let criterion = self.params.criterion;
        let msl = self.params.min_samples_leaf;
        let parent_impurity = parent.impurity(criterion);
        let tol = TIE_TOLERANCE * parent.scale(criterion);
        let mut best: Option<Candidate> = None;
        let mut sorted: Vec<(f64, f64, f64)> = Vec::with_capacity(rows.len());
        for &feature in features {
            sorted.clear();
            sorted.extend(rows.iter().map(|&i| (self.x.get(i, feature), self.weights[i], self.y[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = NodeStats::default();
            for k in 1..sorted.len() {
                let (v_prev, w, y) = sorted[k - 1];
                left.add(w, y);
                let v_next = sorted[k].0;
                if v_prev == v_next || k < msl || sorted.len() - k < msl {
                    continue;
                }
                let right = parent.sub(left);
                if left.w <= 0.0 || right.w <= 0.0 {
                    continue;
                }
                let improvement = parent_impurity - left.impurity(criterion) - right.impurity(criterion);
                if improvement <= tol {
                    continue;
                }
                if best.is_none_or(|b| improvement > b.improvement + tol) {
                    best = Some(Candidate { feature, threshold: midpoint(v_prev, v_next), improvement });
                }
            }
        }
        best
    }
}

/// Midpoint of two distinct values that still separates them under `<=`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

fn validate_structure(nodes: &[Node]) -> Result<(), TreeError> {
    if nodes.is_empty() {
        return Err(TreeError::Malformed("tree has no nodes".into()));
    }
    let mut parents = vec![0usize; nodes.len()];
    for (id, n) in nodes.iter().enumerate() {
        if let Node::Split { left, right, threshold, .. } = *n {
            if !threshold.is_finite() {
                return Err(TreeError::Malformed(format!("node {id} has a non-finite threshold")));
            }
            for c in [left, right] {
                // Pre-order storage puts children after their parent, which rules out cycles.
                if c <= id || c >= nodes.len() {
                    return Err(TreeError::Malformed(format!("node {id} has invalid child {c}")));
                }
                parents[c] += 1;
            }
        }
    }
    if parents[0] != 0 {
        return Err(TreeError::Malformed("root has a parent".into()));
    }
    if let Some(id) = (1..nodes.len()).find(|&i| parents[i] != 1) {
        return Err(TreeError::Malformed(format!("node {id} is referenced {} times", parents[id])));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    kind: NodeKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    feature: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    left: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    right: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    prediction: Option<f64>,
    n_train: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    class_counts: Option<[u64; 2]>,
}

#[derive(Serialize, Deserialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum NodeKind {
    Split,
    Leaf,
}

#[derive(Serialize, Deserialize)]
struct TreeRecord {
    root: usize,
    params: TreeParams,
    nodes: Vec<NodeRecord>,
}

impl From<Tree> for TreeRecord {
    fn from(t: Tree) -> Self {
        let nodes = t
            .nodes
            .into_iter()
            .enumerate()
            .map(|(id, n)| match n {
                Node::Split { feature, threshold, left, right, n_train } => NodeRecord {
                    id,
                    kind: NodeKind::Split,
                    feature: Some(feature),
                    threshold: Some(threshold),
                    left: Some(left),
                    right: Some(right),
                    prediction: None,
                    n_train,
                    class_counts: None,
                },
                Node::Leaf { prediction, n_train, class_counts } => NodeRecord {
                    id,
                    kind: NodeKind::Leaf,
                    feature: None,
                    threshold: None,
                    left: None,
                    right: None,
                    prediction: Some(prediction),
                    n_train,
                    class_counts,
                },
            })
            .collect();
        TreeRecord { root: 0, params: t.params, nodes }
    }
}

impl TryFrom<TreeRecord> for Tree {
    type Error = TreeError;

    fn try_from(r: TreeRecord) -> Result<Self, Self::Error> {
        if r.root != 0 {
            return Err(TreeError::Malformed("root must be node 0".into()));
        }
        let mut nodes = Vec::with_capacity(r.nodes.len());
        for (pos, n) in r.nodes.into_iter().enumerate() {
            if n.id != pos {
                return Err(TreeError::Malformed(format!("node at position {pos} has id {}", n.id)));
            }
            let missing = |f: &str| TreeError::Malformed(format!("node {pos} lacks {f}"));
            nodes.push(match n.kind {
                NodeKind::Split => Node::Split {
                    feature: n.feature.ok_or_else(|| missing("feature"))?,
                    threshold: n.threshold.ok_or_else(|| missing("threshold"))?,
                    left: n.left.ok_or_else(|| missing("left"))?,
                    right: n.right.ok_or_else(|| missing("right"))?,
                    n_train: n.n_train,
                },
                NodeKind::Leaf => Node::Leaf {
                    prediction: n.prediction.ok_or_else(|| missing("prediction"))?,
                    n_train: n.n_train,
                    class_counts: n.class_counts,
                },
            });
        }
        Tree::from_nodes(nodes, r.params)
    }
}
