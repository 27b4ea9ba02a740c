#![allow(dead_code)]

pub mod reference;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spreadscope::data::{attach_target, compute_spreads, parse_yield_csv, Dataset, Month};
use spreadscope::matrix::FeatureMatrix;
use spreadscope::tree::{Node, SplitCriterion, Tree, TreeParams};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Panel and recession files: `SPREADSCOPE_PANEL` / `SPREADSCOPE_USREC`
/// when set, otherwise the vendored stand-in.
pub fn panel_sources() -> (PathBuf, PathBuf, &'static str) {
    let panel = std::env::var_os("SPREADSCOPE_PANEL").map(PathBuf::from);
    let usrec = std::env::var_os("SPREADSCOPE_USREC").map(PathBuf::from);
    match panel {
        Some(p) => (p, usrec.unwrap_or_else(|| fixture("usrec_1969_2020.csv")), "external panel"),
        None => (fixture("stand_in_panel_1969_2020.csv"), fixture("usrec_1969_2020.csv"), "stand-in panel"),
    }
}

pub fn full_dataset() -> Dataset {
    let (panel, usrec, _) = panel_sources();
    let parsed = parse_yield_csv(&std::fs::read_to_string(panel).unwrap()).unwrap();
    attach_target(compute_spreads(&parsed.panel), &std::fs::read_to_string(usrec).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn months(n: usize) -> Vec<Month> {
    (0..n).map(|i| Month::from_ordinal(1990 * 12 + i as i64)).collect()
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, p: usize) -> FeatureMatrix {
    let values = (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    FeatureMatrix::new(n, p, values).unwrap()
}

/// Random features with a target that depends on the first two columns plus noise.
pub fn random_dataset(rng: &mut impl Rng, n: usize, p: usize) -> Dataset {
    let features = random_matrix(rng, n, p);
    let mut target: Vec<u8> =
        features.rows().map(|x| u8::from(x[0] + 0.5 * x[1.min(p - 1)] + rng.random_range(-0.3..0.3) > 0.3)).collect();
    target[0] = 0;
    target[1] = 1;
    Dataset { dates: months(n), features, target, feature_names: (0..p).map(|j| format!("f{j}")).collect() }
}

/// Two Gaussian clouds in `p` dimensions, means ±1.5 on every axis.
pub fn two_gaussians(rng: &mut impl Rng, n: usize, p: usize) -> Dataset {
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, 1.0).unwrap();
    let target: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let mut values = Vec::with_capacity(n * p);
    for &t in &target {
        let mean = if t == 1 { 1.5 } else { -1.5 };
        for _ in 0..p {
            values.push(mean + normal.sample(rng));
        }
    }
    Dataset {
        dates: months(n),
        features: FeatureMatrix::new(n, p, values).unwrap(),
        target,
        feature_names: (0..p).map(|j| format!("g{j}")).collect(),
    }
}

/// Random tree over `p` features with covers summing correctly at every split.
pub fn random_tree(rng: &mut impl Rng, p: usize, max_depth: usize) -> Tree {
    fn grow(rng: &mut impl Rng, p: usize, depth: usize, nodes: &mut Vec<Node>) -> (usize, u64) {
        let id = nodes.len();
        nodes.push(Node::Leaf { prediction: 0.0, n_train: 0, class_counts: None });
        if depth == 0 || (id > 0 && rng.random_bool(0.25)) {
            let n = rng.random_range(1..20u64);
            nodes[id] = Node::Leaf { prediction: rng.random_range(-2.0..2.0), n_train: n, class_counts: None };
            return (id, n);
        }
        let feature = rng.random_range(0..p);
        let threshold = rng.random_range(-0.8..0.8);
        let (left, nl) = grow(rng, p, depth - 1, nodes);
        let (right, nr) = grow(rng, p, depth - 1, nodes);
        nodes[id] = Node::Split { feature, threshold, left, right, n_train: nl + nr };
        (id, nl + nr)
    }
    let mut nodes = Vec::new();
    grow(rng, p, max_depth, &mut nodes);
    Tree::from_nodes(nodes, TreeParams { max_depth: max_depth.max(1), ..TreeParams::boosting_default() }).unwrap()
}

/// Cover-weighted conditional expectation of the tree with features in `s` fixed to `x`.
pub fn oracle_value(tree: &Tree, id: usize, x: &[f64], s: &[bool]) -> f64 {
    match tree.node(id) {
        Node::Leaf { prediction, .. } => *prediction,
        Node::Split { feature, threshold, left, right, .. } => {
            if s[*feature] {
                let next = if x[*feature] <= *threshold { *left } else { *right };
                oracle_value(tree, next, x, s)
            } else {
                let cl = tree.node(*left).n_train() as f64;
                let cr = tree.node(*right).n_train() as f64;
                (cl * oracle_value(tree, *left, x, s) + cr * oracle_value(tree, *right, x, s)) / (cl + cr)
            }
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Shapley values by enumerating every subset of all `p` features.
pub fn oracle_shap(tree: &Tree, x: &[f64], p: usize) -> Vec<f64> {
    let mut phi = vec![0.0; p];
    for i in 0..p {
        for mask in 0u32..(1 << p) {
            if mask >> i & 1 == 1 {
                continue;
            }
            let mut s: Vec<bool> = (0..p).map(|j| mask >> j & 1 == 1).collect();
            let size = mask.count_ones() as usize;
            let w = factorial(size) * factorial(p - size - 1) / factorial(p);
            let without = oracle_value(tree, 0, x, &s);
            s[i] = true;
            let with = oracle_value(tree, 0, x, &s);
            phi[i] += w * (with - without);
        }
    }
    phi
}

/// Leaf reached by re-evaluating every node condition from scratch.
pub fn oracle_route(tree: &Tree, x: &[f64]) -> f64 {
    let mut id = 0;
    loop {
        match tree.node(id) {
            Node::Leaf { prediction, .. } => return *prediction,
            Node::Split { feature, threshold, left, right, .. } => {
                let goes_left = x[*feature] <= *threshold;
                id = if goes_left { *left } else { *right };
            }
        }
    }
}

/// Best root split by scoring every (feature, midpoint) pair directly.
pub fn oracle_best_split(
    x: &FeatureMatrix,
    y: &[f64],
    w: &[f64],
    min_leaf: usize,
    criterion: SplitCriterion,
) -> Option<(usize, f64, f64)> {
    let impurity = |rows: &[usize]| -> f64 {
        let total: f64 = rows.iter().map(|&i| w[i]).sum();
        if total == 0.0 {
            return 0.0;
        }
        match criterion {
            SplitCriterion::Gini => {
                let p1: f64 = rows.iter().map(|&i| w[i] * y[i]).sum::<f64>() / total;
                total * (1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1))
            }
            SplitCriterion::VarianceReduction => {
                let mean = rows.iter().map(|&i| w[i] * y[i]).sum::<f64>() / total;
                rows.iter().map(|&i| w[i] * (y[i] - mean).powi(2)).sum()
            }
        }
    };
    let all: Vec<usize> = (0..x.n_rows()).collect();
    let parent = impurity(&all);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x.n_cols() {
        let mut vals = x.column(f);
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for pair in vals.windows(2) {
            let t = (pair[0] + pair[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x.get(i, f) <= t);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let gain = parent - impurity(&l) - impurity(&r);
            if gain <= 1e-9 {
                continue;
            }
            if best.is_none_or(|b| gain > b.2 + 1e-9) {
                best = Some((f, t, gain));
            }
        }
    }
    best
}
