//! Root-to-leaf rules read off fitted trees, with support, error and lift.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Dataset, Month, StatsTable};
use crate::lift::lift_from_counts;
use crate::model::Model;
use crate::tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Le => "<=",
            Op::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub feature: usize,
    pub op: Op,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self.op {
            Op::Le => x[self.feature] <= self.threshold,
            Op::Gt => x[self.feature] > self.threshold,
        }
    }

    fn key(&self) -> (usize, Op, u64) {
        (self.feature, self.op, self.threshold.to_bits())
    }
}

/// Threshold rounded to six decimals with trailing zeros removed.
pub fn format_threshold(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleMetrics {
    pub length: usize,
    /// Rows satisfying the conditions.
    pub matched: usize,
    pub support: f64,
    /// Matched rows whose target differs from the prediction.
    pub misclassified: usize,
    /// Absent when no row matches.
    pub error: Option<f64>,
    pub lift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub prediction: u8,
    /// `(tree index, leaf node id)` of the first leaf that produced the rule.
    pub source: (usize, usize),
    pub metrics: Option<RuleMetrics>,
}

impl Rule {
    pub fn matches(&self, x: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(x))
    }

    pub fn mask(&self, ds: &Dataset) -> Vec<bool> {
        ds.features.rows().map(|x| self.matches(x)).collect()
    }

    /// Zero-support rules are kept but flagged.
    pub fn is_zero_support(&self) -> bool {
        self.metrics.as_ref().is_some_and(|m| m.matched == 0)
    }

    /// Conditions as `Y2-M6<=-0.145 & Y20-M3>0.79`; `TRUE` when there are none.
    pub fn format(&self, names: &[String]) -> String {
        if self.conditions.is_empty() {
            return "TRUE".into();
        }
        self.conditions
            .iter()
            .map(|c| format!("{}{}{}", names[c.feature], c.op.symbol(), format_threshold(c.threshold)))
            .collect::<Vec<_>>()
            .join(" & ")
    }

    fn key(&self) -> (Vec<(usize, Op, u64)>, u8) {
        (self.conditions.iter().map(Condition::key).collect(), self.prediction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedRule {
    pub source: (usize, usize),
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub feature_names: Vec<String>,
    /// Model kind the rules came from.
    pub provenance: String,
    /// Population the metrics were computed on, empty until scored.
    pub population: String,
    pub dropped: Vec<DroppedRule>,
}

/// One rule per leaf of every tree, in tree order and depth-first leaf order.
///
/// A model without trees yields a single rule with no conditions.
pub fn extract_rules(model: &Model) -> RuleSet {
    let trees = model.trees();
    let mut rules = Vec::new();
    for (t, tree) in trees.iter().enumerate() {
        let mut path = Vec::new();
        walk(model, tree, t, tree.root(), &mut path, &mut rules);
    }
    if trees.is_empty() {
        let base = match model {
            Model::Gbm(m) => u8::from(m.f0 > 0.0),
            Model::Forest(_) => 0,
        };
        rules.push(Rule { conditions: Vec::new(), prediction: base, source: (0, 0), metrics: None });
    }
    RuleSet {
        rules,
        feature_names: model.feature_names().to_vec(),
        provenance: model.kind().to_string(),
        population: String::new(),
        dropped: Vec::new(),
    }
}

fn walk(model: &Model, tree: &Tree, t: usize, id: usize, path: &mut Vec<Condition>, out: &mut Vec<Rule>) {
    match *tree.node(id) {
        Node::Leaf { prediction, .. } => out.push(Rule {
            conditions: path.clone(),
            prediction: model.leaf_class(prediction),
            source: (t, id),
            metrics: None,
        }),
        Node::Split { feature, threshold, left, right, .. } => {
            path.push(Condition { feature, op: Op::Le, threshold });
            walk(model, tree, t, left, path, out);
            path.pop();
            path.push(Condition { feature, op: Op::Gt, threshold });
            walk(model, tree, t, right, path, out);
            path.pop();
        }
    }
}

/// Merges conditions per feature (tightest `<=` and `>` bounds) and sorts
/// them by `(feature, op)`. An empty interval is an error carrying the reason.
pub fn canonicalize(rule: &Rule) -> Result<Rule, String> {
    let mut merged: Vec<Condition> = Vec::new();
    for c in &rule.conditions {
        match merged.iter_mut().find(|m| m.feature == c.feature && m.op == c.op) {
            Some(m) => {
                m.threshold = match c.op {
                    Op::Le => m.threshold.min(c.threshold),
                    Op::Gt => m.threshold.max(c.threshold),
                }
            }
            None => merged.push(*c),
        }
    }
    merged.sort_by_key(|c| (c.feature, c.op));
    for w in merged.windows(2) {
        if w[0].feature == w[1].feature && w[1].threshold >= w[0].threshold {
            return Err(format!(
                "feature {} has empty interval ({}, {}]",
                w[0].feature, w[1].threshold, w[0].threshold
            ));
        }
    }
    Ok(Rule { conditions: merged, ..rule.clone() })
}

/// Canonicalizes every rule and keeps the first of each distinct
/// `(conditions, prediction)` pair.
pub fn canonicalize_and_dedup(rs: RuleSet) -> RuleSet {
    let mut seen = HashSet::new();
    let mut rules = Vec::new();
    let mut dropped = rs.dropped;
    for r in &rs.rules {
        match canonicalize(r) {
            Ok(c) => {
                if seen.insert(c.key()) {
                    rules.push(c);
                }
            }
            Err(reason) => dropped.push(DroppedRule { source: r.source, reason }),
        }
    }
    RuleSet { rules, dropped, ..rs }
}

/// Support, error and lift of every rule on `ds`.
pub fn score_rules(rs: RuleSet, ds: &Dataset, population: &str) -> RuleSet {
    let n = ds.len();
    let positives = ds.positives();
    let rules = rs
        .rules
        .into_par_iter()
        .map(|mut r| {
            let (mut matched, mut hits, mut wrong) = (0, 0, 0);
            for (x, &t) in ds.features.rows().zip(&ds.target) {
                if r.matches(x) {
                    matched += 1;
                    hits += usize::from(t == 1);
                    wrong += usize::from(t != r.prediction);
                }
            }
            r.metrics = Some(RuleMetrics {
                length: r.conditions.len(),
                matched,
                support: if n > 0 { matched as f64 / n as f64 } else { 0.0 },
                misclassified: wrong,
                error: (matched > 0).then(|| wrong as f64 / matched as f64),
                lift: lift_from_counts(hits, matched, positives, n).ok(),
            });
            r
        })
        .collect();
    RuleSet { rules, population: population.to_string(), ..rs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankCriterion {
    MaxSupport,
    MaxLift,
}

fn desc(a: Option<f64>, b: Option<f64>) -> Ordering {
    let v = |x: Option<f64>| x.unwrap_or(f64::NEG_INFINITY);
    v(b).total_cmp(&v(a))
}

/// Top `k` scored rules under `criterion`; remaining ties go to fewer
/// conditions and then to the lexicographically smaller rendering.
pub fn rank_rules(rs: &RuleSet, criterion: RankCriterion, top_k: usize) -> Vec<Rule> {
    let support = |r: &Rule| r.metrics.as_ref().map(|m| m.support);
    let lift = |r: &Rule| r.metrics.as_ref().and_then(|m| m.lift);
    let mut keyed: Vec<(String, &Rule)> = rs.rules.iter().map(|r| (r.format(&rs.feature_names), r)).collect();
    keyed.sort_by(|(sa, a), (sb, b)| {
        let primary = match criterion {
            RankCriterion::MaxSupport => desc(support(a), support(b)),
            RankCriterion::MaxLift => desc(lift(a), lift(b)).then_with(|| desc(support(a), support(b))),
        };
        primary
            .then_with(|| a.conditions.len().cmp(&b.conditions.len()))
            .then_with(|| sa.cmp(sb))
            .then_with(|| a.prediction.cmp(&b.prediction))
    });
    keyed.into_iter().take(top_k).map(|(_, r)| r.clone()).collect()
}

/// Keeps rules with at least one condition on one of `features`.
pub fn filter_by_features(rs: &RuleSet, features: &[usize]) -> RuleSet {
    RuleSet {
        rules: rs
            .rules
            .iter()
            .filter(|r| r.conditions.iter().any(|c| features.contains(&c.feature)))
            .cloned()
            .collect(),
        ..rs.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Small,
    Average,
    Big,
}

impl Magnitude {
    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Small => "small",
            Magnitude::Average => "average",
            Magnitude::Big => "big",
        }
    }
}

/// Nearest of the column's min, mean and max; ties with the mean go to the mean.
pub fn label_threshold(threshold: f64, min: f64, mean: f64, max: f64) -> Magnitude {
    let (d_min, d_mean, d_max) = ((threshold - min).abs(), (threshold - mean).abs(), (threshold - max).abs());
    if d_mean <= d_min && d_mean <= d_max {
        Magnitude::Average
    } else if d_min <= d_max {
        Magnitude::Small
    } else {
        Magnitude::Big
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("no descriptive statistics for feature {0}")]
pub struct LabelError(pub String);

/// Plain-language reading of a rule against descriptive statistics.
pub fn label_rule(rule: &Rule, names: &[String], stats: &StatsTable) -> Result<String, LabelError> {
    let mut parts = Vec::new();
    for c in &rule.conditions {
        let name = &names[c.feature];
        let s = stats.get(name).ok_or_else(|| LabelError(name.clone()))?;
        let label = label_threshold(c.threshold, s.min, s.mean, s.max);
        let article = if label == Magnitude::Average { "an" } else { "a" };
        let relation = match c.op {
            Op::Le => "lower or equal to",
            Op::Gt => "greater than",
        };
        parts.push(format!(
            "{name} is {relation} {article} {} value ({})",
            label.as_str(),
            format_threshold(c.threshold)
        ));
    }
    let outcome = if rule.prediction == 1 { "a recession month" } else { "no recession" };
    if parts.is_empty() {
        return Ok(format!("In every month the model indicates {outcome}."));
    }
    Ok(format!("When {}, the model indicates {outcome}.", parts.join(" and ")))
}

/// Maximal run of consecutive recession months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Episode {
    pub start: Month,
    pub end: Month,
}

/// Runs of `target == 1` over consecutive calendar months.
pub fn recession_episodes(ds: &Dataset) -> Vec<Episode> {
    let mut out: Vec<Episode> = Vec::new();
    let mut prev: Option<(Month, u8)> = None;
    for (&m, &t) in ds.dates.iter().zip(&ds.target) {
        if t == 1 {
            match (prev, out.last_mut()) {
                (Some((pm, 1)), Some(e)) if pm.succ() == m => e.end = m,
                _ => out.push(Episode { start: m, end: m }),
            }
        }
        prev = Some((m, t));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleHits {
    /// Every matching month with its recession flag.
    pub months: Vec<(Month, u8)>,
    /// Recession episodes containing at least one matching month.
    pub episodes: Vec<Episode>,
}

pub fn rule_hits(rule: &Rule, ds: &Dataset) -> RuleHits {
    let months: Vec<(Month, u8)> = ds
        .features
        .rows()
        .enumerate()
        .filter(|(_, x)| rule.matches(x))
        .map(|(i, _)| (ds.dates[i], ds.target[i]))
        .collect();
    let episodes = recession_episodes(ds)
        .into_iter()
        .filter(|e| months.iter().any(|&(m, _)| m >= e.start && m <= e.end))
        .collect();
    RuleHits { months, episodes }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

pub const RULES_CSV_HEADER: &str = "rule_id,conditions,prediction,error,length,support,lift,matched_months,hit_months";

/// Rule table; `hit_months` lists matching recession months separated by spaces.
pub fn rules_csv(rules: &[Rule], names: &[String], ds: &Dataset) -> String {
    let mut out = format!("{RULES_CSV_HEADER}\n");
    for (id, r) in rules.iter().enumerate() {
        let m = r.metrics.as_ref();
        let hits: Vec<String> =
            rule_hits(r, ds).months.iter().filter(|&&(_, t)| t == 1).map(|(m, _)| m.to_string()).collect();
        let _ = writeln!(
            out,
            "{id},{},{},{},{},{},{},{},{}",
            r.format(names),
            r.prediction,
            opt(m.and_then(|m| m.error)),
            r.conditions.len(),
            opt(m.map(|m| m.support)),
            opt(m.and_then(|m| m.lift)),
            m.map_or(0, |m| m.matched),
            hits.join(" ")
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boosting::{GbmModel, Stage};
    use crate::matrix::FeatureMatrix;
    use crate::tree::TreeParams;

    fn cond(feature: usize, op: Op, threshold: f64) -> Condition {
        Condition { feature, op, threshold }
    }

    fn rule(conditions: Vec<Condition>, prediction: u8) -> Rule {
        Rule { conditions, prediction, source: (0, 0), metrics: None }
    }

    fn stump_model() -> Model {
        let leaf = |v| Node::Leaf { prediction: v, n_train: 2, class_counts: None };
        let tree = Tree::from_nodes(
            vec![Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2, n_train: 4 }, leaf(-1.0), leaf(1.0)],
            TreeParams::boosting_default(),
        )
        .unwrap();
        let mut m = GbmModel::constant(0.0, 0.1, vec!["a".into()]);
        m.stages.push(Stage { rho: 1.0, tree });
        Model::Gbm(m)
    }

    fn toy() -> Dataset {
        let n = 10;
        Dataset {
            dates: (0..n).map(|i| Month::from_ordinal(24_000 + i as i64)).collect(),
            features: FeatureMatrix::from_rows(&(0..n).map(|i| [i as f64]).collect::<Vec<_>>()).unwrap(),
            target: vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
            feature_names: vec!["a".into()],
        }
    }

    #[test]
    fn stump_gives_two_complementary_rules() {
        let rs = extract_rules(&stump_model());
        assert_eq!(rs.rules.len(), 2);
        assert_eq!(rs.rules[0].conditions, vec![cond(0, Op::Le, 0.5)]);
        assert_eq!(rs.rules[1].conditions, vec![cond(0, Op::Gt, 0.5)]);
        assert_eq!((rs.rules[0].prediction, rs.rules[1].prediction), (0, 1));
    }

    #[test]
    fn canonical_forms() {
        let r = canonicalize(&rule(vec![cond(0, Op::Le, 5.0), cond(0, Op::Le, 3.0)], 0)).unwrap();
        assert_eq!(r.conditions, vec![cond(0, Op::Le, 3.0)]);
        assert!(canonicalize(&rule(vec![cond(0, Op::Le, 3.0), cond(0, Op::Gt, 5.0)], 0)).is_err());
        let r = canonicalize(&rule(vec![cond(2, Op::Gt, 1.0), cond(0, Op::Gt, 0.0), cond(2, Op::Le, 4.0)], 1)).unwrap();
        assert_eq!(r.conditions, vec![cond(0, Op::Gt, 0.0), cond(2, Op::Le, 4.0), cond(2, Op::Gt, 1.0)]);
    }

    #[test]
    fn dedup_keeps_first() {
        let mut rs = extract_rules(&stump_model());
        let mut dup = rs.rules[0].clone();
        dup.source = (9, 9);
        rs.rules.push(dup);
        rs.rules.push(rule(vec![cond(0, Op::Le, 1.0), cond(0, Op::Gt, 2.0)], 0));
        let out = canonicalize_and_dedup(rs);
        assert_eq!(out.rules.len(), 2);
        assert_eq!(out.dropped.len(), 1);
    }

    #[test]
    fn vacuous_rule_scores() {
        let ds = toy();
        let rs = RuleSet {
            rules: vec![rule(vec![], 0)],
            feature_names: ds.feature_names.clone(),
            provenance: "test".into(),
            population: String::new(),
            dropped: vec![],
        };
        let m = score_rules(rs, &ds, "full").rules[0].metrics.clone().unwrap();
        assert_eq!((m.support, m.error, m.lift), (1.0, Some(0.1), Some(1.0)));
        assert_eq!(rule_hits(&rule(vec![], 0), &ds).months.len(), 10);
        assert!(rule_hits(&rule(vec![cond(0, Op::Gt, 100.0)], 0), &ds).months.is_empty());
    }

    #[test]
    fn ranking_orders() {
        let ds = toy();
        let rs = RuleSet {
            rules: vec![rule(vec![cond(0, Op::Gt, 8.5)], 1), rule(vec![cond(0, Op::Le, 8.5)], 0)],
            feature_names: ds.feature_names.clone(),
            provenance: "test".into(),
            population: String::new(),
            dropped: vec![],
        };
        let scored = score_rules(rs, &ds, "full");
        assert_eq!(rank_rules(&scored, RankCriterion::MaxSupport, 1)[0].prediction, 0);
        assert_eq!(rank_rules(&scored, RankCriterion::MaxLift, 1)[0].prediction, 1);
    }

    #[test]
    fn threshold_display() {
        assert_eq!(format_threshold(0.05500000000000016), "0.055");
        assert_eq!(format_threshold(2.0), "2");
        assert_eq!(format_threshold(-1e-9), "0");
        assert_eq!(format_threshold(-0.145), "-0.145");
    }

    #[test]
    fn labels() {
        assert_eq!(label_threshold(1.0, 0.0, 1.0, 2.0), Magnitude::Average);
        assert_eq!(label_threshold(0.0, 0.0, 5.0, 6.0), Magnitude::Small);
        assert_eq!(label_threshold(0.5, 0.0, 1.0, 9.0), Magnitude::Average);
        assert_eq!(label_threshold(8.0, 0.0, 1.0, 9.0), Magnitude::Big);
    }

    #[test]
    fn episodes_are_maximal_runs() {
        let mut ds = toy();
        ds.target = vec![1, 1, 0, 1, 0, 0, 1, 1, 1, 0];
        let e = recession_episodes(&ds);
        assert_eq!(e.len(), 3);
        assert_eq!((e[2].start, e[2].end), (ds.dates[6], ds.dates[8]));
        let hits = rule_hits(&rule(vec![cond(0, Op::Le, 3.0)], 1), &ds);
        assert_eq!(hits.episodes.len(), 2);
    }

    #[test]
    fn empty_model_yields_base_rule() {
        let m = Model::Gbm(GbmModel::constant(-1.0, 0.1, vec!["a".into()]));
        let rs = extract_rules(&m);
        assert_eq!(rs.rules.len(), 1);
        assert!(rs.rules[0].conditions.is_empty());
        assert_eq!(rs.rules[0].prediction, 0);
    }
}
