mod common;

use common::{months, oracle_route, random_dataset, random_matrix, random_tree, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use spreadscope::boosting::{fit_gbm, GbmConfig, GbmModel, Stage};
use spreadscope::data::{descriptive_stats, Dataset};
use spreadscope::forest::{fit_forest, ForestConfig};
use spreadscope::model::Model;
use spreadscope::rules::{
    canonicalize, canonicalize_and_dedup, extract_rules, format_threshold, label_rule, label_threshold, rank_rules,
    recession_episodes, rule_hits, rules_csv, score_rules, Condition, Magnitude, Op, RankCriterion, Rule, RuleSet,
};
use spreadscope::tree::Tree;

fn names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("f{j}")).collect()
}

fn tree_model(trees: Vec<Tree>, p: usize) -> Model {
    let mut m = GbmModel::constant(0.0, 1.0, names(p));
    m.stages = trees.into_iter().map(|tree| Stage { rho: 1.0, tree }).collect();
    Model::Gbm(m)
}

fn rule(conds: &[(usize, Op, f64)], prediction: u8) -> Rule {
    Rule {
        conditions: conds.iter().map(|&(feature, op, threshold)| Condition { feature, op, threshold }).collect(),
        prediction,
        source: (0, 0),
        metrics: None,
    }
}

#[test]
fn one_rule_per_leaf_and_rows_route_to_source_leaf() {
    let mut r = rng(41);
    for _ in 0..30 {
        let trees: Vec<Tree> = (0..3).map(|_| random_tree(&mut r, 4, 3)).collect();
        let x = random_matrix(&mut r, 200, 4);
        let model = tree_model(trees.clone(), 4);
        let rs = extract_rules(&model);
        assert_eq!(rs.rules.len(), trees.iter().map(Tree::n_leaves).sum::<usize>());
        for rule in &rs.rules {
            let (t, leaf) = rule.source;
            for row in x.rows() {
                assert_eq!(rule.matches(row), trees[t].leaf_index(row) == leaf);
                if rule.matches(row) {
                    assert_eq!(oracle_route(&trees[t], row), trees[t].leaf_value(leaf));
                }
            }
        }
    }
}

#[test]
fn forest_rules_route_like_their_trees() {
    let ds = random_dataset(&mut rng(42), 150, 5);
    let f = fit_forest(&ds, &ForestConfig { n_trees: 8, ..Default::default() }, 3).unwrap();
    let model = Model::Forest(f);
    let rs = extract_rules(&model);
    let trees = model.trees();
    assert_eq!(rs.rules.len(), trees.iter().map(|t| t.n_leaves()).sum::<usize>());
    for rule in &rs.rules {
        let tree = &trees[rule.source.0];
        let p = tree.leaf_value(rule.source.1);
        assert_eq!(rule.prediction, u8::from(p >= 0.5));
        for row in ds.features.rows() {
            assert_eq!(rule.matches(row), tree.leaf_index(row) == rule.source.1);
        }
    }
}

#[test]
fn canonicalize_examples() {
    let merged = canonicalize(&rule(&[(0, Op::Le, 3.0), (0, Op::Le, 5.0)], 1)).unwrap();
    assert_eq!(merged.conditions, rule(&[(0, Op::Le, 3.0)], 1).conditions);
    assert!(canonicalize(&rule(&[(0, Op::Le, 3.0), (0, Op::Gt, 5.0)], 1)).is_err());
    let ordered = canonicalize(&rule(&[(2, Op::Gt, 0.0), (1, Op::Le, 1.0), (1, Op::Gt, -1.0)], 0)).unwrap();
    let keys: Vec<(usize, Op)> = ordered.conditions.iter().map(|c| (c.feature, c.op)).collect();
    assert_eq!(keys, vec![(1, Op::Le), (1, Op::Gt), (2, Op::Gt)]);
}

fn random_rule(r: &mut impl Rng) -> Rule {
    // Thresholds from a coarse grid so distinct rules can share masks only when canonically equal.
    let k = r.random_range(1..=4);
    let conds: Vec<(usize, Op, f64)> = (0..k)
        .map(|_| {
            let op = if r.random_bool(0.5) { Op::Le } else { Op::Gt };
            (r.random_range(0..2), op, f64::from(r.random_range(-2i32..=2)) * 0.4)
        })
        .collect();
    rule(&conds, 1)
}

#[test]
fn canonical_equality_iff_equal_masks() {
    let mut r = rng(43);
    let x = random_matrix(&mut r, 200, 2);
    let mut checked = 0;
    while checked < 300 {
        let (a, b) = (random_rule(&mut r), random_rule(&mut r));
        let (Ok(ca), Ok(cb)) = (canonicalize(&a), canonicalize(&b)) else { continue };
        for (orig, canon) in [(&a, &ca), (&b, &cb)] {
            assert!(x.rows().all(|row| orig.matches(row) == canon.matches(row)));
        }
        let masks_equal = x.rows().all(|row| ca.matches(row) == cb.matches(row));
        assert_eq!(ca.conditions == cb.conditions, masks_equal, "{ca:?} vs {cb:?}");
        checked += 1;
    }
}

#[test]
fn dedup_leaves_pairwise_distinct_rules() {
    let mut r = rng(44);
    let rules: Vec<Rule> = (0..400).map(|_| random_rule(&mut r)).collect();
    let rs = RuleSet {
        rules,
        feature_names: names(2),
        provenance: "gbm".into(),
        population: String::new(),
        dropped: vec![],
    };
    let total = rs.rules.len();
    let out = canonicalize_and_dedup(rs);
    assert!(out.rules.len() + out.dropped.len() <= total);
    for (i, a) in out.rules.iter().enumerate() {
        for b in &out.rules[i + 1..] {
            assert!(a.conditions != b.conditions || a.prediction != b.prediction);
        }
    }
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_rule(&mut r);
        if let Ok(c) = canonicalize(&a) {
            prop_assert_eq!(canonicalize(&c).unwrap(), c);
        }
    }
}

fn toy_set() -> Dataset {
    let mut r = rng(45);
    let features = random_matrix(&mut r, 30, 3);
    let target = (0..30).map(|i| u8::from(i % 5 == 0 || i == 7)).collect();
    Dataset { dates: months(30), features, target, feature_names: names(3) }
}

#[test]
fn scoring_matches_counting_oracle() {
    let ds = toy_set();
    let mut r = rng(46);
    let rules: Vec<Rule> = (0..60)
        .map(|_| {
            let k = r.random_range(0..=3);
            let conds: Vec<(usize, Op, f64)> = (0..k)
                .map(|j| (j, if r.random_bool(0.5) { Op::Le } else { Op::Gt }, r.random_range(-0.8..0.8)))
                .collect();
            rule(&conds, u8::from(r.random_bool(0.5)))
        })
        .collect();
    let rs = RuleSet {
        rules,
        feature_names: names(3),
        provenance: "gbm".into(),
        population: String::new(),
        dropped: vec![],
    };
    let scored = score_rules(rs, &ds, "full");
    let n = ds.len();
    let pos = ds.target.iter().filter(|&&t| t == 1).count();
    for rule in &scored.rules {
        let mut matched = 0;
        let mut hit = 0;
        let mut wrong = 0;
        for i in 0..n {
            let row = ds.features.row(i);
            let ok = rule.conditions.iter().all(|c| match c.op {
                Op::Le => row[c.feature] <= c.threshold,
                Op::Gt => row[c.feature] > c.threshold,
            });
            if ok {
                matched += 1;
                hit += usize::from(ds.target[i] == 1);
                wrong += usize::from(ds.target[i] != rule.prediction);
            }
        }
        let m = rule.metrics.as_ref().unwrap();
        assert_eq!(m.length, rule.conditions.len());
        assert_eq!(m.matched, matched);
        assert_eq!(m.support, matched as f64 / n as f64);
        assert_eq!(m.misclassified, wrong);
        if matched == 0 {
            assert!(rule.is_zero_support() && m.error.is_none() && m.lift.is_none());
        } else {
            assert_eq!(m.error.unwrap(), wrong as f64 / matched as f64);
            let oracle = (hit as f64 / n as f64) / ((matched as f64 / n as f64) * (pos as f64 / n as f64));
            assert!((m.lift.unwrap() - oracle).abs() < 1e-12);
            // Error and support reconstruct integer counts.
            let correct = matched - wrong;
            let total =
                m.error.unwrap() * m.support * n as f64 + (correct as f64 / matched as f64) * m.support * n as f64;
            assert!((total - matched as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn vacuous_majority_rule() {
    let n = 100;
    let ds = Dataset {
        dates: months(n),
        features: random_matrix(&mut rng(47), n, 2),
        target: (0..n).map(|i| u8::from(i < 10)).collect(),
        feature_names: names(2),
    };
    let rs = RuleSet {
        rules: vec![rule(&[], 0)],
        feature_names: names(2),
        provenance: "gbm".into(),
        population: String::new(),
        dropped: vec![],
    };
    let m = score_rules(rs, &ds, "full").rules[0].metrics.clone().unwrap();
    assert_eq!((m.support, m.error, m.lift), (1.0, Some(0.1), Some(1.0)));
    assert_eq!(rule_hits(&rule(&[], 0), &ds).months.len(), n);
    assert!(rule_hits(&rule(&[(0, Op::Gt, 5.0)], 0), &ds).months.is_empty());
}

#[test]
fn ranking_is_stable_under_shuffling() {
    let ds = toy_set();
    let mut r = rng(48);
    let rules: Vec<Rule> = (0..80)
        .map(|_| {
            let conds: Vec<(usize, Op, f64)> = (0..r.random_range(1..=2))
                .map(|j| {
                    (j, if r.random_bool(0.5) { Op::Le } else { Op::Gt }, f64::from(r.random_range(-3i32..=3)) * 0.2)
                })
                .collect();
            rule(&conds, u8::from(r.random_bool(0.5)))
        })
        .collect();
    let rs = RuleSet {
        rules,
        feature_names: names(3),
        provenance: "gbm".into(),
        population: String::new(),
        dropped: vec![],
    };
    let scored = score_rules(canonicalize_and_dedup(rs), &ds, "full");
    for crit in [RankCriterion::MaxSupport, RankCriterion::MaxLift] {
        let base = rank_rules(&scored, crit, 10);
        for _ in 0..20 {
            let mut shuffled = scored.clone();
            shuffled.rules.shuffle(&mut r);
            let again = rank_rules(&shuffled, crit, 10);
            let f = |v: &[Rule]| v.iter().map(|x| (x.format(&scored.feature_names), x.prediction)).collect::<Vec<_>>();
            assert_eq!(f(&base), f(&again));
        }
    }
    let sup = rank_rules(&scored, RankCriterion::MaxSupport, usize::MAX);
    assert!(sup.windows(2).all(|w| w[0].metrics.as_ref().unwrap().support >= w[1].metrics.as_ref().unwrap().support));
}

#[test]
fn threshold_labels_by_nearest_statistic() {
    assert_eq!(label_threshold(1.0, 0.0, 1.0, 2.0), Magnitude::Average);
    assert_eq!(label_threshold(0.0, 0.0, 5.0, 6.0), Magnitude::Small);
    assert_eq!(label_threshold(5.9, 0.0, 1.0, 6.0), Magnitude::Big);
    assert_eq!(label_threshold(0.5, 0.0, 1.0, 2.0), Magnitude::Average);
    let ds = toy_set();
    let stats = descriptive_stats(&ds.features, &ds.feature_names).unwrap();
    let text = label_rule(&rule(&[(0, Op::Le, stats.columns[0].mean)], 1), &ds.feature_names, &stats).unwrap();
    assert!(text.contains("f0 is lower or equal to an average value") && text.ends_with("a recession month."));
    assert!(label_rule(&rule(&[(0, Op::Le, 0.0)], 1), &["zz".into()], &stats).is_err());
}

#[test]
fn empty_model_gives_base_rule() {
    let rs = extract_rules(&Model::Gbm(GbmModel::constant(-1.2, 0.1, names(2))));
    assert_eq!(rs.rules.len(), 1);
    assert!(rs.rules[0].conditions.is_empty());
    assert_eq!(rs.rules[0].prediction, 0);
}

#[test]
fn gbm_pipeline_csv_and_hits() {
    let ds = random_dataset(&mut rng(49), 120, 3);
    let (g, _) = fit_gbm(&ds, &GbmConfig { n_stages: 5, ..Default::default() }, 0).unwrap();
    let scored = score_rules(canonicalize_and_dedup(extract_rules(&Model::Gbm(g))), &ds, "full");
    let csv = rules_csv(&scored.rules, &scored.feature_names, &ds);
    assert_eq!(csv.lines().count(), scored.rules.len() + 1);
    let episodes = recession_episodes(&ds);
    assert_eq!(episodes.iter().map(|e| e.end.ordinal() - e.start.ordinal() + 1).sum::<i64>() as usize, ds.positives());
    assert_eq!(format_threshold(0.19000000001), "0.19");
    assert_eq!(format_threshold(-0.145), "-0.145");
}
