use proptest::prelude::*;
use spreadscope::metrics::{evaluate, format_rate};

fn pairs() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((0u8..=1, 0u8..=1), 1..200)
}

proptest! {
    #[test]
    fn class_rates_are_dual(p in pairs()) {
        let (labels, truth): (Vec<u8>, Vec<u8>) = p.into_iter().unzip();
        let r = evaluate(&labels, &truth).unwrap();
        prop_assert_eq!(r.class(1).recall, r.class(0).specificity);
        prop_assert_eq!(r.class(0).recall, r.class(1).specificity);
        let c = r.confusion;
        prop_assert_eq!(c.tp + c.fp + c.tn + c.fn_, labels.len());
        for k in 0..=1 {
            for v in [r.class(k).precision, r.class(k).recall, r.class(k).specificity].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn joint_permutation_changes_nothing(p in pairs(), rot in 0usize..200) {
        let (labels, truth): (Vec<u8>, Vec<u8>) = p.into_iter().unzip();
        let k = rot % labels.len();
        let mut l2 = labels.clone();
        let mut t2 = truth.clone();
        l2.rotate_left(k);
        t2.rotate_left(k);
        l2.reverse();
        t2.reverse();
        prop_assert_eq!(evaluate(&labels, &truth).unwrap(), evaluate(&l2, &t2).unwrap());
    }

    #[test]
    fn rates_reconstruct_true_positive_count(p in pairs()) {
        let (labels, truth): (Vec<u8>, Vec<u8>) = p.into_iter().unzip();
        let r = evaluate(&labels, &truth).unwrap();
        let c = r.confusion;
        if let Some(pr) = r.class(1).precision {
            prop_assert!((pr * (c.tp + c.fp) as f64 - c.tp as f64).abs() < 1e-9);
        }
        if let Some(re) = r.class(1).recall {
            prop_assert!((re * (c.tp + c.fn_) as f64 - c.tp as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn worked_examples() {
    let mut truth = vec![1u8; 5];
    truth.extend([0; 20]);
    let mut labels = vec![1u8, 1, 1, 1, 0];
    labels.extend([0; 20]);
    let r = evaluate(&labels, &truth).unwrap();
    assert_eq!((r.class(1).precision, r.class(1).recall, r.class(1).specificity), (Some(1.0), Some(0.8), Some(1.0)));

    let perfect = evaluate(&truth, &truth).unwrap();
    for k in 0..=1 {
        let m = perfect.class(k);
        assert_eq!((m.precision, m.recall, m.specificity), (Some(1.0), Some(1.0), Some(1.0)));
    }

    let zeros = evaluate(&[0; 25], &truth).unwrap();
    assert_eq!(zeros.class(1).recall, Some(0.0));
    assert_eq!(zeros.class(1).precision, None);
    assert_eq!(format_rate(None), "\u{2014}");
    assert_eq!(format_rate(Some(0.8)), "0.8000");
    assert!(evaluate(&[0, 1], &[0]).is_err());
    assert!(evaluate(&[], &[]).is_err());
}
