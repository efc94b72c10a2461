use std::collections::{BTreeMap, BTreeSet};

use iqft_core::imageio::LabelMap;
use iqft_core::metrics::{
    best_binary_assignment, confusion, evaluate_assignment, miou, GroundTruthMask, Side,
};
use proptest::prelude::*;

/// IOU of two pixel sets; an empty union scores 1.
fn set_iou(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// mIOU computed from explicit pixel sets, with `fg_labels` mapped to foreground.
fn oracle_miou(pred: &[u8], gt: &[u8], fg_labels: &BTreeSet<u8>) -> f64 {
    let valid: Vec<usize> = (0..gt.len()).filter(|&i| gt[i] != 255).collect();
    let pred_fg: BTreeSet<usize> = valid
        .iter()
        .copied()
        .filter(|&i| fg_labels.contains(&pred[i]))
        .collect();
    let gt_fg: BTreeSet<usize> = valid.iter().copied().filter(|&i| gt[i] == 1).collect();
    let pred_bg: BTreeSet<usize> = valid
        .iter()
        .copied()
        .filter(|i| !pred_fg.contains(i))
        .collect();
    let gt_bg: BTreeSet<usize> = valid
        .iter()
        .copied()
        .filter(|i| !gt_fg.contains(i))
        .collect();
    (set_iou(&pred_fg, &gt_fg) + set_iou(&pred_bg, &gt_bg)) / 2.0
}

/// Best mIOU over all subsets of the labels present on non-void pixels.
fn oracle_best(pred: &[u8], gt: &[u8]) -> f64 {
    let present: Vec<u8> = (0..gt.len())
        .filter(|&i| gt[i] != 255)
        .map(|i| pred[i])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut best = f64::NEG_INFINITY;
    for subset in 0..(1usize << present.len()) {
        let fg: BTreeSet<u8> = present
            .iter()
            .enumerate()
            .filter(|(i, _)| subset >> i & 1 == 1)
            .map(|(_, &l)| l)
            .collect();
        best = best.max(oracle_miou(pred, gt, &fg));
    }
    best
}

fn instance(max_label: u8) -> impl Strategy<Value = (u32, u32, Vec<u8>, Vec<u8>)> {
    (1u32..8, 1u32..8).prop_flat_map(move |(w, h)| {
        let n = (w * h) as usize;
        (
            Just(w),
            Just(h),
            prop::collection::vec(0..=max_label, n),
            prop::collection::vec(
                prop_oneof![4 => Just(0u8), 4 => Just(1u8), 1 => Just(255u8)],
                n,
            ),
        )
    })
}

#[test]
fn hand_counted_4x4_with_void() {
    #[rustfmt::skip]
    let pred = vec![
        0, 0, 1, 1,
        0, 1, 1, 1,
        0, 0, 0, 1,
        1, 0, 0, 0,
    ];
    #[rustfmt::skip]
    let gt = vec![
        0,   0, 1, 1,
        0,   0, 1, 255,
        255, 0, 1, 1,
        1,   0, 0, 0,
    ];
    let lm = LabelMap::new(4, 4, pred).unwrap();
    let mask = GroundTruthMask::new(4, 4, gt).unwrap();
    let c = confusion(&lm, &mask).unwrap();
    // (row, col): tp at (0,2) (0,3) (1,2) (2,3) (3,0); fp at (1,1); fn at (2,2); 7 tn of 14 non-void
    assert_eq!(
        (c.true_pos, c.false_pos, c.false_neg, c.true_neg),
        (5, 1, 1, 7)
    );
    let s = miou(&c).unwrap();
    assert!((s.iou_fg - 5.0 / 7.0).abs() < 1e-15);
    assert!((s.iou_bg - 7.0 / 9.0).abs() < 1e-15);
    assert!((s.miou - (5.0 / 7.0 + 7.0 / 9.0) / 2.0).abs() < 1e-15);
}

#[test]
fn all_void_is_undefined() {
    let lm = LabelMap::new(2, 1, vec![0, 1]).unwrap();
    let mask = GroundTruthMask::new(2, 1, vec![255, 255]).unwrap();
    assert!(best_binary_assignment(&lm, &mask).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn best_assignment_matches_enumeration((w, h, pred, gt) in instance(3)) {
        prop_assume!(gt.iter().any(|&v| v != 255));
        let lm = LabelMap::new(w, h, pred.clone()).unwrap();
        let mask = GroundTruthMask::new(w, h, gt.clone()).unwrap();
        let r = best_binary_assignment(&lm, &mask).unwrap();
        prop_assert!((r.miou - oracle_best(&pred, &gt)).abs() < 1e-12);
        let fg: BTreeSet<u8> = r.assignment.iter().filter(|(_, s)| **s == Side::Fg).map(|(l, _)| *l).collect();
        prop_assert!((oracle_miou(&pred, &gt, &fg) - r.miou).abs() < 1e-12);
    }

    #[test]
    fn best_dominates_any_assignment((w, h, pred, gt) in instance(7), sides in prop::collection::vec(any::<bool>(), 8)) {
        prop_assume!(gt.iter().any(|&v| v != 255));
        let lm = LabelMap::new(w, h, pred).unwrap();
        let mask = GroundTruthMask::new(w, h, gt).unwrap();
        let best = best_binary_assignment(&lm, &mask).unwrap();
        let assignment: BTreeMap<u8, Side> = (0..8u8)
            .map(|l| (l, if sides[l as usize] { Side::Fg } else { Side::Bg }))
            .collect();
        let (_, s) = evaluate_assignment(&lm, &mask, &assignment).unwrap();
        prop_assert!(best.miou >= s.miou - 1e-15);
    }

    #[test]
    fn swapping_both_sides_preserves_miou((w, h, pred, gt) in instance(1)) {
        prop_assume!(gt.iter().any(|&v| v != 255));
        let flip = |v: &Vec<u8>| v.iter().map(|&x| if x == 255 { 255 } else { 1 - x }).collect::<Vec<_>>();
        let a = miou(&confusion(&LabelMap::new(w, h, pred.clone()).unwrap(), &GroundTruthMask::new(w, h, gt.clone()).unwrap()).unwrap()).unwrap();
        let b = miou(&confusion(&LabelMap::new(w, h, flip(&pred)).unwrap(), &GroundTruthMask::new(w, h, flip(&gt)).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(a.iou_fg, b.iou_bg);
        prop_assert_eq!(a.iou_bg, b.iou_fg);
        prop_assert!((a.miou - b.miou).abs() < 1e-15);
    }

    #[test]
    fn predictions_under_void_are_ignored((w, h, pred, gt) in instance(7), noise in prop::collection::vec(0u8..8, 64)) {
        prop_assume!(gt.iter().any(|&v| v != 255));
        let mask = GroundTruthMask::new(w, h, gt.clone()).unwrap();
        let perturbed: Vec<u8> = pred
            .iter()
            .zip(&gt)
            .enumerate()
            .map(|(i, (&p, &t))| if t == 255 { noise[i % 64] } else { p })
            .collect();
        let a = best_binary_assignment(&LabelMap::new(w, h, pred).unwrap(), &mask).unwrap();
        let b = best_binary_assignment(&LabelMap::new(w, h, perturbed).unwrap(), &mask).unwrap();
        prop_assert_eq!(a.miou, b.miou);
        prop_assert_eq!(a.counts, b.counts);
    }
}
