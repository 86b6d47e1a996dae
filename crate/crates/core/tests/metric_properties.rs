use morphopoison::mask::hamming;
use morphopoison::metrics::{compute_metrics, confusion};
use morphopoison::{BinaryMask, Exact, ExactMetrics, Metrics};
use proptest::prelude::*;

fn arb_pair() -> impl Strategy<Value = (BinaryMask, BinaryMask, Vec<usize>)> {
    (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
        let m = move || {
            proptest::collection::vec(any::<bool>(), w * h)
                .prop_map(move |c| BinaryMask::new(w, h, c).unwrap())
        };
        let perm = Just((0..w * h).collect::<Vec<_>>()).prop_shuffle();
        (m(), m(), perm)
    })
}

fn permute(m: &BinaryMask, perm: &[usize]) -> BinaryMask {
    let cells = perm.iter().map(|&i| m.cells()[i]).collect();
    BinaryMask::new(m.width(), m.height(), cells).unwrap()
}

proptest! {
    #[test]
    fn dice_iou_identity_is_exact((pred, gt, _) in arb_pair()) {
        let c = confusion(&pred, &gt).unwrap();
        let m: ExactMetrics = compute_metrics(&c);
        let one = Exact::from_integer(1);
        let two = Exact::from_integer(2);
        prop_assert_eq!(m.dice, two * m.iou / (one + m.iou));
        prop_assert!(m.dice >= m.iou);
        prop_assert_eq!(c.total(), pred.len() as u64);
    }

    #[test]
    fn accuracy_one_iff_identical((pred, gt, _) in arb_pair()) {
        let m: Metrics = compute_metrics(&confusion(&pred, &gt).unwrap());
        prop_assert_eq!(m.accuracy == 1.0, hamming(&pred, &gt).unwrap() == 0);
        let same: Metrics = compute_metrics(&confusion(&gt, &gt).unwrap());
        prop_assert_eq!(same.accuracy, 1.0);
    }

    #[test]
    fn invariant_under_joint_permutation((pred, gt, perm) in arb_pair()) {
        let a: Metrics = compute_metrics(&confusion(&pred, &gt).unwrap());
        let b: Metrics = compute_metrics(&confusion(&permute(&pred, &perm), &permute(&gt, &perm)).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn f1_is_harmonic_mean((pred, gt, _) in arb_pair()) {
        let m: ExactMetrics = compute_metrics(&confusion(&pred, &gt).unwrap());
        let zero = Exact::from_integer(0);
        if m.precision + m.recall > zero {
            let two = Exact::from_integer(2);
            prop_assert_eq!(m.f1, two * m.precision * m.recall / (m.precision + m.recall));
        }
        for v in [m.dice, m.iou, m.precision, m.recall, m.f1, m.specificity, m.accuracy] {
            prop_assert!(v >= zero && v <= Exact::from_integer(1));
        }
    }
}
