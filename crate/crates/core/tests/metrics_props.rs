mod common;

use netrefine::metrics::{r_confusion, r_confusion_with, scores, Neighborhood};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn confusion_is_monotone_in_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..40 {
        let pred = common::random_mask(&mut rng, 40, 40, 0.05);
        let gt = common::random_mask(&mut rng, 40, 40, 0.05);
        for nb in [Neighborhood::Square, Neighborhood::Disk] {
            let mut prev = r_confusion_with(&pred, &gt, 0, nb).unwrap();
            for r in 1..6 {
                let c = r_confusion_with(&pred, &gt, r, nb).unwrap();
                assert!(c.rtp >= prev.rtp && c.rfp <= prev.rfp && c.rfn <= prev.rfn);
                assert_eq!(c.rtp + c.rfp, pred.count_ones());
                assert!(c.rfn <= gt.count_ones());
                prev = c;
            }
        }
    }
}

#[test]
fn disk_matches_literal_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..30 {
        let pred = common::random_mask(&mut rng, 20, 24, 0.1);
        let gt = common::random_mask(&mut rng, 20, 24, 0.1);
        for r in [1, 2, 4] {
            let nb = Neighborhood::Disk;
            let c = r_confusion_with(&pred, &gt, r, nb).unwrap();
            let rtp = pred
                .pixels()
                .filter(|&p| netrefine::metrics::any_within(&gt, p, r, nb))
                .count();
            let rfn = gt
                .pixels()
                .filter(|&p| !netrefine::metrics::any_within(&pred, p, r, nb))
                .count();
            assert_eq!((c.rtp, c.rfn), (rtp, rfn));
        }
    }
}

#[test]
fn scores_are_bounded_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..60 {
        let pred = common::random_mask(&mut rng, 16, 16, 0.2);
        let gt = common::random_mask(&mut rng, 16, 16, 0.2);
        for r in 0..3 {
            let s = scores(&r_confusion(&pred, &gt, r).unwrap());
            for v in [s.precision, s.recall, s.f1, s.iou] {
                assert!((0.0..=1.0).contains(&v));
            }
            if s.precision + s.recall > 0.0 {
                let f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
                assert!((s.f1 - f1).abs() < 1e-12);
            }
        }
        if !pred.is_empty() {
            for r in 0..4 {
                let s = scores(&r_confusion(&pred, &pred, r).unwrap());
                assert_eq!((s.precision, s.recall, s.f1, s.iou), (1.0, 1.0, 1.0, 1.0));
            }
        }
    }
}
