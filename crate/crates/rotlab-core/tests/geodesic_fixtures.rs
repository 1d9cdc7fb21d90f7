//! Closed-geodesic combinatorics on genus-2 fixtures: self-intersection
//! witnesses against exhaustive search, Nielsen subgroup preservation via
//! ball comparison, and the covering classification with its monotonicity
//! and soundness guarantees.

mod common;

use common::*;
use rotlab_core::geodesic::{
    classify_covering, geodesics_cross, nielsen_reduce, self_intersection_witness, CoveringClass,
    GeodesicError, SelfIntersection,
};
use rotlab_core::group::{GroupWord, SurfaceGroup};
use rotlab_core::hyperbolic::{hyp_distance, project_onto_geodesic, DiskPoint};

fn splice_pair(group: &SurfaceGroup) -> (GroupWord, GroupWord) {
    // Split of the figure-eight class w = a1 b2 at its self-intersection:
    // the witness oracle reports the deck u = a1, and the based lobes are
    // (u, w·u⁻¹). Their concatenation in lobe order recovers w, whose
    // geodesic self-intersects transversally at the basepoint.
    let w = word_from(&[(0, false), (3, false)]);
    let wit = match self_intersection_witness(group, &w, 3).unwrap() {
        SelfIntersection::Witness(wit) => wit,
        SelfIntersection::NoneFound { .. } => panic!("figure-eight class must self-intersect"),
    };
    let t1 = wit.deck.clone();
    let t2 = w.concat(&t1.inverse());
    (t1, t2)
}

#[test]
fn crossing_points_lie_on_both_geodesics() {
    let mut rng = rng(31);
    let mut found = 0;
    while found < 100 {
        let g1 = random_geodesic(&mut rng);
        let g2 = random_geodesic(&mut rng);
        match geodesics_cross(&g1, &g2) {
            Ok(Some(c)) => {
                let d1 = hyp_distance(c.point, project_onto_geodesic(c.point, &g1));
                let d2 = hyp_distance(c.point, project_onto_geodesic(c.point, &g2));
                assert!(d1 < 1e-8 && d2 < 1e-8, "crossing point off geodesics: {d1} {d2}");
                found += 1;
            }
            _ => continue,
        }
    }
}

#[test]
fn simple_generator_has_no_witness_at_radius_four() {
    let group = genus2();
    let a1 = GroupWord::generator(0, false);
    match self_intersection_witness(&group, &a1, 4).unwrap() {
        SelfIntersection::NoneFound { radius } => assert_eq!(radius, 4),
        SelfIntersection::Witness(w) => panic!("a1 should be simple, got deck {}", w.deck),
    }
}

#[test]
fn figure_eight_witness_regression() {
    let group = genus2();
    let w = word_from(&[(0, false), (3, false)]); // a1 b2
    match self_intersection_witness(&group, &w, 3).unwrap() {
        SelfIntersection::Witness(wit) => {
            // Frozen by the exhaustive shortlex search: the first witness
            // is the single letter a1.
            assert_eq!(wit.deck, GroupWord::generator(0, false));
            assert!(wit.reverify(&group, &w));
        }
        SelfIntersection::NoneFound { .. } => panic!("a1 b2 self-intersects"),
    }
}

#[test]
fn nielsen_reduces_and_preserves_subgroup_ball() {
    let group = genus2();
    let a = GroupWord::generator(0, false);
    let b = GroupWord::generator(1, false);
    let w1 = a.concat(&b); // a1 b1
    let w2 = a.concat(&b).concat(&b); // a1 b1 b1
    let red = nielsen_reduce(&group, &w1, &w2);
    assert!(!red.degenerate);
    assert!(red.pair.0.len() + red.pair.1.len() <= 3);

    // Subgroup preservation: the reduced pair generates the original
    // elements within the radius-4 ball (matrix comparison).
    let ball = |p: &GroupWord, q: &GroupWord| -> Vec<rotlab_core::hyperbolic::MobiusTransform> {
        let syms = [
            group.evaluate(p),
            group.evaluate(q),
            group.evaluate(&p.inverse()),
            group.evaluate(&q.inverse()),
        ];
        let mut out = Vec::new();
        // All free products of length <= 4 over the pair.
        let mut stack: Vec<(usize, rotlab_core::hyperbolic::MobiusTransform)> = Vec::new();
        fn rec(
            syms: &[rotlab_core::hyperbolic::MobiusTransform; 4],
            depth: usize,
            last: Option<usize>,
            m: rotlab_core::hyperbolic::MobiusTransform,
            out: &mut Vec<rotlab_core::hyperbolic::MobiusTransform>,
        ) {
            if depth == 0 {
                return;
            }
            for (i, s) in syms.iter().enumerate() {
                if let Some(l) = last {
                    if (l + 2) % 4 == i {
                        continue;
                    }
                }
                let next = m.compose(s);
                out.push(next);
                rec(syms, depth - 1, Some(i), next, out);
            }
        }
        rec(&syms, 4, None, rotlab_core::hyperbolic::MobiusTransform::identity(), &mut out);
        stack.clear();
        out
    };
    let original = ball(&w1, &w2);
    let reduced = ball(&red.pair.0, &red.pair.1);
    // Every original generator must appear in the reduced ball.
    for target in [group.evaluate(&w1), group.evaluate(&w2)] {
        let hit = reduced.iter().any(|m| m.distance_up_to_sign(&target) < 1e-8);
        assert!(hit, "original generator missing from reduced ball");
    }
    // And conversely the reduced pair appears in the original ball.
    for target in [group.evaluate(&red.pair.0), group.evaluate(&red.pair.1)] {
        let hit = original.iter().any(|m| m.distance_up_to_sign(&target) < 1e-8);
        assert!(hit, "reduced generator missing from original ball");
    }
}

#[test]
fn covering_of_crossing_generator_pair_is_punctured_torus() {
    let group = genus2();
    let a1 = GroupWord::generator(0, false);
    let b1 = GroupWord::generator(1, false);
    match classify_covering(&group, &a1, &b1, 4).unwrap() {
        CoveringClass::PuncturedTorus { .. } => {}
        other => panic!("expected punctured torus, got {other:?}"),
    }
    // Monotone under radius increase.
    for radius in [5usize, 6] {
        match classify_covering(&group, &a1, &b1, radius).unwrap() {
            CoveringClass::PuncturedTorus { .. } => {}
            other => panic!("determination flipped at radius {radius}: {other:?}"),
        }
    }
}

#[test]
fn covering_of_splice_pair_is_three_punctured_sphere() {
    let group = genus2();
    let (t1, t2) = splice_pair(&group);
    match classify_covering(&group, &t1, &t2, 4).unwrap() {
        CoveringClass::ThreePuncturedSphere { witnesses, witness_classes, .. } => {
            assert!(witnesses.0.reverify(&group, &witness_classes.0));
            assert!(witnesses.1.reverify(&group, &witness_classes.1));
        }
        other => panic!("expected three-punctured sphere, got {other:?}"),
    }
    for radius in [5usize, 6] {
        match classify_covering(&group, &t1, &t2, radius).unwrap() {
            CoveringClass::ThreePuncturedSphere { .. } => {}
            other => panic!("determination flipped at radius {radius}: {other:?}"),
        }
    }
}

#[test]
fn covering_undetermined_at_tiny_radius() {
    let group = genus2();
    let a1 = GroupWord::generator(0, false);
    let b1 = GroupWord::generator(1, false);
    match classify_covering(&group, &a1, &b1, 1).unwrap() {
        CoveringClass::Undetermined { radius } => assert_eq!(radius, 1),
        other => panic!("expected undetermined at radius 1, got {other:?}"),
    }
}

#[test]
fn covering_handles_disjoint_axes_soundly() {
    // Disjoint axes are only accepted through verified splice evidence;
    // (a1, a2) concatenates to a class the members witness or not, and
    // either a sound 3PS or the precondition error is acceptable.
    let group = genus2();
    let a1 = GroupWord::generator(0, false);
    let a2 = GroupWord::generator(2, false);
    // Two disjoint simple classes generate a planar cover; acceptable
    // outcomes are the precondition error (no bounded evidence) or a sound
    // three-punctured sphere.
    let conj = a1.conjugated_by(&GroupWord::generator(1, false));
    for pair in [(&a1, &a2), (&a1, &conj)] {
        match classify_covering(&group, pair.0, pair.1, 4) {
            Err(GeodesicError::AxesDontCross) => {}
            Ok(CoveringClass::ThreePuncturedSphere { witnesses, witness_classes, .. }) => {
                assert!(witnesses.0.reverify(&group, &witness_classes.0));
                assert!(witnesses.1.reverify(&group, &witness_classes.1));
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}

#[test]
fn covering_rejects_degenerate_pair() {
    let group = genus2();
    let a1 = GroupWord::generator(0, false);
    match classify_covering(&group, &a1, &a1.pow(2), 4) {
        Err(GeodesicError::NotRankTwo) | Err(GeodesicError::AxesDontCross) => {}
        other => panic!("expected degenerate error, got {other:?}"),
    }
}

#[test]
fn witness_deck_translates_cross_for_splice_elements() {
    // The 3PS witnesses assert crossings of the concatenated class;
    // double-check against the dense-sampling oracle.
    let group = genus2();
    let (t1, t2) = splice_pair(&group);
    if let CoveringClass::ThreePuncturedSphere { witnesses, witness_classes, .. } =
        classify_covering(&group, &t1, &t2, 4).unwrap()
    {
        for (w, wit) in [(&witness_classes.0, &witnesses.0), (&witness_classes.1, &witnesses.1)] {
            let (axis, _) = group.axis_of(w).unwrap();
            let translate = group.evaluate(&wit.deck).apply_geodesic(&axis);
            assert!(crossing_by_dense_sampling(&axis, &translate));
            // The recorded crossing point lies on both geodesics.
            let p: DiskPoint = wit.point;
            assert!(hyp_distance(p, project_onto_geodesic(p, &axis)) < 1e-7);
            assert!(hyp_distance(p, project_onto_geodesic(p, &translate)) < 1e-7);
        }
    } else {
        panic!("splice pair must classify as 3PS");
    }
}
