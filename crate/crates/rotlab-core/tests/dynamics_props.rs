//! Lifted-system properties: deck equivariance of the raw maps, uniform
//! displacement bounds, orbit word accounting, float-drift round trips and
//! composition semantics.

mod common;

use common::*;
use rotlab_core::dynamics::*;
use rotlab_core::group::{GroupWord, LocatedPoint};
use rotlab_core::hyperbolic::{from_fermi, geodesic_position, hyp_distance, DiskPoint};

fn twist_wide() -> (rotlab_core::group::SurfaceGroup, TwistSystem) {
    let group = genus2();
    let core = GroupWord::generator(0, false);
    // Reach past one-letter translates of the domain for the raw
    // equivariance test.
    let twist = TwistSystem::with_reach(&group, core, 0.45, 0.6, 5, 4.0).unwrap();
    (group, twist)
}

#[test]
fn raw_equivariance_under_generators() {
    let (group, twist) = twist_wide();
    let mut rng = rng(41);
    let mut worst = 0.0f64;
    for _ in 0..60 {
        let z = group.domain().sample_point(&mut rng);
        for g in 0..4u16 {
            for inv in [false, true] {
                let u = group.letter_transform(rotlab_core::group::Letter::new(g, inv));
                let uz = match u.apply(z) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let lhs = twist.raw_step(uz).unwrap();
                let rhs = match u.apply(twist.raw_step(z).unwrap()) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                worst = worst.max(hyp_distance(lhs, rhs));
            }
        }
    }
    assert!(worst < 1e-7, "raw equivariance residual {worst}");
}

#[test]
fn located_equivariance_under_short_words() {
    // Word-level equivariance of the anchored step for |u| <= 3: the
    // representative path is identical, so this checks the bookkeeping.
    let (group, twist) = twist_wide();
    let mut rng = rng(42);
    for _ in 0..20 {
        let z = group.domain().sample_point(&mut rng);
        let ulen = rng.gen_range(1..=3usize);
        let u = random_reduced_word(&mut rng, 2, ulen);
        let p = LocatedPoint::new(GroupWord::identity(), z);
        let stepped = step(&twist, &group, &p).unwrap();
        let translated_then_stepped = step(&twist, &group, &p.translated(&u)).unwrap();
        assert_eq!(translated_then_stepped.word, u.concat(&stepped.word));
        assert_eq!(translated_then_stepped.rep, stepped.rep);
    }
    let _ = rand::Rng::gen::<u8>(&mut rng);
}

use rand::Rng;

#[test]
fn displacement_bound_holds() {
    let (group, twist) = twist_wide();
    let bound = twist.displacement_bound();
    assert!(bound <= 0.45 + 0.0 + 1.0, "bound {bound} too large");
    let mut rng = rng(43);
    for _ in 0..300 {
        let z = group.domain().sample_point(&mut rng);
        let img = twist.raw_step(z).unwrap();
        assert!(hyp_distance(z, img) <= bound + 1e-9);
    }
}

#[test]
fn twist_word_accounting_on_axis() {
    // Orbit on the core axis: the cumulative word is an exact power of the
    // core, with exponent floor(n·θ/ℓ) up to one.
    let group = genus2();
    let core = GroupWord::generator(0, false);
    let theta = 0.45;
    let twist = TwistSystem::new(&group, core.clone(), theta, 0.6).unwrap();
    let start = group.locate(twist.axis().point_at(0.1)).unwrap();
    let n = 100;
    let traj = iterate(&twist, &group, start, n).unwrap();
    let expected = (n as f64 * theta / twist.core_length()).floor() as i32;
    let word = &traj.end().word;
    let ok = (expected - 1..=expected + 1).any(|m| *word == core.pow(m));
    assert!(ok, "word {} not core^{}±1", word, expected);
}

#[test]
fn forward_backward_round_trip() {
    let (group, twist) = twist_wide();
    let start = group.locate(from_fermi(twist.axis(), 0.2, 0.31)).unwrap();
    let n = 500;
    let mut p = start.clone();
    for _ in 0..n {
        p = step(&twist, &group, &p).unwrap();
    }
    for _ in 0..n {
        p = inverse_step(&twist, &group, &p).unwrap();
    }
    let residual = group.cover_distance(&start, &p).unwrap();
    assert!(residual < 1e-7 * n as f64, "round trip residual {residual}");
}

#[test]
fn step_inverse_step_pointwise() {
    let (group, twist) = twist_wide();
    let mut rng = rng(44);
    for _ in 0..100 {
        let z = group.domain().sample_point(&mut rng);
        let img = twist.raw_step(z).unwrap();
        let back = twist.raw_inverse_step(img).unwrap();
        assert!(hyp_distance(z, back) < 1e-8);
    }
}

#[test]
fn compose_identity_is_neutral() {
    let group = genus2();
    let core = GroupWord::generator(0, false);
    let twist = TwistSystem::new(&group, core, 0.45, 0.6).unwrap();
    let composed = ComposedSystem::new(vec![Box::new(IdentitySystem), Box::new(twist)]);
    let solo = TwistSystem::new(&group, GroupWord::generator(0, false), 0.45, 0.6).unwrap();
    let mut rng = rng(45);
    for _ in 0..100 {
        let z = group.domain().sample_point(&mut rng);
        let a = composed.raw_step(z).unwrap();
        let b = solo.raw_step(z).unwrap();
        assert!(hyp_distance(a, b) < 1e-15);
    }
}

#[test]
fn composition_applies_right_to_left() {
    // f3 = drift ∘ twist on a point in both supports equals the manual
    // two-step application.
    let group = genus2();
    let core = GroupWord::generator(0, false);
    let twist = TwistSystem::new(&group, core.clone(), 0.45, 0.55).unwrap();
    let (alpha_axis, _) = group.axis_of(&GroupWord::generator(2, false)).unwrap();
    let (beta_axis, _) = group.axis_of(&core).unwrap();
    let path = rotlab_core::hyperbolic::Geodesic::new(alpha_axis.start(), beta_axis.end()).unwrap();
    let drift = DriftSystem::new(&group, path, 0.22, 0.3).unwrap();
    let manual_twist = TwistSystem::new(&group, core, 0.45, 0.55).unwrap();
    let manual_drift = DriftSystem::new(&group, path, 0.22, 0.3).unwrap();
    let f3 = ComposedSystem::new(vec![Box::new(drift), Box::new(twist)]);
    let mut rng = rng(46);
    for _ in 0..200 {
        let z = group.domain().sample_point(&mut rng);
        let via_compose = f3.raw_step(z).unwrap();
        let manual = manual_drift.raw_step(manual_twist.raw_step(z).unwrap()).unwrap();
        assert!(hyp_distance(via_compose, manual) < 1e-12);
    }
}

#[test]
fn drift_advances_along_path() {
    let group = genus2();
    let (alpha_axis, _) = group.axis_of(&GroupWord::generator(2, false)).unwrap();
    let (beta_axis, _) = group.axis_of(&GroupWord::generator(0, false)).unwrap();
    let path = rotlab_core::hyperbolic::Geodesic::new(alpha_axis.start(), beta_axis.end()).unwrap();
    let drift = DriftSystem::new(&group, path, 0.22, 0.3).unwrap();
    let z = path.point_at(0.0);
    let img = drift.raw_step(z).unwrap();
    let t0 = geodesic_position(z, &path);
    let t1 = geodesic_position(img, &path);
    assert!((t1 - t0 - 0.3).abs() < 1e-9, "drift moved {}", t1 - t0);
    // Point far from every tube stays fixed.
    let far = DiskPoint::origin();
    if hyp_distance(far, rotlab_core::hyperbolic::project_onto_geodesic(far, &path)) > 0.22 {
        let unmoved = drift.raw_step(far).unwrap();
        assert!(hyp_distance(far, unmoved) < 1e-15);
    }
}

#[test]
fn trajectory_reconstruction_stays_consistent() {
    // d(evaluate(g_k)·rep_k, raw_step(evaluate(g_{k-1})·rep_{k-1})) small
    // while the orbit stays within the evaluation reach.
    let (group, twist) = twist_wide();
    let start = group.locate(twist.axis().point_at(0.0)).unwrap();
    let traj = iterate(&twist, &group, start, 6).unwrap();
    for k in 1..traj.points().len() {
        let prev = group.reconstruct(&traj.points()[k - 1]).unwrap();
        let cur = group.reconstruct(&traj.points()[k]).unwrap();
        let expected = twist.raw_step(prev).unwrap();
        assert!(hyp_distance(cur, expected) < 1e-7 * k as f64);
    }
}
