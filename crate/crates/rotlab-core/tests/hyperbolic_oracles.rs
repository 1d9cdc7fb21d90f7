//! Oracle-backed properties of the disk-model layer: isometry invariance,
//! projection against golden-section minimization, distance against
//! quadrature, interleaving against dense sampling, and the two projection
//! limit laws used by the measurement theory.

mod common;

use common::*;
use rand::Rng;
use rotlab_core::hyperbolic::*;

#[test]
fn isometry_invariance_of_distance() {
    let mut rng = rng(11);
    for _ in 0..300 {
        let m = random_isometry(&mut rng);
        let z = random_disk_point(&mut rng, 0.9);
        let w = random_disk_point(&mut rng, 0.9);
        let (iz, iw) = match (m.apply(z), m.apply(w)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let d0 = hyp_distance(z, w);
        let d1 = hyp_distance(iz, iw);
        assert!((d0 - d1).abs() < 1e-9, "invariance broke: {d0} vs {d1}");
    }
}

#[test]
fn distance_agrees_with_quadrature() {
    let mut rng = rng(12);
    for _ in 0..25 {
        let z = random_disk_point(&mut rng, 0.8);
        let w = random_disk_point(&mut rng, 0.8);
        if z.euclidean_distance(&w) < 1e-3 {
            continue;
        }
        let exact = hyp_distance(z, w);
        let quad = distance_by_quadrature(z, w);
        assert!(
            (exact - quad).abs() <= 1e-6 * (1.0 + exact),
            "quadrature {quad} vs formula {exact}"
        );
    }
}

#[test]
fn halfplane_reference_distance() {
    // Half-plane points i and 4i correspond to disk points under the Cayley
    // map; their distance is log 4.
    let to_disk = |w: num::complex::Complex64| {
        let i = num::complex::Complex64::new(0.0, 1.0);
        let z = (w - i) / (w + i);
        DiskPoint::new(z.re, z.im).unwrap()
    };
    let a = to_disk(num::complex::Complex64::new(0.0, 1.0));
    let b = to_disk(num::complex::Complex64::new(0.0, 4.0));
    let d = hyp_distance(a, b);
    assert!((d - 4.0f64.ln()).abs() < 1e-12, "d = {d}");
}

#[test]
fn projection_matches_golden_section() {
    let mut rng = rng(13);
    for _ in 0..120 {
        let z = random_disk_point(&mut rng, 0.9);
        let g = random_geodesic(&mut rng);
        let p = project_onto_geodesic(z, &g);
        let (_, q) = projection_by_golden_section(z, &g);
        assert!(
            hyp_distance(p, q) <= 1e-7,
            "projection mismatch: {:?} vs {:?}",
            (p.x(), p.y()),
            (q.x(), q.y())
        );
    }
}

#[test]
fn projection_optimality_on_sampled_parameters() {
    let mut rng = rng(14);
    for _ in 0..40 {
        let z = random_disk_point(&mut rng, 0.9);
        let g = random_geodesic(&mut rng);
        let p = project_onto_geodesic(z, &g);
        let dp = hyp_distance(z, p);
        for k in 0..200 {
            let t = -20.0 + 40.0 * (k as f64) / 200.0;
            assert!(
                dp <= hyp_distance(z, g.point_at(t)) + 1e-12,
                "projection not optimal at t={t}"
            );
        }
    }
}

#[test]
fn projection_equivariance() {
    let mut rng = rng(15);
    for _ in 0..150 {
        let z = random_disk_point(&mut rng, 0.85);
        let g = random_geodesic(&mut rng);
        let m = random_isometry(&mut rng);
        let lhs = match m.apply(project_onto_geodesic(z, &g)) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let mz = match m.apply(z) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let rhs = project_onto_geodesic(mz, &m.apply_geodesic(&g));
        assert!(hyp_distance(lhs, rhs) < 1e-8, "equivariance residual");
    }
}

#[test]
fn translation_length_is_conjugation_invariant() {
    let mut rng = rng(16);
    let mut checked = 0;
    while checked < 60 {
        let m = random_isometry(&mut rng);
        let n = random_isometry(&mut rng);
        let conj = n.compose(&m).compose(&n.inverse());
        match (classify(&m), classify(&conj)) {
            (
                IsometryClass::Hyperbolic { length: l1, .. },
                IsometryClass::Hyperbolic { length: l2, .. },
            ) => {
                assert!((l1 - l2).abs() < 1e-9, "lengths {l1} vs {l2}");
                checked += 1;
            }
            _ => continue,
        }
    }
}

#[test]
fn projections_onto_geodesics_sharing_an_endpoint_converge() {
    // Two geodesics into the same endpoint β: as y marches toward β the
    // projections approach each other (below 1e-3 once d(0,y) > 20).
    let beta = 1.2f64;
    let g1 = Geodesic::from_angles(3.4, beta).unwrap();
    let g2 = Geodesic::from_angles(4.6, beta).unwrap();
    // March along a third ray toward β.
    let ray = Geodesic::from_angles(2.2, beta).unwrap();
    let mut last = f64::INFINITY;
    for t in [5.0f64, 10.0, 15.0, 20.5, 21.0] {
        let y = ray.point_at(t);
        let d = hyp_distance(project_onto_geodesic(y, &g1), project_onto_geodesic(y, &g2));
        if hyp_distance(DiskPoint::origin(), y) > 20.0 {
            assert!(d < 1e-3, "projection gap {d} at t={t}");
        }
        assert!(d < last + 1e-9, "gap not shrinking at t={t}");
        last = d;
    }
}

#[test]
fn projected_displacement_ratio_tends_to_one() {
    // Pairwise distinct endpoints; as y -> β1 the displacement of the
    // projection onto (α1, β1) matches the one onto (α2, β1). The ratio
    // error decays like (parametrization offset)/displacement, so the base
    // point sits on the approach ray where the offset is already small.
    let b1 = 0.9f64;
    let g1 = Geodesic::from_angles(3.0, b1).unwrap();
    let g2 = Geodesic::from_angles(4.2, b1).unwrap();
    let ray = Geodesic::from_angles(2.0, b1).unwrap();
    let p0 = ray.point_at(8.0);
    let ratio_at = |t: f64| -> f64 {
        let y = ray.point_at(t);
        let num = hyp_distance(project_onto_geodesic(y, &g1), project_onto_geodesic(p0, &g1));
        let den = hyp_distance(project_onto_geodesic(y, &g2), project_onto_geodesic(p0, &g2));
        num / den
    };
    let y = ray.point_at(20.5);
    assert!(hyp_distance(DiskPoint::origin(), y) > 20.0);
    let r20 = ratio_at(20.5);
    assert!((r20 - 1.0).abs() < 1e-3, "ratio {r20} at distance 20");
}

#[test]
fn interleaving_matches_dense_sampling_on_generator_axes() {
    let group = genus2();
    let words: Vec<_> = (0..4u16)
        .map(|g| rotlab_core::group::GroupWord::generator(g, false))
        .collect();
    for i in 0..words.len() {
        for j in 0..words.len() {
            if i == j {
                continue;
            }
            let (ai, _) = group.axis_of(&words[i]).unwrap();
            let (aj, _) = group.axis_of(&words[j]).unwrap();
            let fast = boundary_interleave(&ai, &aj).crosses();
            let slow = crossing_by_dense_sampling(&ai, &aj);
            assert_eq!(fast, slow, "axes {i} vs {j}");
        }
    }
}

#[test]
fn random_interleaving_agrees_with_oracle() {
    let mut rng = rng(17);
    for _ in 0..200 {
        let g1 = random_geodesic(&mut rng);
        let g2 = random_geodesic(&mut rng);
        match boundary_interleave(&g1, &g2) {
            Interleaving::SharedEndpoint => continue,
            r => {
                assert_eq!(r.crosses(), crossing_by_dense_sampling(&g1, &g2));
            }
        }
    }
}

#[test]
fn crossing_orientation_convention() {
    // (0, π) vs (π/2, 3π/2) is the fixed positive example.
    let pi = std::f64::consts::PI;
    let g1 = Geodesic::from_angles(0.0, pi).unwrap();
    let g2 = Geodesic::from_angles(pi / 2.0, 1.5 * pi).unwrap();
    assert_eq!(boundary_interleave(&g1, &g2), Interleaving::CrossPositive);
}
