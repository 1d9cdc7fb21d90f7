//! Shared helpers and independent oracles for the integration tests.
//!
//! Everything here recomputes geometry through a different route than the
//! library (euclidean circle constructions, quadrature, golden-section
//! minimization, winding numbers) so that agreement is meaningful.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rotlab_core::group::{GroupWord, Letter, SurfaceGroup};
use rotlab_core::hyperbolic::{geodesic_position, DiskPoint, Geodesic, MobiusTransform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_disk_point<R: Rng>(rng: &mut R, max_norm: f64) -> DiskPoint {
    loop {
        let x = rng.gen::<f64>() * 2.0 - 1.0;
        let y = rng.gen::<f64>() * 2.0 - 1.0;
        if x * x + y * y <= max_norm * max_norm {
            if let Ok(z) = DiskPoint::new(x * max_norm.min(1.0), y * max_norm.min(1.0)) {
                return z;
            }
        }
    }
}

/// A random determinant-one matrix (iterated small factors keep it tame).
pub fn random_isometry<R: Rng>(rng: &mut R) -> MobiusTransform {
    let mut m = MobiusTransform::identity();
    for _ in 0..3 {
        let a = 1.0 + 0.4 * (rng.gen::<f64>() - 0.5);
        let b = 0.8 * (rng.gen::<f64>() - 0.5);
        let c = 0.8 * (rng.gen::<f64>() - 0.5);
        let d = (1.0 + b * c) / a;
        if let Ok(f) = MobiusTransform::from_matrix([a, b, c, d]) {
            m = m.compose(&f);
        }
    }
    m
}

pub fn random_geodesic<R: Rng>(rng: &mut R) -> Geodesic {
    loop {
        let a = rng.gen::<f64>() * std::f64::consts::TAU;
        let b = rng.gen::<f64>() * std::f64::consts::TAU;
        if let Ok(g) = Geodesic::from_angles(a, b) {
            return g;
        }
    }
}

pub fn random_reduced_word<R: Rng>(rng: &mut R, genus: usize, len: usize) -> GroupWord {
    let mut letters: Vec<Letter> = Vec::new();
    while letters.len() < len {
        let l = Letter::new(rng.gen_range(0..2 * genus as u16), rng.gen::<bool>());
        if letters.last().map(|p| p.is_inverse_of(&l)).unwrap_or(false) {
            continue;
        }
        letters.push(l);
    }
    GroupWord::from_letters(letters)
}

/// Golden-section minimization of d(z, G(t)) over the arclength parameter.
pub fn projection_by_golden_section(z: DiskPoint, g: &Geodesic) -> (f64, DiskPoint) {
    let eval = |t: f64| rotlab_core::hyperbolic::hyp_distance(z, g.point_at(t));
    // The projection parameter of interior points is well within ±40.
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    let phi = 0.618_033_988_749_894_9;
    for _ in 0..120 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if eval(m1) <= eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, g.point_at(t))
}

/// Hyperbolic distance by quadrature along the euclidean circle arc
/// orthogonal to the unit circle through the two points (independent of
/// the arccosh formula).
pub fn distance_by_quadrature(z: DiskPoint, w: DiskPoint) -> f64 {
    let (zx, zy) = (z.x(), z.y());
    let (wx, wy) = (w.x(), w.y());
    let cross = zx * wy - zy * wx;
    let n = 20_000usize;
    if cross.abs() < 1e-12 {
        // Diameter chord: integrate along the straight segment.
        let mut total = 0.0;
        for k in 0..n {
            let t = (k as f64 + 0.5) / n as f64;
            let x = zx + t * (wx - zx);
            let y = zy + t * (wy - zy);
            let speed = ((wx - zx).hypot(wy - zy)) * 2.0 / (1.0 - x * x - y * y);
            total += speed / n as f64;
        }
        return total;
    }
    // Orthogonal circle: solve 2 c·p = |p|² + 1 for both points.
    let det = 2.0 * (zx * wy - zy * wx);
    let rz = zx * zx + zy * zy + 1.0;
    let rw = wx * wx + wy * wy + 1.0;
    let cx = (rz * wy - rw * zy) / det;
    let cy = (zx * rw - wx * rz) / det;
    let r = ((zx - cx).hypot(zy - cy) + (wx - cx).hypot(wy - cy)) / 2.0;
    let a0 = (zy - cy).atan2(zx - cx);
    let mut a1 = (wy - cy).atan2(wx - cx);
    // Take the arc inside the disk (the shorter one for an orthogonal circle).
    while a1 - a0 > std::f64::consts::PI {
        a1 -= std::f64::consts::TAU;
    }
    while a1 - a0 < -std::f64::consts::PI {
        a1 += std::f64::consts::TAU;
    }
    let mut total = 0.0;
    for k in 0..n {
        let t = a0 + (a1 - a0) * (k as f64 + 0.5) / n as f64;
        let x = cx + r * t.cos();
        let y = cy + r * t.sin();
        let speed = (r * (a1 - a0).abs()) * 2.0 / (1.0 - x * x - y * y);
        total += speed / n as f64;
    }
    total
}

/// Dense-sampling crossing oracle: do the two geodesics (as point sets in
/// the disk) come within `tol` of each other with a sign change of the
/// side function?
pub fn crossing_by_dense_sampling(g1: &Geodesic, g2: &Geodesic) -> bool {
    let mut prev_sign: Option<f64> = None;
    let mut crossed = false;
    for k in 0..4000 {
        let t = -20.0 + 40.0 * (k as f64) / 4000.0;
        let p = g1.point_at(t);
        let s = rotlab_core::hyperbolic::geodesic_offset(p, g2);
        if let Some(ps) = prev_sign {
            if ps.signum() != s.signum() && ps.abs() > 1e-12 && s.abs() > 1e-12 {
                crossed = true;
            }
        }
        prev_sign = Some(s);
    }
    crossed
}

/// Walk the geodesic segment between two located/interior points, return
/// the parameter positions.
pub fn segment_params(z: DiskPoint, w: DiskPoint, g: &Geodesic) -> (f64, f64) {
    (geodesic_position(z, g), geodesic_position(w, g))
}

pub fn genus2() -> SurfaceGroup {
    SurfaceGroup::new(2).expect("genus 2 group")
}

pub fn word_from(names: &[(u16, bool)]) -> GroupWord {
    GroupWord::from_letters(names.iter().map(|(g, i)| Letter::new(*g, *i)))
}
