//! Poincaré disk model: points, boundary points, isometries, geodesics.
//!
//! Isometries are stored as real 2×2 matrices of determinant one (the
//! half-plane picture) and act on the disk through a fixed Cayley
//! conjugation. This keeps composition, inversion and trace classification
//! in real arithmetic; the disk only appears when a point or boundary angle
//! is materialized.
//!
//! Boundary points are angles on the unit circle; under the Cayley map the
//! angle θ corresponds to the real projective point [-cos(θ/2) : sin(θ/2)],
//! which is how isometries act on them without special-casing infinity.

use crate::flt;
use core::fmt;
use num_complex::Complex64;

/// Matrix entries below this are treated as zero after normalization.
pub const EPS_MATRIX: f64 = 1e-12;
/// Two boundary angles closer than this are not distinct.
pub const EPS_BOUNDARY: f64 = 1e-9;
/// Interior points keep |z| <= 1 - EPS_INTERIOR; anything closer to the
/// circle must be carried as deck word + representative instead.
pub const EPS_INTERIOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypError {
    /// Coordinates outside the closed margin disk (or not finite).
    OutsideDisk,
    /// An image landed within the boundary margin; renormalize through the
    /// surface group before continuing.
    NearBoundary,
    /// Geodesic endpoints coincide within tolerance.
    DegenerateGeodesic,
    /// Matrix with non-positive determinant (orientation-reversing or rank
    /// deficient).
    NonPositiveDeterminant,
    /// Transform has no axis (not hyperbolic).
    NotHyperbolic,
    /// Two geodesics share an endpoint; crossing data is undefined.
    AmbiguousCrossing,
}

impl fmt::Display for HypError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HypError::OutsideDisk => write!(f, "point outside the unit disk margin"),
            HypError::NearBoundary => write!(f, "image within boundary margin; renormalize via the group"),
            HypError::DegenerateGeodesic => write!(f, "geodesic endpoints coincide"),
            HypError::NonPositiveDeterminant => write!(f, "matrix determinant not positive"),
            HypError::NotHyperbolic => write!(f, "transform is not hyperbolic"),
            HypError::AmbiguousCrossing => write!(f, "geodesics share an endpoint"),
        }
    }
}

/// A point of ∂𝔻, stored as an angle in [0, 2π).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    angle: f64,
}

impl BoundaryPoint {
    pub fn new(angle: f64) -> Self {
        BoundaryPoint { angle: flt::wrap_angle(angle) }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Circular distance to another boundary point, in [0, π].
    pub fn distance(&self, other: &BoundaryPoint) -> f64 {
        flt::circular_distance(self.angle, other.angle)
    }

    pub fn is_distinct(&self, other: &BoundaryPoint) -> bool {
        self.distance(other) > EPS_BOUNDARY
    }

    /// Homogeneous coordinates of the corresponding point of RP¹.
    pub(crate) fn homogeneous(&self) -> [f64; 2] {
        let h = self.angle / 2.0;
        [-flt::cos(h), flt::sin(h)]
    }

    pub(crate) fn from_homogeneous(x: f64, y: f64) -> Self {
        let mut t = flt::atan2(y, -x);
        if t < 0.0 {
            t += core::f64::consts::PI;
        }
        if t >= core::f64::consts::PI {
            t -= core::f64::consts::PI;
        }
        BoundaryPoint::new(2.0 * t)
    }
}

/// An interior point of the disk, kept inside the precision margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint {
    x: f64,
    y: f64,
}

impl DiskPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, HypError> {
        let r2 = x * x + y * y;
        let lim = 1.0 - EPS_INTERIOR;
        if !(r2.is_finite()) || r2 > lim * lim {
            return Err(HypError::OutsideDisk);
        }
        Ok(DiskPoint { x, y })
    }

    pub fn origin() -> Self {
        DiskPoint { x: 0.0, y: 0.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn norm(&self) -> f64 {
        flt::hypot(self.x, self.y)
    }

    /// Radial direction of the point seen from the origin.
    pub fn direction(&self) -> BoundaryPoint {
        BoundaryPoint::new(flt::atan2(self.y, self.x))
    }

    /// Euclidean distance, for tie-breaking only.
    pub fn euclidean_distance(&self, other: &DiskPoint) -> f64 {
        flt::hypot(self.x - other.x, self.y - other.y)
    }

    pub(crate) fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Clamp into the margin disk. Internal guard for feet of projections;
    /// the clamp moves the point radially by at most the margin width.
    pub(crate) fn from_complex_clamped(z: Complex64) -> Self {
        let r = z.norm();
        let lim = 1.0 - EPS_INTERIOR;
        if r > lim {
            let s = lim / r;
            DiskPoint { x: z.re * s, y: z.im * s }
        } else {
            DiskPoint { x: z.re, y: z.im }
        }
    }
}

/// Disk point -> half-plane point under the Cayley map z ↦ i(1+z)/(1−z).
pub(crate) fn disk_to_half(z: DiskPoint) -> Complex64 {
    let z = z.to_complex();
    let i = Complex64::new(0.0, 1.0);
    i * (Complex64::new(1.0, 0.0) + z) / (Complex64::new(1.0, 0.0) - z)
}

/// Half-plane point -> disk under w ↦ (w−i)/(w+i).
pub(crate) fn half_to_disk(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (w - i) / (w + i)
}

/// Orientation-preserving isometry as a real 2×2 matrix with det = 1,
/// identified with its negative. Row-major storage [a, b, c, d].
#[derive(Clone, Copy, Debug)]
pub struct MobiusTransform {
    m: [f64; 4],
}

impl MobiusTransform {
    pub fn identity() -> Self {
        MobiusTransform { m: [1.0, 0.0, 0.0, 1.0] }
    }

    /// Build from a row-major matrix; requires positive determinant.
    pub fn from_matrix(m: [f64; 4]) -> Result<Self, HypError> {
        let det = m[0] * m[3] - m[1] * m[2];
        if !(det.is_finite()) || det <= 0.0 {
            return Err(HypError::NonPositiveDeterminant);
        }
        let s = 1.0 / flt::sqrt(det);
        Ok(MobiusTransform { m: [m[0] * s, m[1] * s, m[2] * s, m[3] * s] })
    }

    pub fn matrix(&self) -> [f64; 4] {
        self.m
    }

    pub fn det(&self) -> f64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    pub fn trace(&self) -> f64 {
        self.m[0] + self.m[3]
    }

    pub fn compose(&self, other: &MobiusTransform) -> MobiusTransform {
        let [a, b, c, d] = self.m;
        let [p, q, r, s] = other.m;
        let mut out = MobiusTransform { m: [a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s] };
        out.renormalize();
        out
    }

    pub fn inverse(&self) -> MobiusTransform {
        let [a, b, c, d] = self.m;
        MobiusTransform { m: [d, -b, -c, a] }
    }

    /// Rescale so det returns to 1 (drift control after long products).
    pub(crate) fn renormalize(&mut self) {
        let det = self.det();
        if det > 0.0 && det.is_finite() {
            let s = 1.0 / flt::sqrt(det);
            for e in self.m.iter_mut() {
                *e *= s;
            }
        }
    }

    /// Sign-canonical copy: trace >= 0, ties broken by the first entries.
    pub fn canonical(&self) -> MobiusTransform {
        let t = self.trace();
        let flip = if flt::abs(t) > EPS_MATRIX {
            t < 0.0
        } else {
            let lead = if flt::abs(self.m[0] - self.m[3]) > EPS_MATRIX {
                self.m[0] - self.m[3]
            } else if flt::abs(self.m[1]) > EPS_MATRIX {
                self.m[1]
            } else {
                self.m[2]
            };
            lead < 0.0
        };
        if flip {
            MobiusTransform { m: [-self.m[0], -self.m[1], -self.m[2], -self.m[3]] }
        } else {
            *self
        }
    }

    /// Max entry difference after sign canonicalization.
    pub fn distance_up_to_sign(&self, other: &MobiusTransform) -> f64 {
        let a = self.canonical().m;
        let b = other.canonical().m;
        let mut d: f64 = 0.0;
        for k in 0..4 {
            d = d.max(flt::abs(a[k] - b[k]));
        }
        d
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.distance_up_to_sign(&MobiusTransform::identity()) < tol
    }

    pub(crate) fn apply_half(&self, w: Complex64) -> Complex64 {
        let [a, b, c, d] = self.m;
        (w * a + b) / (w * c + d)
    }

    /// Action on an interior point. Errors with `NearBoundary` when the
    /// image leaves the precision margin.
    pub fn apply(&self, z: DiskPoint) -> Result<DiskPoint, HypError> {
        let w = self.apply_half(disk_to_half(z));
        let img = half_to_disk(w);
        DiskPoint::new(img.re, img.im).map_err(|_| HypError::NearBoundary)
    }

    /// Action on a boundary point (projective, exact at infinity).
    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        let [a, b, c, d] = self.m;
        let [x, y] = p.homogeneous();
        BoundaryPoint::from_homogeneous(a * x + b * y, c * x + d * y)
    }

    pub fn apply_geodesic(&self, g: &Geodesic) -> Geodesic {
        Geodesic {
            a: self.apply_boundary(g.a),
            b: self.apply_boundary(g.b),
        }
    }
}

/// Oriented geodesic given by its ideal endpoints (from `a` to `b`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geodesic {
    a: BoundaryPoint,
    b: BoundaryPoint,
}

impl Geodesic {
    pub fn new(a: BoundaryPoint, b: BoundaryPoint) -> Result<Self, HypError> {
        if !a.is_distinct(&b) {
            return Err(HypError::DegenerateGeodesic);
        }
        Ok(Geodesic { a, b })
    }

    pub fn from_angles(a: f64, b: f64) -> Result<Self, HypError> {
        Geodesic::new(BoundaryPoint::new(a), BoundaryPoint::new(b))
    }

    pub fn start(&self) -> BoundaryPoint {
        self.a
    }

    pub fn end(&self) -> BoundaryPoint {
        self.b
    }

    pub fn reversed(&self) -> Geodesic {
        Geodesic { a: self.b, b: self.a }
    }

    /// Unordered endpoint comparison within boundary tolerance.
    pub fn same_unoriented(&self, other: &Geodesic) -> bool {
        let d1 = self.a.distance(&other.a).max(self.b.distance(&other.b));
        let d2 = self.a.distance(&other.b).max(self.b.distance(&other.a));
        d1.min(d2) <= EPS_BOUNDARY
    }

    /// The frame of the geodesic: an isometry taking it to the standard
    /// diameter, start ↦ angle π and end ↦ angle 0 (half-plane (0, ∞)).
    pub fn frame(&self) -> MobiusTransform {
        let p = self.a.homogeneous();
        let q = self.b.homogeneous();
        // Row one annihilates the start (sends it to 0), row two the end.
        let mut m = [p[1], -p[0], q[1], -q[0]];
        let det = m[0] * m[3] - m[1] * m[2];
        if det < 0.0 {
            m[0] = -m[0];
            m[1] = -m[1];
        }
        // det can be small when endpoints are close, but Geodesic::new
        // guards degeneracy; normalize explicitly.
        MobiusTransform::from_matrix(m).expect("distinct endpoints give a positive frame")
    }

    /// Point at signed arclength `t` along the geodesic (t = 0 is the point
    /// closest to the frame's base; increasing t runs from start to end).
    pub fn point_at(&self, t: f64) -> DiskPoint {
        let n = self.frame();
        let w = Complex64::new(0.0, flt::exp(t));
        let img = half_to_disk(n.inverse().apply_half(w));
        DiskPoint::from_complex_clamped(img)
    }
}

/// Conjugacy classification of an isometry.
#[derive(Clone, Debug)]
pub enum IsometryClass {
    Identity,
    Elliptic {
        center: DiskPoint,
    },
    Parabolic {
        fixed: BoundaryPoint,
        /// True when |trace| is within EPS_MATRIX of 2 but the matrix is not
        /// exactly parabolic: numerically degenerate hyperbolic/elliptic.
        near_degenerate: bool,
    },
    Hyperbolic {
        /// Oriented from the repelling to the attracting fixed point.
        axis: Geodesic,
        length: f64,
    },
}

/// Classify a normalized transform by its trace.
pub fn classify(m: &MobiusTransform) -> IsometryClass {
    let c = m.canonical();
    let [a, b, cc, d] = c.m;
    let tr = a + d;
    if c.is_identity(EPS_MATRIX.max(1e-9)) {
        return IsometryClass::Identity;
    }
    if tr > 2.0 + EPS_MATRIX {
        // Fixed points on RP¹: c x² + (d−a) x − b = 0.
        let (rep, att) = hyperbolic_fixed_points(a, b, cc, d);
        let axis = Geodesic { a: rep, b: att };
        let length = 2.0 * flt::acosh(tr / 2.0);
        return IsometryClass::Hyperbolic { axis, length };
    }
    if tr >= 2.0 - EPS_MATRIX {
        // Parabolic or numerically degenerate: single boundary fixed point.
        let fixed = if flt::abs(cc) > EPS_MATRIX {
            BoundaryPoint::from_homogeneous(-(d - a) / (2.0 * cc), 1.0)
        } else {
            BoundaryPoint::from_homogeneous(1.0, 0.0)
        };
        let disc = (d - a) * (d - a) + 4.0 * b * cc;
        return IsometryClass::Parabolic {
            fixed,
            near_degenerate: flt::abs(disc) > EPS_MATRIX,
        };
    }
    // Elliptic: complex fixed point in the upper half-plane.
    let disc = (d - a) * (d - a) + 4.0 * b * cc; // negative here
    let im = flt::sqrt(-disc);
    let w = if flt::abs(cc) > EPS_MATRIX {
        Complex64::new(-(d - a) / (2.0 * cc), im / (2.0 * flt::abs(cc)))
    } else {
        // Rotation about the Cayley base point.
        Complex64::new(0.0, 1.0)
    };
    let z = half_to_disk(w);
    IsometryClass::Elliptic { center: DiskPoint::from_complex_clamped(z) }
}

fn hyperbolic_fixed_points(a: f64, b: f64, c: f64, d: f64) -> (BoundaryPoint, BoundaryPoint) {
    if flt::abs(c) <= EPS_MATRIX {
        // One fixed point at infinity; the other solves (a−d)x + b = 0.
        let inf = BoundaryPoint::from_homogeneous(1.0, 0.0);
        let other = BoundaryPoint::from_homogeneous(b / (d - a), 1.0);
        // Derivative at infinity is (a/d)²; attracting iff |a| > |d|.
        if flt::abs(a) > flt::abs(d) {
            (other, inf)
        } else {
            (inf, other)
        }
    } else {
        let disc = (d - a) * (d - a) + 4.0 * b * c;
        let sq = flt::sqrt(disc);
        let x1 = (-(d - a) + sq) / (2.0 * c);
        let x2 = (-(d - a) - sq) / (2.0 * c);
        // Attracting iff |derivative| = (c x + d)^{-2} < 1.
        let d1 = 1.0 / ((c * x1 + d) * (c * x1 + d));
        let (rep, att) = if d1 < 1.0 { (x2, x1) } else { (x1, x2) };
        (
            BoundaryPoint::from_homogeneous(rep, 1.0),
            BoundaryPoint::from_homogeneous(att, 1.0),
        )
    }
}

/// Hyperbolic distance in the disk model.
pub fn hyp_distance(z: DiskPoint, w: DiskPoint) -> f64 {
    let dx = z.x() - w.x();
    let dy = z.y() - w.y();
    let d2 = dx * dx + dy * dy;
    let den = (1.0 - z.x() * z.x() - z.y() * z.y()) * (1.0 - w.x() * w.x() - w.y() * w.y());
    flt::acosh(1.0 + 2.0 * d2 / den)
}

/// Signed arclength coordinate of the orthogonal projection of `z` onto `g`
/// (the projection foot is `g.point_at` of this value).
pub fn geodesic_position(z: DiskPoint, g: &Geodesic) -> f64 {
    let w = g.frame().apply_half(disk_to_half(z));
    flt::ln(w.norm())
}

/// Signed distance from `z` to `g`: positive on the right of the oriented
/// geodesic. Together with `geodesic_position` these are Fermi coordinates.
pub fn geodesic_offset(z: DiskPoint, g: &Geodesic) -> f64 {
    let w = g.frame().apply_half(disk_to_half(z));
    flt::asinh(w.re / w.im)
}

/// Fermi coordinates (position along, signed offset from) `g`.
pub fn fermi_coordinates(z: DiskPoint, g: &Geodesic) -> (f64, f64) {
    let w = g.frame().apply_half(disk_to_half(z));
    (flt::ln(w.norm()), flt::asinh(w.re / w.im))
}

/// Inverse of `fermi_coordinates`.
pub fn from_fermi(g: &Geodesic, t: f64, s: f64) -> DiskPoint {
    let ch = flt::cosh(s);
    let w = Complex64::new(flt::exp(t) * flt::tanh(s), flt::exp(t) / ch);
    let img = half_to_disk(g.frame().inverse().apply_half(w));
    DiskPoint::from_complex_clamped(img)
}

/// Orthogonal projection onto a geodesic, computed in the frame where the
/// geodesic is a diameter. The foot is clamped into the precision margin.
pub fn project_onto_geodesic(z: DiskPoint, g: &Geodesic) -> DiskPoint {
    let t = geodesic_position(z, g);
    g.point_at(t)
}

/// Relative position of two geodesics on the boundary circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interleaving {
    /// Endpoints interleave as (a1, a2, b1, b2) counterclockwise.
    CrossPositive,
    /// Endpoints interleave as (a1, b2, b1, a2) counterclockwise.
    CrossNegative,
    Disjoint,
    SharedEndpoint,
}

impl Interleaving {
    pub fn crosses(&self) -> bool {
        matches!(self, Interleaving::CrossPositive | Interleaving::CrossNegative)
    }
}

/// Boundary test for transverse intersection of two geodesics.
pub fn boundary_interleave(g1: &Geodesic, g2: &Geodesic) -> Interleaving {
    let (a1, b1) = (g1.a.angle(), g1.b.angle());
    let (a2, b2) = (g2.a.angle(), g2.b.angle());
    for u in [a1, b1] {
        for v in [a2, b2] {
            if flt::circular_distance(u, v) <= EPS_BOUNDARY {
                return Interleaving::SharedEndpoint;
            }
        }
    }
    let arc = flt::ccw_gap(a1, b1);
    let in_arc = |x: f64| flt::ccw_gap(a1, x) < arc;
    match (in_arc(a2), in_arc(b2)) {
        (true, false) => Interleaving::CrossPositive,
        (false, true) => Interleaving::CrossNegative,
        _ => Interleaving::Disjoint,
    }
}

/// Endpoints of the geodesic through two distinct interior points, oriented
/// from `z` to `w`.
pub fn geodesic_through(z: DiskPoint, w: DiskPoint) -> Result<Geodesic, HypError> {
    let wz = disk_to_half(z);
    let ww = disk_to_half(w);
    if (wz - ww).norm() < 1e-15 {
        return Err(HypError::DegenerateGeodesic);
    }
    let (p, q) = half_geodesic_endpoints(wz, ww)?;
    let a = BoundaryPoint::from_homogeneous(p[0], p[1]);
    let b = BoundaryPoint::from_homogeneous(q[0], q[1]);
    Geodesic::new(a, b)
}

/// Endpoint homogeneous coordinates on RP¹ of the half-plane geodesic
/// through two points, ordered along the direction of travel.
fn half_geodesic_endpoints(w1: Complex64, w2: Complex64) -> Result<([f64; 2], [f64; 2]), HypError> {
    let dx = w1.re - w2.re;
    if flt::abs(dx) < 1e-13 * (1.0 + w1.norm() + w2.norm()) {
        // Vertical line x = const.
        return if w2.im > w1.im {
            Ok(([w1.re, 1.0], [1.0, 0.0]))
        } else {
            Ok(([1.0, 0.0], [w1.re, 1.0]))
        };
    }
    let x0 = (w1.norm_sqr() - w2.norm_sqr()) / (2.0 * dx);
    let r = (w1 - Complex64::new(x0, 0.0)).norm();
    let ang1 = flt::atan2(w1.im, w1.re - x0);
    let ang2 = flt::atan2(w2.im, w2.re - x0);
    if ang1 > ang2 {
        Ok(([x0 - r, 1.0], [x0 + r, 1.0]))
    } else {
        Ok(([x0 + r, 1.0], [x0 - r, 1.0]))
    }
}

/// Point at fraction `frac` of the geodesic segment from `z` to `w`.
pub fn segment_point(z: DiskPoint, w: DiskPoint, frac: f64) -> Result<DiskPoint, HypError> {
    let g = geodesic_through(z, w)?;
    let tz = geodesic_position(z, &g);
    let tw = geodesic_position(w, &g);
    Ok(g.point_at(tz + (tw - tz) * frac))
}

/// The unique orientation-preserving isometry sending the ordered pair
/// (p, q) to (p2, q2); requires d(p,q) = d(p2,q2) for an exact match of the
/// second point, otherwise the image of q lands on the ray at the original
/// distance.
pub fn isometry_mapping(
    p: DiskPoint,
    q: DiskPoint,
    p2: DiskPoint,
    q2: DiskPoint,
) -> Result<MobiusTransform, HypError> {
    let f1 = pair_frame(p, q)?;
    let f2 = pair_frame(p2, q2)?;
    Ok(f2.inverse().compose(&f1))
}

/// Frame sending p ↦ i and q to i·e^{d(p,q)} in the half-plane picture.
fn pair_frame(p: DiskPoint, q: DiskPoint) -> Result<MobiusTransform, HypError> {
    let g = geodesic_through(p, q)?;
    let n = g.frame();
    let u = n.apply_half(disk_to_half(p)).norm();
    let s = flt::sqrt(u);
    let scale = MobiusTransform::from_matrix([1.0 / s, 0.0, 0.0, s])?;
    Ok(scale.compose(&n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dp(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    #[test]
    fn identity_fixes_points() {
        let z = dp(0.3, 0.1);
        let m = MobiusTransform::identity();
        let w = m.apply(z).unwrap();
        assert!((w.x() - 0.3).abs() < 1e-15 && (w.y() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn boundary_roundtrip() {
        for k in 0..32 {
            let a = 0.1 + (k as f64) * 0.19;
            let p = BoundaryPoint::new(a);
            let [x, y] = p.homogeneous();
            let q = BoundaryPoint::from_homogeneous(x, y);
            assert!(p.distance(&q) < 1e-12);
        }
    }

    #[test]
    fn dilation_moves_origin_by_two() {
        // Half-plane dilation by e² along the standard diameter.
        let e = flt::exp(1.0);
        let m = MobiusTransform::from_matrix([e, 0.0, 0.0, 1.0 / e]).unwrap();
        let img = m.apply(DiskPoint::origin()).unwrap();
        let d = hyp_distance(DiskPoint::origin(), img);
        assert!((d - 2.0).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn classify_rotation_is_elliptic() {
        // Rotation by π/3 about the origin: half-plane rotation matrix about i.
        let t = core::f64::consts::PI / 6.0; // half the rotation angle
        let m = MobiusTransform::from_matrix([flt::cos(t), flt::sin(t), -flt::sin(t), flt::cos(t)]).unwrap();
        match classify(&m) {
            IsometryClass::Elliptic { center } => {
                assert!(center.norm() < 1e-12);
            }
            other => panic!("expected elliptic, got {:?}", other),
        }
    }

    #[test]
    fn classify_translation_length() {
        let l = 1.0_f64;
        let m = MobiusTransform::from_matrix([flt::exp(l / 2.0) * 1.0, 0.0, 0.0, flt::exp(-l / 2.0)]).unwrap();
        match classify(&m) {
            IsometryClass::Hyperbolic { length, axis } => {
                assert!((length - 1.0).abs() < 1e-12);
                // Axis is the standard diameter: endpoints at π and 0.
                assert!(axis.start().distance(&BoundaryPoint::new(core::f64::consts::PI)) < 1e-9);
                assert!(axis.end().distance(&BoundaryPoint::new(0.0)) < 1e-9);
            }
            other => panic!("expected hyperbolic, got {:?}", other),
        }
    }

    #[test]
    fn interleave_quadrants() {
        let pi = core::f64::consts::PI;
        let g1 = Geodesic::from_angles(0.0, pi).unwrap();
        let g2 = Geodesic::from_angles(pi / 2.0, 3.0 * pi / 2.0).unwrap();
        assert_eq!(boundary_interleave(&g1, &g2), Interleaving::CrossPositive);
        let g3 = Geodesic::from_angles(0.0, pi / 2.0).unwrap();
        let g4 = Geodesic::from_angles(pi, 3.0 * pi / 2.0).unwrap();
        assert_eq!(boundary_interleave(&g3, &g4), Interleaving::Disjoint);
        assert_eq!(boundary_interleave(&g1, &g1), Interleaving::SharedEndpoint);
    }

    #[test]
    fn projection_on_geodesic_is_fixed() {
        let g = Geodesic::from_angles(0.7, 2.9).unwrap();
        let z = g.point_at(0.4);
        let p = project_onto_geodesic(z, &g);
        assert!(hyp_distance(z, p) < 1e-9);
        // Origin projects to itself on any diameter.
        let diam = Geodesic::from_angles(1.0, 1.0 + core::f64::consts::PI).unwrap();
        let q = project_onto_geodesic(DiskPoint::origin(), &diam);
        assert!(q.norm() < 1e-12);
    }

    #[test]
    fn fermi_roundtrip() {
        let g = Geodesic::from_angles(0.3, 4.0).unwrap();
        let z = from_fermi(&g, 0.8, -0.5);
        let (t, s) = fermi_coordinates(z, &g);
        assert!((t - 0.8).abs() < 1e-10 && (s + 0.5).abs() < 1e-10);
    }

    #[test]
    fn isometry_mapping_matches_pairs() {
        let p = dp(0.1, 0.2);
        let q = dp(-0.3, 0.4);
        let p2 = dp(0.5, -0.1);
        // Transport q by the same distance from p2 in some direction.
        let d = hyp_distance(p, q);
        let g = geodesic_through(p2, dp(-0.2, -0.6)).unwrap();
        let t0 = geodesic_position(p2, &g);
        let q2 = g.point_at(t0 + d);
        let m = isometry_mapping(p, q, p2, q2).unwrap();
        assert!(hyp_distance(m.apply(p).unwrap(), p2) < 1e-9);
        assert!(hyp_distance(m.apply(q).unwrap(), q2) < 1e-9);
    }
}
