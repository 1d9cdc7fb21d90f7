//! Markovian rectangle intersections, certificate chaining, fixed-point
//! search, rotational-horseshoe certificates and the full-shift symbolic
//! model.
//!
//! All topology here is piecewise linear: rectangles are simple closed
//! polylines with four marked corners. The Markov conditions are decided
//! combinatorially from the boundary crossing pattern — the crossing
//! polyline may pass beyond the target's horizontal sides and back, but
//! never through its vertical sides, never with an excursion connecting
//! bottom to top outside the target, and never encircling the target. This
//! matches the straightened picture in which the first rectangle's image
//! lives in the strip below/inside/above the unit square.

use crate::dynamics::{DynamicsError, LiftedSystem};
use crate::flt;
use crate::group::{GroupError, GroupWord, LocatedPoint, SurfaceGroup};
use crate::hyperbolic::{DiskPoint, HypError, MobiusTransform};
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigUint;

/// Geometric tolerance: features closer than this (without crossing) make
/// the position ambiguous and callers should perturb.
pub const EPS_GEOM: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HorseshoeError {
    /// Not a valid marked rectangle (too few vertices, bad corners,
    /// self-crossing boundary).
    InvalidRectangle,
    /// Tangency or near-tangency: perturb by EPS_GEOM and retry.
    AmbiguousPosition,
    /// Polyline refinement could not resolve the image geometry.
    ResolutionTooCoarse,
    /// Certificates passed to `chain` do not share the middle rectangle.
    MiddleMismatch,
    /// The self-map is not Markovian, so no fixed point is guaranteed.
    NotMarkovian,
    Group(GroupError),
    Dynamics(DynamicsError),
}

impl From<GroupError> for HorseshoeError {
    fn from(e: GroupError) -> Self {
        HorseshoeError::Group(e)
    }
}

impl From<HypError> for HorseshoeError {
    fn from(e: HypError) -> Self {
        HorseshoeError::Group(GroupError::Hyp(e))
    }
}

impl From<DynamicsError> for HorseshoeError {
    fn from(e: DynamicsError) -> Self {
        HorseshoeError::Dynamics(e)
    }
}

impl fmt::Display for HorseshoeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HorseshoeError::InvalidRectangle => write!(f, "not a valid marked rectangle"),
            HorseshoeError::AmbiguousPosition => write!(f, "degenerate tangency; perturb and retry"),
            HorseshoeError::ResolutionTooCoarse => write!(f, "polyline resolution too coarse"),
            HorseshoeError::MiddleMismatch => write!(f, "chained certificates do not share the middle rectangle"),
            HorseshoeError::NotMarkovian => write!(f, "self-map is not Markovian on the rectangle"),
            HorseshoeError::Group(e) => write!(f, "{e}"),
            HorseshoeError::Dynamics(e) => write!(f, "{e}"),
        }
    }
}

pub type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist(a: P2, b: P2) -> f64 {
    flt::hypot(a[0] - b[0], a[1] - b[1])
}

fn seg_point_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / l2;
    let t = t.clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Proper transversal intersection of two segments, with parameters.
fn seg_intersect(a: P2, b: P2, c: P2, d: P2) -> Option<(f64, f64, P2)> {
    let r = sub(b, a);
    let s = sub(d, c);
    let denom = cross(r, s);
    if flt::abs(denom) < 1e-14 {
        return None;
    }
    let qp = sub(c, a);
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    if t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0 {
        Some((t, u, [a[0] + t * r[0], a[1] + t * r[1]]))
    } else {
        None
    }
}

/// Winding-number point-in-polygon (vertices of a closed polyline).
pub fn point_in_polygon(p: P2, poly: &[P2]) -> bool {
    let mut winding = 0i32;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if a[1] <= p[1] {
            if b[1] > p[1] && cross(sub(b, a), sub(p, a)) > 0.0 {
                winding += 1;
            }
        } else if b[1] <= p[1] && cross(sub(b, a), sub(p, a)) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// A topological rectangle: simple closed polyline with 4 marked corners.
/// Sides in corner order: bottom (R⁻), right, top (R⁺), left.
#[derive(Clone, Debug)]
pub struct MarkedRectangle {
    vertices: Vec<P2>,
    corners: [usize; 4],
}

/// Which side of a rectangle, in marked order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RectSide {
    Bottom,
    Right,
    Top,
    Left,
}

impl MarkedRectangle {
    pub fn new(vertices: Vec<P2>, corners: [usize; 4]) -> Result<Self, HorseshoeError> {
        let n = vertices.len();
        if n < 4 || corners.iter().any(|c| *c >= n) {
            return Err(HorseshoeError::InvalidRectangle);
        }
        for k in 0..4 {
            if corners[(k + 1) % 4] == corners[k] {
                return Err(HorseshoeError::InvalidRectangle);
            }
        }
        // Corners must appear in cyclic order along the boundary.
        let mut sorted = corners;
        sorted.rotate_left(
            corners
                .iter()
                .enumerate()
                .min_by_key(|(_, c)| **c)
                .map(|(i, _)| i)
                .unwrap_or(0),
        );
        if !(sorted[0] < sorted[1] && sorted[1] < sorted[2] && sorted[2] < sorted[3]) {
            return Err(HorseshoeError::InvalidRectangle);
        }
        let rect = MarkedRectangle { vertices, corners };
        rect.check_simple()?;
        Ok(rect)
    }

    /// Axis-aligned rectangle fixture with `sub` points per side.
    pub fn axis_aligned(x0: f64, y0: f64, x1: f64, y1: f64, sub: usize) -> Self {
        let mut vertices = Vec::new();
        let mut corners = [0usize; 4];
        let sides = [
            ([x0, y0], [x1, y0]),
            ([x1, y0], [x1, y1]),
            ([x1, y1], [x0, y1]),
            ([x0, y1], [x0, y0]),
        ];
        for (k, (a, b)) in sides.iter().enumerate() {
            corners[k] = vertices.len();
            for j in 0..sub.max(1) {
                let t = j as f64 / sub.max(1) as f64;
                vertices.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        MarkedRectangle { vertices, corners }
    }

    pub fn vertices(&self) -> &[P2] {
        &self.vertices
    }

    pub fn corners(&self) -> [usize; 4] {
        self.corners
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.vertices.len() {
            for j in i + 1..self.vertices.len() {
                d = d.max(dist(self.vertices[i], self.vertices[j]));
            }
        }
        d
    }

    fn check_simple(&self) -> Result<(), HorseshoeError> {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            for j in i + 1..n {
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let c = self.vertices[j];
                let d = self.vertices[(j + 1) % n];
                if seg_intersect(a, b, c, d).is_some() {
                    return Err(HorseshoeError::InvalidRectangle);
                }
                let gap = seg_seg_distance(a, b, c, d);
                if gap < EPS_GEOM {
                    return Err(HorseshoeError::AmbiguousPosition);
                }
            }
        }
        Ok(())
    }

    /// Side of the boundary containing global vertex-edge index `e`
    /// (edge e runs from vertex e to e+1).
    fn side_of_edge(&self, e: usize) -> RectSide {
        let n = self.vertices.len();
        let [c0, c1, c2, c3] = self.corners;
        let in_arc = |start: usize, end: usize, e: usize| -> bool {
            // Edge e belongs to arc [start, end) cyclically.
            let rel = (e + n - start) % n;
            let len = (end + n - start) % n;
            rel < len
        };
        if in_arc(c0, c1, e) {
            RectSide::Bottom
        } else if in_arc(c1, c2, e) {
            RectSide::Right
        } else if in_arc(c2, c3, e) {
            RectSide::Top
        } else {
            RectSide::Left
        }
    }

    /// Indices of the edges of one side.
    fn side_edges(&self, side: RectSide) -> Vec<usize> {
        let n = self.vertices.len();
        (0..n).filter(|e| self.side_of_edge(*e) == side).collect()
    }

    /// A point in the middle of a side.
    fn side_midpoint(&self, side: RectSide) -> P2 {
        let edges = self.side_edges(side);
        let e = edges[edges.len() / 2];
        let a = self.vertices[e];
        let b = self.vertices[(e + 1) % self.vertices.len()];
        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
    }

    /// Map vertices through a plane map, preserving corner marks.
    pub fn mapped(&self, f: &dyn Fn(P2) -> P2) -> MarkedRectangle {
        MarkedRectangle {
            vertices: self.vertices.iter().map(|p| f(*p)).collect(),
            corners: self.corners,
        }
    }

    /// Refine by splitting every edge into `k` pieces.
    pub fn refined(&self, k: usize) -> MarkedRectangle {
        if k <= 1 {
            return self.clone();
        }
        let n = self.vertices.len();
        let mut vertices = Vec::with_capacity(n * k);
        let mut corners = [0usize; 4];
        for e in 0..n {
            if let Some(slot) = self.corners.iter().position(|c| *c == e) {
                corners[slot] = vertices.len();
            }
            let a = self.vertices[e];
            let b = self.vertices[(e + 1) % n];
            for j in 0..k {
                let t = j as f64 / k as f64;
                vertices.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        MarkedRectangle { vertices, corners }
    }
}

fn seg_seg_distance(a: P2, b: P2, c: P2, d: P2) -> f64 {
    seg_point_distance(a, c, d)
        .min(seg_point_distance(b, c, d))
        .min(seg_point_distance(c, a, b))
        .min(seg_point_distance(d, a, b))
}

/// Which of the two allowed dispositions the certificate asserts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disposition {
    /// R1⁻ below the straightened square, R1⁺ above.
    Normal,
    /// R1⁻ above, R1⁺ below.
    Flipped,
}

/// Boundary part of the straightening: cumulative arclength fractions of
/// R2's side polylines, which pin the PL map of ∂R2 onto the unit square.
#[derive(Clone, Debug)]
pub struct Straightening {
    pub side_params: [Vec<f64>; 4],
}

fn straightening_of(r2: &MarkedRectangle) -> Straightening {
    let mut side_params: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (k, side) in [RectSide::Bottom, RectSide::Right, RectSide::Top, RectSide::Left]
        .iter()
        .enumerate()
    {
        let edges = r2.side_edges(*side);
        let n = r2.vertices().len();
        let mut acc = alloc::vec![0.0f64];
        let mut total = 0.0;
        for e in &edges {
            let a = r2.vertices()[*e];
            let b = r2.vertices()[(*e + 1) % n];
            total += dist(a, b);
            acc.push(total);
        }
        if total > 0.0 {
            for v in acc.iter_mut() {
                *v /= total;
            }
        }
        side_params[k] = acc;
    }
    Straightening { side_params }
}

/// A verified Markovian intersection of rect1 across rect2.
#[derive(Clone, Debug)]
pub struct MarkovCertificate {
    pub rect1: MarkedRectangle,
    pub rect2: MarkedRectangle,
    pub disposition: Disposition,
    pub chart: Straightening,
}

/// One boundary crossing of ∂R1 with ∂R2.
#[derive(Clone, Copy, Debug)]
struct Crossing {
    /// Position along ∂R1: edge index + fraction.
    r1_pos: f64,
    r1_side: RectSide,
    r2_side: RectSide,
    point: P2,
}

/// Decide the Markov conditions for the ordered pair (R1, R2).
pub fn markovian_check(
    r1: &MarkedRectangle,
    r2: &MarkedRectangle,
) -> Result<Option<MarkovCertificate>, HorseshoeError> {
    r1.check_simple()?;
    r2.check_simple()?;
    let n1 = r1.vertices().len();
    let n2 = r2.vertices().len();

    // Collect boundary crossings.
    let mut crossings: Vec<Crossing> = Vec::new();
    for e1 in 0..n1 {
        let a = r1.vertices()[e1];
        let b = r1.vertices()[(e1 + 1) % n1];
        for e2 in 0..n2 {
            let c = r2.vertices()[e2];
            let d = r2.vertices()[(e2 + 1) % n2];
            match seg_intersect(a, b, c, d) {
                Some((t, u, p)) => {
                    // Near an endpoint of either segment: ambiguous.
                    let el1 = dist(a, b);
                    let el2 = dist(c, d);
                    if t * el1 < EPS_GEOM
                        || (1.0 - t) * el1 < EPS_GEOM
                        || u * el2 < EPS_GEOM
                        || (1.0 - u) * el2 < EPS_GEOM
                    {
                        return Err(HorseshoeError::AmbiguousPosition);
                    }
                    crossings.push(Crossing {
                        r1_pos: e1 as f64 + t,
                        r1_side: r1.side_of_edge(e1),
                        r2_side: r2.side_of_edge(e2),
                        point: p,
                    });
                }
                None => {
                    let gap = seg_seg_distance(a, b, c, d);
                    if gap < EPS_GEOM {
                        return Err(HorseshoeError::AmbiguousPosition);
                    }
                }
            }
        }
    }

    if crossings.is_empty() {
        return Ok(None);
    }
    // No crossings through R2's vertical sides.
    if crossings
        .iter()
        .any(|c| matches!(c.r2_side, RectSide::Left | RectSide::Right))
    {
        return Ok(None);
    }
    // R1's horizontal sides stay strictly outside R2.
    for side in [RectSide::Bottom, RectSide::Top] {
        if crossings.iter().any(|c| c.r1_side == side) {
            return Ok(None);
        }
    }
    // R2's corners must not lie inside R1 (the vertical sides would then
    // meet the region R1).
    for c in r2.corners() {
        if point_in_polygon(r2.vertices()[c], r1.vertices()) {
            return Ok(None);
        }
    }

    // Order crossings along ∂R1 and classify the arcs between them.
    crossings.sort_by(|x, y| x.r1_pos.partial_cmp(&y.r1_pos).unwrap());
    let m = crossings.len();
    if m % 2 != 0 {
        return Err(HorseshoeError::AmbiguousPosition);
    }
    // Arc k runs from crossing k to crossing k+1 (cyclically).
    let arc_midpoint_inside = |k: usize| -> bool {
        let p0 = crossings[k].r1_pos;
        let p1 = if k + 1 < m { crossings[k + 1].r1_pos } else { crossings[0].r1_pos + n1 as f64 };
        let mid = (p0 + p1) / 2.0 % n1 as f64;
        let e = mid as usize;
        let t = mid - e as f64;
        let a = r1.vertices()[e % n1];
        let b = r1.vertices()[(e + 1) % n1];
        point_in_polygon([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], r2.vertices())
    };

    // Zone of each outside arc: labels of its bounding crossings must agree
    // (no bottom-to-top excursions outside the square).
    let mut bottom_zone_of_r1minus: Option<bool> = None;
    for k in 0..m {
        let inside = arc_midpoint_inside(k);
        let lab0 = crossings[k].r2_side;
        let lab1 = crossings[(k + 1) % m].r2_side;
        if inside {
            continue;
        }
        if lab0 != lab1 {
            return Ok(None);
        }
        // Encirclement: close the arc with the portion of ∂R2 on its label
        // side and test whether the loop swallows the opposite side of R2.
        let opposite = match lab0 {
            RectSide::Bottom => r2.side_midpoint(RectSide::Top),
            _ => r2.side_midpoint(RectSide::Bottom),
        };
        let loop_poly = arc_polygon(r1, &crossings, k, n1);
        if point_in_polygon(opposite, &loop_poly) {
            return Ok(None);
        }
        // Does this arc contain R1⁻ or R1⁺?
        for (hside, is_minus) in [(RectSide::Bottom, true), (RectSide::Top, false)] {
            if arc_contains_side(r1, &crossings, k, n1, hside) {
                let at_bottom = lab0 == RectSide::Bottom;
                match (is_minus, &mut bottom_zone_of_r1minus) {
                    (true, slot) => {
                        if slot.map(|v| v != at_bottom).unwrap_or(false) {
                            return Ok(None);
                        }
                        *slot = Some(at_bottom);
                    }
                    (false, slot) => {
                        // R1⁺ must be in the opposite zone of R1⁻.
                        if slot.map(|v| v == at_bottom).unwrap_or(false) {
                            return Ok(None);
                        }
                        if slot.is_none() {
                            *slot = Some(!at_bottom);
                        }
                    }
                }
            }
        }
    }

    let disposition = match bottom_zone_of_r1minus {
        Some(true) => Disposition::Normal,
        Some(false) => Disposition::Flipped,
        // Horizontal sides of R1 never adjacent to a crossing arc means R1
        // does not run through R2 at all.
        None => return Ok(None),
    };

    // Finally both horizontal sides must be outside R2 (sample midpoints;
    // crossings on them were already excluded).
    for side in [RectSide::Bottom, RectSide::Top] {
        if point_in_polygon(r1.side_midpoint(side), r2.vertices()) {
            return Ok(None);
        }
    }

    Ok(Some(MarkovCertificate {
        rect1: r1.clone(),
        rect2: r2.clone(),
        disposition,
        chart: straightening_of(r2),
    }))
}

/// Closed polygon made of the outside arc k of ∂R1 and the chord returning
/// through the crossing points.
fn arc_polygon(r1: &MarkedRectangle, crossings: &[Crossing], k: usize, n1: usize) -> Vec<P2> {
    let m = crossings.len();
    let start = crossings[k];
    let end = crossings[(k + 1) % m];
    let mut poly = alloc::vec![start.point];
    let mut pos = start.r1_pos;
    let end_pos = if (k + 1) % m == 0 || end.r1_pos > start.r1_pos {
        end.r1_pos
    } else {
        end.r1_pos + n1 as f64
    };
    // Walk vertices of ∂R1 strictly between the two crossings.
    let mut v = flt::ceil(pos) as usize;
    while (v as f64) < end_pos {
        poly.push(r1.vertices()[v % n1]);
        v += 1;
        pos = v as f64;
    }
    let _ = pos;
    poly.push(end.point);
    poly
}

/// Does the outside arc k of ∂R1 contain the marked horizontal side?
fn arc_contains_side(
    r1: &MarkedRectangle,
    crossings: &[Crossing],
    k: usize,
    n1: usize,
    side: RectSide,
) -> bool {
    let m = crossings.len();
    let start = crossings[k].r1_pos;
    let mut end = crossings[(k + 1) % m].r1_pos;
    if end <= start {
        end += n1 as f64;
    }
    let edges = r1.side_edges(side);
    // The side is inside the arc iff its middle edge parameter falls in
    // (start, end) cyclically.
    let e = edges[edges.len() / 2] as f64 + 0.5;
    let e_shift = if e < start { e + n1 as f64 } else { e };
    e_shift > start && e_shift < end
}

/// Chain two certificates through the map: given certificates for
/// f(R1) ∩ R2 and f(R2) ∩ R3, certify f²(R1) ∩ R3.
pub fn chain(
    c12: &MarkovCertificate,
    c23: &MarkovCertificate,
    f: &dyn Fn(P2) -> P2,
    refine: usize,
) -> Result<MarkovCertificate, HorseshoeError> {
    // Middle consistency: f applied to the corners of c12's target must
    // land on c23's crossing rectangle corners.
    let r2 = &c12.rect2;
    let fr2 = &c23.rect1;
    for (ca, cb) in r2.corners().iter().zip(fr2.corners().iter()) {
        let img = f(r2.vertices()[*ca]);
        let target = fr2.vertices()[*cb];
        if dist(img, target) > 1e-6 {
            return Err(HorseshoeError::MiddleMismatch);
        }
    }
    // f²(R1) as a refined polyline image of the stored f(R1).
    let image = c12.rect1.refined(refine.max(1)).mapped(f);
    match markovian_check(&image, &c23.rect2) {
        Ok(Some(cert)) => Ok(cert),
        Ok(None) => Err(HorseshoeError::ResolutionTooCoarse),
        Err(HorseshoeError::AmbiguousPosition) => Err(HorseshoeError::ResolutionTooCoarse),
        Err(e) => Err(e),
    }
}

/// Fixed point of a plane map on a rectangle with Markovian self-
/// intersection: degree-counting bisection on the displacement field, with
/// a pattern-search fallback for degree-zero windows.
pub fn fixed_point_search(
    rect: &MarkedRectangle,
    f: &dyn Fn(P2) -> P2,
    budget: usize,
) -> Option<P2> {
    let verts = rect.vertices();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for v in verts {
        x0 = x0.min(v[0]);
        y0 = y0.min(v[1]);
        x1 = x1.max(v[0]);
        y1 = y1.max(v[1]);
    }
    let disp = |p: P2| -> P2 {
        let q = f(p);
        [q[0] - p[0], q[1] - p[1]]
    };
    let mut evals = 0usize;
    // Degree of the displacement field along a box boundary.
    let degree = |bx0: f64, by0: f64, bx1: f64, by1: f64, evals: &mut usize| -> Option<i32> {
        let per_side = 24;
        let mut pts = Vec::with_capacity(4 * per_side);
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            pts.push([bx0 + t * (bx1 - bx0), by0]);
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            pts.push([bx1, by0 + t * (by1 - by0)]);
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            pts.push([bx1 - t * (bx1 - bx0), by1]);
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            pts.push([bx0, by1 - t * (by1 - by0)]);
        }
        let mut total = 0.0f64;
        let mut prev: Option<f64> = None;
        let mut first = 0.0f64;
        for p in &pts {
            *evals += 1;
            let d = disp(*p);
            let norm = flt::hypot(d[0], d[1]);
            if norm < 1e-13 {
                return None;
            }
            let ang = flt::atan2(d[1], d[0]);
            if let Some(pa) = prev {
                let mut da = ang - pa;
                while da > core::f64::consts::PI {
                    da -= flt::TAU;
                }
                while da < -core::f64::consts::PI {
                    da += flt::TAU;
                }
                total += da;
            } else {
                first = ang;
            }
            prev = Some(ang);
        }
        if let Some(pa) = prev {
            let mut da = first - pa;
            while da > core::f64::consts::PI {
                da -= flt::TAU;
            }
            while da < -core::f64::consts::PI {
                da += flt::TAU;
            }
            total += da;
        }
        Some(flt::round(total / flt::TAU) as i32)
    };

    let mut stack = alloc::vec![(x0, y0, x1, y1)];
    while let Some((bx0, by0, bx1, by1)) = stack.pop() {
        if evals > budget {
            break;
        }
        let cx = 0.5 * (bx0 + bx1);
        let cy = 0.5 * (by0 + by1);
        let d = disp([cx, cy]);
        if flt::hypot(d[0], d[1]) < 1e-7 {
            return Some([cx, cy]);
        }
        if (bx1 - bx0).max(by1 - by0) < 1e-9 {
            continue;
        }
        match degree(bx0, by0, bx1, by1, &mut evals) {
            Some(deg) if deg != 0 => {
                // Recurse into the children; order children by center
                // displacement so the promising one is explored first.
                let mut children = [
                    (bx0, by0, cx, cy),
                    (cx, by0, bx1, cy),
                    (bx0, cy, cx, by1),
                    (cx, cy, bx1, by1),
                ];
                children.sort_by(|a, b| {
                    let da = disp([(a.0 + a.2) / 2.0, (a.1 + a.3) / 2.0]);
                    let db = disp([(b.0 + b.2) / 2.0, (b.1 + b.3) / 2.0]);
                    flt::hypot(db[0], db[1]).partial_cmp(&flt::hypot(da[0], da[1])).unwrap()
                });
                for ch in children {
                    stack.push(ch);
                }
            }
            _ => {}
        }
    }

    // Pattern-search fallback from the best grid point.
    let grid = 24;
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..=grid {
        for j in 0..=grid {
            let p = [
                x0 + (x1 - x0) * i as f64 / grid as f64,
                y0 + (y1 - y0) * j as f64 / grid as f64,
            ];
            if !point_in_polygon(p, verts) {
                continue;
            }
            let d = disp(p);
            let r = flt::hypot(d[0], d[1]);
            if r < best.1 {
                best = (p, r);
            }
        }
    }
    let mut center = best.0;
    let mut r_best = best.1;
    let mut h = (x1 - x0).max(y1 - y0) / grid as f64;
    while h > 1e-13 && r_best > 1e-7 {
        let mut improved = false;
        for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let cand = [center[0] + dx, center[1] + dy];
            let d = disp(cand);
            let r = flt::hypot(d[0], d[1]);
            if r < r_best {
                center = cand;
                r_best = r;
                improved = true;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    if r_best < 1e-6 {
        Some(center)
    } else {
        None
    }
}

/// A rotational-horseshoe certificate: a disk-chart rectangle whose image
/// crosses the listed deck translates Markovianly.
#[derive(Clone, Debug)]
pub struct HorseshoeCertificate {
    pub rect: MarkedRectangle,
    pub decks: Vec<GroupWord>,
    pub certificates: Vec<MarkovCertificate>,
}

impl HorseshoeCertificate {
    pub fn alphabet_size(&self) -> usize {
        self.decks.len()
    }

    /// Build and verify: for each deck word U, certify U·R ∩ f̃(R).
    pub fn verify(
        group: &SurfaceGroup,
        system: &dyn LiftedSystem,
        rect: MarkedRectangle,
        decks: Vec<GroupWord>,
        refine: usize,
    ) -> Result<Self, HorseshoeError> {
        let image = map_rect_through_system(system, &rect, refine)?;
        let mut certificates = Vec::with_capacity(decks.len());
        for w in &decks {
            let m = group.evaluate(w);
            let translated = map_rect_through_mobius(&m, &rect, refine)?;
            match markovian_check(&translated, &image)? {
                Some(cert) => certificates.push(cert),
                None => return Err(HorseshoeError::NotMarkovian),
            }
        }
        Ok(HorseshoeCertificate { rect, decks, certificates })
    }
}

/// Image of a rectangle polyline under a system's raw step (disk chart).
pub fn map_rect_through_system(
    system: &dyn LiftedSystem,
    rect: &MarkedRectangle,
    refine: usize,
) -> Result<MarkedRectangle, HorseshoeError> {
    let refined = rect.refined(refine.max(1));
    let mut out = Vec::with_capacity(refined.vertices().len());
    for p in refined.vertices() {
        let z = DiskPoint::new(p[0], p[1]).map_err(HorseshoeError::from)?;
        let img = system.raw_step(z)?;
        out.push([img.x(), img.y()]);
    }
    MarkedRectangle::new(out, refined.corners())
}

fn map_rect_through_mobius(
    m: &MobiusTransform,
    rect: &MarkedRectangle,
    refine: usize,
) -> Result<MarkedRectangle, HorseshoeError> {
    let refined = rect.refined(refine.max(1));
    let mut out = Vec::with_capacity(refined.vertices().len());
    for p in refined.vertices() {
        let z = DiskPoint::new(p[0], p[1]).map_err(HorseshoeError::from)?;
        let img = m.apply(z).map_err(HorseshoeError::from)?;
        out.push([img.x(), img.y()]);
    }
    MarkedRectangle::new(out, refined.corners())
}

/// Result of auditing one periodic itinerary.
#[derive(Clone, Debug)]
pub struct ItineraryResult {
    pub word: Vec<usize>,
    pub point: Option<LocatedPoint>,
    pub residual: f64,
}

/// Report of the horseshoe audit.
#[derive(Clone, Debug)]
pub struct HorseshoeAuditReport {
    pub itineraries: Vec<ItineraryResult>,
    /// Max over checked iterates of d(f̃^i x̃, U_{w_i}…U_{w_0} x̃) on the
    /// audited periodic points, to compare with diam(R).
    pub shadowing_max: f64,
    pub shadowing_bound: f64,
    pub entropy_lower: f64,
    pub entropy_symbolic: f64,
    pub separated_count: BigUint,
    pub separated_steps: usize,
}

impl HorseshoeAuditReport {
    pub fn all_itineraries_realized(&self, tol: f64) -> bool {
        self.itineraries.iter().all(|r| r.point.is_some() && r.residual <= tol)
    }
}

/// Audit a certificate: realize every periodic itinerary of length <= n by
/// a point with the prescribed deck word, verify the shadowing bound along
/// the realized orbits, and report the symbolic entropy data.
pub fn horseshoe_audit(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    cert: &HorseshoeCertificate,
    max_period: usize,
    shadow_steps: usize,
    separated_steps: usize,
) -> Result<HorseshoeAuditReport, HorseshoeError> {
    let k = cert.alphabet_size();
    let mut itineraries = Vec::new();
    let mut shadowing_max = 0.0f64;
    let diam = cert.rect.diameter();
    // Hyperbolic diameter bound of the rectangle (chart is the disk, so
    // convert the euclidean diameter conservatively).
    let shadowing_bound = hyperbolic_diameter(&cert.rect);

    for q in 1..=max_period {
        let mut word = alloc::vec![0usize; q];
        loop {
            // Realize the itinerary: fixed point of U_w⁻¹ ∘ f̃^q on R.
            let mut u = GroupWord::identity();
            for idx in word.iter().rev() {
                u = cert.decks[*idx].concat(&u);
            }
            // As deck words act first-to-last along the orbit:
            // f̃^q(x) = U_{w_{q-1}}···U_{w_0}·x.
            let mut uw = GroupWord::identity();
            for idx in word.iter() {
                uw = cert.decks[*idx].concat(&uw);
            }
            let u_inv = group.evaluate(&uw).inverse();
            let map = |p: P2| -> P2 {
                let mut z = match DiskPoint::new(p[0], p[1]) {
                    Ok(z) => z,
                    Err(_) => return [2.0, 2.0],
                };
                for _ in 0..q {
                    match system.raw_step(z) {
                        Ok(w) => z = w,
                        Err(_) => return [2.0, 2.0],
                    }
                }
                match u_inv.apply(z) {
                    Ok(w) => [w.x(), w.y()],
                    Err(_) => [2.0, 2.0],
                }
            };
            let found = fixed_point_search(&cert.rect, &map, 200_000);
            let (point, residual) = match found {
                Some(p) => {
                    let z = DiskPoint::new(p[0], p[1]).map_err(HorseshoeError::from)?;
                    let lp = group.locate(z)?;
                    let r = periodic_itinerary_residual(group, system, &lp, &uw, q)?;
                    (Some(lp), r)
                }
                None => (None, f64::INFINITY),
            };
            // Shadowing along the realized orbit.
            if let Some(lp) = &point {
                if residual < 1e-4 {
                    let mut cur = lp.clone();
                    let mut prefix = GroupWord::identity();
                    for i in 0..shadow_steps {
                        cur = crate::dynamics::step(system, group, &cur)?;
                        prefix = cert.decks[word[i % q]].concat(&prefix);
                        let target_word = prefix.concat(&lp.word);
                        let rel = target_word.relative_word(&cur.word);
                        if rel.len() <= 64 {
                            if let Ok(img) = group.evaluate(&rel).apply(cur.rep) {
                                let d = crate::hyperbolic::hyp_distance(lp.rep, img);
                                shadowing_max = shadowing_max.max(d);
                            }
                        } else {
                            shadowing_max = f64::INFINITY;
                        }
                    }
                }
            }
            itineraries.push(ItineraryResult { word: word.clone(), point, residual });
            // Next word in base-k odometer order.
            let mut carry = true;
            for digit in word.iter_mut() {
                if carry {
                    *digit += 1;
                    if *digit == k {
                        *digit = 0;
                    } else {
                        carry = false;
                    }
                }
            }
            if carry {
                break;
            }
        }
    }
    let separated_count = shift_count(k as u64, separated_steps as u32);
    let entropy_symbolic = shift_entropy(k as u64);
    let entropy_lower = if separated_steps > 0 {
        ln_biguint(&separated_count) / separated_steps as f64
    } else {
        0.0
    };
    let _ = diam;
    Ok(HorseshoeAuditReport {
        itineraries,
        shadowing_max,
        shadowing_bound,
        entropy_lower,
        entropy_symbolic,
        separated_count,
        separated_steps,
    })
}

/// Residual d(f̃^q(x), U·x) for a candidate itinerary point.
fn periodic_itinerary_residual(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    z: &LocatedPoint,
    deck: &GroupWord,
    q: usize,
) -> Result<f64, HorseshoeError> {
    let mut cur = z.clone();
    for _ in 0..q {
        cur = crate::dynamics::step(system, group, &cur)?;
    }
    let target_word = deck.concat(&z.word);
    let rel = target_word.relative_word(&cur.word);
    let img = group.evaluate(&rel).apply(cur.rep)?;
    Ok(crate::hyperbolic::hyp_distance(z.rep, img))
}

/// Hyperbolic diameter of a disk-chart rectangle (max over vertex pairs).
fn hyperbolic_diameter(rect: &MarkedRectangle) -> f64 {
    let mut d = 0.0f64;
    let pts: Vec<DiskPoint> = rect
        .vertices()
        .iter()
        .filter_map(|p| DiskPoint::new(p[0], p[1]).ok())
        .collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(crate::hyperbolic::hyp_distance(pts[i], pts[j]));
        }
    }
    d
}

/// Number of length-n symbolic words (= periodic words of period dividing
/// n) of the full k-shift.
pub fn shift_count(k: u64, n: u32) -> BigUint {
    BigUint::from(k).pow(n)
}

/// Topological entropy of the full k-shift.
pub fn shift_entropy(k: u64) -> f64 {
    flt::ln(k as f64)
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        let v: u64 = x.iter_u64_digits().next().unwrap_or(0);
        flt::ln(v as f64)
    } else {
        // ln(x) = ln(mantissa) + (bits-53)·ln 2 from the top 53 bits.
        let shift = bits - 53;
        let top = x >> shift;
        let v: u64 = top.iter_u64_digits().next().unwrap_or(0);
        flt::ln(v as f64) + shift as f64 * core::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_crossing_certified() {
        // Tall thin rectangle through the unit square.
        let r2 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 3);
        let r1 = MarkedRectangle::axis_aligned(0.3, -0.5, 0.6, 1.5, 3);
        let cert = markovian_check(&r1, &r2).unwrap().unwrap();
        assert_eq!(cert.disposition, Disposition::Normal);
    }

    #[test]
    fn disjoint_rectangles_none() {
        let r2 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 2);
        let r1 = MarkedRectangle::axis_aligned(2.0, 0.0, 3.0, 1.0, 2);
        assert!(markovian_check(&r1, &r2).unwrap().is_none());
    }

    #[test]
    fn sideways_crossing_rejected() {
        // Crosses through the vertical sides instead.
        let r2 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 2);
        let r1 = MarkedRectangle::axis_aligned(-0.5, 0.3, 1.5, 0.6, 2);
        assert!(markovian_check(&r1, &r2).unwrap().is_none());
    }

    #[test]
    fn stopping_short_rejected() {
        // Enters through the bottom but stops inside.
        let r2 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 2);
        let r1 = MarkedRectangle::axis_aligned(0.3, -0.45, 0.6, 0.55, 3);
        assert!(markovian_check(&r1, &r2).unwrap().is_none());
    }

    #[test]
    fn flipped_disposition_detected() {
        let r2 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 2);
        // Same strip but corners marked so R1⁻ is the top side.
        let mut verts = Vec::new();
        // Build clockwise starting at upper-left so "bottom" marks the top.
        let (x0, y0, x1, y1) = (0.3f64, -0.5f64, 0.6f64, 1.5f64);
        verts.push([x0, y1]);
        verts.push([x1, y1]);
        verts.push([x1, y0]);
        verts.push([x0, y0]);
        let r1 = MarkedRectangle::new(verts, [0, 1, 2, 3]).unwrap();
        let cert = markovian_check(&r1, &r2).unwrap().unwrap();
        assert_eq!(cert.disposition, Disposition::Flipped);
    }

    #[test]
    fn fixed_point_of_contraction() {
        let r = MarkedRectangle::axis_aligned(-1.0, -1.0, 1.0, 1.0, 2);
        let f = |p: P2| -> P2 { [0.5 * p[0] + 0.1, 0.5 * p[1] - 0.2] };
        let z = fixed_point_search(&r, &f, 100_000).unwrap();
        // Fixed point solves p = 0.5p + (0.1, -0.2).
        assert!((z[0] - 0.2).abs() < 1e-6 && (z[1] + 0.4).abs() < 1e-6);
    }

    #[test]
    fn fixed_point_of_saddle() {
        let r = MarkedRectangle::axis_aligned(-1.0, -1.0, 1.0, 1.0, 2);
        let f = |p: P2| -> P2 { [0.4 * p[0] + 0.03, 2.5 * p[1] + 0.1] };
        let z = fixed_point_search(&r, &f, 100_000).unwrap();
        assert!((z[0] - 0.05).abs() < 1e-6 && (z[1] + 0.1 / 1.5).abs() < 1e-6);
    }

    #[test]
    fn shift_counting() {
        assert_eq!(shift_count(1, 10), BigUint::from(1u32));
        assert_eq!(shift_count(2, 10), BigUint::from(1024u32));
        assert!((shift_entropy(1)).abs() < 1e-15);
        // Growth rate at n = 40 recovers ln k.
        let n = 40u32;
        let c = shift_count(2, n);
        let rate = ln_biguint(&c) / n as f64;
        assert!((rate - shift_entropy(2)).abs() < 1e-12, "rate {rate}");
    }

    #[test]
    fn chain_on_linear_stack() {
        // Linear hyperbolic map pushing squares upward through each other.
        let f = |p: P2| -> P2 { [0.3 * p[0] + 0.35, 3.0 * p[1] - 1.0] };
        let r1 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 4);
        let r2 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 4);
        let r3 = MarkedRectangle::axis_aligned(0.0, 0.0, 1.0, 1.0, 4);
        let f_r1 = r1.refined(2).mapped(&f);
        let c12 = markovian_check(&f_r1, &r2).unwrap().unwrap();
        let f_r2 = r2.refined(2).mapped(&f);
        let c23 = markovian_check(&f_r2, &r3).unwrap().unwrap();
        let c13 = chain(&c12, &c23, &f, 2).unwrap();
        assert_eq!(c13.disposition, Disposition::Normal);
    }
}
