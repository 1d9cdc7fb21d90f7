//! Lifted surface dynamics: compactly supported twist and drift systems,
//! composition, and word-tracked orbit iteration.
//!
//! A system is specified by its raw action on representatives near the
//! fundamental domain. Because every built-in system commutes with all deck
//! transformations, stepping a `LocatedPoint` only touches the
//! representative; the anchoring word absorbs whatever part of the motion
//! leaves the domain. Orbits therefore escape to the boundary circle with
//! the escape recorded exactly in the word and the float coordinates always
//! staying in a bounded region.
//!
//! Twist and drift act in Fermi coordinates of a base geodesic: the
//! position along the geodesic advances by amount · bump(offset/width),
//! the offset is preserved. The support is the width-tube of the base and
//! of every deck translate of it that approaches the fundamental domain;
//! translates are enumerated at construction and checked pairwise disjoint.

use crate::flt;
use crate::geodesic::{self, GeodesicError, SelfIntersection};
use crate::group::{GroupError, GroupWord, LocatedPoint, SurfaceGroup};
use crate::hyperbolic::{
    fermi_coordinates, from_fermi, geodesic_offset, geodesic_position, hyp_distance, DiskPoint,
    Geodesic, HypError, MobiusTransform,
};
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynamicsError {
    /// Tube width collides with a neighboring translate tube.
    TubeTooWide,
    /// A twist core must be simple at the search radius.
    CoreNotSimple,
    Group(GroupError),
}

impl From<GroupError> for DynamicsError {
    fn from(e: GroupError) -> Self {
        DynamicsError::Group(e)
    }
}

impl From<HypError> for DynamicsError {
    fn from(e: HypError) -> Self {
        DynamicsError::Group(GroupError::Hyp(e))
    }
}

impl From<GeodesicError> for DynamicsError {
    fn from(e: GeodesicError) -> Self {
        match e {
            GeodesicError::Group(g) => DynamicsError::Group(g),
            GeodesicError::NotHyperbolic => DynamicsError::Group(GroupError::NotHyperbolic),
            _ => DynamicsError::Group(GroupError::NotHyperbolic),
        }
    }
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::TubeTooWide => write!(f, "tube width reaches a neighboring translate"),
            DynamicsError::CoreNotSimple => write!(f, "twist core has a self-intersection witness"),
            DynamicsError::Group(e) => write!(f, "{e}"),
        }
    }
}

/// C∞ mollifier: exp(1 − 1/(1−u²)) on |u| < 1, zero outside. bump(0) = 1.
pub fn bump(u: f64) -> f64 {
    let u2 = u * u;
    if u2 >= 1.0 {
        0.0
    } else {
        flt::exp(1.0 - 1.0 / (1.0 - u2))
    }
}

/// A lifted homeomorphism given by its raw action on representatives.
///
/// `raw_step` must commute with deck transformations on the region within
/// `eval_radius` of the origin (where representatives and their one-step
/// images live).
pub trait LiftedSystem {
    fn describe(&self) -> String;
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError>;
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError>;
    /// Uniform bound on d(z, step(z)).
    fn displacement_bound(&self) -> f64;
}

/// Step a located point: move the representative, then re-anchor.
pub fn step(
    system: &dyn LiftedSystem,
    group: &SurfaceGroup,
    p: &LocatedPoint,
) -> Result<LocatedPoint, DynamicsError> {
    let image = system.raw_step(p.rep)?;
    let anchored = group.locate(image)?;
    Ok(LocatedPoint::new(p.word.concat(&anchored.word), anchored.rep))
}

/// Inverse step with the same word bookkeeping.
pub fn inverse_step(
    system: &dyn LiftedSystem,
    group: &SurfaceGroup,
    p: &LocatedPoint,
) -> Result<LocatedPoint, DynamicsError> {
    let image = system.raw_inverse_step(p.rep)?;
    let anchored = group.locate(image)?;
    Ok(LocatedPoint::new(p.word.concat(&anchored.word), anchored.rep))
}

impl<S: LiftedSystem + ?Sized> LiftedSystem for &S {
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        (**self).raw_step(z)
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        (**self).raw_inverse_step(z)
    }
    fn displacement_bound(&self) -> f64 {
        (**self).displacement_bound()
    }
}

/// The identity system.
#[derive(Clone, Debug, Default)]
pub struct IdentitySystem;

impl LiftedSystem for IdentitySystem {
    fn describe(&self) -> String {
        String::from("identity")
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(z)
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(z)
    }
    fn displacement_bound(&self) -> f64 {
        0.0
    }
}

/// Calibration map: a fixed deck isometry applied at every step.
///
/// This is not the lift of a surface homeomorphism isotopic to the identity
/// (it does not commute with the full group); it exists so that speed
/// measurements can be checked against the exact translation length.
#[derive(Clone, Debug)]
pub struct DeckTranslationSystem {
    word: GroupWord,
    matrix: MobiusTransform,
    length: f64,
}

impl DeckTranslationSystem {
    pub fn new(group: &SurfaceGroup, word: GroupWord) -> Result<Self, DynamicsError> {
        let (_, length) = group.axis_of(&word)?;
        let matrix = group.evaluate(&word);
        Ok(DeckTranslationSystem { word, matrix, length })
    }

    pub fn word(&self) -> &GroupWord {
        &self.word
    }
}

impl LiftedSystem for DeckTranslationSystem {
    fn describe(&self) -> String {
        String::from("deck-translation")
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(self.matrix.apply(z)?)
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(self.matrix.inverse().apply(z)?)
    }
    fn displacement_bound(&self) -> f64 {
        // Displacement of a hyperbolic isometry grows off the axis; this
        // bound holds on the evaluation region near the domain.
        self.length + 8.0
    }
}

/// One translate tube of the support.
#[derive(Clone, Debug)]
struct Tube {
    geodesic: Geodesic,
    /// Image of the base tube's marked center, in this tube's parameter.
    center: f64,
}

/// Shared construction for tube-supported systems.
///
/// The motion advances the along-tube coordinate by
/// amount · bump(s/width) · window(t), where the optional window is a bump
/// in (t − center)/window_len. Closed cores use no window (their translate
/// tubes have a uniform collar); drift paths need one because translates
/// sharing an ideal endpoint pinch together near the circle. The window
/// center transports equivariantly (it is the image of the base center),
/// so the field still commutes with every deck transformation.
#[derive(Clone, Debug)]
struct TubeField {
    tubes: Vec<Tube>,
    width: f64,
    window: Option<f64>,
}

impl TubeField {
    /// Enumerate deck translates of `base` that pass within reach of the
    /// fundamental domain and check their supports pairwise disjoint.
    fn build(
        group: &SurfaceGroup,
        base: &Geodesic,
        width: f64,
        window: Option<f64>,
        search_radius: usize,
        reach: f64,
    ) -> Result<TubeField, DynamicsError> {
        let keep = group.domain().circumradius() + width + reach;
        let c0 = geodesic_position(DiskPoint::origin(), base);
        let center_point = crate::hyperbolic::disk_to_half(base.point_at(c0));
        let mut tubes: Vec<Tube> = Vec::new();
        let near = |g: &Geodesic| flt::abs(geodesic_offset(DiskPoint::origin(), g)) <= keep;
        if near(base) {
            tubes.push(Tube { geodesic: *base, center: c0 });
        }
        group.for_each_reduced_word(search_radius, 1_000_000, &mut |_letters, m| {
            let img = m.apply_geodesic(base);
            if near(&img) {
                let dup = tubes.iter().any(|t| {
                    t.geodesic.start().distance(&img.start()) < 1e-7
                        && t.geodesic.end().distance(&img.end()) < 1e-7
                });
                if !dup {
                    // Transported center: position of the image of the base
                    // center point, computed through the composed matrix so
                    // no near-boundary point is materialized.
                    let h = img.frame().compose(m);
                    let w = h.apply_half(center_point);
                    let center = flt::ln(w.norm());
                    tubes.push(Tube { geodesic: img, center });
                }
            }
            true
        })?;
        let field = TubeField { tubes, width, window };
        // Pairwise support disjointness on the evaluation region.
        let span = window.unwrap_or(keep + 1.0);
        for i in 0..field.tubes.len() {
            for j in 0..field.tubes.len() {
                if i == j {
                    continue;
                }
                let gi = &field.tubes[i];
                let gj = &field.tubes[j];
                let n = 200;
                for k in 0..=n {
                    let t = gi.center - span + 2.0 * span * (k as f64) / (n as f64);
                    let p = gi.geodesic.point_at(t);
                    if hyp_distance(DiskPoint::origin(), p) > keep {
                        continue;
                    }
                    let gap = flt::abs(geodesic_offset(p, &gj.geodesic));
                    if gap >= 2.0 * width {
                        continue;
                    }
                    if let Some(win) = window {
                        let tj = geodesic_position(p, &gj.geodesic);
                        if flt::abs(tj - gj.center) >= win + width {
                            continue;
                        }
                    }
                    return Err(DynamicsError::TubeTooWide);
                }
            }
        }
        Ok(field)
    }

    /// Motion factor window(t) for a tube.
    fn window_factor(&self, tube: &Tube, t: f64) -> f64 {
        match self.window {
            None => 1.0,
            Some(win) => bump((t - tube.center) / win),
        }
    }

    /// The tube whose support contains `z`, if any.
    fn tube_of(&self, z: DiskPoint) -> Option<(&Tube, f64, f64)> {
        for t in &self.tubes {
            let (tt, s) = fermi_coordinates(z, &t.geodesic);
            if flt::abs(s) < self.width && self.window_factor(t, tt) > 0.0 {
                return Some((t, tt, s));
            }
        }
        None
    }

    /// Advance the along-tube coordinate by
    /// amount · bump(s/width) · window(t).
    fn advance(&self, z: DiskPoint, amount: f64) -> DiskPoint {
        match self.tube_of(z) {
            None => z,
            Some((tube, t, s)) => {
                let t2 = t + amount * bump(s / self.width) * self.window_factor(tube, t);
                from_fermi(&tube.geodesic, t2, s)
            }
        }
    }

    /// Invert `advance` in t (the windowed shear is a contraction).
    fn advance_inverse(&self, z: DiskPoint, amount: f64) -> DiskPoint {
        // The support of the inverse image may differ from z's tube only
        // within the same tube (s is unchanged and windows are wide), so
        // solve in the tube of z.
        match self.tube_of(z) {
            None => z,
            Some((tube, t2, s)) => {
                let profile = bump(s / self.width);
                let mut t = t2;
                for _ in 0..100 {
                    let next = t2 - amount * profile * self.window_factor(tube, t);
                    if flt::abs(next - t) < 1e-14 {
                        t = next;
                        break;
                    }
                    t = next;
                }
                from_fermi(&tube.geodesic, t, s)
            }
        }
    }
}

/// Minimum distance between two geodesics restricted to the ball of radius
/// `reach` around the origin (sampled, then locally refined).
fn segment_distance(g1: &Geodesic, g2: &Geodesic, reach: f64) -> f64 {
    let t0 = geodesic_position(DiskPoint::origin(), g1);
    let half = reach + 1.0;
    let n = 96;
    let eval = |t: f64| -> f64 {
        let p = g1.point_at(t);
        flt::abs(geodesic_offset(p, g2))
    };
    let mut best_t = t0;
    let mut best = f64::INFINITY;
    for k in 0..=n {
        let t = t0 - half + 2.0 * half * (k as f64) / (n as f64);
        let d = eval(t);
        if d < best {
            best = d;
            best_t = t;
        }
    }
    // Golden-section refinement around the sampled minimum.
    let mut lo = best_t - 2.0 * half / n as f64;
    let mut hi = best_t + 2.0 * half / n as f64;
    let phi = 0.618_033_988_749_894_9;
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if eval(m1) <= eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(eval(0.5 * (lo + hi)))
}

/// Twist along a simple closed geodesic class: on the axis the lift
/// translates by exactly theta, the motion tapers to the identity at the
/// tube walls.
#[derive(Clone, Debug)]
pub struct TwistSystem {
    core: GroupWord,
    theta: f64,
    field: TubeField,
    core_length: f64,
    axis: Geodesic,
}

impl TwistSystem {
    pub fn new(
        group: &SurfaceGroup,
        core: GroupWord,
        theta: f64,
        width: f64,
    ) -> Result<Self, DynamicsError> {
        TwistSystem::with_reach(group, core, theta, width, 4, 1.5)
    }

    /// Construction with explicit translate-search radius and evaluation
    /// reach beyond the fundamental domain (raw steps are only meaningful
    /// within the reach; larger reach costs more tubes).
    pub fn with_reach(
        group: &SurfaceGroup,
        core: GroupWord,
        theta: f64,
        width: f64,
        search_radius: usize,
        reach: f64,
    ) -> Result<Self, DynamicsError> {
        match geodesic::self_intersection_witness(group, &core, 4)? {
            SelfIntersection::NoneFound { .. } => {}
            SelfIntersection::Witness(_) => return Err(DynamicsError::CoreNotSimple),
        }
        let (axis, core_length) = group.axis_of(&core)?;
        let field = TubeField::build(group, &axis, width, None, search_radius, reach)?;
        Ok(TwistSystem { core, theta, field, core_length, axis })
    }

    pub fn core(&self) -> &GroupWord {
        &self.core
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn width(&self) -> f64 {
        self.field.width
    }

    pub fn core_length(&self) -> f64 {
        self.core_length
    }

    pub fn axis(&self) -> &Geodesic {
        &self.axis
    }
}

impl LiftedSystem for TwistSystem {
    fn describe(&self) -> String {
        String::from("twist")
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(self.field.advance(z, self.theta))
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(self.field.advance(z, -self.theta))
    }
    fn displacement_bound(&self) -> f64 {
        flt::abs(self.theta) * flt::cosh(self.field.width)
    }
}

/// Drift along a (typically non-closed) geodesic toward its ω-end.
#[derive(Clone, Debug)]
pub struct DriftSystem {
    path: Geodesic,
    speed: f64,
    field: TubeField,
}

impl DriftSystem {
    pub fn new(
        group: &SurfaceGroup,
        path: Geodesic,
        width: f64,
        speed: f64,
    ) -> Result<Self, DynamicsError> {
        DriftSystem::with_reach(group, path, width, speed, 4, 1.5)
    }

    pub fn with_reach(
        group: &SurfaceGroup,
        path: Geodesic,
        width: f64,
        speed: f64,
        search_radius: usize,
        reach: f64,
    ) -> Result<Self, DynamicsError> {
        // Windowed speed profile: translates of a non-closed path pinch
        // together toward shared ideal endpoints, so the support must be a
        // bounded window along each translate. Every surface point is
        // stepped through the translate whose window covers the domain, so
        // orbits still drift along the whole path. The bound keeps the
        // windowed shear injective (|bump'| <= 1.73).
        let window = 3.0;
        if flt::abs(speed) * 1.73 / window >= 0.95 {
            return Err(DynamicsError::TubeTooWide);
        }
        let field = TubeField::build(group, &path, width, Some(window), search_radius, reach)?;
        Ok(DriftSystem { path, speed, field })
    }

    pub fn path(&self) -> &Geodesic {
        &self.path
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn width(&self) -> f64 {
        self.field.width
    }
}

impl LiftedSystem for DriftSystem {
    fn describe(&self) -> String {
        String::from("drift")
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(self.field.advance(z, self.speed))
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        Ok(self.field.advance_inverse(z, self.speed))
    }
    fn displacement_bound(&self) -> f64 {
        flt::abs(self.speed) * flt::cosh(self.field.width)
    }
}

/// Composition; the last part acts first (right-to-left, like f₂ ∘ f₁).
pub struct ComposedSystem {
    parts: Vec<Box<dyn LiftedSystem>>,
}

impl ComposedSystem {
    pub fn new(parts: Vec<Box<dyn LiftedSystem>>) -> Self {
        ComposedSystem { parts }
    }
}

impl LiftedSystem for ComposedSystem {
    fn describe(&self) -> String {
        let mut s = String::from("compose(");
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            s.push_str(&p.describe());
        }
        s.push(')');
        s
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        let mut w = z;
        for p in self.parts.iter().rev() {
            w = p.raw_step(w)?;
        }
        Ok(w)
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        let mut w = z;
        for p in self.parts.iter() {
            w = p.raw_inverse_step(w)?;
        }
        Ok(w)
    }
    fn displacement_bound(&self) -> f64 {
        self.parts.iter().map(|p| p.displacement_bound()).sum()
    }
}

/// The inverse of a system.
pub struct InvertedSystem<S: LiftedSystem>(pub S);

impl<S: LiftedSystem> LiftedSystem for InvertedSystem<S> {
    fn describe(&self) -> String {
        let mut s = String::from("inverse(");
        s.push_str(&self.0.describe());
        s.push(')');
        s
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        self.0.raw_inverse_step(z)
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        self.0.raw_step(z)
    }
    fn displacement_bound(&self) -> f64 {
        self.0.displacement_bound()
    }
}

/// An integer power of a system.
pub struct PowerSystem<S: LiftedSystem> {
    pub base: S,
    pub exponent: usize,
}

impl<S: LiftedSystem> LiftedSystem for PowerSystem<S> {
    fn describe(&self) -> String {
        let mut s = String::from("power(");
        s.push_str(&self.base.describe());
        s.push(')');
        s
    }
    fn raw_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        let mut w = z;
        for _ in 0..self.exponent {
            w = self.base.raw_step(w)?;
        }
        Ok(w)
    }
    fn raw_inverse_step(&self, z: DiskPoint) -> Result<DiskPoint, DynamicsError> {
        let mut w = z;
        for _ in 0..self.exponent {
            w = self.base.raw_inverse_step(w)?;
        }
        Ok(w)
    }
    fn displacement_bound(&self) -> f64 {
        self.base.displacement_bound() * self.exponent as f64
    }
}

/// A word-tracked orbit segment: points[k] is f̃^k of the start as a
/// (deck word, representative) pair.
#[derive(Clone, Debug)]
pub struct LiftedTrajectory {
    points: Vec<LocatedPoint>,
}

impl LiftedTrajectory {
    pub fn points(&self) -> &[LocatedPoint] {
        &self.points
    }

    pub fn start(&self) -> &LocatedPoint {
        &self.points[0]
    }

    pub fn end(&self) -> &LocatedPoint {
        self.points.last().unwrap()
    }

    /// Number of steps (one less than stored points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Iterate a system with re-anchoring after each step.
pub fn iterate(
    system: &dyn LiftedSystem,
    group: &SurfaceGroup,
    start: LocatedPoint,
    n: usize,
) -> Result<LiftedTrajectory, DynamicsError> {
    let mut points = Vec::with_capacity(n + 1);
    points.push(start);
    for _ in 0..n {
        let next = step(system, group, points.last().unwrap())?;
        points.push(next);
    }
    Ok(LiftedTrajectory { points })
}

/// Located point on a geodesic at Fermi coordinates (t, s).
pub fn seed_on_geodesic(
    group: &SurfaceGroup,
    g: &Geodesic,
    t: f64,
    s: f64,
) -> Result<LocatedPoint, DynamicsError> {
    let z = from_fermi(g, t, s);
    Ok(group.locate(z)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Letter;

    #[test]
    fn bump_profile_normalization() {
        assert!((bump(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-2.0), 0.0);
        assert!(bump(0.5) > 0.0 && bump(0.5) < 1.0);
    }

    #[test]
    fn twist_translates_axis_points() {
        let group = SurfaceGroup::new(2).unwrap();
        let core = GroupWord::generator(0, false);
        let twist = TwistSystem::new(&group, core, 0.4, 0.7).unwrap();
        let axis = *twist.axis();
        let z = axis.point_at(0.1);
        let img = twist.raw_step(z).unwrap();
        let t0 = geodesic_position(z, &axis);
        let t1 = geodesic_position(img, &axis);
        assert!((t1 - t0 - 0.4).abs() < 1e-8, "moved {}", t1 - t0);
        assert!(flt::abs(geodesic_offset(img, &axis)) < 1e-9);
    }

    #[test]
    fn twist_fixes_points_outside_tubes() {
        let group = SurfaceGroup::new(2).unwrap();
        let core = GroupWord::generator(0, false);
        let twist = TwistSystem::new(&group, core, 0.4, 0.5).unwrap();
        // A vertex direction far from the a1 axis tube.
        let z = DiskPoint::new(0.0, 0.55).unwrap();
        if twist.field.tube_of(z).is_none() {
            let img = twist.raw_step(z).unwrap();
            assert!(crate::hyperbolic::hyp_distance(z, img) < 1e-15);
        }
    }

    #[test]
    fn wide_tube_rejected() {
        let group = SurfaceGroup::new(2).unwrap();
        let core = GroupWord::generator(0, false);
        let res = TwistSystem::new(&group, core, 0.4, 1.2);
        assert!(matches!(res, Err(DynamicsError::TubeTooWide)));
    }

    #[test]
    fn nonsimple_core_rejected() {
        let group = SurfaceGroup::new(2).unwrap();
        let w = GroupWord::from_letters([Letter::new(0, false), Letter::new(3, false)]);
        let res = TwistSystem::new(&group, w, 0.4, 0.3);
        assert!(matches!(res, Err(DynamicsError::CoreNotSimple)));
    }

    #[test]
    fn iterate_identity_is_constant() {
        let group = SurfaceGroup::new(2).unwrap();
        let sys = IdentitySystem;
        let start = LocatedPoint::at_origin();
        let traj = iterate(&sys, &group, start, 10).unwrap();
        assert_eq!(traj.steps(), 10);
        for p in traj.points() {
            assert!(p.word.is_empty());
            assert!(p.rep.norm() < 1e-15);
        }
    }

    #[test]
    fn deck_translation_accumulates_word() {
        let group = SurfaceGroup::new(2).unwrap();
        let w = GroupWord::generator(0, false);
        let sys = DeckTranslationSystem::new(&group, w.clone()).unwrap();
        let traj = iterate(&sys, &group, LocatedPoint::at_origin(), 5).unwrap();
        assert_eq!(traj.end().word, w.pow(5));
    }

    #[test]
    fn twist_inverse_round_trip() {
        let group = SurfaceGroup::new(2).unwrap();
        let core = GroupWord::generator(0, false);
        let twist = TwistSystem::new(&group, core, 0.4, 0.7).unwrap();
        let z = twist.axis().point_at(0.3);
        let img = twist.raw_step(z).unwrap();
        let back = twist.raw_inverse_step(img).unwrap();
        assert!(crate::hyperbolic::hyp_distance(z, back) < 1e-8);
    }
}
