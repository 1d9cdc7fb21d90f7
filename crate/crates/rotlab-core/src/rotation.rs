//! Rotation-set measurement: directional speeds through annulus reductions,
//! homological vectors, rotation-set scans, periodic-orbit search, and the
//! star-shape / power / inverse audits.
//!
//! Directions indexed by closed-geodesic classes are measured through the
//! cyclic quotient of the class: a point's position along the axis is kept
//! as (band index, offset in [0, ℓ)), where the band counts crossings of
//! the translates of a geodesic orthogonal to the axis. The band index is
//! an exact integer and the offset is computed from matrices that stay
//! bounded however long the orbit word grows, so speeds remain accurate at
//! thousands of steps where a direct evaluation of the deck matrix would
//! lose every significant digit to cancellation.

use crate::dynamics::{self, DynamicsError, LiftedSystem, LiftedTrajectory, PowerSystem};
use crate::flt;
use crate::geodesic::GeodesicError;
use crate::group::{GroupError, GroupWord, LocatedPoint, SurfaceGroup};
use crate::hyperbolic::{
    disk_to_half, BoundaryPoint, DiskPoint, Geodesic, HypError, MobiusTransform,
};
use alloc::vec::Vec;
use core::fmt;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationError {
    /// Direct position evaluation would lose precision and no usable
    /// factorization hint was available.
    PrecisionLoss,
    BudgetExceeded,
    Group(GroupError),
    Dynamics(DynamicsError),
}

impl From<GroupError> for RotationError {
    fn from(e: GroupError) -> Self {
        RotationError::Group(e)
    }
}

impl From<DynamicsError> for RotationError {
    fn from(e: DynamicsError) -> Self {
        RotationError::Dynamics(e)
    }
}

impl From<HypError> for RotationError {
    fn from(e: HypError) -> Self {
        RotationError::Group(GroupError::Hyp(e))
    }
}

impl From<GeodesicError> for RotationError {
    fn from(e: GeodesicError) -> Self {
        match e {
            GeodesicError::Group(g) => RotationError::Group(g),
            _ => RotationError::Group(GroupError::NotHyperbolic),
        }
    }
}

impl fmt::Display for RotationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RotationError::PrecisionLoss => write!(f, "projection would lose precision"),
            RotationError::BudgetExceeded => write!(f, "measurement budget exceeded"),
            RotationError::Group(e) => write!(f, "{e}"),
            RotationError::Dynamics(e) => write!(f, "{e}"),
        }
    }
}

/// Position along an axis as band index + offset in [0, length).
#[derive(Clone, Copy, Debug)]
pub struct BandPosition {
    pub band: i64,
    pub offset: f64,
}

/// The annulus reduction of a closed-geodesic class: quotient of the plane
/// by the cyclic group of the class.
///
/// Positions are tracked as an exact integer band plus a residual deck word
/// (the current word with the band's core power removed). The residual is
/// maintained by free reduction -- integer arithmetic -- and evaluated
/// fresh at every step, so no floating-point error can accumulate along the
/// orbit. A matrix-valued running product would instead amplify its error
/// by e^length at every band crossing and lose everything within twenty
/// steps.
#[derive(Clone, Debug)]
pub struct AnnulusFrame {
    core: GroupWord,
    core_inverse: GroupWord,
    axis: Geodesic,
    length: f64,
    frame: MobiusTransform,
}

/// Residual words longer than this indicate the orbit left the regime the
/// annulus reduction can measure.
const RESIDUAL_CAP: usize = 256;

impl AnnulusFrame {
    pub fn new(group: &SurfaceGroup, core: &GroupWord) -> Result<Self, RotationError> {
        let (axis, length) = group.axis_of(core)?;
        let frame = axis.frame();
        Ok(AnnulusFrame {
            core: core.clone(),
            core_inverse: core.inverse(),
            axis,
            length,
            frame,
        })
    }

    pub fn core(&self) -> &GroupWord {
        &self.core
    }

    pub fn axis(&self) -> &Geodesic {
        &self.axis
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn total(&self, p: &BandPosition) -> f64 {
        p.band as f64 * self.length + p.offset
    }

    /// Axis position of evaluate(word)·rep by direct evaluation.
    fn tau(&self, group: &SurfaceGroup, word: &GroupWord, rep: DiskPoint) -> f64 {
        let m = self.frame.compose(&group.evaluate(word));
        let [a, b, c, d] = m.matrix();
        let r = disk_to_half(rep);
        let num = r * a + b;
        let den = r * c + d;
        flt::ln(num.norm()) - flt::ln(den.norm())
    }

    /// Band position of a located point whose word displacement is within
    /// direct evaluation range (used for sampled pairs, not long orbits).
    pub fn band_position(&self, group: &SurfaceGroup, p: &LocatedPoint) -> BandPosition {
        let t = self.tau(group, &p.word, p.rep);
        let band = flt::floor(t / self.length) as i64;
        BandPosition { band, offset: t - band as f64 * self.length }
    }

    /// Positions along the whole trajectory via the exact word ledger.
    pub fn trajectory_positions(
        &self,
        group: &SurfaceGroup,
        traj: &LiftedTrajectory,
    ) -> Result<Vec<BandPosition>, RotationError> {
        let points = traj.points();
        let mut out = Vec::with_capacity(points.len());
        let mut band = 0i64;
        // residual = core^{-band} · g_k, freely reduced.
        let mut residual = points[0].word.clone();
        for k in 0..points.len() {
            if k > 0 {
                let increment = points[k - 1].word.relative_word(&points[k].word);
                residual = residual.concat(&increment);
            }
            loop {
                if residual.len() > RESIDUAL_CAP {
                    return Err(RotationError::PrecisionLoss);
                }
                let t = self.tau(group, &residual, points[k].rep);
                if t >= self.length {
                    residual = self.core_inverse.concat(&residual);
                    band += 1;
                } else if t < 0.0 {
                    residual = self.core.concat(&residual);
                    band -= 1;
                } else {
                    out.push(BandPosition { band, offset: t });
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// One Eq.-style sample: direction estimates and projected speed.
#[derive(Clone, Debug)]
pub struct RotationSample {
    pub steps: usize,
    /// Signed displacement of the projection along the direction.
    pub delta: f64,
    /// |delta| / steps.
    pub speed: f64,
    pub start_direction: BoundaryPoint,
    pub end_direction: BoundaryPoint,
}

/// Sample a trajectory along a closed direction through its annulus frame.
pub fn directional_sample(
    group: &SurfaceGroup,
    traj: &LiftedTrajectory,
    frame: &AnnulusFrame,
) -> Result<RotationSample, RotationError> {
    let positions = frame.trajectory_positions(group, traj)?;
    let delta = frame.total(positions.last().unwrap()) - frame.total(&positions[0]);
    let n = traj.steps().max(1);
    Ok(RotationSample {
        steps: traj.steps(),
        delta,
        speed: flt::abs(delta) / n as f64,
        start_direction: group.direction_of(traj.start()),
        end_direction: group.direction_of(traj.end()),
    })
}

/// Stable position of a cover point along an arbitrary geodesic.
///
/// Uses direct evaluation with an error estimate; when cancellation would
/// eat the answer, falls back to the exact power factorization of the word
/// by `hint` and a log-space closed form (snapping the analytically shared
/// endpoint when the direction and the hint axis meet at infinity).
pub fn stable_position(
    group: &SurfaceGroup,
    p: &LocatedPoint,
    g: &Geodesic,
    hint: Option<&GroupWord>,
) -> Result<f64, RotationError> {
    // Direct attempt with error estimate.
    if p.word.len() <= 256 {
        let m = g.frame().compose(&group.evaluate(&p.word));
        let [a, b, c, d] = m.matrix();
        if [a, b, c, d].iter().all(|e| e.is_finite()) {
            let r = disk_to_half(p.rep);
            let num = r * a + b;
            let den = r * c + d;
            let err = f64::EPSILON
                * ((flt::abs(a) * r.norm() + flt::abs(b)) / num.norm()
                    + (flt::abs(c) * r.norm() + flt::abs(d)) / den.norm());
            if err < 1e-9 {
                return Ok(flt::ln(num.norm()) - flt::ln(den.norm()));
            }
        }
    }
    let hint = hint.ok_or(RotationError::PrecisionLoss)?;
    let (prefix, m_pow) = p.word.split_power_suffix(hint);
    if m_pow == 0 {
        return Err(RotationError::PrecisionLoss);
    }
    let (hint_axis, hint_len) = group.axis_of(hint)?;
    // Everything is conjugated into the frame of g composed with the prefix.
    let base = g.frame().compose(&group.evaluate(&prefix));
    let att = base.apply_boundary(hint_axis.end());
    let rep_pt = base.apply_boundary(hint_axis.start());
    let w0 = base.apply_half(disk_to_half(p.rep));
    // Shared endpoint at infinity of the frame (angle 0)?
    let at_infinity = |b: &BoundaryPoint| b.distance(&BoundaryPoint::new(0.0)) < 1e-7;
    if at_infinity(&att) {
        // Affine action: ĉ = [[λ, q], [0, 1/λ]] with λ = e^{ℓ/2} and fixed
        // point w* = image of the repelling endpoint.
        let lam2 = flt::exp(hint_len); // λ²
        let wstar = real_of(&rep_pt);
        let diff = w0 - Complex64::new(wstar, 0.0);
        let correction = Complex64::new(wstar, 0.0) * flt::exp(-(m_pow as f64) * hint_len) / diff;
        let t = (m_pow as f64) * hint_len
            + flt::ln(diff.norm())
            + flt::ln((Complex64::new(1.0, 0.0) + correction).norm());
        let _ = lam2;
        return Ok(t);
    }
    if at_infinity(&rep_pt) {
        // The orbit recedes toward the start of g: measure along the
        // reversed geodesic and negate.
        let rev = g.reversed();
        return stable_position(group, p, &rev, Some(hint)).map(|t| -t);
    }
    // No shared endpoint: the limit is a finite point of the frame line;
    // evaluate through the eigenbasis with the decaying mode underflowing
    // harmlessly.
    let xa = real_of(&att);
    let xr = real_of(&rep_pt);
    // Coordinates of w0 in the eigenbasis columns (xa,1), (xr,1).
    let det = xa - xr;
    let xi = (w0 - Complex64::new(xr, 0.0)) / det;
    let eta = (Complex64::new(xa, 0.0) - w0) / det;
    let eps = flt::exp(-(m_pow as f64) * hint_len);
    let num = Complex64::new(xa, 0.0) * xi + Complex64::new(xr, 0.0) * eta * eps;
    let den = xi + eta * eps;
    Ok(flt::ln(num.norm()) - flt::ln(den.norm()))
}

fn real_of(b: &BoundaryPoint) -> f64 {
    let h = b.angle() / 2.0;
    // x = -cot(angle/2); the at-infinity case is handled by callers.
    -flt::cos(h) / flt::sin(h)
}

/// Eq.-style sample along an arbitrary geodesic direction.
pub fn rotation_sample(
    group: &SurfaceGroup,
    traj: &LiftedTrajectory,
    g: &Geodesic,
    hint: Option<&GroupWord>,
) -> Result<RotationSample, RotationError> {
    let t0 = stable_position(group, traj.start(), g, hint)?;
    let t1 = stable_position(group, traj.end(), g, hint)?;
    let n = traj.steps().max(1);
    Ok(RotationSample {
        steps: traj.steps(),
        delta: t1 - t0,
        speed: flt::abs(t1 - t0) / n as f64,
        start_direction: group.direction_of(traj.start()),
        end_direction: group.direction_of(traj.end()),
    })
}

/// One annulus sample: band displacement and fine position displacement.
#[derive(Clone, Debug)]
pub struct AnnulusSample {
    pub seed_index: usize,
    pub band_delta: i64,
    pub position_delta: f64,
    /// (band_delta / n) · ℓ, the annulus rotation number rescaled.
    pub band_speed: f64,
    /// position_delta / n.
    pub speed: f64,
}

#[derive(Clone, Debug)]
pub struct AnnulusReport {
    pub core: GroupWord,
    pub length: f64,
    /// [min, max] of the signed band speeds over the seeds.
    pub interval: (f64, f64),
    pub samples: Vec<AnnulusSample>,
    pub steps: usize,
}

impl AnnulusReport {
    /// The projection sandwich ℓ(|Δi|−1) ≤ |Δt| ≤ ℓ(|Δi|+1) per sample.
    pub fn sandwich_holds(&self) -> bool {
        self.samples.iter().all(|s| {
            let di = flt::abs(s.band_delta as f64);
            let dt = flt::abs(s.position_delta);
            self.length * (di - 1.0) <= dt + 1e-9 && dt <= self.length * (di + 1.0) + 1e-9
        })
    }
}

/// Directional speeds of a system along a closed class, per seed.
pub fn annulus_rotation_number(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    core: &GroupWord,
    seeds: &[LocatedPoint],
    n: usize,
) -> Result<AnnulusReport, RotationError> {
    let frame = AnnulusFrame::new(group, core)?;
    let mut samples = Vec::with_capacity(seeds.len());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, seed) in seeds.iter().enumerate() {
        let traj = dynamics::iterate(system, group, seed.clone(), n)?;
        let positions = frame.trajectory_positions(group, &traj)?;
        let first = &positions[0];
        let last = positions.last().unwrap();
        let band_delta = last.band - first.band;
        let position_delta = frame.total(last) - frame.total(first);
        let band_speed = band_delta as f64 * frame.length() / n as f64;
        let speed = position_delta / n as f64;
        lo = lo.min(band_speed);
        hi = hi.max(band_speed);
        samples.push(AnnulusSample { seed_index: i, band_delta, position_delta, band_speed, speed });
    }
    if samples.is_empty() {
        lo = 0.0;
        hi = 0.0;
    }
    Ok(AnnulusReport {
        core: core.clone(),
        length: frame.length(),
        interval: (lo, hi),
        samples,
        steps: n,
    })
}

/// Homological rotation vector of a trajectory: abelianized relative deck
/// word divided by the number of steps.
pub fn homological_vector(group: &SurfaceGroup, traj: &LiftedTrajectory) -> Vec<f64> {
    let rel = traj.start().word.relative_word(&traj.end().word);
    let counts = rel.abelianization(group.genus());
    let n = traj.steps().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// Speeds (signed, along the class orientation) of a batch of seeds.
pub fn directional_speeds(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    core: &GroupWord,
    seeds: &[LocatedPoint],
    n: usize,
) -> Result<Vec<f64>, RotationError> {
    let report = annulus_rotation_number(group, system, core, seeds, n)?;
    Ok(report.samples.iter().map(|s| s.speed).collect())
}

/// A direction of the estimate with its recorded speeds.
#[derive(Clone, Debug)]
pub struct DirectionalSpeedSet {
    pub word: GroupWord,
    pub axis: Geodesic,
    pub length: f64,
    /// Sorted nonnegative speeds (samples moving along the orientation).
    pub speeds: Vec<f64>,
    pub v_max: f64,
    /// Largest gap in {0} ∪ speeds ∪ {v_max}.
    pub interval_gap: f64,
}

impl DirectionalSpeedSet {
    fn from_speeds(word: GroupWord, axis: Geodesic, length: f64, mut speeds: Vec<f64>) -> Self {
        speeds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let v_max = speeds.last().copied().unwrap_or(0.0).max(0.0);
        let mut gap = 0.0f64;
        let mut prev = 0.0f64;
        for s in speeds.iter().filter(|s| **s >= 0.0) {
            gap = gap.max(s - prev);
            prev = *s;
        }
        gap = gap.max(v_max - prev);
        DirectionalSpeedSet { word, axis, length, speeds, v_max, interval_gap: gap }
    }
}

/// A sample not bound to any closed direction, reported by its raw
/// boundary-direction estimates.
#[derive(Clone, Debug)]
pub struct RawDirectionSample {
    pub start_direction: BoundaryPoint,
    pub end_direction: BoundaryPoint,
    pub speed: f64,
    pub seed_index: usize,
    /// True when this entry is a deck translate of a measured sample
    /// (exactly valid by isometry invariance).
    pub deck_completed: bool,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub word_ball_radius: usize,
    pub random_seeds: usize,
    pub steps: usize,
    pub rng_seed: u64,
    /// Angle tolerance for binding a sample to an axis direction.
    pub binding_angle: f64,
    /// Deck words whose translates of every recorded raw sample are added
    /// (deck invariance of the rotation set makes these exact).
    pub completion_words: Vec<GroupWord>,
    /// Extra caller-provided seeds (e.g. deep tube seeds).
    pub extra_seeds: Vec<LocatedPoint>,
}

impl ScanConfig {
    pub fn new(word_ball_radius: usize, random_seeds: usize, steps: usize, rng_seed: u64) -> Self {
        ScanConfig {
            word_ball_radius,
            random_seeds,
            steps,
            rng_seed,
            binding_angle: 0.05,
            completion_words: Vec::new(),
            extra_seeds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RotationSetEstimate {
    pub directions: Vec<DirectionalSpeedSet>,
    pub raw_samples: Vec<RawDirectionSample>,
    pub homology_samples: Vec<Vec<f64>>,
    pub steps: usize,
    pub seeds_used: usize,
}

impl RotationSetEstimate {
    pub fn direction(&self, word: &GroupWord) -> Option<&DirectionalSpeedSet> {
        self.directions.iter().find(|d| d.word == *word)
    }

    /// Raw samples (including completions) whose direction estimates match
    /// the given boundary pair within the angle tolerance.
    pub fn raw_matching(&self, start: &BoundaryPoint, end: &BoundaryPoint, tol: f64) -> Vec<&RawDirectionSample> {
        self.raw_samples
            .iter()
            .filter(|s| s.start_direction.distance(start) <= tol && s.end_direction.distance(end) <= tol)
            .collect()
    }
}

/// Candidate closed directions: shortlex-first word per unoriented axis in
/// the ball of the given radius.
fn candidate_directions(
    group: &SurfaceGroup,
    radius: usize,
) -> Result<Vec<(GroupWord, Geodesic, f64)>, RotationError> {
    let mut out: Vec<(GroupWord, Geodesic, f64)> = Vec::new();
    group.for_each_reduced_word(radius, 1_000_000, &mut |letters, m| {
        if let crate::hyperbolic::IsometryClass::Hyperbolic { axis, length } =
            crate::hyperbolic::classify(m)
        {
            let dup = out.iter().any(|(_, a, _)| a.same_unoriented(&axis));
            if !dup {
                out.push((GroupWord::from_letters(letters.iter().copied()), axis, length));
            }
        }
        true
    })?;
    Ok(out)
}

/// Estimate the rotation set of a system: random fundamental-domain seeds
/// plus caller seeds, iterated and binned by the nearest axis direction;
/// unbound samples are reported by their raw direction estimates.
pub fn scan_rotation_set(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    cfg: &ScanConfig,
) -> Result<RotationSetEstimate, RotationError> {
    let candidates = candidate_directions(group, cfg.word_ball_radius)?;
    let mut seeds: Vec<LocatedPoint> = Vec::new();
    for i in 0..cfg.random_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let z = group.domain().sample_point(&mut rng);
        seeds.push(LocatedPoint::new(GroupWord::identity(), z));
    }
    seeds.extend(cfg.extra_seeds.iter().cloned());

    let frames: Vec<AnnulusFrame> = candidates
        .iter()
        .map(|(w, _, _)| AnnulusFrame::new(group, w))
        .collect::<Result<_, _>>()?;

    let mut per_direction: Vec<Vec<f64>> = alloc::vec![Vec::new(); candidates.len()];
    let mut raw_samples: Vec<RawDirectionSample> = Vec::new();
    let mut homology_samples: Vec<Vec<f64>> = Vec::new();

    for (i, seed) in seeds.iter().enumerate() {
        let traj = dynamics::iterate(system, group, seed.clone(), cfg.steps)?;
        homology_samples.push(homological_vector(group, &traj));
        let start_dir = group.direction_of(traj.start());
        let end_dir = group.direction_of(traj.end());
        let mut bound = false;
        for (k, (_, axis, _)) in candidates.iter().enumerate() {
            let fits = start_dir.distance(&axis.start()) <= cfg.binding_angle
                && end_dir.distance(&axis.end()) <= cfg.binding_angle;
            if fits {
                let sample = directional_sample(group, &traj, &frames[k])?;
                per_direction[k].push(sample.delta / cfg.steps.max(1) as f64);
                bound = true;
            }
        }
        if !bound {
            // Raw speed: cover displacement per step (the projection onto
            // the empirical direction geodesic differs by o(1)).
            let rel = traj.start().word.relative_word(&traj.end().word);
            let d = displacement_between(group, &rel, traj.start().rep, traj.end().rep);
            let speed = d / cfg.steps.max(1) as f64;
            if speed > 1e-6 {
                raw_samples.push(RawDirectionSample {
                    start_direction: start_dir,
                    end_direction: end_dir,
                    speed,
                    seed_index: i,
                    deck_completed: false,
                });
            }
        }
    }

    // Deck completion of raw samples: exact by isometry invariance.
    let mut completed: Vec<RawDirectionSample> = Vec::new();
    for w in &cfg.completion_words {
        let m = group.evaluate(w);
        for s in &raw_samples {
            completed.push(RawDirectionSample {
                start_direction: m.apply_boundary(s.start_direction),
                end_direction: m.apply_boundary(s.end_direction),
                speed: s.speed,
                seed_index: s.seed_index,
                deck_completed: true,
            });
        }
    }
    raw_samples.extend(completed);

    let directions = candidates
        .into_iter()
        .zip(per_direction)
        .map(|((word, axis, length), speeds)| {
            DirectionalSpeedSet::from_speeds(word, axis, length, speeds)
        })
        .collect();

    Ok(RotationSetEstimate {
        directions,
        raw_samples,
        homology_samples,
        steps: cfg.steps,
        seeds_used: seeds.len(),
    })
}

/// Hyperbolic distance between cover points given their relative word and
/// representatives, stable for long words.
fn displacement_between(group: &SurfaceGroup, rel: &GroupWord, rep_a: DiskPoint, rep_b: DiskPoint) -> f64 {
    if rel.len() <= 120 {
        if let Ok(img) = group.evaluate(rel).apply(rep_b) {
            return crate::hyperbolic::hyp_distance(rep_a, img);
        }
    }
    // Word displacement dominates; representative corrections are bounded
    // by the domain diameter.
    group.displacement(rel)
}

/// Where the periodic-orbit search looks for seeds.
#[derive(Clone, Debug)]
pub enum SearchRegion {
    /// The whole fundamental polygon.
    Domain,
    /// The axis of a word (positions within one period).
    OnAxis(GroupWord),
    /// The width-tube of the axis of a word.
    Tube(GroupWord, f64),
}

#[derive(Clone, Debug)]
pub struct PeriodicSearchReport {
    pub witness: Option<LocatedPoint>,
    pub residual: f64,
    pub evaluations: usize,
}

/// Residual d(f̃^q(z), T^p·z) for a candidate periodic point.
pub fn periodic_residual(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    z: &LocatedPoint,
    deck: &GroupWord,
    p: i32,
    q: usize,
) -> Result<f64, RotationError> {
    let mut cur = z.clone();
    for _ in 0..q {
        cur = dynamics::step(system, group, &cur)?;
    }
    let target_word = deck.pow(p).concat(&z.word);
    let rel = target_word.relative_word(&cur.word);
    let img = group.evaluate(&rel).apply(cur.rep)?;
    Ok(crate::hyperbolic::hyp_distance(z.rep, img))
}

/// Coarse grid + pattern-search refinement of the displacement residual.
pub fn periodic_orbit_search(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    deck: &GroupWord,
    p: i32,
    q: usize,
    region: &SearchRegion,
    budget: usize,
) -> Result<PeriodicSearchReport, RotationError> {
    let mut evaluations = 0usize;
    let mut best: Option<(LocatedPoint, f64)> = None;
    let mut consider = |pt: LocatedPoint, evals: &mut usize, best: &mut Option<(LocatedPoint, f64)>| -> Result<(), RotationError> {
        *evals += 1;
        let r = periodic_residual(group, system, &pt, deck, p, q)?;
        if best.as_ref().map(|(_, b)| r < *b).unwrap_or(true) {
            *best = Some((pt, r));
        }
        Ok(())
    };

    // Coarse pass.
    match region {
        SearchRegion::Domain => {
            let r_lim = flt::tanh(group.domain().circumradius() / 2.0);
            let n = 16;
            for i in 0..=n {
                for j in 0..=n {
                    if evaluations >= budget {
                        break;
                    }
                    let x = (i as f64 / n as f64 * 2.0 - 1.0) * r_lim;
                    let y = (j as f64 / n as f64 * 2.0 - 1.0) * r_lim;
                    if let Ok(z) = DiskPoint::new(x, y) {
                        if group.domain().contains(z, 1e-9) {
                            consider(LocatedPoint::new(GroupWord::identity(), z), &mut evaluations, &mut best)?;
                        }
                    }
                }
            }
        }
        SearchRegion::OnAxis(w) => {
            let (axis, len) = group.axis_of(w)?;
            let n = 64;
            for i in 0..n {
                if evaluations >= budget {
                    break;
                }
                let t = len * i as f64 / n as f64;
                let z = axis.point_at(t);
                consider(group.locate(z)?, &mut evaluations, &mut best)?;
            }
        }
        SearchRegion::Tube(w, width) => {
            let (axis, len) = group.axis_of(w)?;
            let nt = 24;
            let ns = 17;
            for i in 0..nt {
                for j in 0..ns {
                    if evaluations >= budget {
                        break;
                    }
                    let t = len * i as f64 / nt as f64;
                    let s = width * (j as f64 / (ns - 1) as f64 * 2.0 - 1.0);
                    let z = crate::hyperbolic::from_fermi(&axis, t, s);
                    consider(group.locate(z)?, &mut evaluations, &mut best)?;
                }
            }
        }
    }

    // Pattern-search refinement in local disk coordinates.
    if let Some((seed_pt, mut best_r)) = best.clone() {
        let mut center = seed_pt;
        let mut h = 0.02f64;
        let on_axis = matches!(region, SearchRegion::OnAxis(_));
        let axis_data = if let SearchRegion::OnAxis(w) | SearchRegion::Tube(w, _) = region {
            Some(group.axis_of(w)?)
        } else {
            None
        };
        while h > 1e-12 && best_r > 1e-8 && evaluations < budget {
            let mut improved = false;
            let candidates: Vec<LocatedPoint> = if on_axis {
                let (axis, _) = axis_data.as_ref().unwrap();
                let t0 = crate::hyperbolic::geodesic_position(
                    group.evaluate(&center.word).apply(center.rep).unwrap_or(center.rep),
                    axis,
                );
                [-h, h]
                    .iter()
                    .filter_map(|dt| {
                        let z = axis.point_at(t0 + dt);
                        group.locate(z).ok()
                    })
                    .collect()
            } else {
                let mut v = Vec::new();
                for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                    if let Ok(z) = DiskPoint::new(center.rep.x() + dx, center.rep.y() + dy) {
                        v.push(LocatedPoint::new(center.word.clone(), z));
                    }
                }
                v
            };
            for cand in candidates {
                if evaluations >= budget {
                    break;
                }
                evaluations += 1;
                let r = periodic_residual(group, system, &cand, deck, p, q)?;
                if r < best_r {
                    best_r = r;
                    center = cand;
                    improved = true;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        let witness = if best_r < 1e-6 { Some(center) } else { None };
        return Ok(PeriodicSearchReport { witness, residual: best_r, evaluations });
    }
    Ok(PeriodicSearchReport { witness: None, residual: f64::INFINITY, evaluations })
}

/// One grid point of the star-shape audit.
#[derive(Clone, Debug)]
pub struct StarGridPoint {
    pub target: f64,
    pub achieved: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct StarAuditReport {
    pub word: GroupWord,
    pub v_max: f64,
    pub tolerance: f64,
    pub grid: Vec<StarGridPoint>,
    pub pass: bool,
}

/// Star-shape audit: for each direction with positive v_max, look for
/// recorded (or freshly sampled) speeds near every grid value in [0, v_max].
/// Fresh seeds sweep the tube offsets, which interpolate the speeds of a
/// compactly supported system between 0 and the on-axis speed.
pub fn star_shape_audit(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    estimate: &RotationSetEstimate,
    grid_points: usize,
    delta_frac: f64,
    extra_seeds: usize,
    rng_seed: u64,
) -> Result<Vec<StarAuditReport>, RotationError> {
    let mut out = Vec::new();
    for dir in &estimate.directions {
        if dir.v_max <= 1e-3 {
            continue;
        }
        let tol = delta_frac * dir.v_max;
        let mut pool: Vec<f64> = dir.speeds.iter().copied().filter(|s| *s >= -1e-12).collect();
        // Deterministic offset sweep plus jittered extras.
        let mut seeds: Vec<LocatedPoint> = Vec::new();
        for j in 0..extra_seeds {
            let frac = (j as f64 + 0.5) / extra_seeds as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ (j as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
            let s = 2.0 * frac + 0.005 * rng.gen::<f64>();
            if let Ok(seed) = dynamics::seed_on_geodesic(group, &dir.axis, 0.0, s) {
                seeds.push(seed);
            }
        }
        let fresh = directional_speeds(group, system, &dir.word, &seeds, estimate.steps)?;
        pool.extend(fresh.into_iter().map(flt::abs));
        let mut grid = Vec::with_capacity(grid_points + 1);
        let mut pass = true;
        for k in 0..=grid_points {
            let target = dir.v_max * k as f64 / grid_points as f64;
            let mut achieved = None;
            let mut best = f64::INFINITY;
            for s in &pool {
                let d = flt::abs(s - target);
                if d < best {
                    best = d;
                    achieved = Some(*s);
                }
            }
            let ok = best <= tol;
            if !ok {
                pass = false;
                achieved = None;
            }
            grid.push(StarGridPoint { target, achieved });
        }
        out.push(StarAuditReport { word: dir.word.clone(), v_max: dir.v_max, tolerance: tol, grid, pass });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PowerInverseReport {
    pub v_max: f64,
    pub v_max_squared: f64,
    /// v_max of the inverse system measured along the reversed direction.
    pub v_max_inverse_reversed: f64,
    pub power_ratio: f64,
}

/// Compare max directional speeds of S², S⁻¹ against S along a class.
pub fn power_inverse_audit(
    group: &SurfaceGroup,
    system: &dyn LiftedSystem,
    core: &GroupWord,
    seeds: &[LocatedPoint],
    n: usize,
) -> Result<PowerInverseReport, RotationError> {
    let base = directional_speeds(group, system, core, seeds, n)?;
    let v_max = base.into_iter().fold(0.0f64, |a, s| a.max(s));
    let squared = PowerSystem { base: system, exponent: 2 };
    let sq = directional_speeds(group, &squared, core, seeds, n)?;
    let v_max_squared = sq.into_iter().fold(0.0f64, |a, s| a.max(s));
    let inv = InverseRef(system);
    let rv = directional_speeds(group, &inv, core, seeds, n)?;
    // Moving toward the repelling end is a negative signed speed.
    let v_max_inverse_reversed = rv.into_iter().fold(0.0f64, |a, s| a.max(-s));
    let power_ratio = if v_max > 0.0 { v_max_squared / v_max } else { 0.0 };
    Ok(PowerInverseReport { v_max, v_max_squared, v_max_inverse_reversed, power_ratio })
}

struct InverseRef<'a>(&'a dyn LiftedSystem);

impl LiftedSystem for InverseRef<'_> {
    fn describe(&self) -> alloc::string::String {
        let mut s = alloc::string::String::from("inverse(");
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DeckTranslationSystem, IdentitySystem, TwistSystem};

    #[test]
    fn identity_speeds_are_zero() {
        let group = SurfaceGroup::new(2).unwrap();
        let core = GroupWord::generator(0, false);
        let seeds = alloc::vec![LocatedPoint::at_origin()];
        let report = annulus_rotation_number(&group, &IdentitySystem, &core, &seeds, 10).unwrap();
        assert_eq!(report.interval, (0.0, 0.0));
        assert!(report.sandwich_holds());
    }

    #[test]
    fn deck_translation_speed_is_length() {
        let group = SurfaceGroup::new(2).unwrap();
        let w = GroupWord::generator(0, false);
        let (_, len) = group.axis_of(&w).unwrap();
        let sys = DeckTranslationSystem::new(&group, w.clone()).unwrap();
        let seeds = alloc::vec![LocatedPoint::at_origin()];
        let speeds = directional_speeds(&group, &sys, &w, &seeds, 40).unwrap();
        assert!((speeds[0] - len).abs() < 1e-9, "speed {} vs {}", speeds[0], len);
    }

    #[test]
    fn long_deck_translation_stays_stable() {
        // 400 steps ≈ displacement 900: far beyond direct-evaluation range.
        let group = SurfaceGroup::new(2).unwrap();
        let w = GroupWord::generator(0, false);
        let (_, len) = group.axis_of(&w).unwrap();
        let sys = DeckTranslationSystem::new(&group, w.clone()).unwrap();
        let seeds = alloc::vec![LocatedPoint::at_origin()];
        let speeds = directional_speeds(&group, &sys, &w, &seeds, 400).unwrap();
        assert!((speeds[0] - len).abs() < 1e-9, "speed {} vs {}", speeds[0], len);
    }

    #[test]
    fn twist_on_axis_speed_is_theta() {
        let group = SurfaceGroup::new(2).unwrap();
        let core = GroupWord::generator(0, false);
        let twist = TwistSystem::new(&group, core.clone(), 0.5, 0.7).unwrap();
        let axis = *twist.axis();
        let seed = group.locate(axis.point_at(0.0)).unwrap();
        let speeds = directional_speeds(&group, &twist, &core, &[seed], 200).unwrap();
        assert!((speeds[0] - 0.5).abs() < 1e-9, "speed {}", speeds[0]);
    }

    #[test]
    fn homology_of_commutator_word_vanishes() {
        let group = SurfaceGroup::new(2).unwrap();
        let comm = GroupWord::from_letters([
            crate::group::Letter::new(0, false),
            crate::group::Letter::new(1, false),
            crate::group::Letter::new(0, true),
            crate::group::Letter::new(1, true),
        ]);
        let sys = DeckTranslationSystem::new(&group, comm.clone()).unwrap();
        let traj = dynamics::iterate(&sys, &group, LocatedPoint::at_origin(), 12).unwrap();
        let h = homological_vector(&group, &traj);
        assert!(h.iter().all(|x| x.abs() < 1e-12));
        // The word itself grows.
        assert!(traj.end().word.len() >= 12);
    }

    #[test]
    fn stable_position_matches_direct_for_short_words() {
        let group = SurfaceGroup::new(2).unwrap();
        let w = GroupWord::generator(0, false);
        let (axis, len) = group.axis_of(&w).unwrap();
        let sys = DeckTranslationSystem::new(&group, w.clone()).unwrap();
        let traj = dynamics::iterate(&sys, &group, LocatedPoint::at_origin(), 6).unwrap();
        let t0 = stable_position(&group, traj.start(), &axis, Some(&w)).unwrap();
        let t1 = stable_position(&group, traj.end(), &axis, Some(&w)).unwrap();
        assert!((t1 - t0 - 6.0 * len).abs() < 1e-8, "moved {}", t1 - t0);
    }
}
