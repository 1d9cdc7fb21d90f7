//! Genus-g surface group presented by the regular 4g-gon.
//!
//! The fundamental polygon is the regular hyperbolic 4g-gon centered at the
//! origin with vertex angle π/(2g), so all 4g corners glue to total angle
//! 2π. Reading the boundary counterclockwise the sides carry the edge word
//! a₁ b₁ a₁⁻¹ b₁⁻¹ a₂ b₂ …; the side pairing for each letter maps the
//! partner side onto it reversing the boundary direction, which makes the
//! polygon the Dirichlet domain of the origin. With the b-generators taken
//! as the inverses of the raw b-side pairings, the standard relator
//! Π [aᵢ, bᵢ] evaluates to ±identity.
//!
//! Points of the universal cover are carried as `LocatedPoint`: a freely
//! reduced deck word plus a representative inside (or within tolerance of)
//! the polygon. `locate` folds an arbitrary interior point into that form
//! by greedy descent across violated sides.

use crate::flt;
use crate::hyperbolic::{
    classify, geodesic_offset, geodesic_through, hyp_distance, isometry_mapping, BoundaryPoint,
    DiskPoint, Geodesic, HypError, IsometryClass, MobiusTransform,
};
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;

/// Relator and construction tolerance.
pub const EPS_GROUP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupError {
    /// Genus must be at least 2.
    InvalidGenus,
    /// Greedy descent failed to reach the fundamental domain in budget.
    NumericalEscape,
    /// A located word exceeded the length cap.
    WordTooLong,
    /// Enumeration would visit too many words.
    BudgetExceeded,
    /// The evaluated word is not a hyperbolic isometry.
    NotHyperbolic,
    /// Underlying model arithmetic failure.
    Hyp(HypError),
}

impl From<HypError> for GroupError {
    fn from(e: HypError) -> Self {
        GroupError::Hyp(e)
    }
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::InvalidGenus => write!(f, "genus must be >= 2"),
            GroupError::NumericalEscape => write!(f, "descent to the fundamental domain did not terminate"),
            GroupError::WordTooLong => write!(f, "located word exceeds the length cap"),
            GroupError::BudgetExceeded => write!(f, "word enumeration budget exceeded"),
            GroupError::NotHyperbolic => write!(f, "word does not evaluate to a hyperbolic isometry"),
            GroupError::Hyp(e) => write!(f, "{e}"),
        }
    }
}

/// One letter a_i^{±1} or b_i^{±1}. `gen` indexes a₁,b₁,a₂,b₂,… as
/// 0,1,2,3,…
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: u16, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inverted(&self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    pub fn is_inverse_of(&self, other: &Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }

    /// Rank in the fixed alphabet order a₁ < b₁ < a₁⁻¹ < b₁⁻¹ < a₂ < …
    pub fn rank(&self) -> u32 {
        let block = (self.gen as u32 / 2) * 4;
        block + (self.gen as u32 % 2) + if self.inverse { 2 } else { 0 }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.gen % 2 == 0 { 'a' } else { 'b' };
        let idx = self.gen / 2 + 1;
        if self.inverse {
            write!(f, "{base}{idx}'")
        } else {
            write!(f, "{base}{idx}")
        }
    }
}

/// Freely reduced word over the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord { letters: Vec::new() }
    }

    pub fn generator(gen: u16, inverse: bool) -> Self {
        GroupWord { letters: alloc::vec![Letter::new(gen, inverse)] }
    }

    /// Build from letters, freely reducing.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last().map(|p| p.is_inverse_of(&l)).unwrap_or(false) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        GroupWord::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn push(&self, l: Letter) -> GroupWord {
        GroupWord::from_letters(self.letters.iter().copied().chain(core::iter::once(l)))
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord { letters: self.letters.iter().rev().map(|l| l.inverted()).collect() }
    }

    pub fn pow(&self, n: i32) -> GroupWord {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = GroupWord::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    pub fn conjugated_by(&self, u: &GroupWord) -> GroupWord {
        u.concat(self).concat(&u.inverse())
    }

    /// Signed letter counts per generator: the H₁ class of the word.
    pub fn abelianization(&self, genus: usize) -> Vec<i64> {
        let mut v = alloc::vec![0i64; 2 * genus];
        for l in &self.letters {
            let idx = l.gen as usize;
            if idx < v.len() {
                v[idx] += if l.inverse { -1 } else { 1 };
            }
        }
        v
    }

    /// Strip the maximal literal power of `base` from the end:
    /// self = prefix · base^m with m maximal.
    pub fn split_power_suffix(&self, base: &GroupWord) -> (GroupWord, u32) {
        if base.is_empty() {
            return (self.clone(), 0);
        }
        let b = &base.letters;
        let mut end = self.letters.len();
        let mut m = 0u32;
        while end >= b.len() && self.letters[end - b.len()..end] == b[..] {
            end -= b.len();
            m += 1;
        }
        (GroupWord { letters: self.letters[..end].to_vec() }, m)
    }

    /// The word self⁻¹ · other, with the common prefix cancelled first.
    pub fn relative_word(&self, other: &GroupWord) -> GroupWord {
        let mut k = 0usize;
        while k < self.letters.len() && k < other.letters.len() && self.letters[k] == other.letters[k] {
            k += 1;
        }
        let tail_self: Vec<Letter> = self.letters[k..].iter().rev().map(|l| l.inverted()).collect();
        GroupWord::from_letters(tail_self.into_iter().chain(other.letters[k..].iter().copied()))
    }

    /// Literal periodicity: a cyclically reduced word is a proper power
    /// iff it is a literal power of a shorter block.
    pub fn is_literal_power(&self) -> bool {
        let n = self.letters.len();
        for d in 1..n {
            if n % d != 0 {
                continue;
            }
            if (d..n).all(|i| self.letters[i] == self.letters[i - d]) {
                return true;
            }
        }
        false
    }

    /// Shortlex comparison under the fixed alphabet order.
    pub fn shortlex_cmp(&self, other: &GroupWord) -> core::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                for (l, r) in self.letters.iter().zip(other.letters.iter()) {
                    match l.rank().cmp(&r.rank()) {
                        core::cmp::Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
                core::cmp::Ordering::Equal
            })
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// One side of the fundamental polygon.
#[derive(Clone, Debug)]
pub struct Side {
    /// Full geodesic through the side, oriented along the ccw boundary.
    pub geodesic: Geodesic,
    /// Letter whose transform maps the polygon to the neighbor tile across
    /// this side.
    pub neighbor: Letter,
    /// Sign of `geodesic_offset` on the interior.
    interior_sign: f64,
}

/// The fundamental 4g-gon with its side pairing.
#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    vertices: Vec<DiskPoint>,
    sides: Vec<Side>,
    circumradius: f64,
}

impl FundamentalDomain {
    pub fn vertices(&self) -> &[DiskPoint] {
        &self.vertices
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Signed violation depth of `z` across side `k` (> 0 means outside).
    pub fn violation(&self, z: DiskPoint, k: usize) -> f64 {
        let s = &self.sides[k];
        -s.interior_sign * geodesic_offset(z, &s.geodesic)
    }

    pub fn contains(&self, z: DiskPoint, tol: f64) -> bool {
        (0..self.sides.len()).all(|k| self.violation(z, k) <= tol)
    }

    /// Most violated side, ties broken by smallest pairing letter.
    pub fn worst_side(&self, z: DiskPoint) -> (usize, f64) {
        let mut depth = f64::NEG_INFINITY;
        for k in 0..self.sides.len() {
            depth = depth.max(self.violation(z, k));
        }
        let mut best: Option<usize> = None;
        for k in 0..self.sides.len() {
            if self.violation(z, k) >= depth - 1e-12 {
                let better = match best {
                    None => true,
                    Some(b) => self.sides[k].neighbor.rank() < self.sides[b].neighbor.rank(),
                };
                if better {
                    best = Some(k);
                }
            }
        }
        (best.unwrap_or(0), depth)
    }

    /// Hyperbolic distance from `z` to the side geodesic of side `k`.
    pub fn side_distance(&self, z: DiskPoint, k: usize) -> f64 {
        flt::abs(geodesic_offset(z, &self.sides[k].geodesic))
    }

    /// Uniform-ish random point of the polygon (rejection sampling).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> DiskPoint {
        let r_lim = flt::tanh(self.circumradius / 2.0);
        loop {
            let x = (rng.gen::<f64>() * 2.0 - 1.0) * r_lim;
            let y = (rng.gen::<f64>() * 2.0 - 1.0) * r_lim;
            if let Ok(z) = DiskPoint::new(x, y) {
                if z.norm() <= r_lim && self.contains(z, 1e-12) {
                    return z;
                }
            }
        }
    }
}

/// A point of the universal cover as deck word plus local representative.
#[derive(Clone, Debug)]
pub struct LocatedPoint {
    pub word: GroupWord,
    pub rep: DiskPoint,
}

impl LocatedPoint {
    pub fn at_origin() -> Self {
        LocatedPoint { word: GroupWord::identity(), rep: DiskPoint::origin() }
    }

    pub fn new(word: GroupWord, rep: DiskPoint) -> Self {
        LocatedPoint { word, rep }
    }

    /// Apply a deck word on the left (the surface point is unchanged).
    pub fn translated(&self, u: &GroupWord) -> LocatedPoint {
        LocatedPoint { word: u.concat(&self.word), rep: self.rep }
    }
}

/// Maximum letters a single `locate` call may emit.
pub const LOCATE_WORD_CAP: usize = 64;

/// Report of the empirical quasi-convexity probe.
#[derive(Clone, Debug)]
pub struct QuasiConvexityReport {
    pub r_hat: f64,
    /// Segment endpoints and the witness point realizing r_hat.
    pub witness: Option<(DiskPoint, DiskPoint, DiskPoint)>,
    pub samples: usize,
}

/// Report of the word-length vs. displacement comparison.
#[derive(Clone, Debug)]
pub struct SvarcMilnorReport {
    pub c_hat: f64,
    pub witness: GroupWord,
    pub words_visited: usize,
}

/// A fundamental domain variant for the quasi-convexity probe.
#[derive(Clone, Debug)]
pub enum DomainVariant {
    /// The regular polygon itself (convex).
    Regular,
    /// A strip of width `depth` along side `side` is reassigned to the
    /// paired tile, producing a non-convex fundamental domain.
    Sliver { side: usize, depth: f64 },
}

#[derive(Clone, Debug)]
pub struct SurfaceGroup {
    genus: usize,
    /// a₁, b₁, a₂, b₂, … (inverses derived on demand).
    generators: Vec<MobiusTransform>,
    domain: FundamentalDomain,
    relator: GroupWord,
    min_translation: f64,
}

impl SurfaceGroup {
    /// Regular 4g-gon construction; `g >= 2`.
    pub fn new(genus: usize) -> Result<Self, GroupError> {
        if genus < 2 {
            return Err(GroupError::InvalidGenus);
        }
        let n = 4 * genus;
        // Vertex angle π/(2g): cosh(circumradius) = cot²(π/4g).
        let cot = 1.0 / flt::tan(core::f64::consts::PI / n as f64);
        let circumradius = flt::acosh(cot * cot);
        let r_euc = flt::tanh(circumradius / 2.0);
        let mut vertices = Vec::with_capacity(n);
        for k in 0..n {
            let ang = flt::TAU * k as f64 / n as f64;
            vertices.push(
                DiskPoint::new(r_euc * flt::cos(ang), r_euc * flt::sin(ang))
                    .expect("vertices are interior"),
            );
        }
        let vtx = |k: usize| vertices[k % n];

        // Raw pairing mapping side j onto side i with reversed direction.
        let pairing = |i: usize, j: usize| -> Result<MobiusTransform, HypError> {
            isometry_mapping(vtx(j), vtx(j + 1), vtx(i + 1), vtx(i))
        };

        let mut generators = Vec::with_capacity(2 * genus);
        for m in 0..genus {
            let a = pairing(4 * m, 4 * m + 2)?;
            let b_raw = pairing(4 * m + 1, 4 * m + 3)?;
            generators.push(a);
            generators.push(b_raw.inverse());
        }

        // Neighbor letters: across side 4m is a_m, 4m+1 is b_m⁻¹,
        // 4m+2 is a_m⁻¹, 4m+3 is b_m.
        let mut sides = Vec::with_capacity(n);
        for k in 0..n {
            let m = (k / 4) as u16;
            let neighbor = match k % 4 {
                0 => Letter::new(2 * m, false),
                1 => Letter::new(2 * m + 1, true),
                2 => Letter::new(2 * m, true),
                _ => Letter::new(2 * m + 1, false),
            };
            let geodesic = geodesic_through(vtx(k), vtx(k + 1))?;
            let off0 = geodesic_offset(DiskPoint::origin(), &geodesic);
            sides.push(Side { geodesic, neighbor, interior_sign: if off0 >= 0.0 { 1.0 } else { -1.0 } });
        }

        // Relator Π [a_i, b_i].
        let mut rel = Vec::new();
        for m in 0..genus as u16 {
            rel.push(Letter::new(2 * m, false));
            rel.push(Letter::new(2 * m + 1, false));
            rel.push(Letter::new(2 * m, true));
            rel.push(Letter::new(2 * m + 1, true));
        }
        let relator = GroupWord::from_letters(rel);

        let domain = FundamentalDomain { vertices, sides, circumradius };
        let mut group = SurfaceGroup {
            genus,
            generators,
            domain,
            relator,
            min_translation: f64::INFINITY,
        };
        let mut lmin = f64::INFINITY;
        for g in 0..2 * genus as u16 {
            if let IsometryClass::Hyperbolic { length, .. } =
                classify(&group.letter_transform(Letter::new(g, false)))
            {
                lmin = lmin.min(length);
            }
        }
        group.min_translation = lmin;
        Ok(group)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn domain(&self) -> &FundamentalDomain {
        &self.domain
    }

    pub fn relator(&self) -> &GroupWord {
        &self.relator
    }

    /// Minimal translation length among the generators.
    pub fn min_translation(&self) -> f64 {
        self.min_translation
    }

    pub fn letter_transform(&self, l: Letter) -> MobiusTransform {
        let m = self.generators[l.gen as usize];
        if l.inverse {
            m.inverse()
        } else {
            m
        }
    }

    /// Evaluate a word to a determinant-one matrix. Valid while the
    /// displacement stays within floating-point range (~600); use
    /// `evaluate_projective` beyond that.
    pub fn evaluate(&self, w: &GroupWord) -> MobiusTransform {
        let mut m = MobiusTransform::identity();
        for l in w.letters() {
            m = m.compose(&self.letter_transform(*l));
        }
        m
    }

    /// Evaluate a word projectively (entries rescaled to max-abs 1), immune
    /// to overflow for arbitrarily long words.
    pub fn evaluate_projective(&self, w: &GroupWord) -> ProjectiveTransform {
        let mut p = ProjectiveTransform::identity();
        for l in w.letters() {
            p = p.compose_matrix(&self.letter_transform(*l).matrix());
        }
        p
    }

    /// Displacement d(base, w·base) of the Cayley base point, computed
    /// with log-scale tracking so arbitrarily long words never overflow.
    /// Uses cosh d(i, M i) = ||M||_F^2 / 2 for unit-determinant M.
    pub fn displacement(&self, w: &GroupWord) -> f64 {
        let mut m = [1.0f64, 0.0, 0.0, 1.0];
        let mut log_scale = 0.0f64;
        for l in w.letters() {
            let g = self.letter_transform(*l).matrix();
            let [a, b, c, d] = m;
            let [p, q, r, s] = g;
            m = [a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s];
            let mut mx = 0.0f64;
            for e in m {
                mx = mx.max(flt::abs(e));
            }
            if mx > 0.0 {
                for e in m.iter_mut() {
                    *e /= mx;
                }
                log_scale += flt::ln(mx);
            }
        }
        // The true matrix is e^{log_scale}·m̂ with determinant 1 (products of
        // det-1 factors), so cosh d = e^{2·log_scale}·||m̂||_F²/2.
        let frob = m.iter().map(|e| e * e).sum::<f64>();
        let log_cosh = 2.0 * log_scale + flt::ln(frob / 2.0);
        if log_cosh > 40.0 {
            log_cosh + core::f64::consts::LN_2
        } else {
            flt::acosh(flt::exp(log_cosh).max(1.0))
        }
    }

    pub fn relator_residual(&self) -> f64 {
        self.evaluate(&self.relator)
            .distance_up_to_sign(&MobiusTransform::identity())
    }

    /// Sum of interior angles of the fundamental polygon (should be 2π).
    pub fn vertex_angle_sum(&self) -> f64 {
        let n = self.domain.vertices.len();
        let mut total = 0.0;
        for k in 0..n {
            let v = self.domain.vertices[k];
            let prev = self.domain.vertices[(k + n - 1) % n];
            let next = self.domain.vertices[(k + 1) % n];
            total += corner_angle(v, prev, next);
        }
        total
    }

    /// Fold an interior point into (deck word, representative in the
    /// polygon) by greedy descent across violated sides.
    pub fn locate(&self, z: DiskPoint) -> Result<LocatedPoint, GroupError> {
        let mut rep = z;
        let mut letters: Vec<Letter> = Vec::new();
        let d0 = hyp_distance(DiskPoint::origin(), z);
        let budget = (10.0 * (1.0 + d0 / self.min_translation)) as usize + 10;
        for _ in 0..budget {
            let (k, depth) = self.domain.worst_side(rep);
            if depth <= 1e-12 {
                // Inside (or on the boundary within tolerance).
                return Ok(LocatedPoint::new(GroupWord::from_letters(letters), rep));
            }
            let l = self.domain.sides[k].neighbor;
            rep = self
                .letter_transform(l)
                .inverse()
                .apply(rep)
                .map_err(GroupError::from)?;
            // Free reduction on the fly keeps the invariant.
            if letters.last().map(|p| p.is_inverse_of(&l)).unwrap_or(false) {
                letters.pop();
            } else {
                letters.push(l);
            }
            if letters.len() > LOCATE_WORD_CAP {
                return Err(GroupError::WordTooLong);
            }
        }
        Err(GroupError::NumericalEscape)
    }

    /// Reconstruct the cover point of a located point.
    pub fn reconstruct(&self, p: &LocatedPoint) -> Result<DiskPoint, GroupError> {
        Ok(self.evaluate(&p.word).apply(p.rep)?)
    }

    /// Boundary direction (angle) of the cover point, stable for long words.
    pub fn direction_of(&self, p: &LocatedPoint) -> BoundaryPoint {
        self.evaluate_projective(&p.word).direction_of(p.rep)
    }

    /// Hyperbolic distance between two cover points, valid while the
    /// relative word is short enough for direct evaluation.
    pub fn cover_distance(&self, p: &LocatedPoint, q: &LocatedPoint) -> Result<f64, GroupError> {
        let rel = p.word.inverse().concat(&q.word);
        let img = self.evaluate(&rel).apply(q.rep)?;
        Ok(hyp_distance(p.rep, img))
    }

    /// Axis and translation length of a word.
    pub fn axis_of(&self, w: &GroupWord) -> Result<(Geodesic, f64), GroupError> {
        match classify(&self.evaluate(w)) {
            IsometryClass::Hyperbolic { axis, length } => Ok((axis, length)),
            _ => Err(GroupError::NotHyperbolic),
        }
    }

    /// Visit every freely reduced nonempty word of length <= radius in
    /// shortlex order, with its evaluated matrix. The visitor returns true
    /// to continue, false to stop the walk.
    pub fn for_each_reduced_word<F>(&self, radius: usize, budget: usize, f: &mut F) -> Result<usize, GroupError>
    where
        F: FnMut(&[Letter], &MobiusTransform) -> bool,
    {
        // Letters in alphabet rank order.
        let mut alphabet: Vec<Letter> = Vec::new();
        for g in 0..2 * self.genus as u16 {
            alphabet.push(Letter::new(g, false));
            alphabet.push(Letter::new(g, true));
        }
        alphabet.sort_by_key(|l| l.rank());
        let mut visited = 0usize;
        let mut stack_letters: Vec<Letter> = Vec::new();
        let mut stack_mats: Vec<MobiusTransform> = alloc::vec![MobiusTransform::identity()];
        // Iterative DFS over the prefix tree in alphabet order.
        let mut cursor: Vec<usize> = alloc::vec![0];
        loop {
            let depth = stack_letters.len();
            let next_idx = cursor[depth];
            if next_idx >= alphabet.len() || depth >= radius {
                if depth == 0 {
                    return Ok(visited);
                }
                stack_letters.pop();
                stack_mats.pop();
                cursor.pop();
                let d = stack_letters.len();
                cursor[d] += 1;
                continue;
            }
            let l = alphabet[next_idx];
            if stack_letters.last().map(|p| p.is_inverse_of(&l)).unwrap_or(false) {
                cursor[depth] += 1;
                continue;
            }
            visited += 1;
            if visited > budget {
                return Err(GroupError::BudgetExceeded);
            }
            let m = stack_mats.last().unwrap().compose(&self.letter_transform(l));
            stack_letters.push(l);
            stack_mats.push(m);
            cursor.push(0);
            if !f(&stack_letters, &m) {
                return Ok(visited);
            }
        }
    }

    /// Empirical quasi-convexity constant of a fundamental-domain variant:
    /// samples segment pairs inside the domain, walks the geodesic segment,
    /// and measures the worst distance back to the domain.
    pub fn quasi_convexity_probe(
        &self,
        variant: &DomainVariant,
        samples: usize,
        seed: u64,
    ) -> QuasiConvexityReport {
        use rand::SeedableRng;
        let member = |z: DiskPoint| self.variant_contains(variant, z);
        // Deterministic target cloud for distance measurement.
        let cloud = self.variant_cloud(variant);
        let mut r_hat = 0.0f64;
        let mut witness = None;
        let mut walk = |p: DiskPoint, q: DiskPoint, r_hat: &mut f64, witness: &mut Option<(DiskPoint, DiskPoint, DiskPoint)>| {
            if hyp_distance(p, q) < 1e-9 {
                return;
            }
            let g = match geodesic_through(p, q) {
                Ok(g) => g,
                Err(_) => return,
            };
            let (tp, tq) = (
                crate::hyperbolic::geodesic_position(p, &g),
                crate::hyperbolic::geodesic_position(q, &g),
            );
            let steps = (flt::abs(tq - tp) * 40.0) as usize + 2;
            for s in 0..=steps {
                let t = tp + (tq - tp) * (s as f64) / (steps as f64);
                let x = g.point_at(t);
                if member(x) {
                    continue;
                }
                let mut d = f64::INFINITY;
                for c in &cloud {
                    d = d.min(hyp_distance(x, *c));
                }
                if d > *r_hat {
                    *r_hat = d;
                    *witness = Some((p, q, x));
                }
            }
        };
        // Deterministic boundary net: non-convexity witnesses live on
        // chords between near-boundary points, which independent uniform
        // sampling almost never pairs up. The polygon boundary radius
        // varies with the angle, so trace it by bisection.
        let mut net: Vec<DiskPoint> = Vec::new();
        let r_lim = flt::tanh(self.domain.circumradius / 2.0);
        for j in 0..64 {
            let a = flt::TAU * (j as f64) / 64.0;
            let (ca, sa) = (flt::cos(a), flt::sin(a));
            let mut lo = 0.0f64;
            let mut hi = r_lim * 1.001;
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                let inside = DiskPoint::new(mid * ca, mid * sa)
                    .map(|z| self.domain.contains(z, 1e-12))
                    .unwrap_or(false);
                if inside {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            for shrink in [0.995, 0.9] {
                if let Ok(z) = DiskPoint::new(lo * shrink * ca, lo * shrink * sa) {
                    if member(z) {
                        net.push(z);
                    } else if let DomainVariant::Sliver { side, .. } = variant {
                        // Points in the removed sliver contribute through
                        // their reassigned copy.
                        let t = self.letter_transform(self.domain.sides[*side].neighbor.inverted());
                        if self.domain.contains(z, 1e-9) {
                            if let Ok(img) = t.apply(z) {
                                net.push(img);
                            }
                        }
                    }
                }
            }
        }
        for i in 0..net.len() {
            for j in i + 1..net.len() {
                walk(net[i], net[j], &mut r_hat, &mut witness);
            }
        }
        for i in 0..samples {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let p = self.sample_variant_point(variant, &mut rng);
            let q = self.sample_variant_point(variant, &mut rng);
            walk(p, q, &mut r_hat, &mut witness);
        }
        QuasiConvexityReport { r_hat, witness, samples }
    }

    fn variant_contains(&self, variant: &DomainVariant, z: DiskPoint) -> bool {
        match variant {
            DomainVariant::Regular => self.domain.contains(z, 1e-9),
            DomainVariant::Sliver { side, depth } => {
                let in_d = self.domain.contains(z, 1e-9);
                if in_d && self.domain.side_distance(z, *side) >= *depth {
                    return true;
                }
                // Reassigned copy: T = neighbor(partner side) = neighbor(side)⁻¹.
                let t = self.letter_transform(self.domain.sides[*side].neighbor.inverted());
                if let Ok(back) = t.inverse().apply(z) {
                    self.domain.contains(back, 1e-9) && self.domain.side_distance(back, *side) < *depth
                } else {
                    false
                }
            }
        }
    }

    fn sample_variant_point<R: Rng>(&self, variant: &DomainVariant, rng: &mut R) -> DiskPoint {
        loop {
            let z = self.domain.sample_point(rng);
            match variant {
                DomainVariant::Regular => return z,
                DomainVariant::Sliver { .. } => {
                    if self.variant_contains(variant, z) {
                        return z;
                    }
                    // Otherwise z was in the sliver: its reassigned copy is
                    // a valid sample of the variant domain.
                    let side = match variant {
                        DomainVariant::Sliver { side, .. } => *side,
                        _ => unreachable!(),
                    };
                    let t = self.letter_transform(self.domain.sides[side].neighbor.inverted());
                    if let Ok(img) = t.apply(z) {
                        return img;
                    }
                }
            }
        }
    }

    fn variant_cloud(&self, variant: &DomainVariant) -> Vec<DiskPoint> {
        let mut cloud = Vec::new();
        let r_lim = flt::tanh(self.domain.circumradius / 2.0);
        let n_r = 28;
        let n_a = 96;
        for i in 0..=n_r {
            let r = r_lim * (i as f64) / (n_r as f64);
            for j in 0..n_a {
                let a = flt::TAU * (j as f64) / (n_a as f64);
                if let Ok(z) = DiskPoint::new(r * flt::cos(a), r * flt::sin(a)) {
                    if self.variant_contains(variant, z) {
                        cloud.push(z);
                    } else if let DomainVariant::Sliver { side, .. } = variant {
                        let t = self.letter_transform(self.domain.sides[*side].neighbor.inverted());
                        if self.domain.contains(z, 1e-9) {
                            if let Ok(img) = t.apply(z) {
                                cloud.push(img);
                            }
                        }
                    }
                }
            }
        }
        cloud
    }

    /// Max over reduced words of max(word length / displacement,
    /// displacement / word length), displacement measured at the origin.
    pub fn svarc_milnor_probe(&self, radius: usize) -> Result<SvarcMilnorReport, GroupError> {
        let origin = DiskPoint::origin();
        let mut c_hat = 0.0f64;
        let mut witness = GroupWord::identity();
        let visited = self.for_each_reduced_word(radius, 1_000_000, &mut |letters, m| {
            if let Ok(img) = m.apply(origin) {
                let d = hyp_distance(origin, img);
                if d > 1e-12 {
                    let l = letters.len() as f64;
                    let c = (l / d).max(d / l);
                    if c > c_hat {
                        c_hat = c;
                        witness = GroupWord::from_letters(letters.iter().copied());
                    }
                }
            }
            true
        })?;
        Ok(SvarcMilnorReport { c_hat, witness, words_visited: visited })
    }
}

/// Scale-free matrix for long-word boundary actions.
#[derive(Clone, Copy, Debug)]
pub struct ProjectiveTransform {
    m: [f64; 4],
}

impl ProjectiveTransform {
    pub fn identity() -> Self {
        ProjectiveTransform { m: [1.0, 0.0, 0.0, 1.0] }
    }

    pub fn from_mobius(m: &MobiusTransform) -> Self {
        let mut p = ProjectiveTransform { m: m.matrix() };
        p.rescale();
        p
    }

    fn rescale(&mut self) {
        let mut mx = 0.0f64;
        for e in self.m {
            mx = mx.max(flt::abs(e));
        }
        if mx > 0.0 && mx.is_finite() {
            for e in self.m.iter_mut() {
                *e /= mx;
            }
        }
    }

    pub fn compose_matrix(&self, other: &[f64; 4]) -> ProjectiveTransform {
        let [a, b, c, d] = self.m;
        let [p, q, r, s] = *other;
        let mut out = ProjectiveTransform { m: [a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s] };
        out.rescale();
        out
    }

    pub fn apply_boundary(&self, p: BoundaryPoint) -> BoundaryPoint {
        let [a, b, c, d] = self.m;
        let [x, y] = p.homogeneous();
        BoundaryPoint::from_homogeneous(a * x + b * y, c * x + d * y)
    }

    /// Boundary direction of the image of an interior point (the image may
    /// be far outside the representable margin; only its angle is returned).
    pub fn direction_of(&self, z: DiskPoint) -> BoundaryPoint {
        let w = crate::hyperbolic::disk_to_half(z);
        let [a, b, c, d] = self.m;
        let img = (w * a + b) / (w * c + d);
        let disk = crate::hyperbolic::half_to_disk(img);
        BoundaryPoint::new(flt::atan2(disk.im, disk.re))
    }
}

/// Unsigned corner angle at `v` between the geodesics toward `p` and `q`.
fn corner_angle(v: DiskPoint, p: DiskPoint, q: DiskPoint) -> f64 {
    let tp = geodesic_tangent(v, p);
    let tq = geodesic_tangent(v, q);
    let dot = tp.0 * tq.0 + tp.1 * tq.1;
    flt::acos(dot.clamp(-1.0, 1.0))
}

/// Euclidean unit tangent at `v` of the geodesic arc from `v` to `q`
/// (conformal model, so euclidean angles are hyperbolic angles).
fn geodesic_tangent(v: DiskPoint, q: DiskPoint) -> (f64, f64) {
    let cross = v.x() * q.y() - v.y() * q.x();
    if flt::abs(cross) < 1e-13 {
        let (dx, dy) = (q.x() - v.x(), q.y() - v.y());
        let n = flt::hypot(dx, dy);
        return (dx / n, dy / n);
    }
    // Orthogonal-circle center from |c|² = r² + 1.
    let rhs_v = (v.norm() * v.norm() + 1.0) / 2.0;
    let rhs_q = (q.norm() * q.norm() + 1.0) / 2.0;
    let det = v.x() * q.y() - v.y() * q.x();
    let cx = (rhs_v * q.y() - rhs_q * v.y()) / det;
    let cy = (v.x() * rhs_q - q.x() * rhs_v) / det;
    let (rx, ry) = (v.x() - cx, v.y() - cy);
    let mut t = (-ry, rx);
    // Point toward q along the arc.
    if t.0 * (q.x() - v.x()) + t.1 * (q.y() - v.y()) < 0.0 {
        t = (ry, -rx);
    }
    let n = flt::hypot(t.0, t.1);
    (t.0 / n, t.1 / n)
}
