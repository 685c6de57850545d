//! Separating a loxodromic element from a finite-index reflection subgroup.
//!
//! The convex hull of the axis in the tessellation (the smallest union of
//! tiles that is an intersection of wall half-spaces) is invariant under the
//! element `alpha`. Cutting it between a wall `W` crossing the axis and its
//! translate `alpha^m W` (disjoint from `W`) leaves a compact convex union `D`
//! of tiles with right dihedral angles, so the reflections in the walls of
//! `D` generate a subgroup `H` with fundamental domain `D` and index `|D|`.
//! `D` holds `m` periods of `k` tiles each. Folding `alpha x` back into `D`
//! with those reflections gives `h` in `H` with `h alpha x` in `D`; then
//! `alpha` lies in `H` exactly when `h alpha` is the identity.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lorentz::{Geodesic, Hyperplane, Isometry, IsometryClass, LorentzVector, Point, GEOM_TOL};
use crate::math::{asinh, atanh, ceil, exp, ln, round, sinh, sqrt, tanh};
use crate::polyhedron::{fold_with_walls, word_to_isometry, Polyhedron};
use crate::spherical::max_threshold;
use crate::tiling::{normal_form, reduce_racg, tiles_meeting_region_from, wall_word, Tile, TileFrame, TileSet};
use crate::tubes::{index_bound, BoundInputs};

/// Tunable tolerances and limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparatorConfig {
    /// Tolerance for side tests and folding.
    pub tol: f64,
    /// Fewest periods of the axis covered by the region.
    pub min_periods: usize,
    /// Give up if no transverse wall is disjoint from its translate by then.
    pub max_periods: usize,
    /// Maximum number of candidate tiles.
    pub frontier_bound: usize,
    /// Fold residuals above this certify that the element is not in `H`.
    pub certification_margin: f64,
    /// Fold residuals below this mean the element is in `H`.
    pub identity_tol: f64,
    /// Refuse elements whose axis lies inside a wall of the tessellation.
    pub strict_axis: bool,
    /// Extra length added at both ends of the candidate segment.
    pub end_margin: f64,
    /// Samples (per period) for the axis-containment check.
    pub axis_samples: usize,
}

impl Default for SeparatorConfig {
    fn default() -> Self {
        Self {
            tol: GEOM_TOL,
            min_periods: 2,
            max_periods: 16,
            frontier_bound: 200_000,
            certification_margin: 0.1,
            identity_tol: 1e-8,
            strict_axis: false,
            end_margin: 0.25,
            axis_samples: 64,
        }
    }
}

/// A face of a region tile lying on the region boundary, with the outward
/// normal of its wall.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryWall {
    pub tile: usize,
    pub face: usize,
    pub normal: Hyperplane,
}

/// The element conjugated by a short word so that its axis passes near the
/// polyhedron. Axis parameters of a construction refer to this axis.
#[derive(Clone, Debug)]
pub struct AxisChart {
    pub alpha_word: Vec<usize>,
    /// `c` with `alpha = c core c^{-1}`.
    pub conjugator: Vec<usize>,
    pub core_word: Vec<usize>,
    pub axis: Geodesic,
    pub translation_length: f64,
}

impl AxisChart {
    pub fn new(p: &Polyhedron, alpha_word: &[usize]) -> Result<Self> {
        if let Some(&f) = alpha_word.iter().find(|&&f| f >= p.face_count()) {
            return Err(Error::InvalidWord(format!("no face {f}")));
        }
        let mut core_word = reduce_racg(p, alpha_word);
        let mut conjugator = Vec::new();
        'shorten: loop {
            for x in 0..p.face_count() {
                let mut w = alloc::vec![x];
                w.extend_from_slice(&core_word);
                w.push(x);
                let w = reduce_racg(p, &w);
                if w.len() < core_word.len() {
                    conjugator.push(x);
                    core_word = w;
                    continue 'shorten;
                }
            }
            break;
        }
        let core = word_to_isometry(p, &core_word)?;
        let class = core.classify()?;
        if class != IsometryClass::Loxodromic {
            return Err(Error::NotLoxodromic { class });
        }
        Ok(Self {
            alpha_word: alpha_word.to_vec(),
            conjugator,
            core_word,
            axis: core.axis()?,
            translation_length: core.translation_length()?,
        })
    }
}

/// Coordinates centred on a point of the axis and anchored at the tile
/// containing it, so that precision does not depend on how far the axis is
/// from the polyhedron.
#[derive(Clone, Debug)]
pub struct AxisFrame {
    pub tiles: TileFrame,
    /// The axis, parametrized as in the chart it came from.
    pub axis: Geodesic,
    pub alpha: Isometry,
    pub alpha_word: Vec<usize>,
}

impl AxisFrame {
    /// The frame centred at the chart axis point with parameter `t`.
    pub fn at(p: &Polyhedron, chart: &AxisChart, t: f64, tol: f64) -> Result<Self> {
        let x = chart.axis.point_at(t);
        let (s, _, y) = fold_with_walls(p.normals(), p.dim(), &x, tol)?;
        let mut anchor = chart.conjugator.clone();
        anchor.extend_from_slice(&s);
        Self::anchored(p, &chart.alpha_word, &anchor, &y, t)
    }

    /// The frame centred at `centre`, a point of the axis with parameter `t`
    /// given in the coordinates of the tile `anchor`.
    pub fn anchored(p: &Polyhedron, alpha_word: &[usize], anchor: &[usize], centre: &Point, t: f64) -> Result<Self> {
        let shift = Isometry::translation_to(centre);
        let tiles = TileFrame::new(p, anchor, shift.inverse());
        let alpha = tiles.element(p, alpha_word)?;
        let axis = alpha.axis()?.shifted(-t);
        Ok(Self {
            tiles,
            axis,
            alpha,
            alpha_word: alpha_word.to_vec(),
        })
    }

    /// The frame centred at the axis point with parameter `t`.
    pub fn moved_to(&self, p: &Polyhedron, t: f64, tol: f64) -> Result<Self> {
        let x = self.to_anchor(&self.axis.point_at(t));
        let (s, _, y) = fold_with_walls(p.normals(), p.dim(), &x, tol)?;
        let mut anchor = self.tiles.anchor().to_vec();
        anchor.extend_from_slice(&s);
        Self::anchored(p, &self.alpha_word, &anchor, &y, t)
    }

    pub fn tile(&self, p: &Polyhedron, word: &[usize]) -> Result<Tile> {
        self.tiles.tile(p, word)
    }

    /// Frame coordinates to those of the anchor tile.
    pub fn to_anchor(&self, x: &Point) -> Point {
        self.tiles.local().inverse().apply(x)
    }
}

/// Axis frames one unit apart. A wall is tested against the axis in the
/// frame nearest to it: in a single frame the rounding error of such tests
/// grows like `exp(2 d)` with the distance `d` from the frame centre.
struct Ladder {
    frames: Vec<AxisFrame>,
    lo: f64,
}

impl Ladder {
    fn new(p: &Polyhedron, from: &AxisFrame, lo: f64, hi: f64, tol: f64) -> Result<Self> {
        let n = ceil(hi - lo).max(0.0) as usize + 1;
        let frames = (0..n)
            .map(|i| from.moved_to(p, lo + i as f64, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { frames, lo })
    }

    fn nearest(&self, t: f64) -> &AxisFrame {
        let i = round(t - self.lo).max(0.0) as usize;
        &self.frames[i.min(self.frames.len() - 1)]
    }

    fn side(&self, p: &Polyhedron, w: &WallRef, tol: f64) -> Result<AxisSide> {
        let f = self.nearest(w.foot);
        Ok(axis_side(&f.axis, &f.tiles.wall_normal(p, &w.word, w.face)?, tol))
    }

    fn crossing(&self, p: &Polyhedron, w: &WallRef, tol: f64) -> Result<Option<Crossing>> {
        let f = self.nearest(w.foot);
        let n = f.tiles.wall_normal(p, &w.word, w.face)?;
        if axis_side(&f.axis, &n, tol) != AxisSide::Crosses {
            return Ok(None);
        }
        let Some(at) = f.axis.crossing_parameter(&Hyperplane::new_unchecked(n.clone())) else {
            return Ok(None);
        };
        let forward = f.axis.forward().dot(&n) > 0.0;
        let sin_angle = f.axis.tangent_at(at).dot(&n).abs().min(1.0);
        Ok(Some(Crossing {
            wall: w.clone(),
            forward,
            at,
            sin_angle,
        }))
    }
}

/// A convex union of tiles cut from the convex hull of an axis.
#[derive(Clone, Debug)]
pub struct ConvexTileRegion {
    /// Tiles in frame coordinates.
    pub tiles: TileSet,
    /// One entry per distinct wall, outward normals in frame coordinates.
    pub walls: Vec<BoundaryWall>,
    pub frame: AxisFrame,
    /// Axis parameters where the two cutting walls cross it.
    pub segment: (f64, f64),
    /// Cutting wall at the start of the segment, as `(tile, face)`.
    pub slab_wall: (usize, usize),
    pub periods: usize,
    /// Walls of the tessellation that contain the axis.
    pub walls_containing_axis: usize,
}

impl ConvexTileRegion {
    /// Ends of the axis segment in the coordinates of the anchor tile.
    pub fn segment_points(&self) -> (Point, Point) {
        let f = &self.frame;
        (
            f.to_anchor(&f.axis.point_at(self.segment.0)),
            f.to_anchor(&f.axis.point_at(self.segment.1)),
        )
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// Evidence that the element is outside `H`: the wall reflections used to
/// fold `alpha x` back into the region and `|h alpha - I|`.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldWitness {
    pub walls: Vec<usize>,
    pub residual: f64,
}

/// Self-contained record of a separation, checkable with
/// [`verify_certificate`].
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    pub polyhedron: String,
    pub alpha_word: Vec<usize>,
    pub translation_length: f64,
    pub periods: usize,
    /// Tiles per period.
    pub k: usize,
    pub index: usize,
    /// Index bound for one period pair (the tube bound over one length).
    pub length_bound: f64,
    pub tile_words: Vec<Vec<usize>>,
    /// Boundary walls as `(tile, face)`.
    pub walls: Vec<(usize, usize)>,
    pub slab_wall: (usize, usize),
    /// Tile containing the midpoint of the axis segment.
    pub anchor: Vec<usize>,
    /// Midpoint of the axis segment in the coordinates of the anchor tile.
    pub midpoint: Vec<f64>,
    pub reference_tile: usize,
    pub fold_witness: FoldWitness,
}

impl SeparationCertificate {
    /// Bound the index is checked against: the length bound scaled by the
    /// number of period pairs.
    pub fn effective_bound(&self) -> f64 {
        self.length_bound * self.periods as f64 / 2.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum AxisSide {
    Crosses,
    Positive,
    Negative,
    Contains,
}

/// Position of a wall relative to the axis. With `plus`, `minus` scaled so
/// that `<plus, minus> = -1/2` and a unit normal, the product
/// `<plus, n><minus, n>` does not depend on where the axis is parametrized:
/// it is `-sin^2(angle)/4` for a crossing wall and `sinh^2(distance)/4` for
/// a disjoint one.
fn axis_side(axis: &Geodesic, n: &LorentzVector, tol: f64) -> AxisSide {
    let a = axis.forward().dot(n);
    let b = axis.backward().dot(n);
    let q = a * b / n.norm_sq();
    if q.abs() <= tol {
        AxisSide::Contains
    } else if q < 0.0 {
        AxisSide::Crosses
    } else if a + b > 0.0 {
        AxisSide::Positive
    } else {
        AxisSide::Negative
    }
}

/// Distance from the tile to the geodesic segment `axis([lo, hi])`.
fn tile_segment_distance(p: &Polyhedron, tile: &Tile, axis: &Geodesic, lo: f64, hi: f64) -> f64 {
    // the tile projects into this window around the foot of its base point
    let foot = axis.foot_parameter(&tile.base_point);
    let spread = p.circumradius() + 1.0;
    let (a, b) = ((foot - spread).max(lo), (foot + spread).min(hi));
    if !(a <= b) {
        let end = if foot < lo { lo } else { hi };
        return tile.distance_to_point(p, &axis.point_at(end));
    }
    tile.min_distance_along(p, a, b, |t| axis.point_at(t)).1
}

/// Whether the tile comes within `r` of `axis([lo, hi])`. The base point
/// settles most tiles without a search.
fn tile_near_segment(p: &Polyhedron, tile: &Tile, axis: &Geodesic, lo: f64, hi: f64, r: f64) -> bool {
    let x = &tile.base_point;
    let t = axis.foot_parameter(x).clamp(lo, hi);
    let d = x.distance(&axis.point_at(t));
    if d <= r {
        return true;
    }
    if d > r + p.circumradius() + 1e-9 {
        return false;
    }
    // a tile wall with the whole segment more than r beyond it
    let walled_off = tile.walls.iter().any(|n| {
        let (a, b) = (axis.forward().dot(n), axis.backward().dot(n));
        let at = |t: f64| a * exp(t) + b * exp(-t);
        let mut least = at(lo).min(at(hi));
        if a > 0.0 && b > 0.0 {
            least = least.min(at((0.5 * ln(b / a)).clamp(lo, hi)));
        }
        least > sinh(r)
    });
    if walled_off {
        return false;
    }
    let vertex_near = tile.vertices.iter().any(|v| {
        let t = axis.foot_parameter(v).clamp(lo, hi);
        v.distance(&axis.point_at(t)) <= r
    });
    vertex_near || tile_segment_distance(p, tile, axis, lo, hi) <= r
}

/// Distance from the tile to the complete axis.
pub fn tile_axis_distance(p: &Polyhedron, tile: &Tile, axis: &Geodesic) -> f64 {
    let foot = axis.foot_parameter(&tile.base_point);
    let spread = p.circumradius() + 1.0;
    tile_segment_distance(p, tile, axis, foot - spread, foot + spread)
}

/// A wall of the tessellation, seen as face `face` of the tile `word`.
#[derive(Clone, Debug)]
struct WallRef {
    /// Outward normal from the tile, in the coordinates it was listed in.
    normal: LorentzVector,
    word: Vec<usize>,
    face: usize,
    key: Vec<usize>,
    /// Axis parameter nearest to the tile.
    foot: f64,
}

impl WallRef {
    fn new(p: &Polyhedron, tile: &Tile, face: usize, axis: &Geodesic) -> Self {
        Self {
            normal: tile.walls[face].clone(),
            word: tile.word.clone(),
            face,
            key: wall_word(p, &tile.word, face),
            foot: axis.foot_parameter(&tile.base_point),
        }
    }
}

/// A wall crossing the axis.
#[derive(Clone, Debug)]
struct Crossing {
    wall: WallRef,
    /// Whether the outward normal of the wall points to the forward end.
    forward: bool,
    at: f64,
    sin_angle: f64,
}

/// Distinct walls of a set of tiles.
fn distinct_walls(p: &Polyhedron, tiles: &TileSet, axis: &Geodesic) -> Vec<WallRef> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for t in tiles.iter() {
        for face in 0..p.face_count() {
            let w = WallRef::new(p, t, face, axis);
            if seen.insert(w.key.clone(), ()).is_none() {
                out.push(w);
            }
        }
    }
    out
}

/// `alpha^k` followed by `tail`, as a word.
fn power_word(alpha_word: &[usize], k: i64, tail: &[usize]) -> Vec<usize> {
    let mut w = Vec::with_capacity(k.unsigned_abs() as usize * alpha_word.len() + tail.len());
    for _ in 0..k.unsigned_abs() {
        if k > 0 {
            w.extend_from_slice(alpha_word);
        } else {
            w.extend(alpha_word.iter().rev());
        }
    }
    w.extend_from_slice(tail);
    w
}

/// The image of a crossing wall under `alpha^k`: the same face of the
/// translated tile, crossing the axis in the same direction.
fn translate(p: &Polyhedron, alpha_word: &[usize], ell: f64, k: i64, c: &Crossing, frame: &AxisFrame) -> Result<Crossing> {
    let word = normal_form(p, &power_word(alpha_word, k, &c.wall.word));
    let tile = frame.tile(p, &word)?;
    let wall = WallRef::new(p, &tile, c.wall.face, &frame.axis);
    Ok(Crossing {
        wall,
        forward: c.forward,
        at: c.at + k as f64 * ell,
        sin_angle: c.sin_angle,
    })
}

/// Inner products of distinct walls of the tessellation are 0 (crossing
/// walls) or at least the cosh of a definite gap, so this tolerance only has
/// to absorb rounding.
const WALL_MATCH_TOL: f64 = 1e-4;

fn disjoint(a: &LorentzVector, b: &LorentzVector) -> bool {
    a.dot(b).abs() > 1.0 + WALL_MATCH_TOL
}

/// Whether a crossing wall and its translate by `alpha^k` are disjoint,
/// compared in a frame centred between them.
fn apart_from_translate(p: &Polyhedron, from: &AxisFrame, ell: f64, k: i64, c: &Crossing, tol: f64) -> Result<(Crossing, bool)> {
    let mid = from.moved_to(p, c.at + 0.5 * k as f64 * ell, tol)?;
    let near = mid.tiles.wall_normal(p, &c.wall.word, c.wall.face)?;
    let far = translate(p, &from.alpha_word, ell, k, c, &mid)?;
    let apart = disjoint(&near, &far.wall.normal);
    Ok((far, apart))
}

/// Chooses the cutting wall: among walls crossing the axis within one
/// period, the steepest (then earliest) one disjoint from its translate by
/// `alpha^m`, for the least `m >= min_periods`. Returns the crossing and
/// `m`, with the axis parameter reduced to `[0, l)`.
fn choose_cut(p: &Polyhedron, chart: &AxisChart, cfg: &SeparatorConfig) -> Result<(Crossing, usize)> {
    let ell = chart.translation_length;
    let frame = AxisFrame::at(p, chart, 0.5 * ell, cfg.tol)?;
    let along = tiles_meeting_region_from(
        p,
        &frame.tiles,
        frame.tiles.anchor(),
        |t| tile_near_segment(p, t, &frame.axis, 0.0, ell, 1e-7),
        cfg.frontier_bound,
    )?;
    let ladder = Ladder::new(p, &frame, -1.0, ell + 1.0, cfg.tol)?;
    let mut crossings = Vec::new();
    for w in distinct_walls(p, &along, &frame.axis) {
        if let Some(c) = ladder.crossing(p, &w, cfg.tol)? {
            if (0.0..ell).contains(&c.at) {
                crossings.push(c);
            }
        }
    }
    if crossings.is_empty() {
        return Err(Error::Numerical("no wall crosses the axis within one period".into()));
    }
    for m in cfg.min_periods.max(1)..=cfg.max_periods {
        let mut best: Option<&Crossing> = None;
        for c in &crossings {
            if !apart_from_translate(p, &frame, ell, m as i64, c, cfg.tol)?.1 {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    c.sin_angle > b.sin_angle + 1e-9 || ((c.sin_angle - b.sin_angle).abs() <= 1e-9 && c.at < b.at)
                }
            };
            if better {
                best = Some(c);
            }
        }
        if let Some(b) = best {
            return Ok((b.clone(), m));
        }
    }
    Err(Error::Numerical(format!(
        "no crossing wall is disjoint from its translate within {} periods",
        cfg.max_periods
    )))
}

/// Builds the convex region for the loxodromic `alpha`, covering at least
/// `periods` periods of its axis. The segment is placed as close as possible
/// to the foot of the perpendicular from the origin.
pub fn p_convexification(p: &Polyhedron, chart: &AxisChart, periods: usize, cfg: &SeparatorConfig) -> Result<ConvexTileRegion> {
    let ell = chart.translation_length;
    let cfg = SeparatorConfig {
        min_periods: periods,
        ..*cfg
    };
    let (cut, m) = choose_cut(p, chart, &cfg)?;
    let span = m as f64 * ell;
    let shift = round(-(cut.at + 0.5 * span) / ell);
    let t0 = cut.at + shift * ell;
    let t1 = t0 + span;
    let frame = AxisFrame::at(p, chart, 0.5 * (t0 + t1), cfg.tol)?;

    let r = max_threshold(p.dim())?;
    // axial reach of the cutting walls inside the r-tube
    let s_max = asinh(sinh(r) / cut.sin_angle.max(1e-12));
    let reach = atanh((tanh(s_max) * sqrt(1.0 - cut.sin_angle * cut.sin_angle)).min(1.0 - 1e-15));
    let lo = t0 - reach - cfg.end_margin;
    let hi = t1 + reach + cfg.end_margin;
    let radius = r + p.diameter() + cfg.tol;
    let candidates = tiles_meeting_region_from(
        p,
        &frame.tiles,
        frame.tiles.anchor(),
        |t| tile_near_segment(p, t, &frame.axis, lo, hi, radius),
        cfg.frontier_bound,
    )?;
    let walls = distinct_walls(p, &candidates, &frame.axis);
    let ladder = Ladder::new(p, &frame, lo - radius, hi + radius, cfg.tol)?;

    // the translates of the chosen cut starting and ending the segment
    let near = translate(p, &chart.alpha_word, ell, shift as i64, &cut, &frame)?;
    let (far, apart) = apart_from_translate(p, &frame, ell, m as i64, &near, cfg.tol)?;
    if !apart {
        return Err(Error::Numerical("cutting walls meet".into()));
    }

    let mut sides = BTreeMap::new();
    let mut containing = 0usize;
    for w in &walls {
        let side = ladder.side(p, w, cfg.tol)?;
        if side == AxisSide::Contains {
            containing += 1;
            if cfg.strict_axis {
                return Err(Error::DegenerateAxis);
            }
        }
        sides.insert(w.key.clone(), side);
    }

    // The region is cut out by the walls missing the axis and the two
    // cutting walls. Any two of its tiles are joined by a minimal gallery
    // inside every half-space holding both, so it is the component of the
    // anchor reached without crossing those walls.
    let passable = |key: &Vec<usize>| {
        matches!(sides.get(key), Some(AxisSide::Crosses | AxisSide::Contains)) && *key != near.wall.key && *key != far.wall.key
    };
    let mut region = TileSet::new();
    let mut queue = VecDeque::new();
    queue.push_back(frame.tiles.anchor().to_vec());
    let mut seen = BTreeMap::new();
    seen.insert(frame.tiles.anchor().to_vec(), ());
    while let Some(word) = queue.pop_front() {
        let Some(i) = candidates.position(&word) else {
            return Err(Error::Numerical("region leaves the candidate tiles".into()));
        };
        let t = candidates.get(i);
        for face in 0..p.face_count() {
            let mut w = word.clone();
            w.push(face);
            let w = normal_form(p, &w);
            if !seen.contains_key(&w) && passable(&wall_word(p, &word, face)) {
                seen.insert(w.clone(), ());
                queue.push_back(w);
            }
        }
        region.insert(t.clone())?;
    }
    if region.is_empty() {
        return Err(Error::Numerical("empty region".into()));
    }
    let boundary = boundary_walls(p, &region);
    let slab_wall = boundary
        .iter()
        .find(|w| wall_word(p, &region.get(w.tile).word, w.face) == near.wall.key)
        .map(|w| (w.tile, w.face))
        .ok_or_else(|| Error::NotConvex("cutting wall is not a boundary wall".into()))?;
    convexity_audit(&region, &boundary, cfg.tol)?;
    Ok(ConvexTileRegion {
        tiles: region,
        walls: boundary,
        frame,
        segment: (t0, t1),
        slab_wall,
        periods: m,
        walls_containing_axis: containing,
    })
}

/// Faces of region tiles whose neighbour is outside the region, one per
/// distinct wall.
fn boundary_walls(p: &Polyhedron, tiles: &TileSet) -> Vec<BoundaryWall> {
    let mut out: Vec<BoundaryWall> = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, t) in tiles.iter().enumerate() {
        for face in 0..p.face_count() {
            let mut w = t.word.clone();
            w.push(face);
            if tiles.contains_word(&normal_form(p, &w)) {
                continue;
            }
            if seen.insert(wall_word(p, &t.word, face), ()).is_none() {
                out.push(BoundaryWall {
                    tile: i,
                    face,
                    normal: t.wall(face),
                });
            }
        }
    }
    out
}

fn convexity_audit(tiles: &TileSet, walls: &[BoundaryWall], tol: f64) -> Result<()> {
    for (i, t) in tiles.iter().enumerate() {
        for v in &t.vertices {
            for w in walls {
                let n = w.normal.normal();
                let s = v.vector().dot(n);
                let slack = tol * (v.vector().max_abs() * n.max_abs()).max(1.0);
                if s > slack {
                    return Err(Error::NotConvex(format!(
                        "tile {i} sticks out of the wall of tile {} face {} by {s:e}",
                        w.tile, w.face
                    )));
                }
            }
        }
    }
    Ok(())
}

/// `|T^{-1} g T - I|_inf` where `T` carries the origin to `x`: the distance
/// of `g` from the identity measured in a frame centred at `x`.
pub fn residual_at(g: &Isometry, x: &Point) -> f64 {
    let t = Isometry::translation_to(x);
    t.inverse().compose(g).compose(&t).distance_from_identity()
}

fn h_fold(dim: usize, alpha: &Isometry, walls: &[Hyperplane], x_ref: &Point, tol: f64) -> Result<(Vec<usize>, f64)> {
    let (word, h, _) = fold_with_walls(walls, dim, &alpha.apply(x_ref), tol)?;
    let residual = residual_at(&h.compose(alpha), x_ref);
    Ok((word, residual))
}

fn bound_for(p: &Polyhedron, ell: f64) -> Result<f64> {
    // Monte Carlo volumes enter at their lower 3-sigma end
    let v = p.volume() - 3.0 * p.volume_std_error();
    index_bound(&BoundInputs::new(p.dim(), p.diameter(), v, ell)?)
}

/// Runs the whole construction for the element named by `alpha_word`.
pub fn build_certificate(p: &Polyhedron, alpha_word: &[usize], cfg: &SeparatorConfig) -> Result<SeparationCertificate> {
    let chart = AxisChart::new(p, alpha_word)?;
    let region = p_convexification(p, &chart, cfg.min_periods, cfg)?;
    let ell = chart.translation_length;
    let r = max_threshold(p.dim())?;
    let axis = &region.frame.axis;
    for (i, t) in region.tiles.iter().enumerate() {
        let d = tile_axis_distance(p, t, axis);
        if d > r + 1e-7 {
            return Err(Error::NotConvex(format!(
                "tile {i} is {d} from the axis, beyond the threshold {r}"
            )));
        }
    }
    let index = region.len();
    let m = region.periods;
    if index % m != 0 {
        return Err(Error::Numerical(format!(
            "{index} tiles do not split into {m} equal periods"
        )));
    }
    let normals: Vec<Hyperplane> = region.walls.iter().map(|w| w.normal.clone()).collect();
    let x_ref = region.tiles.get(0).base_point.clone();
    let (word, residual) = h_fold(p.dim(), &region.frame.alpha, &normals, &x_ref, cfg.tol)?;
    if residual <= cfg.identity_tol {
        return Err(Error::NotSeparated { residual });
    }
    if residual <= cfg.certification_margin {
        return Err(Error::Inconclusive { residual });
    }
    let f = &region.frame;
    let mid = f.to_anchor(&f.axis.point_at(0.5 * (region.segment.0 + region.segment.1)));
    Ok(SeparationCertificate {
        polyhedron: p.name().to_string(),
        alpha_word: alpha_word.to_vec(),
        translation_length: ell,
        periods: m,
        k: index / m,
        index,
        length_bound: bound_for(p, ell)?,
        tile_words: region.tiles.iter().map(|t| t.word.clone()).collect(),
        walls: region.walls.iter().map(|w| (w.tile, w.face)).collect(),
        slab_wall: region.slab_wall,
        anchor: region.frame.tiles.anchor().to_vec(),
        midpoint: mid.coords().to_vec(),
        reference_tile: 0,
        fold_witness: FoldWitness { walls: word, residual },
    })
}

/// One named check of a verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`verify_certificate`]; every check runs even if an earlier
/// one fails.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check { name, passed, detail });
    }
}

/// Re-derives everything in the certificate from the polyhedron, the element
/// and the stored words, reporting each check separately.
pub fn verify_certificate(p: &Polyhedron, cert: &SeparationCertificate, cfg: &SeparatorConfig) -> VerificationReport {
    let mut rep = VerificationReport::default();
    rep.push(
        "polyhedron",
        cert.polyhedron == p.name(),
        format!("certificate for {:?}, checking against {:?}", cert.polyhedron, p.name()),
    );
    // the segment midpoint, in the anchor tile, fixes the frame
    let anchor_ok = cert.anchor.iter().all(|&f| f < p.face_count())
        && cert.alpha_word.iter().all(|&f| f < p.face_count())
        && normal_form(p, &cert.anchor) == cert.anchor;
    let centre = match Point::normalize(LorentzVector::from_slice(&cert.midpoint)) {
        Ok(c) if anchor_ok && c.dim() == p.dim() => c,
        _ => {
            rep.push("segment", false, "malformed midpoint or anchor".into());
            return rep;
        }
    };
    let frame = match AxisFrame::anchored(p, &cert.alpha_word, &cert.anchor, &centre, 0.0) {
        Ok(f) => f,
        Err(e) => {
            rep.push("element", false, e.to_string());
            return rep;
        }
    };
    let ell = match frame.alpha.translation_length() {
        Ok(l) => l,
        Err(e) => {
            rep.push("element", false, e.to_string());
            return rep;
        }
    };
    rep.push(
        "translation length",
        (ell - cert.translation_length).abs() <= 1e-9 * ell.max(1.0),
        format!("recomputed {ell}, stored {}", cert.translation_length),
    );
    let span = cert.periods as f64 * ell;
    let (ta, tb) = (-0.5 * span, 0.5 * span);
    {
        let x = frame.tiles.local().apply(&centre);
        let on_axis = frame.axis.distance_to(&x) < 1e-6;
        let in_anchor = p.normals().iter().all(|u| centre.vector().dot(u.normal()) <= 1e-6);
        rep.push(
            "segment",
            on_axis && in_anchor,
            format!("midpoint on the axis: {on_axis}, in the anchor tile: {in_anchor}"),
        );
    }

    // rebuild the tiles by walking through the listed words only
    let mut listed = BTreeMap::new();
    let mut words_ok = !cert.tile_words.is_empty();
    for w in &cert.tile_words {
        let valid = w.iter().all(|&f| f < p.face_count()) && normal_form(p, w) == *w;
        if !valid || listed.insert(w.clone(), ()).is_some() {
            words_ok = false;
        }
    }
    let tiles = if words_ok && listed.contains_key(&cert.anchor) {
        tiles_meeting_region_from(
            p,
            &frame.tiles,
            &cert.anchor,
            |t| listed.contains_key(&t.word),
            cert.tile_words.len(),
        )
        .ok()
    } else {
        None
    };
    let tiles = match tiles {
        Some(t) if t.len() == cert.tile_words.len() => {
            rep.push("tile words", true, format!("{} connected tiles in normal form", t.len()));
            t
        }
        other => {
            rep.push(
                "tile words",
                false,
                format!(
                    "{} listed words, {} reached from the anchor",
                    cert.tile_words.len(),
                    other.map_or(0, |t| t.len())
                ),
            );
            return rep;
        }
    };
    let by_index = |i: usize| cert.tile_words.get(i).and_then(|w| tiles.position(w)).map(|j| tiles.get(j));
    let stored_wall = |(i, f): (usize, usize)| by_index(i).filter(|_| f < p.face_count()).map(|t| t.walls[f].clone());

    rep.push(
        "index",
        cert.index == tiles.len() && cert.index == cert.k * cert.periods && cert.periods >= 2,
        format!(
            "index {} vs {} tiles, k = {}, periods = {}",
            cert.index,
            tiles.len(),
            cert.k,
            cert.periods
        ),
    );

    // listed walls must be exactly the exposed faces
    let exposed = boundary_walls(p, &tiles);
    let exposed_keys: BTreeMap<Vec<usize>, ()> = exposed
        .iter()
        .map(|w| (wall_word(p, &tiles.get(w.tile).word, w.face), ()))
        .collect();
    let stored_keys: Option<Vec<Vec<usize>>> = cert
        .walls
        .iter()
        .map(|&(i, f)| by_index(i).filter(|_| f < p.face_count()).map(|t| wall_word(p, &t.word, f)))
        .collect();
    let boundary_ok = match &stored_keys {
        Some(k) => {
            let distinct: BTreeMap<&Vec<usize>, ()> = k.iter().map(|w| (w, ())).collect();
            distinct.len() == k.len() && k.len() == exposed.len() && k.iter().all(|w| exposed_keys.contains_key(w))
        }
        None => false,
    };
    rep.push(
        "boundary",
        boundary_ok,
        format!("{} listed walls, {} exposed walls", cert.walls.len(), exposed.len()),
    );
    let stored: Option<Vec<LorentzVector>> = if boundary_ok {
        cert.walls.iter().map(|&w| stored_wall(w)).collect()
    } else {
        None
    };

    let conv = convexity_audit(&tiles, &exposed, cfg.tol);
    rep.push(
        "convexity",
        conv.is_ok(),
        conv.err().map_or_else(|| "all tile vertices inside all walls".into(), |e| e.to_string()),
    );

    // the cutting wall crosses the axis at the segment start, and its
    // translate is a listed wall disjoint from it
    let cut = Ladder::new(p, &frame, ta - 1.0, tb + 1.0, cfg.tol).and_then(|l| match by_index(cert.slab_wall.0) {
        Some(t) if cert.slab_wall.1 < p.face_count() => {
            l.crossing(p, &WallRef::new(p, t, cert.slab_wall.1, &frame.axis), cfg.tol)
        }
        _ => Ok(None),
    });
    match cut.and_then(|c| {
        c.map(|c| apart_from_translate(p, &frame, ell, cert.periods as i64, &c, cfg.tol).map(|x| (c, x)))
            .transpose()
    }) {
        Ok(Some((c, (far, apart)))) => {
            let starts = (c.at - ta).abs() <= 1e-6 * ta.abs().max(1.0) && !c.forward;
            let listed = exposed_keys.contains_key(&far.wall.key);
            rep.push(
                "cutting walls",
                starts && listed && apart,
                format!("starts the segment: {starts}, translate listed: {listed}, disjoint: {apart}"),
            );
        }
        Ok(None) => rep.push("cutting walls", false, "cutting wall does not cross the axis".into()),
        Err(e) => rep.push("cutting walls", false, e.to_string()),
    }

    let n = cfg.axis_samples.max(1) * cert.periods;
    let inside = (0..n).all(|j| {
        let x = frame.axis.point_at(ta + (tb - ta) * (j as f64 + 0.5) / n as f64);
        let slack = cfg.tol * x.vector().max_abs();
        tiles.iter().any(|t| t.contains(&x, slack))
    });
    rep.push(
        "axis containment",
        inside,
        format!("{n} sample points of the segment lie in the tiles: {inside}"),
    );

    let r = max_threshold(p.dim()).unwrap_or(f64::NAN);
    let worst = tiles
        .iter()
        .map(|t| tile_axis_distance(p, t, &frame.axis))
        .fold(0.0f64, f64::max);
    rep.push(
        "threshold",
        worst <= r + 1e-7,
        format!("farthest tile is {worst} from the axis, threshold {r}"),
    );

    match bound_for(p, ell) {
        Ok(b) => {
            let field_ok = (b - cert.length_bound).abs() <= 1e-9 * b.max(1.0);
            let eff = b * cert.periods as f64 / 2.0;
            rep.push(
                "bound",
                field_ok && (cert.index as f64) <= eff && cert.index as f64 <= ceil(eff),
                format!("index {} vs bound {eff} (stored {})", cert.index, cert.length_bound),
            );
        }
        Err(e) => rep.push("bound", false, e.to_string()),
    }

    let witness = match (stored, by_index(cert.reference_tile)) {
        (Some(normals), Some(t)) => {
            let hs: Vec<Hyperplane> = normals.into_iter().map(Hyperplane::new_unchecked).collect();
            match h_fold(p.dim(), &frame.alpha, &hs, &t.base_point, cfg.tol) {
                Ok((word, residual)) => {
                    let same = word == cert.fold_witness.walls
                        && (residual - cert.fold_witness.residual).abs() <= 1e-6 * residual.max(1.0);
                    (
                        same && residual > cfg.certification_margin,
                        format!(
                            "residual {residual} (stored {}), margin {}, same fold: {same}",
                            cert.fold_witness.residual, cfg.certification_margin
                        ),
                    )
                }
                Err(e) => (false, e.to_string()),
            }
        }
        _ => (false, "walls or reference tile missing".into()),
    };
    rep.push("fold witness", witness.0, witness.1);
    rep
}
