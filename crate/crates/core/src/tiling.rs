//! Tiles of the tessellation by copies of a polyhedron.
//!
//! A tile is `gP` for `g` in the reflection group, named by a reflection
//! word. Words are kept in a normal form: reduced by the right-angled
//! deletion rule (two equal letters separated only by letters commuting with
//! them cancel) and then ordered into layers of commuting letters. Reduced
//! words of the same element differ only by commutations, so the normal form
//! identifies the tile exactly. A quantized base point is kept as an
//! independent geometric check.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lorentz::{Hyperplane, Isometry, LorentzVector, Point};
use crate::math::{round, sqrt};
use crate::polyhedron::{word_to_isometry, Polyhedron};

/// Grid size of the base-point fingerprint (hyperboloid coordinates).
pub const FINGERPRINT_QUANTUM: f64 = 1e-6;

/// Appends `letter` to the reduced word `word`, cancelling it against an
/// earlier copy when everything in between commutes with it.
pub fn push_letter(p: &Polyhedron, word: &mut Vec<usize>, letter: usize) {
    for k in (0..word.len()).rev() {
        let w = word[k];
        if w == letter {
            word.remove(k);
            return;
        }
        if !p.adjacent(w, letter) {
            break;
        }
    }
    word.push(letter);
}

/// Reduced form of any word in the right-angled reflection group.
pub fn reduce_racg(p: &Polyhedron, word: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(word.len());
    for &w in word {
        push_letter(p, &mut out, w);
    }
    out
}

/// Canonical representative: letters grouped into layers (each letter one
/// layer above the latest earlier letter it does not commute with), sorted
/// by layer and then by index.
pub fn normal_form(p: &Polyhedron, word: &[usize]) -> Vec<usize> {
    let w = reduce_racg(p, word);
    let mut level = Vec::with_capacity(w.len());
    for (k, &a) in w.iter().enumerate() {
        let mut l = 0usize;
        for j in 0..k {
            if w[j] == a || !p.adjacent(w[j], a) {
                l = l.max(level[j] + 1);
            }
        }
        level.push(l);
    }
    let mut keyed: Vec<(usize, usize)> = level.into_iter().zip(w).collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, a)| a).collect()
}

/// The reflection in the wall `face` of the tile `word`, in normal form.
/// It names the wall whichever tile it is seen from.
pub fn wall_word(p: &Polyhedron, word: &[usize], face: usize) -> Vec<usize> {
    let mut w = word.to_vec();
    w.push(face);
    w.extend(word.iter().rev());
    normal_form(p, &w)
}

/// Length of the shortest word for the element.
pub fn word_length(p: &Polyhedron, word: &[usize]) -> usize {
    reduce_racg(p, word).len()
}

/// A copy `gP` of the fundamental polyhedron, stored by its walls (`g u_i`,
/// outward), vertices and base point in some fixed frame.
///
/// Neighbours are produced by reflecting this data in one of its own walls,
/// so tiles far from the origin keep full precision as long as the frame is
/// centred near them; see [`Tile::in_frame`].
#[derive(Clone, Debug)]
pub struct Tile {
    pub word: Vec<usize>,
    pub walls: Vec<LorentzVector>,
    pub vertices: Vec<Point>,
    pub base_point: Point,
    pub fingerprint: Vec<i64>,
}

impl Tile {
    /// The tile named by `word`, in the frame of the polyhedron.
    pub fn new(p: &Polyhedron, word: &[usize]) -> Result<Self> {
        TileFrame::identity(p.dim()).tile(p, word)
    }

    fn from_isometry(p: &Polyhedron, word: Vec<usize>, g: &Isometry) -> Self {
        let walls = p.normals().iter().map(|u| unit(g.apply_vector(u.normal()))).collect();
        let vertices = p.vertices().iter().map(|v| g.apply(v).renormalized()).collect();
        let base_point = g.apply(p.reference()).renormalized();
        let fingerprint = fingerprint(&base_point);
        Self {
            word,
            walls,
            vertices,
            base_point,
            fingerprint,
        }
    }

    /// The isometry `g` with this tile equal to `gP`, from the word (in the
    /// frame of the polyhedron).
    pub fn isometry(&self, p: &Polyhedron) -> Result<Isometry> {
        word_to_isometry(p, &self.word)
    }

    pub fn wall(&self, face: usize) -> Hyperplane {
        Hyperplane::new_unchecked(self.walls[face].clone())
    }

    /// `<x, g u_i>` for every face.
    pub fn sides(&self, x: &Point) -> Vec<f64> {
        self.walls.iter().map(|n| x.vector().dot(n)).collect()
    }

    /// Distance from `x` to this tile.
    pub fn distance_to_point(&self, p: &Polyhedron, x: &Point) -> f64 {
        p.distance_from_sides(&self.sides(x))
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.sides(x).iter().all(|&c| c <= tol)
    }

    /// Minimum over `t in [lo, hi]` of the distance from the tile to `f(t)`,
    /// as `(argmin, min)`; `f` should trace a geodesic.
    pub fn min_distance_along<F>(&self, p: &Polyhedron, lo: f64, hi: f64, f: F) -> (f64, f64)
    where
        F: Fn(f64) -> Point,
    {
        crate::polyhedron::golden_min(lo, hi, |t| self.distance_to_point(p, &f(t)))
    }
}

/// Coordinates anchored at a tile: the tile named `anchor` is `local * P`.
/// Tiles and elements are computed from words relative to the anchor, so
/// their matrices stay small near the anchor however long its word is.
#[derive(Clone, Debug)]
pub struct TileFrame {
    anchor: Vec<usize>,
    anchor_inverse: Vec<usize>,
    local: Isometry,
}

impl TileFrame {
    pub fn identity(dim: usize) -> Self {
        Self {
            anchor: Vec::new(),
            anchor_inverse: Vec::new(),
            local: Isometry::identity(dim),
        }
    }

    pub fn new(p: &Polyhedron, anchor: &[usize], local: Isometry) -> Self {
        let anchor = normal_form(p, anchor);
        let anchor_inverse = anchor.iter().rev().copied().collect();
        Self {
            anchor,
            anchor_inverse,
            local,
        }
    }

    pub fn anchor(&self) -> &[usize] {
        &self.anchor
    }

    /// Position of the anchor tile in these coordinates.
    pub fn local(&self) -> &Isometry {
        &self.local
    }

    fn relative(&self, p: &Polyhedron, word: &[usize]) -> Vec<usize> {
        let mut w = self.anchor_inverse.clone();
        w.extend_from_slice(word);
        reduce_racg(p, &w)
    }

    /// The isometry carrying `P` to the tile `word`.
    pub fn placement(&self, p: &Polyhedron, word: &[usize]) -> Result<Isometry> {
        Ok(self.local.compose(&word_to_isometry(p, &self.relative(p, word))?))
    }

    pub fn tile(&self, p: &Polyhedron, word: &[usize]) -> Result<Tile> {
        let g = self.placement(p, word)?;
        Ok(Tile::from_isometry(p, normal_form(p, word), &g))
    }

    /// Outward unit normal of the wall `face` of the tile `word`.
    pub fn wall_normal(&self, p: &Polyhedron, word: &[usize], face: usize) -> Result<LorentzVector> {
        Ok(unit(self.placement(p, word)?.apply_vector(p.normal(face).normal())))
    }

    /// The group element named by `word`, acting in these coordinates.
    pub fn element(&self, p: &Polyhedron, word: &[usize]) -> Result<Isometry> {
        let mut w = self.relative(p, word);
        w.extend_from_slice(&self.anchor);
        let g = word_to_isometry(p, &reduce_racg(p, &w))?;
        Ok(self.local.compose(&g).compose(&self.local.inverse()))
    }
}

fn unit(v: LorentzVector) -> LorentzVector {
    let q = v.norm_sq();
    if q > 0.0 {
        v.scale(1.0 / sqrt(q))
    } else {
        v
    }
}

fn fingerprint(x: &Point) -> Vec<i64> {
    x.coords()[1..]
        .iter()
        .map(|c| round(c / FINGERPRINT_QUANTUM) as i64)
        .collect()
}

/// Tiles keyed by normal-form word, in insertion order.
#[derive(Clone, Debug, Default)]
pub struct TileSet {
    tiles: Vec<Tile>,
    by_word: BTreeMap<Vec<usize>, usize>,
    by_print: BTreeMap<Vec<i64>, usize>,
}

impl TileSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn get(&self, i: usize) -> &Tile {
        &self.tiles[i]
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Tile> {
        self.tiles.iter()
    }

    /// Index of the tile with the given (normal-form) word.
    pub fn position(&self, word: &[usize]) -> Option<usize> {
        self.by_word.get(word).copied()
    }

    pub fn contains_word(&self, word: &[usize]) -> bool {
        self.by_word.contains_key(word)
    }

    /// Inserts a tile; returns `false` if it is already present. A different
    /// word whose base point lands on an existing one is a collision error.
    pub fn insert(&mut self, tile: Tile) -> Result<bool> {
        if self.by_word.contains_key(&tile.word) {
            return Ok(false);
        }
        if let Some(other) = self.nearby(&tile.fingerprint) {
            let o = &self.tiles[other];
            if o.base_point.distance(&tile.base_point) < 1e-3 {
                return Err(Error::Numerical(format!(
                    "fingerprint collision between words {:?} and {:?}",
                    o.word, tile.word
                )));
            }
        }
        let i = self.tiles.len();
        self.by_word.insert(tile.word.clone(), i);
        self.by_print.insert(tile.fingerprint.clone(), i);
        self.tiles.push(tile);
        Ok(true)
    }

    /// A stored tile whose fingerprint is in the same or a neighbouring cell.
    fn nearby(&self, print: &[i64]) -> Option<usize> {
        let n = print.len();
        let mut offs = alloc::vec![-1i64; n];
        loop {
            let key: Vec<i64> = print.iter().zip(&offs).map(|(a, b)| a.saturating_add(*b)).collect();
            if let Some(&i) = self.by_print.get(&key) {
                return Some(i);
            }
            let mut k = 0;
            loop {
                if k == n {
                    return None;
                }
                offs[k] += 1;
                if offs[k] <= 1 {
                    break;
                }
                offs[k] = -1;
                k += 1;
            }
        }
    }

    /// Removes tiles rejected by `keep`, preserving order.
    pub fn retain<F: FnMut(&Tile) -> bool>(&mut self, mut keep: F) {
        let old = core::mem::take(&mut self.tiles);
        self.by_word.clear();
        self.by_print.clear();
        for t in old {
            if keep(&t) {
                let i = self.tiles.len();
                self.by_word.insert(t.word.clone(), i);
                self.by_print.insert(t.fingerprint.clone(), i);
                self.tiles.push(t);
            }
        }
    }
}

/// Breadth-first search over face adjacency from the tile `start`, keeping
/// tiles for which `meets` holds and expanding only kept tiles. Faces are
/// visited in index order, so the result is deterministic. Fails with a
/// partial result once more than `frontier_bound` tiles are kept.
pub fn tiles_meeting_region_from<F>(
    p: &Polyhedron,
    frame: &TileFrame,
    start: &[usize],
    meets: F,
    frontier_bound: usize,
) -> Result<TileSet>
where
    F: Fn(&Tile) -> bool,
{
    let first = frame.tile(p, start)?;
    let mut kept = TileSet::new();
    let mut seen: BTreeMap<Vec<usize>, ()> = BTreeMap::new();
    seen.insert(first.word.clone(), ());
    if !meets(&first) {
        return Ok(kept);
    }
    let mut queue = VecDeque::new();
    queue.push_back(first);
    while let Some(t) = queue.pop_front() {
        for face in 0..p.face_count() {
            let mut w = t.word.clone();
            w.push(face);
            let w = normal_form(p, &w);
            if seen.insert(w.clone(), ()).is_some() {
                continue;
            }
            let n = frame.tile(p, &w)?;
            if meets(&n) {
                queue.push_back(n);
            }
        }
        kept.insert(t)?;
        if kept.len() > frontier_bound {
            return Err(Error::FrontierExceeded {
                bound: frontier_bound,
                partial: alloc::boxed::Box::new(kept),
            });
        }
    }
    Ok(kept)
}

/// [`tiles_meeting_region_from`] starting at the fundamental tile.
pub fn tiles_meeting_region<F>(p: &Polyhedron, meets: F, frontier_bound: usize) -> Result<TileSet>
where
    F: Fn(&Tile) -> bool,
{
    tiles_meeting_region_from(p, &TileFrame::identity(p.dim()), &[], meets, frontier_bound)
}

/// Tiles meeting the closed ball of radius `r` about `center`.
pub fn tiles_in_ball(p: &Polyhedron, center: &Point, r: f64, frontier_bound: usize) -> Result<TileSet> {
    let (word, _) = crate::polyhedron::fold_to_fundamental(p, center, crate::lorentz::GEOM_TOL)?;
    let frame = TileFrame::identity(p.dim());
    tiles_meeting_region_from(p, &frame, &word, |t| t.distance_to_point(p, center) <= r, frontier_bound)
}
