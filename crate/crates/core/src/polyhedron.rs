//! Compact all-right polyhedra and their reflection groups.
//!
//! A polyhedron is the intersection of the half-spaces `<x, u_i> <= 0` for
//! unit normals `u_i` pointing out of it. Adjacent faces meet at right angles
//! (`<u_i, u_j> = 0`); non-adjacent walls are disjoint or tangent
//! (`|<u_i, u_j>| >= 1`).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lorentz::{
    normalized, Hyperplane, Isometry, LorentzVector, Point, GEOM_TOL, RENORMALIZE_EVERY,
};
use crate::math::{acosh, cos, sin, sqrt, tanh};
use crate::mc::{self, Estimate};

/// Samples used for the volume of polyhedra in dimension 3 and higher.
pub const VOLUME_SAMPLES: usize = 2_000_000;
pub const VOLUME_SEED: u64 = 0x5eed_0fc0de;
/// Iteration cap for folding a point into the fundamental tile.
pub const FOLD_CAP: usize = 1_000_000;

/// Why a polyhedron description was rejected.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("dimension {0} is not supported (need 2..=4)")]
    UnsupportedDimension(usize),
    #[error("face {face} has {got} coordinates, expected {expected}")]
    WrongLength { face: usize, expected: usize, got: usize },
    #[error("face {face} normal has <u,u> = {norm}, expected 1")]
    NotUnit { face: usize, norm: f64 },
    #[error("adjacency entry ({0}, {1}) is out of range or a self-loop")]
    BadAdjacency(usize, usize),
    #[error("adjacent faces {i} and {j} are not orthogonal: <u_i,u_j> = {inner}")]
    NotOrthogonal { i: usize, j: usize, inner: f64 },
    #[error("non-adjacent faces {i} and {j} intersect: <u_i,u_j> = {inner}")]
    NotDisjoint { i: usize, j: usize, inner: f64 },
    #[error("no vertices found")]
    NoVertices,
    #[error("the polyhedron is not compact: an edge at vertex {vertex} has no second endpoint")]
    NotCompact { vertex: usize },
    #[error("face {face} is redundant (it contains fewer than {dim} vertices)")]
    RedundantFace { face: usize, dim: usize },
    #[error("vertex {vertex} violates face {face} by {excess}")]
    VertexOutside { vertex: usize, face: usize, excess: f64 },
    #[error("stored diameter {stored} differs from recomputed {recomputed}")]
    Diameter { stored: f64, recomputed: f64 },
}

/// Summary of a successful validation.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub faces: usize,
    pub adjacent_pairs: usize,
    pub vertices: usize,
    /// Largest `|<u_i, u_j>|` over adjacent pairs.
    pub max_angle_deviation: f64,
    /// Largest `|<v, u_i>|` over vertices and their incident faces.
    pub max_vertex_residual: f64,
    pub diameter: f64,
}

/// A compact all-right polyhedron with its derived data.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    name: String,
    dim: usize,
    normals: Vec<Hyperplane>,
    adjacency: Vec<Vec<bool>>,
    gram: Vec<Vec<f64>>,
    /// Sets of pairwise adjacent faces of size `1..=dim`.
    cliques: Vec<Vec<usize>>,
    vertices: Vec<Point>,
    vertex_faces: Vec<Vec<usize>>,
    reference: Point,
    /// Largest distance from the reference point to a vertex.
    circumradius: f64,
    diameter: f64,
    volume: f64,
    volume_std_error: f64,
    reflections: Vec<Isometry>,
}

impl Polyhedron {
    /// Builds a polyhedron from outward unit normals and the list of adjacent
    /// face pairs, recomputing vertices, diameter and volume.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        normals: Vec<Vec<f64>>,
        adjacent_pairs: &[(usize, usize)],
    ) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(ValidationError::UnsupportedDimension(dim).into());
        }
        let m = normals.len();
        let mut hs = Vec::with_capacity(m);
        for (face, c) in normals.into_iter().enumerate() {
            if c.len() != dim + 1 {
                return Err(ValidationError::WrongLength {
                    face,
                    expected: dim + 1,
                    got: c.len(),
                }
                .into());
            }
            let v = LorentzVector::new(c);
            let norm = v.norm_sq();
            if (norm - 1.0).abs() > GEOM_TOL {
                return Err(ValidationError::NotUnit { face, norm }.into());
            }
            hs.push(Hyperplane::new_unchecked(v));
        }
        let mut adjacency = vec![vec![false; m]; m];
        for &(i, j) in adjacent_pairs {
            if i >= m || j >= m || i == j {
                return Err(ValidationError::BadAdjacency(i, j).into());
            }
            adjacency[i][j] = true;
            adjacency[j][i] = true;
        }
        let gram: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| hs[i].normal().dot(hs[j].normal())).collect())
            .collect();
        for i in 0..m {
            for j in i + 1..m {
                let inner = gram[i][j];
                if adjacency[i][j] {
                    if inner.abs() >= GEOM_TOL {
                        return Err(ValidationError::NotOrthogonal { i, j, inner }.into());
                    }
                } else if inner.abs() < 1.0 - GEOM_TOL {
                    return Err(ValidationError::NotDisjoint { i, j, inner }.into());
                }
            }
        }
        let cliques = enumerate_cliques(&adjacency, dim);
        let (vertices, vertex_faces) = find_vertices(&hs, &cliques, dim);
        if vertices.is_empty() {
            return Err(ValidationError::NoVertices.into());
        }
        check_compact(&vertex_faces, dim)?;
        for face in 0..m {
            let count = vertex_faces.iter().filter(|f| f.contains(&face)).count();
            if count < dim {
                return Err(ValidationError::RedundantFace { face, dim }.into());
            }
        }
        let mut sum = LorentzVector::zeros(dim);
        for v in &vertices {
            sum = &sum + v.vector();
        }
        let reference = Point::normalize(sum)?;
        let reflections = hs.iter().map(Isometry::reflection).collect();
        let mut p = Self {
            name: name.into(),
            dim,
            normals: hs,
            adjacency,
            gram,
            cliques,
            vertices,
            vertex_faces,
            reference,
            circumradius: 0.0,
            diameter: 0.0,
            volume: 0.0,
            volume_std_error: 0.0,
            reflections,
        };
        p.diameter = max_pairwise_distance(&p.vertices);
        p.circumradius = p
            .vertices
            .iter()
            .map(|v| p.reference.distance(v))
            .fold(0.0, f64::max);
        if dim == 2 {
            // Gauss-Bonnet: (m - 2) pi minus m right angles
            p.volume = (m as f64 - 4.0) * core::f64::consts::FRAC_PI_2;
        } else {
            let e = mc_polyhedron_volume(&p, VOLUME_SAMPLES, VOLUME_SEED);
            p.volume = e.value;
            p.volume_std_error = e.std_error;
        }
        Ok(p)
    }

    /// Replaces the reference point (it must be strictly interior).
    pub fn with_reference(mut self, x: Point) -> Result<Self> {
        if self.normals.iter().any(|u| u.side(&x) >= -GEOM_TOL) {
            return Err(Error::OutOfRange("reference point is not interior".into()));
        }
        self.circumradius = self.vertices.iter().map(|v| x.distance(v)).fold(0.0, f64::max);
        self.reference = x;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn face_count(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[Hyperplane] {
        &self.normals
    }

    pub fn normal(&self, face: usize) -> &Hyperplane {
        &self.normals[face]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    /// Adjacent face pairs `(i, j)` with `i < j`.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.face_count();
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Non-adjacent face pairs `(i, j)` with `i < j`.
    pub fn disjoint_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.face_count();
        let mut out = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if !self.adjacency[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `<u_i, u_j>`.
    pub fn gram(&self, i: usize, j: usize) -> f64 {
        self.gram[i][j]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Faces through each vertex.
    pub fn vertex_faces(&self) -> &[Vec<usize>] {
        &self.vertex_faces
    }

    /// Interior point used as the base point of the fundamental tile.
    pub fn reference(&self) -> &Point {
        &self.reference
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Standard error of the volume (zero when it is exact).
    pub fn volume_std_error(&self) -> f64 {
        self.volume_std_error
    }

    pub fn reflection(&self, face: usize) -> &Isometry {
        &self.reflections[face]
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.normals.iter().all(|u| u.side(x) <= tol)
    }

    /// Exact distance from `z` to the polyhedron (zero inside).
    ///
    /// The nearest point lies in the relative interior of some face, where it
    /// is the orthogonal projection of `z` onto that face's flat. Faces are
    /// intersections of pairwise orthogonal walls, so the projection onto the
    /// flat of faces `S` is `z - sum_S c_i u_i` (normalized) with
    /// `c_i = <z, u_i>`, at distance `arccosh(sqrt(1 + sum_S c_i^2))`.
    pub fn distance_to_point(&self, z: &Point) -> f64 {
        let c: Vec<f64> = self.normals.iter().map(|u| u.side(z)).collect();
        self.distance_from_sides(&c)
    }

    /// [`Self::distance_to_point`] from the values `c_i = <z, u_i>`; these
    /// may be taken against the walls of any tile `gP`, giving the distance
    /// to that tile.
    pub fn distance_from_sides(&self, c: &[f64]) -> f64 {
        if c.iter().all(|&ci| ci <= GEOM_TOL) {
            return 0.0;
        }
        let m = c.len();
        let mut best = f64::INFINITY;
        for s in &self.cliques {
            let q: f64 = s.iter().map(|&i| c[i] * c[i]).sum();
            let scale = sqrt(1.0 + q);
            let feasible = (0..m).all(|j| {
                if s.contains(&j) {
                    return true;
                }
                let proj: f64 = c[j] - s.iter().map(|&i| c[i] * self.gram[i][j]).sum::<f64>();
                proj / scale <= GEOM_TOL
            });
            if feasible {
                best = best.min(acosh(scale));
            }
        }
        best
    }

    /// Minimum over `t in [lo, hi]` of the distance from the polyhedron to
    /// `f(t)`; the distance to a convex set is convex along a geodesic, so a
    /// golden-section search converges to the minimum.
    pub fn min_distance_along<F>(&self, lo: f64, hi: f64, f: F) -> (f64, f64)
    where
        F: Fn(f64) -> Point,
    {
        let g = |t: f64| self.distance_to_point(&f(t));
        golden_min(lo, hi, g)
    }
}

/// Golden-section minimization of a convex function on `[lo, hi]`, returning
/// `(argmin, min)`; the endpoints are included as candidates.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> (f64, f64) {
    let phi = (sqrt(5.0) - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if b - a < 1e-10 {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for t in [lo, hi] {
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}

fn enumerate_cliques(adj: &[Vec<bool>], max: usize) -> Vec<Vec<usize>> {
    fn grow(adj: &[Vec<bool>], max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == max {
            return;
        }
        let start = cur.last().map_or(0, |&l| l + 1);
        for j in start..adj.len() {
            if cur.iter().all(|&i| adj[i][j]) {
                cur.push(j);
                grow(adj, max, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for i in 0..adj.len() {
        cur.push(i);
        grow(adj, max, &mut cur, &mut out);
        cur.pop();
    }
    out
}

/// The vector orthogonal (in the Lorentz form) to the given `n` normals in
/// `R^{n,1}`, by cofactor expansion.
fn lorentz_cross(rows: &[&LorentzVector]) -> LorentzVector {
    let n1 = rows.len() + 1;
    let mut a = DMatrix::zeros(rows.len(), n1);
    for (r, u) in rows.iter().enumerate() {
        for c in 0..n1 {
            // <u, x> = (J u) . x
            a[(r, c)] = if c == 0 { -u.coords()[0] } else { u.coords()[c] };
        }
    }
    let mut x = vec![0.0; n1];
    for (k, xk) in x.iter_mut().enumerate() {
        let minor = a.clone().remove_column(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *xk = sign * minor.determinant();
    }
    LorentzVector::new(x)
}

fn find_vertices(hs: &[Hyperplane], cliques: &[Vec<usize>], dim: usize) -> (Vec<Point>, Vec<Vec<usize>>) {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for s in cliques.iter().filter(|s| s.len() == dim) {
        let rows: Vec<&LorentzVector> = s.iter().map(|&i| hs[i].normal()).collect();
        let mut x = lorentz_cross(&rows);
        if !(x.norm_sq() < 0.0) {
            continue;
        }
        if x.coords()[0] < 0.0 {
            x = -&x;
        }
        let p = match Point::normalize(x) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if hs.iter().all(|u| u.side(&p) <= GEOM_TOL) {
            vertices.push(p);
            faces.push(s.clone());
        }
    }
    (vertices, faces)
}

/// In a simple polytope every edge at a vertex (all but one of its faces)
/// must end at a second vertex; an edge without one runs off to infinity.
fn check_compact(vertex_faces: &[Vec<usize>], dim: usize) -> Result<()> {
    for (v, fs) in vertex_faces.iter().enumerate() {
        for drop in 0..dim {
            let edge: Vec<usize> = fs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != drop)
                .map(|(_, &f)| f)
                .collect();
            let partner = vertex_faces
                .iter()
                .enumerate()
                .any(|(w, gs)| w != v && edge.iter().all(|f| gs.contains(f)));
            if !partner {
                return Err(ValidationError::NotCompact { vertex: v }.into());
            }
        }
    }
    Ok(())
}

fn max_pairwise_distance(pts: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            best = best.max(pts[i].distance(&pts[j]));
        }
    }
    best
}

/// Re-checks every invariant of `p` from its normals and adjacency.
pub fn validate_polyhedron(p: &Polyhedron) -> core::result::Result<ValidationReport, ValidationError> {
    let m = p.face_count();
    let mut max_dev = 0.0f64;
    let mut adjacent_pairs = 0;
    for i in 0..m {
        let norm = p.normals[i].normal().norm_sq();
        if (norm - 1.0).abs() > GEOM_TOL {
            return Err(ValidationError::NotUnit { face: i, norm });
        }
        for j in i + 1..m {
            let inner = p.normals[i].normal().dot(p.normals[j].normal());
            if p.adjacency[i][j] {
                adjacent_pairs += 1;
                max_dev = max_dev.max(inner.abs());
                if inner.abs() >= GEOM_TOL {
                    return Err(ValidationError::NotOrthogonal { i, j, inner });
                }
            } else if inner.abs() < 1.0 - GEOM_TOL {
                return Err(ValidationError::NotDisjoint { i, j, inner });
            }
        }
    }
    if p.vertices.is_empty() {
        return Err(ValidationError::NoVertices);
    }
    let mut max_res = 0.0f64;
    for (vi, (v, fs)) in p.vertices.iter().zip(&p.vertex_faces).enumerate() {
        for (face, u) in p.normals.iter().enumerate() {
            let s = u.side(v);
            if fs.contains(&face) {
                max_res = max_res.max(s.abs());
            } else if s > GEOM_TOL {
                return Err(ValidationError::VertexOutside {
                    vertex: vi,
                    face,
                    excess: s,
                });
            }
        }
    }
    let recomputed = max_pairwise_distance(&p.vertices);
    if (recomputed - p.diameter).abs() > GEOM_TOL {
        return Err(ValidationError::Diameter {
            stored: p.diameter,
            recomputed,
        });
    }
    Ok(ValidationReport {
        faces: m,
        adjacent_pairs,
        vertices: p.vertices.len(),
        max_angle_deviation: max_dev,
        max_vertex_residual: max_res,
        diameter: recomputed,
    })
}

/// Solves `f(s) = 0` for increasing `f` by bisection on `[lo, hi]`.
fn bisect<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, f: F) -> f64 {
    while hi - lo > 1e-15 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Common distance from the center at which walls in directions with
/// cosine `c` between neighbours meet orthogonally: `tanh^2 s = c`.
fn orthogonal_wall_distance(c: f64) -> f64 {
    bisect(0.0, 10.0, |s| {
        let t = tanh(s);
        t * t - c
    })
}

fn walls_at(dirs: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    dirs.iter()
        .map(|d| {
            let h = Hyperplane::at_distance(d, s);
            h.normal().coords().to_vec()
        })
        .collect()
}

/// Regular right-angled pentagon centred at the origin.
pub fn builtin_pentagon() -> Polyhedron {
    let tau = core::f64::consts::TAU;
    let dirs: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            let a = tau * k as f64 / 5.0;
            vec![cos(a), sin(a)]
        })
        .collect();
    let s = orthogonal_wall_distance(cos(tau / 5.0));
    let pairs: Vec<(usize, usize)> = (0..5).map(|k| (k, (k + 1) % 5)).collect();
    Polyhedron::new("pentagon", 2, walls_at(&dirs, s), &pairs).expect("pentagon is valid")
}

/// Unit directions to the 12 vertices of an icosahedron, i.e. the face
/// centers of a dodecahedron.
pub fn icosahedron_directions() -> Vec<Vec<f64>> {
    let phi = (1.0 + sqrt(5.0)) / 2.0;
    let mut dirs = Vec::with_capacity(12);
    for a in [1.0, -1.0] {
        for b in [phi, -phi] {
            dirs.push(normalized(&[0.0, a, b]));
            dirs.push(normalized(&[a, b, 0.0]));
            dirs.push(normalized(&[b, 0.0, a]));
        }
    }
    dirs
}

/// Regular right-angled dodecahedron centred at the origin.
pub fn builtin_dodecahedron() -> Polyhedron {
    let dirs = icosahedron_directions();
    let near = 1.0 / sqrt(5.0);
    let mut pairs = Vec::new();
    for i in 0..12 {
        for j in i + 1..12 {
            let c: f64 = dirs[i].iter().zip(&dirs[j]).map(|(a, b)| a * b).sum();
            if (c - near).abs() < 1e-9 {
                pairs.push((i, j));
            }
        }
    }
    let s = orthogonal_wall_distance(near);
    Polyhedron::new("dodecahedron", 3, walls_at(&dirs, s), &pairs).expect("dodecahedron is valid")
}

/// Builtin polyhedron by name.
pub fn builtin(name: &str) -> Option<Polyhedron> {
    match name {
        "pentagon" => Some(builtin_pentagon()),
        "dodecahedron" => Some(builtin_dodecahedron()),
        _ => None,
    }
}

/// Hyperbolic volume by sampling the ball of radius `circumradius` about the
/// reference point, in Poincaré ball coordinates centred there, with density
/// `(2 / (1 - |b|^2))^n`.
pub fn mc_polyhedron_volume(p: &Polyhedron, n_samples: usize, seed: u64) -> Estimate {
    let n = p.dim();
    let move_to = Isometry::translation_to(p.reference());
    // normals pulled back to coordinates centred at the reference point
    let normals: Vec<LorentzVector> = p
        .normals()
        .iter()
        .map(|u| move_to.inverse().apply_vector(u.normal()))
        .collect();
    let rho = p.circumradius() * (1.0 + 1e-9) + 1e-9;
    let t = tanh(rho / 2.0);
    let ball = match n {
        2 => core::f64::consts::PI,
        3 => 4.0 / 3.0 * core::f64::consts::PI,
        _ => core::f64::consts::PI * core::f64::consts::PI / 2.0,
    } * crate::math::powi(t, n as i32);
    mc::integrate(n_samples, seed, |rng| {
        let b: Vec<f64> = mc::ball_point(rng, n).into_iter().map(|x| x * t).collect();
        let r2: f64 = b.iter().map(|x| x * x).sum();
        let d = 1.0 - r2;
        let mut x = Vec::with_capacity(n + 1);
        x.push((1.0 + r2) / d);
        x.extend(b.iter().map(|v| 2.0 * v / d));
        let x = LorentzVector::new(x);
        if normals.iter().all(|u| u.dot(&x) <= 0.0) {
            ball * crate::math::powi(2.0 / d, n as i32)
        } else {
            0.0
        }
    })
}

/// Removes adjacent repeated letters (each generator is an involution).
pub fn reduce_word(word: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(word.len());
    for &w in word {
        if out.last() == Some(&w) {
            out.pop();
        } else {
            out.push(w);
        }
    }
    out
}

/// `R_{w_1} R_{w_2} ... R_{w_k}` after free reduction.
pub fn word_to_isometry(p: &Polyhedron, word: &[usize]) -> Result<Isometry> {
    if let Some(&bad) = word.iter().find(|&&w| w >= p.face_count()) {
        return Err(Error::InvalidWord(format!(
            "face index {bad} out of range for {} faces",
            p.face_count()
        )));
    }
    let w = reduce_word(word);
    let mut g = Isometry::identity(p.dim());
    for (k, &i) in w.iter().enumerate() {
        g = g.compose(p.reflection(i));
        if (k + 1) % RENORMALIZE_EVERY == 0 {
            g.reorthonormalize();
        }
    }
    Ok(g)
}

/// Reflects `x` across violated walls (largest violation first, lowest index
/// on ties) until it lies in the closed polyhedron. Returns the faces used,
/// in order, and the isometry `g` with `g x` in the polyhedron; the tile
/// containing `x` is `word_to_isometry(word)`, which equals `g^{-1}`.
pub fn fold_to_fundamental(p: &Polyhedron, x: &Point, tol: f64) -> Result<(Vec<usize>, Isometry)> {
    fold_with_walls(p.normals(), p.dim(), x, tol).map(|(word, g, _)| (word, g))
}

/// Folding against an arbitrary wall list; also returns the folded point.
pub fn fold_with_walls(
    walls: &[Hyperplane],
    dim: usize,
    x: &Point,
    tol: f64,
) -> Result<(Vec<usize>, Isometry, Point)> {
    let mut y = x.vector().clone();
    let mut word = Vec::new();
    for step in 0..FOLD_CAP {
        let mut worst = tol;
        let mut pick = None;
        for (i, u) in walls.iter().enumerate() {
            let s = y.dot(u.normal());
            if s > worst {
                worst = s;
                pick = Some(i);
            }
        }
        match pick {
            None => {
                let mut g = Isometry::identity(dim);
                for (k, &i) in word.iter().enumerate() {
                    g = Isometry::reflection(&walls[i]).compose(&g);
                    if (k + 1) % RENORMALIZE_EVERY == 0 {
                        g.reorthonormalize();
                    }
                }
                return Ok((word, g, Point::new_unchecked(y).renormalized()));
            }
            Some(i) => {
                let u = walls[i].normal();
                let s = y.dot(u);
                y = &y - &u.scale(2.0 * s);
                word.push(i);
                if step % RENORMALIZE_EVERY == RENORMALIZE_EVERY - 1 {
                    y = Point::new_unchecked(y).renormalized().into_vector();
                }
            }
        }
    }
    Err(Error::Numerical(format!("fold did not terminate within {FOLD_CAP} reflections")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::IsometryClass;
    use crate::math::{ln, sinh};

    #[test]
    fn pentagon_shape() {
        let p = builtin_pentagon();
        let r = validate_polyhedron(&p).unwrap();
        assert_eq!((r.faces, r.adjacent_pairs, r.vertices), (5, 5, 5));
        assert!(r.max_angle_deviation < 1e-10);
        assert!((p.volume() - core::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // closed form of the wall distance: tanh^2 s = cos 72
        let s = ln((1.0 + sqrt(cos(1.2566370614359172))) / (1.0 - sqrt(cos(1.2566370614359172)))) / 2.0;
        assert!((p.normal(0).normal().coords()[0] - sinh(s)).abs() < 1e-12);
        // opposite walls: <u_0, u_2> = -golden ratio
        assert!((p.gram(0, 2) + (1.0 + sqrt(5.0)) / 2.0).abs() < 1e-12);
        assert!((p.diameter() - 1.616_921_667_511_886_7).abs() < 1e-9);
    }

    #[test]
    fn dodecahedron_shape() {
        let p = builtin_dodecahedron();
        let r = validate_polyhedron(&p).unwrap();
        assert_eq!((r.faces, r.adjacent_pairs, r.vertices), (12, 30, 20));
        assert!(r.max_angle_deviation < 1e-9);
        assert!((p.volume() - 4.306_208_8).abs() < 3.0 * p.volume_std_error() + 0.01 * 4.3062);
        assert!(p.vertices().iter().all(|v| v.vector().norm_sq() + 1.0 < 1e-12));
    }

    #[test]
    fn perturbed_pentagon_names_pair() {
        let p = builtin_pentagon();
        let mut normals: Vec<Vec<f64>> = p.normals().iter().map(|u| u.normal().coords().to_vec()).collect();
        normals[1][1] += 1e-3;
        let q = Hyperplane::normalize(LorentzVector::new(normals[1].clone())).unwrap();
        normals[1] = q.normal().coords().to_vec();
        let pairs = p.adjacent_pairs();
        match Polyhedron::new("bent", 2, normals, &pairs) {
            Err(Error::Validation(ValidationError::NotOrthogonal { i, j, .. })) => {
                assert!(i == 1 || j == 1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_face_is_not_compact() {
        let p = builtin_pentagon();
        let normals: Vec<Vec<f64>> = p.normals()[..4].iter().map(|u| u.normal().coords().to_vec()).collect();
        let r = Polyhedron::new("open", 2, normals, &[(0, 1), (1, 2), (2, 3)]);
        assert!(matches!(r, Err(Error::Validation(ValidationError::NotCompact { .. }))));
    }

    #[test]
    fn volume_oracles() {
        let p = builtin_pentagon();
        let e = mc_polyhedron_volume(&p, 400_000, 1);
        assert!(e.z_score(p.volume()).abs() < 3.0);
        let d = builtin_dodecahedron();
        let a = mc_polyhedron_volume(&d, 300_000, 2);
        let b = mc_polyhedron_volume(&d, 300_000, 3);
        let comb = sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
        assert!((a.value - b.value).abs() < 3.0 * comb);
    }

    #[test]
    fn distance_to_polyhedron() {
        let p = builtin_pentagon();
        assert_eq!(p.distance_to_point(p.reference()), 0.0);
        // along a wall normal the nearest point is the wall midpoint
        let s = asinh_of(p.normal(0).normal().coords()[0]);
        let x = Point::from_polar(&[1.0, 0.0], s + 0.5);
        assert!((p.distance_to_point(&x) - 0.5).abs() < 1e-12);
        // toward a vertex the nearest point is the vertex
        let v = &p.vertices()[0];
        let dir = normalized(&v.coords()[1..]);
        let r = p.reference().distance(v);
        let y = Point::from_polar(&dir, r + 0.3);
        assert!((p.distance_to_point(&y) - 0.3).abs() < 1e-12);
        // brute force over boundary samples
        let z = Point::from_polar(&normalized(&[0.3, 0.8]), 1.7);
        let mut brute = f64::INFINITY;
        for (i, j) in p.adjacent_pairs() {
            let _ = j;
            let vs: Vec<&Point> = p
                .vertices()
                .iter()
                .zip(p.vertex_faces())
                .filter(|(_, f)| f.contains(&i))
                .map(|(v, _)| v)
                .collect();
            for k in 0..=2000 {
                let t = k as f64 / 2000.0;
                let m = &vs[0].vector().scale(1.0 - t) + &vs[1].vector().scale(t);
                let q = Point::normalize(m).unwrap();
                brute = brute.min(q.distance(&z));
            }
        }
        assert!((p.distance_to_point(&z) - brute).abs() < 1e-6);
    }

    fn asinh_of(x: f64) -> f64 {
        crate::math::asinh(x)
    }

    #[test]
    fn words() {
        let p = builtin_pentagon();
        assert_eq!(word_to_isometry(&p, &[]).unwrap(), Isometry::identity(2));
        assert!(word_to_isometry(&p, &[3, 3]).unwrap().distance_from_identity() < 1e-15);
        assert!(word_to_isometry(&p, &[5]).is_err());
        let g = word_to_isometry(&p, &[0, 2]).unwrap();
        assert_eq!(g.classify().unwrap(), IsometryClass::Loxodromic);
        let d = crate::lorentz::dist_hyperplanes(p.normal(0), p.normal(2));
        assert!((g.translation_length().unwrap() - 2.0 * d).abs() < 1e-9);
        assert_eq!(reduce_word(&[1, 2, 2, 1, 3]), vec![3]);
    }

    #[test]
    fn folding() {
        let p = builtin_pentagon();
        let x0 = p.reference().clone();
        let (w, g) = fold_to_fundamental(&p, &x0, GEOM_TOL).unwrap();
        assert!(w.is_empty() && g.distance_from_identity() == 0.0);
        let x = p.reflection(1).apply(&x0);
        let (w, g) = fold_to_fundamental(&p, &x, GEOM_TOL).unwrap();
        assert_eq!(w, vec![1]);
        assert!((g.matrix() - p.reflection(1).matrix()).abs().max() < 1e-15);
        let word = [0, 2, 4, 1, 3, 0];
        let h = word_to_isometry(&p, &word).unwrap();
        let (w, g) = fold_to_fundamental(&p, &h.apply(&x0), GEOM_TOL).unwrap();
        assert!(g.compose(&h).distance_from_identity() < 1e-8);
        assert!(word_to_isometry(&p, &w).unwrap().compose(&g).distance_from_identity() < 1e-8);
        // a maximally expanding word: entries near 1e6, so only the relative
        // error is meaningful; the fold recovers the word itself
        let word = [0, 2, 4, 1, 3, 0, 2, 4, 1, 3, 0, 2];
        let h = word_to_isometry(&p, &word).unwrap();
        let (w, g) = fold_to_fundamental(&p, &h.apply(&x0), GEOM_TOL).unwrap();
        assert_eq!(w, word);
        let scale = h.max_abs() * h.max_abs();
        assert!(g.compose(&h).distance_from_identity() < 1e-14 * scale);
    }
}
