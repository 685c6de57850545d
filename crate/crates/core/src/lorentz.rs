//! Hyperbolic geometry in the hyperboloid model.
//!
//! Vectors live in Minkowski space `R^{n,1}` with the form
//! `<x, y> = -x0*y0 + x1*y1 + ... + xn*yn`. Points of `H^n` are the
//! future-pointing vectors with `<x, x> = -1`, hyperplanes are represented by
//! unit spacelike normals, and ideal points by future-pointing lightlike
//! vectors. Isometries are `(n+1) x (n+1)` matrices preserving the form and the
//! upper sheet.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math::{acosh, asinh, exp, ln, sqrt};

/// Tolerance for geometric predicates (incidence, side tests, classification).
pub const GEOM_TOL: f64 = 1e-9;
/// Tolerance for algebraic identities (involutions, form preservation).
pub const ALG_TOL: f64 = 1e-12;
/// Spectral radii in `(1 + GEOM_TOL, 1 + AMBIGUOUS_MARGIN]` are refused.
pub const AMBIGUOUS_MARGIN: f64 = 1e-7;
/// Long products are re-orthonormalized after this many factors.
pub const RENORMALIZE_EVERY: usize = 64;
/// Condition number (in the infinity norm) beyond which classification gives up.
pub const MAX_CONDITION: f64 = 1e14;

/// A vector of Minkowski space `R^{n,1}`; coordinate 0 is the timelike one.
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzVector(DVector<f64>);

impl LorentzVector {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self(DVector::from_column_slice(coords))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n + 1))
    }

    /// The `i`-th standard basis vector of `R^{n,1}`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n + 1);
        v[i] = 1.0;
        Self(v)
    }

    /// Hyperbolic dimension `n` (the vector has `n + 1` coordinates).
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.0
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        Self(v)
    }

    /// Minkowski form without the dimension check.
    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        let (a, b) = (self.0.as_slice(), other.0.as_slice());
        let mut s = -a[0] * b[0];
        for i in 1..a.len() {
            s += a[i] * b[i];
        }
        s
    }

    /// Minkowski form `<self, other>`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        minkowski_inner(self, other)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Euclidean length of the coordinate vector.
    pub fn euclidean_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

impl Add for &LorentzVector {
    type Output = LorentzVector;
    fn add(self, rhs: Self) -> LorentzVector {
        LorentzVector(&self.0 + &rhs.0)
    }
}

impl Sub for &LorentzVector {
    type Output = LorentzVector;
    fn sub(self, rhs: Self) -> LorentzVector {
        LorentzVector(&self.0 - &rhs.0)
    }
}

impl Neg for &LorentzVector {
    type Output = LorentzVector;
    fn neg(self) -> LorentzVector {
        LorentzVector(-&self.0)
    }
}

impl Mul<f64> for &LorentzVector {
    type Output = LorentzVector;
    fn mul(self, rhs: f64) -> LorentzVector {
        self.scale(rhs)
    }
}

/// `<x, y> = -x0*y0 + sum xi*yi`.
pub fn minkowski_inner(x: &LorentzVector, y: &LorentzVector) -> Result<f64> {
    if x.0.len() != y.0.len() {
        return Err(Error::DimensionMismatch {
            expected: x.0.len(),
            got: y.0.len(),
        });
    }
    Ok(x.dot(y))
}

fn relative_slack(v: &LorentzVector) -> f64 {
    let s = v.max_abs();
    GEOM_TOL * s.max(1.0) * s.max(1.0)
}

/// A point of `H^n`: `<x, x> = -1`, `x0 > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(LorentzVector);

impl Point {
    /// Checks the hyperboloid invariant (tolerance scaled with the coordinates).
    pub fn new(v: LorentzVector) -> Result<Self> {
        let q = v.norm_sq();
        if (q + 1.0).abs() > relative_slack(&v) || v.coords()[0] <= 0.0 {
            return Err(Error::InvalidPoint { norm: q });
        }
        Ok(Self(v))
    }

    /// Rescales a future-pointing timelike vector onto the hyperboloid.
    pub fn normalize(v: LorentzVector) -> Result<Self> {
        let q = v.norm_sq();
        if !(q < 0.0) || v.coords()[0] <= 0.0 {
            return Err(Error::InvalidPoint { norm: q });
        }
        Ok(Self(v.scale(1.0 / sqrt(-q))))
    }

    pub(crate) fn new_unchecked(v: LorentzVector) -> Self {
        Self(v)
    }

    /// The point `e0` (centre of the ball model).
    pub fn origin(n: usize) -> Self {
        Self(LorentzVector::basis(n, 0))
    }

    /// The point at distance `t` from the origin in the unit spatial direction `dir`.
    pub fn from_polar(dir: &[f64], t: f64) -> Self {
        let mut c = Vec::with_capacity(dir.len() + 1);
        c.push(crate::math::cosh(t));
        c.extend(dir.iter().map(|d| d * crate::math::sinh(t)));
        Self(LorentzVector::new(c))
    }

    pub fn vector(&self) -> &LorentzVector {
        &self.0
    }

    pub fn into_vector(self) -> LorentzVector {
        self.0
    }

    pub fn coords(&self) -> &[f64] {
        self.0.coords()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Re-projects onto the hyperboloid to remove accumulated drift, keeping
    /// the spatial coordinates (stable even where `<x, x>` has lost all
    /// precision).
    pub fn renormalized(&self) -> Self {
        let mut c = self.0.coords().to_vec();
        c[0] = sqrt(1.0 + c[1..].iter().map(|v| v * v).sum::<f64>());
        Self(LorentzVector::new(c))
    }

    /// Hyperbolic distance: `2 asinh(|x - y|_M / 2)` for nearby points,
    /// `arccosh(-<x, y>)` once that is well conditioned.
    pub fn distance(&self, other: &Point) -> f64 {
        let c = -self.0.dot(&other.0);
        if c > 1.5 {
            return acosh(c);
        }
        let d = &self.0 - &other.0;
        let q = d.norm_sq().max(0.0);
        2.0 * asinh(sqrt(q) / 2.0)
    }
}

/// `arccosh(-<x, y>)`, with an error when the form says the inputs are not points.
pub fn dist_points(x: &Point, y: &Point) -> Result<f64> {
    let c = -minkowski_inner(x.vector(), y.vector())?;
    let scale = x.vector().max_abs() * y.vector().max_abs();
    if c < 1.0 - GEOM_TOL * scale.max(1.0) {
        return Err(Error::InvalidPoint { norm: -c });
    }
    Ok(x.distance(y))
}

/// A hyperplane of `H^n`, stored as a unit spacelike normal `u`. The normal
/// points to the positive side `<x, u> > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane(LorentzVector);

impl Hyperplane {
    pub fn new(u: LorentzVector) -> Result<Self> {
        let q = u.norm_sq();
        if (q - 1.0).abs() > relative_slack(&u) {
            return Err(Error::InvalidNormal { norm: q });
        }
        Ok(Self(u))
    }

    /// Rescales a spacelike vector to unit length.
    pub fn normalize(u: LorentzVector) -> Result<Self> {
        let q = u.norm_sq();
        if !(q > 0.0) {
            return Err(Error::InvalidNormal { norm: q });
        }
        Ok(Self(u.scale(1.0 / sqrt(q))))
    }

    pub fn new_unchecked(u: LorentzVector) -> Self {
        Self(u)
    }

    /// The hyperplane at distance `s` from the origin, orthogonal to the unit
    /// spatial direction `dir`, with the normal pointing away from the origin.
    pub fn at_distance(dir: &[f64], s: f64) -> Self {
        let mut c = Vec::with_capacity(dir.len() + 1);
        c.push(crate::math::sinh(s));
        c.extend(dir.iter().map(|d| d * crate::math::cosh(s)));
        Self(LorentzVector::new(c))
    }

    pub fn normal(&self) -> &LorentzVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn flipped(&self) -> Self {
        Self(-&self.0)
    }

    /// `<x, u>`; equals `sinh` of the signed distance.
    pub fn side(&self, x: &Point) -> f64 {
        x.vector().dot(&self.0)
    }

    /// Signed distance `asinh(<x, u>)`; positive on the side the normal points to.
    pub fn signed_distance(&self, x: &Point) -> f64 {
        asinh(self.side(x))
    }

    pub fn reflection(&self) -> Isometry {
        Isometry::reflection(self)
    }
}

/// `asinh(|<x, u>|)`.
pub fn dist_point_hyperplane(x: &Point, u: &Hyperplane) -> f64 {
    u.signed_distance(x).abs()
}

/// Distance between two hyperplanes: `arccosh |<u, v>|` when they are
/// ultraparallel, zero when they meet or are asymptotic.
pub fn dist_hyperplanes(u: &Hyperplane, v: &Hyperplane) -> f64 {
    let c = u.normal().dot(v.normal()).abs();
    if c <= 1.0 {
        0.0
    } else {
        acosh(c)
    }
}

/// Conjugacy type of an isometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsometryClass {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

/// An element of `O^+(n, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    m: DMatrix<f64>,
}

impl Isometry {
    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n + 1, n + 1),
        }
    }

    /// Wraps a matrix after checking `G^T J G = J` (relative to `|G|^2`) and
    /// that the upper sheet is preserved.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let g = Self { m };
        let scale = g.max_abs().max(1.0);
        if g.lorentz_defect() > 1e-10 * scale * scale {
            return Err(Error::Numerical(format!(
                "matrix does not preserve the Lorentz form (defect {:e})",
                g.lorentz_defect()
            )));
        }
        if g.m[(0, 0)] <= 0.0 {
            return Err(Error::Numerical("matrix swaps the sheets of the hyperboloid".into()));
        }
        Ok(g)
    }

    /// Wraps a matrix without checking that it preserves the form.
    pub fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    /// Reflection `R = I - 2 u (J u)^T` in the hyperplane `u^perp`.
    pub fn reflection(u: &Hyperplane) -> Self {
        let n1 = u.normal().coords().len();
        let uv = u.normal().as_dvector();
        let mut ju = uv.clone();
        ju[0] = -ju[0];
        let m = DMatrix::identity(n1, n1) - (uv * ju.transpose()) * 2.0;
        Self { m }
    }

    /// Hyperbolic translation of length `t` along the geodesic through the
    /// origin in spatial direction `axis` (an index in `1..=n`).
    pub fn boost(n: usize, axis: usize, t: f64) -> Self {
        let mut m = DMatrix::identity(n + 1, n + 1);
        let (c, s) = (crate::math::cosh(t), crate::math::sinh(t));
        m[(0, 0)] = c;
        m[(axis, axis)] = c;
        m[(0, axis)] = s;
        m[(axis, 0)] = s;
        Self { m }
    }

    /// An isometry carrying the origin `e0` to `p`.
    pub fn translation_to(p: &Point) -> Self {
        let n = p.dim();
        let x = p.coords();
        let x0 = x[0];
        let mut m = DMatrix::identity(n + 1, n + 1);
        m[(0, 0)] = x0;
        for i in 1..=n {
            m[(i, 0)] = x[i];
            m[(0, i)] = x[i];
            for j in 1..=n {
                m[(i, j)] += x[i] * x[j] / (1.0 + x0);
            }
        }
        Self { m }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows() - 1
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// `|G^T J G - J|_inf` (entrywise maximum).
    pub fn lorentz_defect(&self) -> f64 {
        let n1 = self.m.nrows();
        let mut jg = self.m.clone();
        for c in 0..n1 {
            jg[(0, c)] = -jg[(0, c)];
        }
        let q = self.m.transpose() * jg;
        let mut worst = 0.0f64;
        for i in 0..n1 {
            for j in 0..n1 {
                let target = if i != j {
                    0.0
                } else if i == 0 {
                    -1.0
                } else {
                    1.0
                };
                worst = worst.max((q[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `|G - I|_inf` (entrywise maximum).
    pub fn distance_from_identity(&self) -> f64 {
        let n1 = self.m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n1 {
            for j in 0..n1 {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.m[(i, j)] - id).abs());
            }
        }
        worst
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            m: &self.m * &other.m,
        }
    }

    /// `G^{-1} = J G^T J`.
    pub fn inverse(&self) -> Isometry {
        let mut m = self.m.transpose();
        let n1 = m.nrows();
        for i in 1..n1 {
            m[(0, i)] = -m[(0, i)];
            m[(i, 0)] = -m[(i, 0)];
        }
        Isometry { m }
    }

    pub fn conjugate_by(&self, h: &Isometry) -> Isometry {
        h.compose(self).compose(&h.inverse())
    }

    pub fn pow(&self, k: u32) -> Isometry {
        let mut acc = Isometry::identity(self.dim());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }

    pub fn apply(&self, x: &Point) -> Point {
        Point::new_unchecked(self.apply_vector(x.vector()))
    }

    pub fn apply_vector(&self, v: &LorentzVector) -> LorentzVector {
        LorentzVector::from_dvector(&self.m * v.as_dvector())
    }

    pub fn apply_hyperplane(&self, u: &Hyperplane) -> Hyperplane {
        Hyperplane::new_unchecked(self.apply_vector(u.normal()))
    }

    /// Lorentz Gram-Schmidt on the columns, restoring `G^T J G = J`.
    pub fn reorthonormalize(&mut self) {
        let n1 = self.m.nrows();
        let form = |a: &DVector<f64>, b: &DVector<f64>| -> f64 {
            let mut s = -a[0] * b[0];
            for i in 1..a.len() {
                s += a[i] * b[i];
            }
            s
        };
        let mut cols: Vec<DVector<f64>> = (0..n1).map(|j| self.m.column(j).into_owned()).collect();
        for i in 0..n1 {
            let mut c = cols[i].clone();
            for (j, prev) in cols.iter().enumerate().take(i) {
                let sign = if j == 0 { -1.0 } else { 1.0 };
                let p = form(&c, prev) * sign;
                c -= prev * p;
            }
            let q = form(&c, &c).abs();
            c /= sqrt(q);
            cols[i] = c;
        }
        for (j, c) in cols.iter().enumerate() {
            self.m.set_column(j, c);
        }
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> Result<f64> {
        let schur = nalgebra::linalg::Schur::try_new(self.m.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
        let eig = schur.complex_eigenvalues();
        Ok(eig.iter().fold(0.0f64, |m, z| m.max(sqrt(z.re * z.re + z.im * z.im))))
    }

    fn condition(&self) -> f64 {
        let row_norm = |m: &DMatrix<f64>| {
            (0..m.nrows())
                .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0f64, f64::max)
        };
        row_norm(&self.m) * row_norm(&self.inverse().m)
    }

    /// Identity, elliptic, parabolic or loxodromic, decided from the spectral
    /// radius; at radius one the fixed space of `G - I` decides between
    /// elliptic (it contains a timelike vector) and parabolic.
    pub fn classify(&self) -> Result<IsometryClass> {
        let cond = self.condition();
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::Numerical(format!("ill-conditioned isometry (condition {cond:e})")));
        }
        if self.distance_from_identity() < GEOM_TOL {
            return Ok(IsometryClass::Identity);
        }
        let rho = self.spectral_radius()?;
        if rho > 1.0 + AMBIGUOUS_MARGIN {
            let lam = rho;
            let plus = self.eigenvector(lam)?;
            let minus = self.inverse().eigenvector(lam)?;
            let (p, q) = (unit_time(&plus), unit_time(&minus));
            // Coinciding fixed points at infinity mean a Jordan block, not an axis.
            if -p.dot(&q) < 1e-6 {
                return Ok(IsometryClass::Parabolic);
            }
            return Ok(IsometryClass::Loxodromic);
        }
        if rho > 1.0 + GEOM_TOL {
            return Err(Error::NumericallyAmbiguous { radius: rho });
        }
        if self.fixes_timelike_vector()? {
            Ok(IsometryClass::Elliptic)
        } else {
            Ok(IsometryClass::Parabolic)
        }
    }

    fn fixes_timelike_vector(&self) -> Result<bool> {
        let n1 = self.m.nrows();
        let a = &self.m - DMatrix::identity(n1, n1);
        let svd = a.svd(false, true);
        let vt = svd
            .v_t
            .ok_or_else(|| Error::Numerical("SVD failed".into()))?;
        let scale = self.max_abs().max(1.0);
        let null: Vec<DVector<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s < 1e-7 * scale)
            .map(|(i, _)| vt.row(i).transpose())
            .collect();
        if null.is_empty() {
            return Ok(false);
        }
        let k = null.len();
        let mut q = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let (a, b) = (&null[i], &null[j]);
                let mut s = -a[0] * b[0];
                for t in 1..n1 {
                    s += a[t] * b[t];
                }
                q[(i, j)] = s;
            }
        }
        let eig = q.symmetric_eigenvalues();
        Ok(eig.iter().any(|&e| e < -1e-11))
    }

    /// Inverse iteration for the eigenvector of a real eigenvalue `lam > 1`,
    /// oriented to be future pointing.
    fn eigenvector(&self, lam: f64) -> Result<LorentzVector> {
        let n1 = self.m.nrows();
        let shift = lam * (1.0 + 1e-13);
        let a = &self.m - DMatrix::identity(n1, n1) * shift;
        let lu = a.lu();
        let mut x = DVector::from_fn(n1, |i, _| 1.0 + 0.1 * i as f64);
        for _ in 0..6 {
            let y = lu
                .solve(&x)
                .ok_or_else(|| Error::Numerical("eigenvector solve failed".into()))?;
            let s = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Numerical("eigenvector iteration degenerated".into()));
            }
            x = y / s;
        }
        if x[0] < 0.0 {
            x = -x;
        }
        Ok(LorentzVector::from_dvector(x))
    }

    /// Translation length `ln(spectral radius)` of a loxodromic isometry.
    pub fn translation_length(&self) -> Result<f64> {
        let class = self.classify()?;
        if class != IsometryClass::Loxodromic {
            return Err(Error::NotLoxodromic { class });
        }
        Ok(ln(self.spectral_radius()?))
    }

    /// The invariant geodesic of a loxodromic isometry, oriented in the
    /// direction of translation and parametrized from the foot of the
    /// perpendicular dropped from the origin.
    pub fn axis(&self) -> Result<Geodesic> {
        let class = self.classify()?;
        if class != IsometryClass::Loxodromic {
            return Err(Error::NotLoxodromic { class });
        }
        let lam = self.spectral_radius()?;
        let plus = self.eigenvector(lam)?;
        let minus = self.inverse().eigenvector(lam)?;
        Geodesic::from_endpoints(&plus, &minus)
    }
}

/// Rescales a future lightlike (or timelike) vector to time coordinate 1.
pub(crate) fn unit_time(v: &LorentzVector) -> LorentzVector {
    v.scale(1.0 / v.coords()[0])
}

/// A complete oriented geodesic `t -> e^t plus + e^{-t} minus`, where `plus`
/// and `minus` are lightlike with `<plus, minus> = -1/2`. The parametrization
/// is by arc length and `plus` is the forward endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Geodesic {
    plus: LorentzVector,
    minus: LorentzVector,
}

impl Geodesic {
    /// Builds the geodesic from its forward and backward ideal endpoints
    /// (any positive multiples), with `t = 0` at the foot of the perpendicular
    /// from the origin.
    pub fn from_endpoints(forward: &LorentzVector, backward: &LorentzVector) -> Result<Self> {
        if forward.coords().len() != backward.coords().len() {
            return Err(Error::DimensionMismatch {
                expected: forward.coords().len(),
                got: backward.coords().len(),
            });
        }
        if forward.coords()[0] <= 0.0 || backward.coords()[0] <= 0.0 {
            return Err(Error::Numerical("geodesic endpoints must be future pointing".into()));
        }
        let p = unit_time(forward);
        let q = unit_time(backward);
        let pq = p.dot(&q);
        if !(pq < -1e-12) {
            return Err(Error::Numerical("geodesic endpoints coincide".into()));
        }
        let c = sqrt(-0.5 / pq);
        Ok(Self {
            plus: p.scale(c),
            minus: q.scale(c),
        })
    }

    /// The geodesic through `x` with unit tangent `v` (`<v, x> = 0`, `<v, v> = 1`).
    pub fn through(x: &Point, v: &LorentzVector) -> Result<Self> {
        let f = x.vector() + v;
        let b = x.vector() - v;
        Self::from_endpoints(&f, &b)
    }

    pub fn dim(&self) -> usize {
        self.plus.dim()
    }

    /// Forward ideal endpoint.
    pub fn forward(&self) -> &LorentzVector {
        &self.plus
    }

    /// Backward ideal endpoint.
    pub fn backward(&self) -> &LorentzVector {
        &self.minus
    }

    pub fn point_at(&self, t: f64) -> Point {
        let v = &self.plus.scale(exp(t)) + &self.minus.scale(exp(-t));
        Point::new_unchecked(v)
    }

    /// Unit tangent vector at parameter `t`.
    pub fn tangent_at(&self, t: f64) -> LorentzVector {
        &self.plus.scale(exp(t)) - &self.minus.scale(exp(-t))
    }

    /// Parameter of the point of the geodesic closest to `x`.
    pub fn foot_parameter(&self, x: &Point) -> f64 {
        let a = -x.vector().dot(&self.plus);
        let b = -x.vector().dot(&self.minus);
        0.5 * ln(b / a)
    }

    /// Distance from `x` to the complete geodesic: `cosh d = 2 sqrt(ab)` with
    /// `a = -<x, plus>`, `b = -<x, minus>`.
    pub fn distance_to(&self, x: &Point) -> f64 {
        let a = -x.vector().dot(&self.plus);
        let b = -x.vector().dot(&self.minus);
        let c = 2.0 * sqrt((a * b).max(0.0));
        if c > 1.5 {
            return acosh(c);
        }
        // acosh loses half the digits near 1
        x.distance(&self.point_at(self.foot_parameter(x)))
    }

    /// Values `<plus, u>` and `<minus, u>` for the endpoints rescaled to time 1;
    /// their signs tell on which side of `u` each end lies.
    pub fn endpoint_sides(&self, u: &Hyperplane) -> (f64, f64) {
        (
            unit_time(&self.plus).dot(u.normal()),
            unit_time(&self.minus).dot(u.normal()),
        )
    }

    /// Crossing parameter with a hyperplane separating the two endpoints.
    pub fn crossing_parameter(&self, u: &Hyperplane) -> Option<f64> {
        let sp = self.plus.dot(u.normal());
        let sm = self.minus.dot(u.normal());
        if sp * sm >= 0.0 {
            return None;
        }
        Some(0.5 * ln(-sm / sp))
    }

    /// The same geodesic with parameter `t` moved to `t - s`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            plus: self.plus.scale(exp(s)),
            minus: self.minus.scale(exp(-s)),
        }
    }

    pub fn transformed(&self, g: &Isometry) -> Self {
        Self {
            plus: g.apply_vector(&self.plus),
            minus: g.apply_vector(&self.minus),
        }
    }
}

/// `dist(x, geodesic)`.
pub fn dist_point_to_geodesic(x: &Point, g: &Geodesic) -> f64 {
    g.distance_to(x)
}

/// Models of hyperbolic space supported by [`model_convert`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    /// `n + 1` coordinates on the upper sheet of the hyperboloid.
    Hyperboloid,
    /// `n` coordinates in the open unit ball.
    Ball,
    /// `n` coordinates with the last one positive.
    HalfSpace,
}

fn to_hyperboloid(x: &[f64], from: Model) -> Result<Vec<f64>> {
    match from {
        Model::Hyperboloid => {
            let p = Point::new(LorentzVector::from_slice(x))?;
            Ok(p.coords().to_vec())
        }
        Model::Ball => {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if x.is_empty() || !(r2 < 1.0) {
                return Err(Error::OutsideModel { model: "ball" });
            }
            let d = 1.0 - r2;
            let mut out = Vec::with_capacity(x.len() + 1);
            out.push((1.0 + r2) / d);
            out.extend(x.iter().map(|v| 2.0 * v / d));
            Ok(out)
        }
        Model::HalfSpace => {
            let n = x.len();
            if n == 0 || !(x[n - 1] > 0.0) {
                return Err(Error::OutsideModel { model: "half-space" });
            }
            let u = x[n - 1];
            let y2: f64 = x[..n - 1].iter().map(|v| v * v).sum();
            let s = y2 + u * u;
            let mut out = Vec::with_capacity(n + 1);
            out.push((1.0 + s) / (2.0 * u));
            out.extend(x[..n - 1].iter().map(|v| v / u));
            out.push((s - 1.0) / (2.0 * u));
            Ok(out)
        }
    }
}

fn from_hyperboloid(x: &[f64], to: Model) -> Vec<f64> {
    match to {
        Model::Hyperboloid => x.to_vec(),
        Model::Ball => x[1..].iter().map(|v| v / (1.0 + x[0])).collect(),
        Model::HalfSpace => {
            let n = x.len() - 1;
            let u = 1.0 / (x[0] - x[n]);
            let mut out: Vec<f64> = x[1..n].iter().map(|v| v * u).collect();
            out.push(u);
            out
        }
    }
}

/// Converts coordinates between the hyperboloid, Poincaré ball and upper
/// half-space models. The ball origin maps to `e0` and to `(0, ..., 0, 1)`.
pub fn model_convert(x: &[f64], from: Model, to: Model) -> Result<Vec<f64>> {
    let h = to_hyperboloid(x, from)?;
    Ok(from_hyperboloid(&h, to))
}

/// Ball-model coordinates of a point.
pub fn to_ball(p: &Point) -> Vec<f64> {
    from_hyperboloid(p.coords(), Model::Ball)
}

/// Translation length of a loxodromic element of `PSL(2, R)` from its trace:
/// `2 arccosh(|tr| / 2)`.
pub fn sl2_translation_length(trace: f64) -> Result<f64> {
    if !(trace.abs() > 2.0) {
        return Err(Error::OutOfRange(format!(
            "|trace| = {} <= 2 is not loxodromic",
            trace.abs()
        )));
    }
    Ok(2.0 * acosh(trace.abs() / 2.0))
}

/// The matrix `J = diag(-1, 1, ..., 1)`.
pub fn lorentz_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    j[(0, 0)] = -1.0;
    j
}

/// Unit spatial vector helper used by the builtin constructions.
pub(crate) fn normalized(v: &[f64]) -> Vec<f64> {
    let s = sqrt(v.iter().map(|x| x * x).sum());
    v.iter().map(|x| x / s).collect()
}

#[allow(dead_code)]
pub(crate) fn zeros(n: usize) -> Vec<f64> {
    vec![0.0; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cosh, sinh};

    fn pt(c: &[f64]) -> Point {
        Point::new(LorentzVector::from_slice(c)).unwrap()
    }

    #[test]
    fn inner_product_basics() {
        let e0 = LorentzVector::basis(3, 0);
        let e1 = LorentzVector::basis(3, 1);
        assert_eq!(minkowski_inner(&e0, &e0).unwrap(), -1.0);
        assert_eq!(minkowski_inner(&e1, &e1).unwrap(), 1.0);
        let v = LorentzVector::new(vec![2f64.sqrt(), 1.0, 0.0, 0.0]);
        assert!((minkowski_inner(&v, &v).unwrap() + 1.0).abs() < 1e-15);
        let w = LorentzVector::basis(2, 0);
        assert!(matches!(
            minkowski_inner(&e0, &w),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distances() {
        let o = Point::origin(2);
        assert_eq!(dist_points(&o, &o).unwrap(), 0.0);
        let p = pt(&[cosh(1.0), sinh(1.0), 0.0]);
        assert!((dist_points(&o, &p).unwrap() - 1.0).abs() < 1e-14);
        let e1 = Hyperplane::new(LorentzVector::basis(2, 1)).unwrap();
        assert!((dist_point_hyperplane(&p, &e1) - 1.0).abs() < 1e-14);
        let q = Point::new_unchecked(LorentzVector::new(vec![0.5, 0.0, 0.0]));
        assert!(dist_points(&o, &q).is_err());
    }

    #[test]
    fn reflection_of_coordinate_hyperplane() {
        let r = Isometry::reflection(&Hyperplane::new(LorentzVector::basis(2, 1)).unwrap());
        let t = 0.8;
        let x = r.apply(&pt(&[cosh(t), sinh(t), 0.0]));
        assert!((x.coords()[1] + sinh(t)).abs() < 1e-15);
        assert_eq!(r.classify().unwrap(), IsometryClass::Elliptic);
        assert!(r.compose(&r).distance_from_identity() < 1e-15);
    }

    #[test]
    fn signed_distance_flips_under_reflection() {
        let u = Hyperplane::at_distance(&[0.6, 0.8], 0.3);
        let x = Point::from_polar(&[1.0, 0.0], 0.9);
        let rx = u.reflection().apply(&x);
        assert!((u.signed_distance(&x) + u.signed_distance(&rx)).abs() < 1e-12);
    }

    #[test]
    fn two_reflections_translate_by_twice_the_gap() {
        let d = 0.7;
        let a = Hyperplane::at_distance(&[1.0, 0.0], d / 2.0);
        let b = Hyperplane::at_distance(&[-1.0, 0.0], d / 2.0);
        assert!((dist_hyperplanes(&a, &b) - d).abs() < 1e-14);
        let g = a.reflection().compose(&b.reflection());
        assert_eq!(g.classify().unwrap(), IsometryClass::Loxodromic);
        assert!((g.translation_length().unwrap() - 2.0 * d).abs() < 1e-12);
    }

    #[test]
    fn identity_and_parabolic() {
        assert_eq!(Isometry::identity(3).classify().unwrap(), IsometryClass::Identity);
        // Parabolic fixing the ideal point (1, 1, 0): exp of a null rotation.
        let s: f64 = 0.5;
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0 + s * s / 2.0,
                -s * s / 2.0,
                s,
                s * s / 2.0,
                1.0 - s * s / 2.0,
                s,
                s,
                -s,
                1.0,
            ],
        );
        let g = Isometry::from_matrix(m).unwrap();
        assert_eq!(g.classify().unwrap(), IsometryClass::Parabolic);
        assert!(matches!(g.translation_length(), Err(Error::NotLoxodromic { .. })));
    }

    #[test]
    fn axis_and_displacement() {
        let a = Hyperplane::at_distance(&[1.0, 0.0, 0.0], 1.0);
        let b = Hyperplane::at_distance(&[-0.6, 0.8, 0.0], 1.2);
        let g = a.reflection().compose(&b.reflection());
        let ell = g.translation_length().unwrap();
        let axis = g.axis().unwrap();
        for t in [-1.0, 0.0, 0.3, 2.0] {
            let p = axis.point_at(t);
            let gp = g.apply(&p);
            assert!(axis.distance_to(&gp) < 1e-9);
            assert!((p.distance(&gp) - ell).abs() < 1e-9);
            // forward orientation
            assert!((axis.foot_parameter(&gp) - t - ell).abs() < 1e-9);
        }
        // off-axis points move further
        let p = axis.point_at(0.2);
        let v = LorentzVector::new(vec![0.0, 0.0, 0.0, 1.0]);
        let n = &v + &p.vector().scale(p.vector().dot(&v));
        let n = n.scale(1.0 / sqrt(n.norm_sq()));
        let off = Geodesic::through(&p, &n).unwrap().point_at(1.0);
        assert!((axis.distance_to(&off) - 1.0).abs() < 1e-9);
        assert!(off.distance(&g.apply(&off)) > ell + 1e-3);
    }

    #[test]
    fn point_to_geodesic_distance() {
        let g = Geodesic::through(&Point::origin(2), &LorentzVector::basis(2, 1)).unwrap();
        let x = pt(&[cosh(1.0), 0.0, sinh(1.0)]);
        assert!((g.distance_to(&x) - 1.0).abs() < 1e-12);
        assert!(g.distance_to(&g.point_at(3.0)) < 1e-7);
        // monotone along the perpendicular
        let mut last = -1.0;
        for k in 0..10 {
            let s = 0.3 * k as f64;
            let y = pt(&[cosh(s), 0.0, sinh(s)]);
            let d = g.distance_to(&y);
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn models() {
        let b = model_convert(&[1.0, 0.0, 0.0], Model::Hyperboloid, Model::Ball).unwrap();
        assert_eq!(b, vec![0.0, 0.0]);
        let h = model_convert(&[0.0, 0.0], Model::Ball, Model::HalfSpace).unwrap();
        assert!((h[0]).abs() < 1e-15 && (h[1] - 1.0).abs() < 1e-15);
        assert!(model_convert(&[0.8, 0.7], Model::Ball, Model::Hyperboloid).is_err());
        assert!(model_convert(&[0.2, -0.1], Model::HalfSpace, Model::Ball).is_err());
    }

    #[test]
    fn sl2_lengths() {
        assert!((sl2_translation_length(6.0).unwrap() - 3.525494348078172).abs() < 1e-12);
        assert_eq!(
            sl2_translation_length(-6.0).unwrap(),
            sl2_translation_length(6.0).unwrap()
        );
        assert!((sl2_translation_length(22.0).unwrap() - 2.0 * acosh(11.0)).abs() < 1e-15);
        assert!(sl2_translation_length(2.0).is_err());
    }

    #[test]
    fn reorthonormalize_repairs_drift() {
        let a = Hyperplane::at_distance(&[1.0, 0.0], 0.4);
        let b = Hyperplane::at_distance(&[0.0, 1.0], 0.9);
        let mut g = a.reflection().compose(&b.reflection());
        let mut m = g.matrix().clone();
        m[(1, 2)] += 1e-7;
        g = Isometry::from_matrix_unchecked(m);
        assert!(g.lorentz_defect() > 1e-8);
        g.reorthonormalize();
        assert!(g.lorentz_defect() < 1e-13);
    }
}
