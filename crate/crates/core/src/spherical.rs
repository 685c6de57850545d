//! Spherical trigonometry behind the separation thresholds.
//!
//! Near a vertex (or edge) of an all-right polyhedron the incident walls look
//! like coordinate hyperplanes through the origin of the ball model. A
//! geodesic far enough from the origin has its ideal endpoints inside a small
//! spherical cap, and once that cap fits strictly inside the complementary
//! orthant cell some coordinate wall separates. The threshold distance is the
//! one at which the cap is exactly the inscribed cap of the cell.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::{acos, acos_clamped, asin, cos, ln, sin, sinh, sqrt, tan, tanh};
use crate::mc;

const ACOS_SLACK: f64 = 1e-12;

/// Spherical law of cosines for angles: the angle opposite side `a` in a
/// triangle whose other two angles are `beta` and `gamma`.
pub fn spherical_angle(beta: f64, gamma: f64, a: f64) -> Result<f64> {
    let c = -cos(beta) * cos(gamma) + sin(beta) * sin(gamma) * cos(a);
    acos_clamped(c, ACOS_SLACK)
        .ok_or_else(|| Error::OutOfRange(format!("arccos argument {c} outside [-1, 1]")))
}

/// Inverse of [`spherical_angle`] in the side: the side `a` opposite `alpha`.
pub fn spherical_side(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let d = sin(beta) * sin(gamma);
    if d.abs() < 1e-15 {
        return Err(Error::OutOfRange("degenerate spherical triangle".into()));
    }
    let c = (cos(alpha) + cos(beta) * cos(gamma)) / d;
    acos_clamped(c, ACOS_SLACK)
        .ok_or_else(|| Error::OutOfRange(format!("arccos argument {c} outside [-1, 1]")))
}

/// Inradius of the all-right spherical triangle (an octant of `S^2`).
///
/// Split the triangle at its incenter into six right triangles: angles
/// `pi/4` at a vertex, `pi/2` at the tangency point and `pi/3` at the center.
/// The inradius is the side between the tangency point and the center.
pub fn inscribed_circle_radius_right_triangle() -> f64 {
    spherical_side(
        core::f64::consts::FRAC_PI_4,
        core::f64::consts::FRAC_PI_2,
        core::f64::consts::FRAC_PI_3,
    )
    .expect("octant triangle is nondegenerate")
}

/// Angle at the incenter `O` in the right triangle (vertex, face tangency
/// point, incenter) of the all-right spherical tetrahedron.
pub fn tetrahedron_center_angle() -> f64 {
    spherical_angle(
        core::f64::consts::FRAC_PI_4,
        core::f64::consts::FRAC_PI_2,
        inscribed_circle_radius_right_triangle(),
    )
    .expect("well-defined")
}

/// Inradius of the all-right spherical tetrahedron (an orthant of `S^3`).
pub fn inscribed_sphere_radius_right_tetrahedron() -> f64 {
    spherical_side(
        core::f64::consts::FRAC_PI_4,
        core::f64::consts::FRAC_PI_2,
        tetrahedron_center_angle(),
    )
    .expect("well-defined")
}

/// Inradius of the right-angled lune cut out by two orthogonal great spheres.
pub fn inscribed_radius_right_lune() -> f64 {
    core::f64::consts::FRAC_PI_2 / 2.0
}

/// Distance from the ball origin to a hyperplane whose boundary sphere is a
/// cap of spherical radius `r` about the foot direction.
///
/// In the plane through the origin and the foot, the boundary circle of the
/// hyperplane is orthogonal to the unit circle and meets it at angle `r` from
/// the foot direction: its center is at `sec r`, its radius `tan r`, so it
/// crosses the axis at `y = sec r - tan r` and the distance is
/// `ln((1 + y) / (1 - y))`.
pub fn threshold_from_tangency(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < core::f64::consts::FRAC_PI_2) {
        return Err(Error::OutOfRange(format!("tangency radius {r} not in (0, pi/2)")));
    }
    let c = 1.0 / cos(r);
    let q = tan(r);
    let y = c - q;
    if !(y > 0.0 && 1.0 - y > 1e-12) {
        return Err(Error::OutOfRange(format!("tangency radius {r} too close to pi/2")));
    }
    Ok(ln((1.0 + y) / (1.0 - y)))
}

/// Spherical radius of the boundary cap of a hyperplane at distance `d` from
/// the origin: `cos r = tanh d`.
pub fn cap_radius(d: f64) -> f64 {
    acos(tanh(d))
}

/// Threshold data for one codimension case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdCase {
    pub dim: usize,
    pub codim: usize,
    /// Inradius of the spherical cell cut out by the `codim` walls; `None`
    /// for codimension one, where the face itself separates.
    pub inscribed_radius: Option<f64>,
    /// `0.0` is the codimension-one sentinel: any positive radius works.
    pub threshold: f64,
}

/// Threshold for a closest face of codimension `k` in dimension `dim`.
pub fn codim_threshold(dim: usize, k: usize) -> Result<ThresholdCase> {
    if !(2..=4).contains(&dim) || k == 0 || k > dim {
        return Err(Error::OutOfRange(format!("no threshold case for dim {dim}, codim {k}")));
    }
    let r = match k {
        1 => None,
        2 => Some(inscribed_radius_right_lune()),
        3 => Some(inscribed_circle_radius_right_triangle()),
        _ => Some(inscribed_sphere_radius_right_tetrahedron()),
    };
    let threshold = match r {
        None => 0.0,
        Some(r) => threshold_from_tangency(r)?,
    };
    Ok(ThresholdCase {
        dim,
        codim: k,
        inscribed_radius: r,
        threshold,
    })
}

/// Largest threshold over all codimension cases of `dim`.
pub fn max_threshold(dim: usize) -> Result<f64> {
    if !(2..=4).contains(&dim) {
        return Err(Error::OutOfRange(format!("unsupported dimension {dim}")));
    }
    let mut best = 0.0f64;
    for k in 1..=dim {
        best = best.max(codim_threshold(dim, k)?.threshold);
    }
    Ok(best)
}

/// Outcome of sampling geodesics at a fixed distance from an orthant vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationReport {
    pub dim: usize,
    pub distance: f64,
    pub samples: usize,
    /// Geodesics lying strictly on the far side of some coordinate wall.
    pub separated: usize,
    /// Samples whose whole boundary cap lies beyond some coordinate wall.
    pub cap_separated: usize,
    pub seed: u64,
}

impl SeparationReport {
    pub fn fraction(&self) -> f64 {
        self.separated as f64 / self.samples as f64
    }

    pub fn failures(&self) -> usize {
        self.samples - self.separated
    }
}

/// Samples geodesics at distance `d` from the vertex of the positive orthant
/// `{x_i >= 0}`, with the closest point in the negative orthant (so the vertex
/// is the closest point of the cell to the geodesic), and counts how many are
/// separated from the cell by a coordinate wall.
pub fn sample_separation(dim: usize, d: f64, n_samples: usize, seed: u64) -> Result<SeparationReport> {
    if !(2..=4).contains(&dim) {
        return Err(Error::OutOfRange(format!("unsupported dimension {dim}")));
    }
    let sd = sinh(d);
    let cap = cap_radius(d);
    let mut separated = 0usize;
    let mut cap_separated = 0usize;
    let mut done = 0usize;
    let mut block = 0u64;
    while done < n_samples {
        let take = mc::BLOCK.min(n_samples - done);
        let mut rng = mc::stream(seed, block);
        for _ in 0..take {
            // random orthant symmetry carrying the foot direction into the
            // negative orthant
            let w: alloc::vec::Vec<f64> = mc::unit_vector(&mut rng, dim)
                .into_iter()
                .map(|x| -x.abs())
                .collect();
            let v = orthogonal_unit(&mut rng, &w);
            // endpoints of the geodesic: spatial parts sinh(d) w +- v
            let sep = (0..dim).any(|i| sd * w[i] + v[i] < 0.0 && sd * w[i] - v[i] < 0.0);
            if sep {
                separated += 1;
            }
            if (0..dim).any(|i| mc::angle_to_coordinate_plane(&w, i) > cap) {
                cap_separated += 1;
            }
        }
        done += take;
        block += 1;
    }
    Ok(SeparationReport {
        dim,
        distance: d,
        samples: n_samples,
        separated,
        cap_separated,
        seed,
    })
}

fn orthogonal_unit(rng: &mut rand_chacha::ChaCha8Rng, w: &[f64]) -> alloc::vec::Vec<f64> {
    loop {
        let mut v = mc::unit_vector(rng, w.len());
        let p: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        for (x, y) in v.iter_mut().zip(w) {
            *x -= p * y;
        }
        let s = sqrt(v.iter().map(|x| x * x).sum());
        if s > 1e-6 {
            return v.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Samples at `distance = max_threshold(dim) + margin`; the separation claim
/// is that the fraction separated is exactly one.
pub fn verify_separation_property(
    dim: usize,
    margin: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SeparationReport> {
    if !(3..=4).contains(&dim) {
        return Err(Error::OutOfRange(format!("separation check needs dim 3 or 4, got {dim}")));
    }
    sample_separation(dim, max_threshold(dim)? + margin, n_samples, seed)
}

/// Result of looking for a configuration below the threshold in which the
/// boundary cap meets every coordinate wall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SharpnessProbe {
    CounterexampleFound { count: usize, samples: usize },
    /// Nothing found; not evidence against the threshold.
    Inconclusive { samples: usize },
}

/// Sampling search below the threshold: a sample counts when the boundary
/// cap of the perpendicular hyperplane meets every coordinate wall, so no
/// wall separates it from the cell.
pub fn probe_below_threshold(dim: usize, deficit: f64, n_samples: usize, seed: u64) -> Result<SharpnessProbe> {
    let d = max_threshold(dim)? - deficit;
    if !(d > 0.0) {
        return Err(Error::OutOfRange(format!("deficit {deficit} exceeds the threshold")));
    }
    let report = sample_separation(dim, d, n_samples, seed)?;
    let count = report.samples - report.cap_separated;
    Ok(if count > 0 {
        SharpnessProbe::CounterexampleFound {
            count,
            samples: n_samples,
        }
    } else {
        SharpnessProbe::Inconclusive { samples: n_samples }
    })
}

/// Angular distance on the sphere between unit vectors.
pub fn sphere_distance(a: &[f64], b: &[f64]) -> f64 {
    let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    acos(c.clamp(-1.0, 1.0))
}

/// Angular distance from a unit vector to the great sphere orthogonal to `n`.
pub fn distance_to_great_sphere(v: &[f64], n: &[f64]) -> f64 {
    let c: f64 = v.iter().zip(n).map(|(x, y)| x * y).sum();
    let s = sqrt(n.iter().map(|x| x * x).sum());
    asin((c / s).abs().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    #[test]
    fn law_of_cosines_roundtrip() {
        let a = spherical_angle(FRAC_PI_2, FRAC_PI_3, 0.6154797086703874).unwrap();
        assert!((a - FRAC_PI_4).abs() < 1e-12);
        for a in [0.1, 0.7, 1.3, 2.9] {
            assert!((spherical_angle(FRAC_PI_2, FRAC_PI_2, a).unwrap() - a).abs() < 1e-12);
        }
        assert!(spherical_side(0.1, 0.1, 0.1).is_err());
    }

    #[test]
    fn law_of_cosines_matches_vector_triangle() {
        // triangle from three unit vectors: angles from tangent directions
        let p = [0.3f64, 0.5, 0.81];
        let q = [0.9f64, -0.2, 0.3];
        let r = [-0.1f64, 0.95, 0.2];
        let un = |v: [f64; 3]| {
            let s = sqrt(v.iter().map(|x| x * x).sum());
            [v[0] / s, v[1] / s, v[2] / s]
        };
        let (p, q, r) = (un(p), un(q), un(r));
        let cross = |a: [f64; 3], b: [f64; 3]| {
            [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        };
        // angle at a vertex = angle between the planes through it
        let angle_at = |v, a, b| {
            let n1 = un(cross(v, a));
            let n2 = un(cross(v, b));
            sphere_distance(&n1, &n2)
        };
        let (ap, aq, ar) = (angle_at(p, q, r), angle_at(q, p, r), angle_at(r, p, q));
        let side_qr = sphere_distance(&q, &r);
        assert!((spherical_angle(aq, ar, side_qr).unwrap() - ap).abs() < 1e-12);
        assert!((spherical_side(ap, aq, ar).unwrap() - side_qr).abs() < 1e-12);
    }

    #[test]
    fn inradii() {
        let r3 = inscribed_circle_radius_right_triangle();
        assert!((r3 - acos(sqrt(2.0) / sqrt(3.0))).abs() < 1e-12);
        assert!((tetrahedron_center_angle() - acos(1.0 / sqrt(3.0))).abs() < 1e-12);
        let r4 = inscribed_sphere_radius_right_tetrahedron();
        assert!((r4 - FRAC_PI_6).abs() < 1e-12);
        assert!((r4 - acos(sqrt(3.0) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn octant_incenter_oracle() {
        // incenter of the octant of S^2 is (1,1,1)/sqrt3; distance to each
        // coordinate great circle is the inradius, reached at edge midpoints
        let c = [1.0 / sqrt(3.0); 3];
        let r3 = inscribed_circle_radius_right_triangle();
        for i in 0..3 {
            let mut n = [0.0; 3];
            n[i] = 1.0;
            assert!((distance_to_great_sphere(&c, &n) - r3).abs() < 1e-12);
            let mut m = [1.0 / sqrt(2.0); 3];
            m[i] = 0.0;
            assert!((sphere_distance(&c, &m) - r3).abs() < 1e-12);
        }
        let c4 = [0.5; 4];
        let r4 = inscribed_sphere_radius_right_tetrahedron();
        for i in 0..4 {
            let mut n = [0.0; 4];
            n[i] = 1.0;
            assert!((distance_to_great_sphere(&c4, &n) - r4).abs() < 1e-12);
        }
    }

    #[test]
    fn thresholds() {
        let r3 = threshold_from_tangency(inscribed_circle_radius_right_triangle()).unwrap();
        assert!((r3 - 1.1462158347805889).abs() < 1e-12);
        assert!((r3 - ln(sqrt(2.0) + sqrt(3.0))).abs() < 1e-12);
        let r4 = threshold_from_tangency(FRAC_PI_6).unwrap();
        assert!((r4 - ln(2.0 + sqrt(3.0))).abs() < 1e-12);
        let r2 = threshold_from_tangency(FRAC_PI_4).unwrap();
        assert!((r2 - ln(1.0 + sqrt(2.0))).abs() < 1e-12);
        assert!(threshold_from_tangency(FRAC_PI_2 - 1e-14).is_err());
        assert!(threshold_from_tangency(0.0).is_err());
    }

    #[test]
    fn tangency_matches_cap_oracle() {
        for r in [0.1, 0.4, FRAC_PI_6, 0.9, 1.3] {
            let d = threshold_from_tangency(r).unwrap();
            assert!((cap_radius(d) - r).abs() < 1e-10);
        }
    }

    #[test]
    fn codim_cases() {
        assert_eq!(codim_threshold(3, 1).unwrap().threshold, 0.0);
        assert!(codim_threshold(3, 1).unwrap().inscribed_radius.is_none());
        assert!((codim_threshold(3, 3).unwrap().threshold - ln(sqrt(2.0) + sqrt(3.0))).abs() < 1e-12);
        assert!((codim_threshold(4, 4).unwrap().threshold - ln(2.0 + sqrt(3.0))).abs() < 1e-12);
        assert!(codim_threshold(3, 4).is_err());
        assert!(codim_threshold(5, 1).is_err());
        assert!((max_threshold(2).unwrap() - ln(1.0 + sqrt(2.0))).abs() < 1e-12);
        assert!((sinh(max_threshold(3).unwrap()) - sqrt(2.0)).abs() < 1e-12);
        assert!((sinh(max_threshold(4).unwrap()) - sqrt(3.0)).abs() < 1e-12);
        let t: alloc::vec::Vec<f64> = (2..=4).map(|k| codim_threshold(4, k).unwrap().threshold).collect();
        assert!(t[0] < t[1] && t[1] < t[2]);
    }

    #[test]
    fn separation_small_sample() {
        let rep = verify_separation_property(3, 0.01, 20_000, 5).unwrap();
        assert_eq!(rep.failures(), 0);
        assert_eq!(rep.cap_separated, rep.samples);
        let rep = verify_separation_property(4, 0.01, 20_000, 5).unwrap();
        assert_eq!(rep.failures(), 0);
    }

    #[test]
    fn below_threshold_probe() {
        match probe_below_threshold(3, 0.05, 100_000, 11).unwrap() {
            SharpnessProbe::CounterexampleFound { count, .. } => assert!(count > 0),
            SharpnessProbe::Inconclusive { .. } => {}
        }
    }
}
