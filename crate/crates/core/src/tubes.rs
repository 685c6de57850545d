//! Tube volumes around geodesic segments and the resulting index bounds.

use alloc::format;

use crate::error::{Error, Result};
use crate::math::{atan, exp, sinh, sqrt, tanh};
use crate::mc::{self, Estimate};
use crate::spherical::max_threshold;

/// A tube of radius `radius` about a geodesic segment of length `length`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeSpec {
    pub dim: usize,
    pub radius: f64,
    pub length: f64,
}

impl TubeSpec {
    pub fn new(dim: usize, radius: f64, length: f64) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::OutOfRange(format!("unsupported dimension {dim}")));
        }
        if !(radius > 0.0 && radius.is_finite() && length > 0.0 && length.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "tube radius and length must be positive and finite (got {radius}, {length})"
            )));
        }
        Ok(Self { dim, radius, length })
    }
}

/// Polyhedron and element data entering the index bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub dim: usize,
    pub diameter: f64,
    pub volume: f64,
    pub length: f64,
}

impl BoundInputs {
    pub fn new(dim: usize, diameter: f64, volume: f64, length: f64) -> Result<Self> {
        if !(2..=4).contains(&dim) {
            return Err(Error::OutOfRange(format!("unsupported dimension {dim}")));
        }
        if !(diameter >= 0.0 && volume > 0.0 && length > 0.0) {
            return Err(Error::OutOfRange(format!(
                "need diameter >= 0, volume > 0, length > 0 (got {diameter}, {volume}, {length})"
            )));
        }
        Ok(Self {
            dim,
            diameter,
            volume,
            length,
        })
    }
}

/// Angle of parallelism: `tan(angle) = 1 / sinh(b)`.
pub fn angle_of_parallelism(b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::OutOfRange(format!("angle of parallelism needs b > 0, got {b}")));
    }
    Ok(atan(1.0 / sinh(b)))
}

/// Volume of the unit ball in `R^k` for `k = 1, 2, 3`.
fn unit_ball_volume(k: usize) -> f64 {
    match k {
        1 => 2.0,
        2 => core::f64::consts::PI,
        _ => 4.0 / 3.0 * core::f64::consts::PI,
    }
}

/// `omega_{n-1} sinh^{n-1}(b) l`: area `2 sinh(b) l` in the plane,
/// `pi sinh^2(b) l` in dimension 3, `(4/3) pi sinh^3(b) l` in dimension 4.
pub fn tube_volume(spec: &TubeSpec) -> f64 {
    let k = spec.dim - 1;
    unit_ball_volume(k) * crate::math::powi(sinh(spec.radius), k as i32) * spec.length
}

/// Monte Carlo estimate of [`tube_volume`] in the upper half-space model.
///
/// The core runs up the vertical axis from height 1 to `e^l`. A point `(x, u)`
/// lies in the tube when `|x| / u <= sinh(b)` and its projection to the
/// axis, at height `|(x, u)|`, lies on the segment. Samples are uniform in a
/// box enclosing the tube and weighted by the density `u^{-dim}`.
pub fn mc_tube_volume(spec: &TubeSpec, n_samples: usize, seed: u64) -> Estimate {
    let dim = spec.dim;
    let sb = sinh(spec.radius);
    let top = exp(spec.length);
    let u_lo = 1.0 / crate::math::cosh(spec.radius);
    let half = top * tanh(spec.radius);
    let box_volume = (top - u_lo) * crate::math::powi(2.0 * half, (dim - 1) as i32);
    mc::integrate(n_samples, seed, |rng| {
        let u = mc::uniform(rng, u_lo, top);
        let mut x2 = 0.0;
        for _ in 0..dim - 1 {
            let x = mc::uniform(rng, -half, half);
            x2 += x * x;
        }
        let r = sqrt(x2 + u * u);
        if x2 <= sb * sb * u * u && (1.0..=top).contains(&r) {
            box_volume * crate::math::powi(u, -(dim as i32))
        } else {
            0.0
        }
    })
}

/// Upper bound on the index of the separating reflection subgroup:
/// twice the volume of the `(R + d_P)`-tube over a period, divided by `V_P`.
pub fn index_bound(inputs: &BoundInputs) -> Result<f64> {
    let r = max_threshold(inputs.dim)?;
    let spec = TubeSpec::new(inputs.dim, r + inputs.diameter, inputs.length)?;
    Ok(2.0 * tube_volume(&spec) / inputs.volume)
}

/// Upper bound on the number of tiles in one lift of the convexification.
pub fn tile_count_bound(inputs: &BoundInputs) -> Result<f64> {
    Ok(index_bound(inputs)? / 2.0)
}
