//! Seeded Monte Carlo plumbing shared by the volume and sampling oracles.
//!
//! Work is split into fixed-size blocks, each driven by its own ChaCha8
//! stream (same seed, stream number = block index), and block results are
//! reduced in order, so estimates are bit-identical for a given seed.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{cos, ln, sqrt};

/// Samples per independent stream.
pub const BLOCK: usize = 1 << 16;

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl Estimate {
    /// `(value - reference) / std_error`.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.value == reference {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - reference) / self.std_error
        }
    }
}

/// RNG for block `block` of a run seeded with `seed`.
pub fn stream(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Uniform sample in `[lo, hi)`.
#[inline]
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Standard normal via Box-Muller.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            let v: f64 = rng.random();
            return sqrt(-2.0 * ln(u)) * cos(core::f64::consts::TAU * v);
        }
    }
}

/// Uniform direction on the unit sphere `S^{n-1}`.
pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
        let s = sqrt(v.iter().map(|x| x * x).sum());
        if s > 1e-12 {
            return v.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Uniform point of the unit ball in `R^n`.
pub fn ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() < 1.0 {
            return v;
        }
    }
}

/// Mean and standard error of `f` over `n` draws, where `f` returns the
/// weighted integrand value of one sample.
pub fn integrate<F>(n: usize, seed: u64, mut f: F) -> Estimate
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut done = 0usize;
    let mut block = 0u64;
    while done < n {
        let take = BLOCK.min(n - done);
        let mut rng = stream(seed, block);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..take {
            let v = f(&mut rng);
            s += v;
            s2 += v * v;
        }
        sum += s;
        sum_sq += s2;
        done += take;
        block += 1;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    Estimate {
        value: mean,
        std_error: sqrt(var / nf),
        samples: n,
    }
}

/// Angle of the unit vector `v` from the `i`-th coordinate hyperplane.
pub(crate) fn angle_to_coordinate_plane(v: &[f64], i: usize) -> f64 {
    crate::math::asin(v[i].abs().min(1.0))
}
