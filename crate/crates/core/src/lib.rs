//! Hyperbolic reflection-group geometry and constructive residual finiteness
//! certificates for right-angled Coxeter groups.
//!
//! The crate is `no_std` with `alloc`; the `std` feature only enables the
//! standard library for downstream conveniences.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod growth;
pub mod lorentz;
pub mod math;
pub mod mc;
pub mod spherical;
pub mod tubes;
pub mod polyhedron;
pub mod separator;
pub mod tiling;

pub use error::{Error, Result};
pub use lorentz::{
    dist_point_hyperplane, dist_point_to_geodesic, dist_points, minkowski_inner, model_convert,
    sl2_translation_length, Geodesic, Hyperplane, Isometry, IsometryClass, LorentzVector, Model,
    Point,
};
