use alloc::boxed::Box;
use alloc::string::String;

use crate::polyhedron::ValidationError;
use crate::tiling::TileSet;
use crate::lorentz::IsometryClass;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a point of the hyperboloid: <x,x> = {norm}")]
    InvalidPoint { norm: f64 },
    #[error("not a unit hyperplane normal: <u,u> = {norm}")]
    InvalidNormal { norm: f64 },
    #[error("point lies outside the {model} model domain")]
    OutsideModel { model: &'static str },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("isometry is {class:?}, not loxodromic")]
    NotLoxodromic { class: IsometryClass },
    #[error("spectral radius {radius} is numerically ambiguous (within the near-parabolic margin)")]
    NumericallyAmbiguous { radius: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid polyhedron: {0}")]
    Validation(#[from] ValidationError),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("tile frontier bound {bound} exceeded ({} tiles collected)", .partial.len())]
    FrontierExceeded { bound: usize, partial: Box<TileSet> },
    #[error("loxodromic axis lies inside a tessellation wall")]
    DegenerateAxis,
    #[error("inconclusive certificate: fold residual {residual} is between identity tolerance and the certification margin")]
    Inconclusive { residual: f64 },
    #[error("element lies in the constructed subgroup (fold residual {residual})")]
    NotSeparated { residual: f64 },
    #[error("region is not convex: {0}")]
    NotConvex(String),
}
