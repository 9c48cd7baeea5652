//! Planar objects: arcs of the unit circle, their geodesics, and the
//! star-shaped domains used by the solvers.

mod arc;
mod domain;
mod maps;
mod partition;
mod polar;
mod polyline;

pub use arc::{geodesic_of, GeodesicArc, UnitArc};
pub use domain::{BoundaryHit, Curve, Piece, StarDomain};
pub use maps::{power_map, reflect_across_ray, MapDirection};
pub use partition::{make_partition, ArcPartition};
pub use polar::{PolarArc, RadiusProfile};
pub use polyline::Polyline;

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// A point of the complex plane.
pub type Point = Complex64;

/// Largest admissible half-opening for generated arcs. The geodesic radius
/// `tan α` blows up as `α → π/2`.
pub const MAX_HALF_OPENING: f64 = FRAC_PI_2 - 1e-3;

/// Absolute tolerance on the total opening of a partition.
pub const PARTITION_SUM_TOL: f64 = 1e-12;

/// Target Hausdorff error of polyline approximations of polar graphs.
pub const POLYLINE_TOL: f64 = 1e-5;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("half-opening {0} outside (0, π/2)")]
    BadOpening(f64),
    #[error("half-openings sum to {0}, expected π")]
    BadTotal(f64),
    #[error("need at least 3 arcs, got {0}")]
    TooFewArcs(usize),
    #[error("basic arc half-opening {basic} does not match longest arc {longest}")]
    HalfOpeningMismatch { basic: f64, longest: f64 },
    #[error("invalid basic arc profile: {0}")]
    BadProfile(String),
    #[error("omega0 = {0} outside (0, 1/2)")]
    BadOmega0(f64),
    #[error("point {0} is not inside the domain")]
    Outside(Point),
    #[error("argument of {0} outside the admissible range")]
    ArgumentRange(Point),
}

/// Reduces an angle to `[0, 2π)`.
pub fn normalize_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn principal_angle(t: f64) -> f64 {
    let r = normalize_angle(t);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

#[inline]
pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a.re * b.re + a.im * b.im
}

#[inline]
pub fn cis(t: f64) -> Point {
    let (s, c) = t.sin_cos();
    Point::new(c, s)
}
