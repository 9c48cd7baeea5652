//! Harmonic measure and Green function experiments on model domains built
//! from arc partitions of the unit circle.
//!
//! The crate is organised in four layers:
//!
//! * [`geometry`]: arcs, partitions, geodesic arcs of the Poincaré disk, and
//!   star-shaped domains assembled from labelled boundary pieces.
//! * [`solver`]: walk-on-spheres Monte Carlo and a Shortley–Weller finite
//!   difference solver for the Dirichlet problem, plus flux integration.
//! * [`velling`]: the comparison function construction and the checks run
//!   against it.
//! * [`harness`]: configuration, random instances, reports and SVG output.

pub mod geometry;
pub mod harness;
pub mod solver;
pub mod velling;

pub use geometry::{
    ArcPartition, GeodesicArc, GeometryError, Point, PolarArc, RadiusProfile, StarDomain, UnitArc,
};
pub use solver::{Estimate, FdOptions, ScalarField, SolverError, WosOptions};
pub use velling::{CheckReport, VellingInstance};
