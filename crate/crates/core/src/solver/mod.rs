//! Dirichlet problems on star domains: walk-on-spheres Monte Carlo and a
//! Shortley–Weller finite difference solver, plus flux and derivative
//! helpers built on the resulting fields.

mod fd;
mod logpolar;
mod flux;
mod stats;
mod wos;

pub use fd::{fd_green, fd_harmonic_measure, fd_solve, BoundaryData, FdOptions, ScalarField};

pub use logpolar::{fd_polar_green, fd_polar_harmonic_measure, fd_vertex_green, LogPolarOptions, PolarField, RadiusFn, VertexGreen};
pub use flux::{angular_derivative, flux_along_curve, normal_flux, Flux};
pub use stats::{Estimate, RunningStats};
pub use wos::{wos_green, wos_harmonic_measure, WosOptions, BIAS_CONSTANT};

use crate::geometry::{GeometryError, Point};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("shell width {eps} exceeds the start point's boundary distance {distance}")]
    EpsTooLarge { eps: f64, distance: f64 },
    #[error("evaluation point coincides with the pole")]
    AtPole,
    #[error("no convergence after {iterations} sweeps, residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("field cannot be interpolated at {0}")]
    NotInterpolable(Point),
    #[error("offset {offset} below twice the grid spacing {h}")]
    OffsetTooSmall { offset: f64, h: f64 },
    #[error("point {0} lacks the interior margin the stencil needs")]
    InsufficientMargin(Point),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
}
