use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{cis, principal_angle, GeometryError, Point};

/// A closed arc of the unit circle, `{e^{it} : |t - center| ≤ half_opening}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitArc {
    pub center: f64,
    pub half_opening: f64,
}

impl UnitArc {
    pub fn new(center: f64, half_opening: f64) -> Result<Self, GeometryError> {
        if !(half_opening > 0.0 && half_opening < FRAC_PI_2) {
            return Err(GeometryError::BadOpening(half_opening));
        }
        Ok(Self {
            center,
            half_opening,
        })
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_opening
    }

    /// Endpoints `e^{i(center - α)}` and `e^{i(center + α)}`.
    pub fn endpoints(&self) -> (Point, Point) {
        (
            cis(self.center - self.half_opening),
            cis(self.center + self.half_opening),
        )
    }

    /// Signed angular offset of the direction of `z` from the arc center, in `(-π, π]`.
    pub fn offset_of(&self, z: Point) -> f64 {
        principal_angle(z.arg() - self.center)
    }

    /// Sector predicate: `z ≠ 0` and `z/|z|` lies on the arc.
    pub fn sector_contains(&self, z: Point) -> bool {
        z != Point::new(0.0, 0.0) && self.offset_of(z).abs() <= self.half_opening
    }
}

/// The circle orthogonal to the unit circle through the endpoints of a
/// [`UnitArc`], i.e. the hyperbolic geodesic with those ideal endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicArc {
    pub arc: UnitArc,
    pub circle_center: Point,
    pub circle_radius: f64,
    pub min_radius: f64,
}

pub fn geodesic_of(arc: UnitArc) -> GeodesicArc {
    let (s, c) = arc.half_opening.sin_cos();
    GeodesicArc {
        arc,
        circle_center: cis(arc.center) / c,
        circle_radius: s / c,
        min_radius: (1.0 - s) / c,
    }
}

impl GeodesicArc {
    /// Distance from the origin to the geodesic along the ray at angle
    /// `arc.center + t`, for `|t| ≤ α`.
    pub fn radius_at(&self, t: f64) -> f64 {
        debug_assert!(t.abs() <= self.arc.half_opening + 1e-12);
        radius_on_ray(self.arc.half_opening, t)
    }
}

/// Ray-geodesic intersection for the geodesic of half-opening `alpha`
/// centred on the positive axis; `t` is measured from that axis.
pub(crate) fn radius_on_ray(alpha: f64, t: f64) -> f64 {
    let cc = 1.0 / alpha.cos();
    let p = cc * t.cos();
    let disc = (p * p - 1.0).max(0.0);
    // Stable form of p - sqrt(p² - 1).
    let r = 1.0 / (p + disc.sqrt());
    r.min(1.0)
}
