use std::f64::consts::PI;

use super::{cis, GeometryError, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapDirection {
    Forward,
    Inverse,
}

/// The branch of `z^{1/ω₀}` on `ℂ \ (-∞, 0]` with `f(1) = 1`, or its inverse
/// `w ↦ w^{ω₀}`. The origin maps to itself.
///
/// Forward maps the sector `|arg z| ≤ πω₀` onto the slit plane.
pub fn power_map(z: Point, omega0: f64, direction: MapDirection) -> Result<Point, GeometryError> {
    if !(omega0 > 0.0 && omega0 < 0.5) {
        return Err(GeometryError::BadOmega0(omega0));
    }
    if z == Point::new(0.0, 0.0) {
        return Ok(z);
    }
    let t = z.arg();
    match direction {
        MapDirection::Forward => {
            if t.abs() > PI * omega0 * (1.0 + 1e-12) {
                return Err(GeometryError::ArgumentRange(z));
            }
            Ok(power_forward(z, omega0))
        }
        MapDirection::Inverse => Ok(cis(t * omega0) * z.norm().powf(omega0)),
    }
}

/// Forward power map without the sector check. Arguments past `±πω₀` land
/// past `±π` and wrap, which matches the conjugation-symmetric continuation
/// of functions on the image domain.
#[inline]
pub(crate) fn power_forward(z: Point, omega0: f64) -> Point {
    let e = 1.0 / omega0;
    cis(z.arg() * e) * z.norm().powf(e)
}

/// Reflection `z ↦ e^{2iβ} z̄` across the line through the origin at angle `β`.
pub fn reflect_across_ray(z: Point, ray_angle: f64) -> Point {
    cis(2.0 * ray_angle) * z.conj()
}
