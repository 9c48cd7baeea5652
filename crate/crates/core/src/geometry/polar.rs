use serde::{Deserialize, Serialize};

use super::arc::radius_on_ray;
use super::GeometryError;

/// Shape of a basic arc as an even polar graph over `[-α₀, α₀]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusProfile {
    /// The geodesic arc of `L₀`.
    Geodesic,
    /// `R(t) = ρ₀ + (1 - ρ₀)|t/α₀|^p`.
    Power { rho0: f64, exponent: f64 },
}

/// A basic arc `I₀°` given as a polar graph `t ↦ R(t) e^{it}`.
///
/// `R` is even, `R(±α₀) = 1`, and strictly increasing on `[0, α₀]`, so the
/// curve is symmetric about the positive axis, attains its minimum radius
/// `ρ₀` only at `t = 0`, and meets every circle `|z| = ρ`, `ρ₀ < ρ < 1`,
/// exactly twice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarArc {
    pub half_opening: f64,
    pub profile: RadiusProfile,
}

impl PolarArc {
    pub fn geodesic(half_opening: f64) -> Self {
        Self {
            half_opening,
            profile: RadiusProfile::Geodesic,
        }
    }

    pub fn new(half_opening: f64, profile: RadiusProfile) -> Result<Self, GeometryError> {
        if !(half_opening > 0.0 && half_opening < std::f64::consts::FRAC_PI_2) {
            return Err(GeometryError::BadOpening(half_opening));
        }
        if let RadiusProfile::Power { rho0, exponent } = profile {
            if !(rho0 > 0.0 && rho0 < 1.0) {
                return Err(GeometryError::BadProfile(format!("rho0 = {rho0}")));
            }
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(GeometryError::BadProfile(format!("exponent = {exponent}")));
            }
        }
        Ok(Self {
            half_opening,
            profile,
        })
    }

    pub fn is_geodesic(&self) -> bool {
        matches!(self.profile, RadiusProfile::Geodesic)
    }

    /// `R(t)` for `|t| ≤ α₀`; the argument is clamped to that range.
    pub fn radius(&self, t: f64) -> f64 {
        let a = self.half_opening;
        let s = t.abs().min(a);
        match self.profile {
            RadiusProfile::Geodesic => radius_on_ray(a, s),
            RadiusProfile::Power { rho0, exponent } => rho0 + (1.0 - rho0) * (s / a).powf(exponent),
        }
    }

    pub fn rho0(&self) -> f64 {
        self.radius(0.0)
    }
}
