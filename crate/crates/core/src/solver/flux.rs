use std::f64::consts::TAU;

use super::{ScalarField, SolverError};
use crate::geometry::Point;

/// Result of a boundary flux integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flux {
    /// `(1/2π) ∫ ∂f/∂n |dξ|` with the inward normal.
    pub value: f64,
    pub length: f64,
    pub samples: usize,
    /// Samples whose inward probes left the interpolable region; they
    /// contribute zero density.
    pub skipped: usize,
}

impl Flux {
    pub(crate) fn merge(self, other: Flux) -> Flux {
        Flux {
            value: self.value + other.value,
            length: self.length + other.length,
            samples: self.samples + other.samples,
            skipped: self.skipped + other.skipped,
        }
    }
}

const TABLE: usize = 8192;

/// Normal flux through the curve `t ↦ param(t)`, `t ∈ [t0, t1]`, traversed
/// with the domain on its left.
///
/// The normal derivative is the second-order one-sided difference
/// `(-3f₀ + 4f₁ - f₂) / 2o` from the boundary value `f₀` and field values
/// `f₁`, `f₂` at distances `o`, `2o` along the inward normal, where
/// `o = offset(ξ)` may vary along the curve; samples are equally spaced in
/// arc length and combined by the trapezoid rule.
pub fn flux_along_curve<P, O, V, B>(
    param: P,
    t0: f64,
    t1: f64,
    spacing: f64,
    offset: O,
    value: V,
    boundary: B,
) -> Flux
where
    P: Fn(f64) -> Point,
    O: Fn(Point) -> f64,
    V: Fn(Point) -> Option<f64>,
    B: Fn(Point) -> f64,
{
    let ts: Vec<f64> = (0..=TABLE)
        .map(|i| t0 + (t1 - t0) * i as f64 / TABLE as f64)
        .collect();
    let pts: Vec<Point> = ts.iter().map(|&t| param(t)).collect();
    let mut cum = vec![0.0; TABLE + 1];
    for i in 1..=TABLE {
        cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    let length = cum[TABLE];
    let at_length = |s: f64| -> Point {
        let s = s.clamp(0.0, length);
        let i = cum.partition_point(|&c| c < s).clamp(1, TABLE);
        let span = cum[i] - cum[i - 1];
        let w = if span > 0.0 { (s - cum[i - 1]) / span } else { 0.0 };
        param(ts[i - 1] + (ts[i] - ts[i - 1]) * w)
    };
    let n = ((length / spacing).ceil() as usize).max(2);
    let step = length / n as f64;
    let ds = 0.25 * step;
    let mut sum = 0.0;
    let mut skipped = 0;
    for i in 0..=n {
        let s = step * i as f64;
        let xi = at_length(s);
        let tangent = at_length(s + ds) - at_length(s - ds);
        let tn = tangent.norm();
        let density = if tn > 0.0 {
            let normal = Point::new(-tangent.im, tangent.re) / tn;
            let o = offset(xi);
            match (value(xi + normal * o), value(xi + normal * (2.0 * o))) {
                (Some(f1), Some(f2)) => (-3.0 * boundary(xi) + 4.0 * f1 - f2) / (2.0 * o),
                _ => {
                    skipped += 1;
                    0.0
                }
            }
        } else {
            skipped += 1;
            0.0
        };
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * density * step;
    }
    Flux {
        value: sum / TAU,
        length,
        samples: n + 1,
        skipped,
    }
}

/// `(1/2π) ∫ ∂field/∂n |dξ|` over the boundary pieces labelled `label`.
pub fn normal_flux(field: &ScalarField, label: usize, spacing: f64, offset: f64) -> Result<Flux, SolverError> {
    if offset < 2.0 * field.h() {
        return Err(SolverError::OffsetTooSmall {
            offset,
            h: field.h(),
        });
    }
    let mut total = Flux {
        value: 0.0,
        length: 0.0,
        samples: 0,
        skipped: 0,
    };
    for piece in field.domain().pieces().iter().filter(|p| p.label == label) {
        let f = flux_along_curve(
            |t| piece.point_at(t),
            piece.start,
            piece.end,
            spacing,
            |_| offset,
            |z| {
                if field.domain().contains(z) {
                    field.value_at(z).ok()
                } else {
                    None
                }
            },
            |xi| field.boundary_value(xi),
        );
        total = total.merge(f);
    }
    Ok(total)
}

/// Central difference `(f(ρe^{i(t+dt)}) - f(ρe^{i(t-dt)})) / 2dt`.
pub fn angular_derivative(field: &ScalarField, z: Point, dt: f64) -> Result<f64, SolverError> {
    let rot = Point::from_polar(1.0, dt);
    let (zp, zm) = (z * rot, z * rot.conj());
    let margin = 2.0 * field.h();
    for p in [z, zp, zm] {
        if !field.domain().contains(p) || field.domain().distance_to_boundary(p).distance < margin {
            return Err(SolverError::InsufficientMargin(p));
        }
    }
    Ok((field.value_at(zp)? - field.value_at(zm)?) / (2.0 * dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StarDomain;
    use crate::solver::{fd_green, fd_harmonic_measure, FdOptions};
    use std::f64::consts::FRAC_PI_2;

    fn opts() -> FdOptions {
        FdOptions::default().with_h(1.0 / 128.0)
    }

    #[test]
    fn disk_green_total_flux() {
        let g = fd_green(&StarDomain::unit_disk(), Point::new(0.0, 0.0), &opts()).unwrap();
        let f = normal_flux(&g, 0, 0.01, 2.0 * g.h()).unwrap();
        assert!((f.value - 1.0).abs() < 1e-2, "{f:?}");
        assert_eq!(f.skipped, 0);
    }

    #[test]
    fn disk_green_arc_flux() {
        let d = StarDomain::labeled_disk(&[0.3, 0.3 + FRAC_PI_2]);
        let g = fd_green(&d, Point::new(0.0, 0.0), &opts()).unwrap();
        let f = normal_flux(&g, 0, 0.01, 2.0 * g.h()).unwrap();
        assert!((f.value - 0.25).abs() < 1e-2, "{f:?}");
    }

    #[test]
    fn complementary_measures_have_opposite_flux() {
        let d = StarDomain::single_lens(0.8).unwrap();
        let a = fd_harmonic_measure(&d, &[0], &opts()).unwrap();
        let b = fd_harmonic_measure(&d, &[1], &opts()).unwrap();
        let (o, sp) = (2.0 * a.h(), 0.01);
        let fa = normal_flux(&a, 0, sp, o).unwrap().value;
        let fb = normal_flux(&b, 0, sp, o).unwrap().value;
        assert!((fa + fb).abs() < 1e-9 * (1.0 + fa.abs()), "{fa} {fb}");
    }

    #[test]
    fn offset_guard() {
        let g = fd_green(&StarDomain::unit_disk(), Point::new(0.0, 0.0), &opts()).unwrap();
        assert!(matches!(
            normal_flux(&g, 0, 0.01, g.h()),
            Err(SolverError::OffsetTooSmall { .. })
        ));
    }

    #[test]
    fn radial_field_has_no_angular_derivative() {
        let g = fd_green(&StarDomain::unit_disk(), Point::new(0.0, 0.0), &opts()).unwrap();
        for z in [Point::new(0.3, 0.2), Point::new(-0.5, 0.1), Point::new(0.0, -0.6)] {
            let d = angular_derivative(&g, z, 0.01).unwrap();
            assert!(d.abs() < 1e-3, "{d}");
        }
        assert!(matches!(
            angular_derivative(&g, Point::new(0.995, 0.0), 0.01),
            Err(SolverError::InsufficientMargin(_))
        ));
    }
}
