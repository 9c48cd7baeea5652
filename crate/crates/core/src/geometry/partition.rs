use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::{cis, normalize_angle, GeometryError, Point, UnitArc, PARTITION_SUM_TOL};

/// Arcs `L_k` filling the unit circle, normalised so that a longest arc has
/// index 0 and is centred at angle 0.
///
/// Deviations are kept as angles `d_k = α₀ - α_k`; the unit rotation is
/// `η_k = e^{i d_k}` and `L_k = θ_k (η_k L₀ ∩ η̄_k L₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcPartition {
    arcs: Vec<UnitArc>,
    deviations: Vec<f64>,
}

/// Lays arcs with the given half-openings consecutively counter-clockwise
/// starting at `rotation`, then re-indexes and rotates so that the first
/// longest arc sits at index 0 with center 0.
pub fn make_partition(openings: &[f64], rotation: f64) -> Result<ArcPartition, GeometryError> {
    if openings.len() < 3 {
        return Err(GeometryError::TooFewArcs(openings.len()));
    }
    for &a in openings {
        if !(a > 0.0 && a < FRAC_PI_2) {
            return Err(GeometryError::BadOpening(a));
        }
    }
    let total: f64 = openings.iter().sum();
    if (total - PI).abs() > PARTITION_SUM_TOL {
        return Err(GeometryError::BadTotal(total));
    }
    // Rotation only matters through the cyclic order, which it preserves;
    // after normalisation the geometry depends on the openings alone.
    let _ = rotation;
    let n = openings.len();
    let mut longest = 0;
    for (i, &a) in openings.iter().enumerate() {
        if a > openings[longest] {
            longest = i;
        }
    }
    let ordered: Vec<f64> = (0..n).map(|k| openings[(longest + k) % n]).collect();
    let alpha0 = ordered[0];
    let mut arcs = Vec::with_capacity(n);
    let mut edge = alpha0;
    arcs.push(UnitArc {
        center: 0.0,
        half_opening: alpha0,
    });
    for &a in &ordered[1..] {
        arcs.push(UnitArc {
            center: normalize_angle(edge + a),
            half_opening: a,
        });
        edge += 2.0 * a;
    }
    let deviations = ordered.iter().map(|a| alpha0 - a).collect();
    Ok(ArcPartition { arcs, deviations })
}

impl ArcPartition {
    /// Partition into `n` equal arcs.
    pub fn equal(n: usize) -> Result<Self, GeometryError> {
        make_partition(&vec![PI / n as f64; n], 0.0)
    }

    pub fn arcs(&self) -> &[UnitArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arc(&self, k: usize) -> &UnitArc {
        &self.arcs[k]
    }

    /// Deviation angles `d_k`.
    pub fn deviations(&self) -> &[f64] {
        &self.deviations
    }

    pub fn deviation(&self, k: usize) -> f64 {
        self.deviations[k]
    }

    /// The unit rotation `η_k`.
    pub fn eta(&self, k: usize) -> Point {
        cis(self.deviations[k])
    }

    /// Half-opening of the longest arc.
    pub fn alpha0(&self) -> f64 {
        self.arcs[0].half_opening
    }

    pub fn half_openings(&self) -> Vec<f64> {
        self.arcs.iter().map(|a| a.half_opening).collect()
    }

    /// Largest minus smallest arc length.
    pub fn length_spread(&self) -> f64 {
        let lo = self
            .arcs
            .iter()
            .map(|a| a.half_opening)
            .fold(f64::INFINITY, f64::min);
        2.0 * (self.alpha0() - lo)
    }

    pub fn all_equal(&self) -> bool {
        self.deviations.iter().all(|&d| d == 0.0)
    }

    /// Angle of the ray separating sector `k` from sector `k + 1`.
    pub fn ray_after(&self, k: usize) -> f64 {
        let a = &self.arcs[k];
        a.center + a.half_opening
    }

    /// Sector `Λ_k` containing the direction `angle`. A ray shared by two
    /// sectors belongs to the lower index.
    pub fn sector_of(&self, angle: f64) -> usize {
        let alpha0 = self.alpha0();
        // Measure from the lower edge of sector 0.
        let t = normalize_angle(angle + alpha0);
        if t <= 2.0 * alpha0 || t >= std::f64::consts::TAU - 1e-15 {
            return 0;
        }
        let mut edge = 2.0 * alpha0;
        for (k, a) in self.arcs.iter().enumerate().skip(1) {
            edge += 2.0 * a.half_opening;
            if t <= edge {
                return k;
            }
        }
        // Roundoff at the closing ray between the last sector and sector 0.
        0
    }
}
