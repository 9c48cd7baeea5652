use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use super::polyline::Polyline;
use super::{
    cis, cross, dot, geodesic_of, ArcPartition, GeometryError, Point, PolarArc, RadiusProfile,
    POLYLINE_TOL,
};

/// Arc of a circle, oriented counter-clockwise about its own center.
#[derive(Debug, Clone, Copy)]
pub struct CircleArc {
    pub center: Point,
    pub radius: f64,
    /// Unit vectors from the center to the CCW-first and CCW-last endpoints.
    start_dir: Point,
    end_dir: Point,
    /// CCW sweep about the center, in `(0, 2π]`.
    pub sweep: f64,
    p_start: Point,
    p_end: Point,
}

/// Polar graph `φ ↦ radius(φ) e^{iφ}` with a polyline used for distances.
#[derive(Clone)]
pub struct PolarCurve {
    radius: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    polyline: Arc<Polyline>,
}

impl fmt::Debug for PolarCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarCurve")
            .field("segments", &self.polyline.segment_count())
            .field("hausdorff", &self.polyline.hausdorff())
            .finish()
    }
}

impl PolarCurve {
    pub fn polyline(&self) -> &Polyline {
        &self.polyline
    }
}

#[derive(Debug, Clone)]
pub enum Curve {
    /// Circular arc: a geodesic arc, or an arc of the unit circle.
    Circle(CircleArc),
    /// Straight segment, e.g. a side of an inscribed polygon.
    Chord { a: Point, b: Point },
    /// General polar graph.
    Polar(PolarCurve),
}

/// A boundary piece covering the polar-angle range `[start, end]`.
#[derive(Debug, Clone)]
pub struct Piece {
    pub label: usize,
    pub start: f64,
    pub end: f64,
    pub curve: Curve,
}

/// Result of a nearest-boundary query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryHit {
    /// Lower bound on the distance to the boundary.
    pub distance: f64,
    pub label: usize,
    pub nearest: Point,
}

/// A domain star-shaped about the origin, bounded by labelled pieces whose
/// polar-angle spans tile one full turn.
#[derive(Debug, Clone)]
pub struct StarDomain {
    pieces: Arc<Vec<Piece>>,
    start: f64,
    delta: f64,
}

fn circle_ray_radius(center: Point, radius: f64, u: Point) -> f64 {
    let p = dot(u, center);
    let q = center.norm_sqr() - radius * radius;
    let disc = (p * p - q).max(0.0).sqrt();
    if q > 0.0 {
        // Origin outside the circle: near intersection.
        q / (p + disc)
    } else {
        p + disc
    }
}

impl CircleArc {
    fn new(center: Point, radius: f64, start: f64, end: f64) -> Self {
        let at = |t: f64| cis(t) * circle_ray_radius(center, radius, cis(t));
        let (p0, p1, pm) = (at(start), at(end), at(0.5 * (start + end)));
        if end - start >= TAU - 1e-12 {
            let d = (p0 - center) / radius;
            return Self {
                center,
                radius,
                start_dir: d,
                end_dir: d,
                sweep: TAU,
                p_start: p0,
                p_end: p0,
            };
        }
        let a0 = (p0 - center).arg();
        let a1 = (p1 - center).arg();
        let am = (pm - center).arg();
        let s = (a1 - a0).rem_euclid(TAU);
        let m = (am - a0).rem_euclid(TAU);
        let (from, to, sweep) = if m <= s { (p0, p1, s) } else { (p1, p0, TAU - s) };
        let unit = |p: Point| {
            let v = p - center;
            v / v.norm()
        };
        Self {
            center,
            radius,
            start_dir: unit(from),
            end_dir: unit(to),
            sweep,
            p_start: from,
            p_end: to,
        }
    }

    fn covers(&self, v: Point) -> bool {
        if self.sweep >= TAU {
            true
        } else if self.sweep <= PI {
            cross(self.start_dir, v) >= 0.0 && cross(v, self.end_dir) >= 0.0
        } else {
            !(cross(self.end_dir, v) > 0.0 && cross(v, self.start_dir) > 0.0)
        }
    }

    fn distance(&self, z: Point) -> f64 {
        let v = z - self.center;
        let n = v.norm_sqr().sqrt();
        if n > 0.0 && self.covers(v) {
            return (n - self.radius).abs();
        }
        let d0 = (z - self.p_start).norm_sqr();
        let d1 = (z - self.p_end).norm_sqr();
        d0.min(d1).sqrt()
    }

    fn nearest(&self, z: Point) -> (f64, Point) {
        let v = z - self.center;
        let n = v.norm_sqr().sqrt();
        if n > 0.0 && self.covers(v) {
            return ((n - self.radius).abs(), self.center + v * (self.radius / n));
        }
        let d0 = (z - self.p_start).norm_sqr().sqrt();
        let d1 = (z - self.p_end).norm_sqr().sqrt();
        if d0 <= d1 {
            (d0, self.p_start)
        } else {
            (d1, self.p_end)
        }
    }
}

fn segment_nearest(p: Point, a: Point, b: Point) -> (f64, Point) {
    let ab = b - a;
    let t = (dot(p - a, ab) / ab.norm_sqr()).clamp(0.0, 1.0);
    let q = a + ab * t;
    ((p - q).norm_sqr().sqrt(), q)
}

impl Curve {
    fn radius_along(&self, angle: f64) -> f64 {
        match self {
            Curve::Circle(c) => circle_ray_radius(c.center, c.radius, cis(angle)),
            Curve::Chord { a, b } => {
                let ab = *b - *a;
                cross(*a, ab) / cross(cis(angle), ab)
            }
            Curve::Polar(p) => (p.radius)(angle),
        }
    }

    fn distance(&self, z: Point) -> f64 {
        match self {
            Curve::Circle(c) => c.distance(z),
            _ => self.nearest(z).0,
        }
    }

    /// Lower bound on the distance and a nearby boundary point.
    fn nearest(&self, z: Point) -> (f64, Point) {
        match self {
            Curve::Circle(c) => c.nearest(z),
            Curve::Chord { a, b } => segment_nearest(z, *a, *b),
            Curve::Polar(p) => {
                let (d, q) = p.polyline.nearest(z);
                ((d - p.polyline.hausdorff()).max(0.0), q)
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Curve::Polar(_))
    }
}

impl Piece {
    fn circle(label: usize, start: f64, end: f64, center: Point, radius: f64) -> Self {
        Self {
            label,
            start,
            end,
            curve: Curve::Circle(CircleArc::new(center, radius, start, end)),
        }
    }

    fn unit(label: usize, start: f64, end: f64) -> Self {
        Self::circle(label, start, end, Point::new(0.0, 0.0), 1.0)
    }

    fn polar<F>(label: usize, start: f64, end: f64, breaks: &[f64], radius: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let polyline = Polyline::from_polar(&radius, start, end, breaks, POLYLINE_TOL);
        Self {
            label,
            start,
            end,
            curve: Curve::Polar(PolarCurve {
                radius: Arc::new(radius),
                polyline: Arc::new(polyline),
            }),
        }
    }

    pub fn radius_at(&self, angle: f64) -> f64 {
        self.curve.radius_along(angle)
    }

    pub fn point_at(&self, angle: f64) -> Point {
        cis(angle) * self.radius_at(angle)
    }
}

impl StarDomain {
    /// Assembles a domain from pieces listed in increasing angle. The spans
    /// must be contiguous and cover exactly one turn.
    pub fn from_pieces(pieces: Vec<Piece>) -> Self {
        assert!(!pieces.is_empty());
        let start = pieces[0].start;
        for w in pieces.windows(2) {
            debug_assert!((w[0].end - w[1].start).abs() < 1e-9, "pieces not contiguous");
        }
        debug_assert!(
            (pieces.last().unwrap().end - start - TAU).abs() < 1e-9,
            "pieces do not close up"
        );
        let delta = pieces
            .iter()
            .filter_map(|p| match &p.curve {
                Curve::Polar(c) => Some(c.polyline.hausdorff()),
                _ => None,
            })
            .fold(0.0, f64::max);
        Self {
            pieces: Arc::new(pieces),
            start,
            delta,
        }
    }

    /// The unit disk as a single piece labelled 0.
    pub fn unit_disk() -> Self {
        Self::from_pieces(vec![Piece::unit(0, -PI, PI)])
    }

    /// The unit disk with its circle cut at the increasing angles `breaks`;
    /// the arc `[breaks[i], breaks[i+1]]` gets label `i`.
    pub fn labeled_disk(breaks: &[f64]) -> Self {
        assert!(breaks.len() >= 2);
        let first = breaks[0];
        let mut edges = breaks.to_vec();
        edges.push(first + TAU);
        let pieces = edges
            .windows(2)
            .enumerate()
            .map(|(i, w)| Piece::unit(i, w[0], w[1]))
            .collect();
        Self::from_pieces(pieces)
    }

    /// `Δ \ C₀` for a single lens over the arc `[-α, α]`. The geodesic piece
    /// has label 0 and the rest of the circle label 1.
    pub fn single_lens(alpha: f64) -> Result<Self, GeometryError> {
        let g = geodesic_of(super::UnitArc::new(0.0, alpha)?);
        Ok(Self::from_pieces(vec![
            Piece::circle(0, -alpha, alpha, g.circle_center, g.circle_radius),
            Piece::unit(1, alpha, TAU - alpha),
        ]))
    }

    /// The Velling domain `D = Δ \ ∪ C_k`; the geodesic over `L_k` has label `k`.
    pub fn velling(p: &ArcPartition) -> Self {
        Self::velling_with_lenses(p, &vec![true; p.len()])
    }

    /// The Velling domain with only the lenses flagged in `keep`; arcs whose
    /// lens was removed stay on the unit circle, still labelled `k`.
    pub fn velling_with_lenses(p: &ArcPartition, keep: &[bool]) -> Self {
        let pieces = p
            .arcs()
            .iter()
            .enumerate()
            .map(|(k, arc)| {
                let (s, e) = (arc.center - arc.half_opening, arc.center + arc.half_opening);
                if keep[k] {
                    let g = geodesic_of(*arc);
                    Piece::circle(k, s, e, g.circle_center, g.circle_radius)
                } else {
                    Piece::unit(k, s, e)
                }
            })
            .collect();
        Self::from_pieces(pieces)
    }

    /// The basic model domain `D°` with basic arc `basic`. Over arc `k` the
    /// boundary is `θ_k + s ↦ R(|s| + d_k)`, `|s| ≤ α_k`: inside the sector
    /// `Λ_k`, a point is in `D°` iff one of `η̄_k w`, `η_k w` (with
    /// `w = θ̄_k z`) lies in `D°₀`. Every piece meets the circle at the arc
    /// endpoints, so the sectors glue along their common rays.
    pub fn basic(p: &ArcPartition, basic: &PolarArc) -> Result<Self, GeometryError> {
        let alpha0 = p.alpha0();
        if (basic.half_opening - alpha0).abs() > 1e-12 {
            return Err(GeometryError::HalfOpeningMismatch {
                basic: basic.half_opening,
                longest: alpha0,
            });
        }
        let mut pieces = Vec::new();
        for (k, arc) in p.arcs().iter().enumerate() {
            let (theta, a, d) = (arc.center, arc.half_opening, p.deviation(k));
            match basic.profile {
                RadiusProfile::Geodesic => {
                    let rotated = |c: f64| geodesic_of(super::UnitArc { center: c, half_opening: alpha0 });
                    if d == 0.0 {
                        let g = rotated(theta);
                        pieces.push(Piece::circle(k, theta - a, theta + a, g.circle_center, g.circle_radius));
                    } else {
                        // Each half is an arc of a rotated copy of the geodesic of L₀.
                        let lo = rotated(theta + d);
                        let hi = rotated(theta - d);
                        pieces.push(Piece::circle(k, theta - a, theta, lo.circle_center, lo.circle_radius));
                        pieces.push(Piece::circle(k, theta, theta + a, hi.circle_center, hi.circle_radius));
                    }
                }
                RadiusProfile::Power { .. } => {
                    let b = *basic;
                    pieces.push(Piece::polar(k, theta - a, theta + a, &[theta], move |t| {
                        b.radius((t - theta).abs() + d)
                    }));
                }
            }
        }
        Ok(Self::from_pieces(pieces))
    }

    /// The inscribed polygon `P_n`; the side over `L_k` has label `k`.
    pub fn polygon(p: &ArcPartition) -> Self {
        let pieces = p
            .arcs()
            .iter()
            .enumerate()
            .map(|(k, arc)| {
                let (s, e) = (arc.center - arc.half_opening, arc.center + arc.half_opening);
                Piece {
                    label: k,
                    start: s,
                    end: e,
                    curve: Curve::Chord {
                        a: cis(s),
                        b: cis(e),
                    },
                }
            })
            .collect();
        Self::from_pieces(pieces)
    }

    /// `Ω = f(D°₀) ∪ {0}` with `f` the branch of `z^{1/ω₀}` fixing 1, as the
    /// polar graph `s ↦ R(sα₀/π)^{π/α₀}`, `s ∈ [-π, π]`, labelled 0.
    pub fn omega(basic: &PolarArc, omega0: f64) -> Result<Self, GeometryError> {
        if !(omega0 > 0.0 && omega0 < 0.5) || (omega0 - basic.half_opening / PI).abs() > 1e-12 {
            return Err(GeometryError::BadOmega0(omega0));
        }
        let b = *basic;
        let scale = b.half_opening / PI;
        let expo = 1.0 / omega0;
        Ok(Self::from_pieces(vec![Piece::polar(0, -PI, PI, &[0.0], move |s: f64| {
            b.radius(s.abs() * scale).powf(expo)
        })]))
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Distinct labels in increasing order.
    pub fn labels(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.pieces.iter().map(|p| p.label).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Upper bound on the polyline error of polar-graph pieces (0 if none).
    pub fn polyline_delta(&self) -> f64 {
        self.delta
    }

    /// Representative of `angle` in `[start, start + 2π)`.
    fn canonical(&self, angle: f64) -> f64 {
        if angle >= self.start && angle < self.start + TAU {
            angle
        } else {
            self.start + (angle - self.start).rem_euclid(TAU)
        }
    }

    pub fn piece_at(&self, angle: f64) -> &Piece {
        let t = self.canonical(angle);
        let i = self.pieces.partition_point(|p| p.end <= t);
        &self.pieces[i.min(self.pieces.len() - 1)]
    }

    pub fn radius_at(&self, angle: f64) -> f64 {
        let t = self.canonical(angle);
        let i = self.pieces.partition_point(|p| p.end <= t);
        self.pieces[i.min(self.pieces.len() - 1)].radius_at(t)
    }

    pub fn boundary_point(&self, angle: f64) -> Point {
        cis(angle) * self.radius_at(angle)
    }

    /// Label of the piece carrying the boundary point in direction `z`.
    pub fn label_at(&self, z: Point) -> usize {
        self.piece_at(z.arg()).label
    }

    pub fn contains(&self, z: Point) -> bool {
        let r = z.norm();
        r == 0.0 || r < self.radius_at(z.arg())
    }

    /// Largest boundary radius, sampled.
    pub fn max_radius(&self) -> f64 {
        (0..720)
            .map(|i| self.radius_at(self.start + TAU * i as f64 / 720.0))
            .fold(0.0, f64::max)
            .min(1.0)
    }

    /// Nearest boundary piece. Exact for circular and straight pieces; for
    /// polar graphs the distance is reduced by the polyline error so it never
    /// exceeds the true distance.
    pub fn distance_to_boundary(&self, z: Point) -> BoundaryHit {
        let mut best = (f64::INFINITY, 0);
        for (i, p) in self.pieces.iter().enumerate() {
            let d = p.curve.distance(z);
            if d < best.0 {
                best = (d, i);
            }
        }
        let piece = &self.pieces[best.1];
        let (distance, nearest) = piece.curve.nearest(z);
        BoundaryHit {
            distance,
            label: piece.label,
            nearest,
        }
    }

    /// Checked variant of [`distance_to_boundary`](Self::distance_to_boundary).
    pub fn try_distance_to_boundary(&self, z: Point) -> Result<BoundaryHit, GeometryError> {
        if !self.contains(z) {
            return Err(GeometryError::Outside(z));
        }
        Ok(self.distance_to_boundary(z))
    }
}
