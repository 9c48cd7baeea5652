//! The comparison-function construction on a basic model domain and the
//! checks that exercise it.
//!
//! For a partition with longest arc `L₀` (half-opening `α₀`), `ω₀ = α₀/π`,
//! `f(z) = z^{1/ω₀}` maps the sector piece `D°₀` onto `Ω`, and
//!
//! * `φ₀(z) = ω₀ g(f(z), 0, Ω)` on `D°₀`,
//! * `φ(z) = φ₀(η_k θ̄_k z)` or `φ₀(η̄_k θ̄_k z)` on the sector `Λ_k`, by the
//!   sign of `Im(θ̄_k z)`,
//! * `u = φ - g(·, 0, D°)`, which should be `≤ 0`.

mod checks;
mod report;

pub use checks::{
    check_comparison, check_conjecture, check_corollary, check_extension, check_flux, check_lemma,
    check_phi_regularity, check_theorem, lemma_probe, selftest_reports, single_lens_theorem,
    LemmaStats, FD_TOLERANCE, SIGMAS,
};
pub use report::{CheckReport, Condition, Quantity};

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::geometry::{cis, ArcPartition, GeometryError, Point, PolarArc, StarDomain};
use crate::solver::{
    fd_polar_green, fd_polar_harmonic_measure, fd_vertex_green, wos_harmonic_measure, Estimate, FdOptions,
    LogPolarOptions, PolarField, SolverError, VertexGreen, WosOptions,
};

/// Numerical settings shared by all checks on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub wos: WosOptions,
    /// Cartesian grid, used by the closed-form solver checks.
    pub fd: FdOptions,
    /// Log-polar grid, used for `φ₀` and every field on a domain
    /// star-shaped about the origin.
    pub log_polar: LogPolarOptions,
    /// Angular step of the derivative in the Lemma check.
    pub dt: f64,
    /// Arc-length step of flux integrals.
    pub flux_spacing: f64,
    /// Inward offset of flux probes.
    pub flux_offset: f64,
    /// Probe grid size per axis.
    pub probes: usize,
    /// Circle radius of the mean-value test.
    pub regularity_delta: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            wos: WosOptions::default(),
            fd: FdOptions::default(),
            log_polar: LogPolarOptions::default(),
            dt: 0.01,
            flux_spacing: 0.005,
            flux_offset: 0.01,
            probes: 20,
            regularity_delta: 0.01,
        }
    }
}

/// `ω₀ = ω(0, L₀, Δ) = α₀/π`.
pub fn omega0(p: &ArcPartition) -> f64 {
    p.alpha0() / PI
}

/// Derives an independent seed for a named sub-computation.
pub fn sub_seed(seed: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, folded into a splitmix64 step.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// All objects of one configuration. Solver fields are computed on first
/// use and cached; the instance is otherwise immutable.
#[derive(Debug)]
pub struct VellingInstance {
    partition: ArcPartition,
    basic: PolarArc,
    velling: StarDomain,
    dcirc: StarDomain,
    omega0: f64,
    omega: StarDomain,
    opts: CheckOptions,
    seed: u64,
    phi0: OnceLock<Result<VertexGreen, SolverError>>,
    green_dcirc: OnceLock<Result<PolarField, SolverError>>,
    hm_dcirc_fd: OnceLock<Result<f64, SolverError>>,
    hm_velling_fd: OnceLock<Result<f64, SolverError>>,
    hm_dcirc_wos: OnceLock<Result<Estimate, SolverError>>,
    hm_velling_wos: OnceLock<Result<Estimate, SolverError>>,
}

impl VellingInstance {
    pub fn new(
        partition: ArcPartition,
        basic: PolarArc,
        opts: CheckOptions,
        seed: u64,
    ) -> Result<Self, GeometryError> {
        let velling = StarDomain::velling(&partition);
        let dcirc = StarDomain::basic(&partition, &basic)?;
        let omega0 = omega0(&partition);
        let omega = StarDomain::omega(&basic, omega0)?;
        Ok(Self {
            partition,
            basic,
            velling,
            dcirc,
            omega0,
            omega,
            opts,
            seed,
            phi0: OnceLock::new(),
            green_dcirc: OnceLock::new(),
            hm_dcirc_fd: OnceLock::new(),
            hm_velling_fd: OnceLock::new(),
            hm_dcirc_wos: OnceLock::new(),
            hm_velling_wos: OnceLock::new(),
        })
    }

    /// Instance whose basic arc is the geodesic of `L₀`.
    pub fn geodesic(partition: ArcPartition, opts: CheckOptions, seed: u64) -> Result<Self, GeometryError> {
        let basic = PolarArc::geodesic(partition.alpha0());
        Self::new(partition, basic, opts, seed)
    }

    pub fn partition(&self) -> &ArcPartition {
        &self.partition
    }

    pub fn basic(&self) -> &PolarArc {
        &self.basic
    }

    /// The Velling domain `D`.
    pub fn velling_domain(&self) -> &StarDomain {
        &self.velling
    }

    /// The basic model domain `D°`.
    pub fn basic_domain(&self) -> &StarDomain {
        &self.dcirc
    }

    /// The power-mapped domain `Ω`.
    pub fn omega_domain(&self) -> &StarDomain {
        &self.omega
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn options(&self) -> &CheckOptions {
        &self.opts
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn cached<T: Clone>(cell: &OnceLock<Result<T, SolverError>>, f: impl FnOnce() -> Result<T, SolverError>) -> Result<T, SolverError> {
        cell.get_or_init(f).clone()
    }

    fn cached_ref<'a, T>(
        cell: &'a OnceLock<Result<T, SolverError>>,
        f: impl FnOnce() -> Result<T, SolverError>,
    ) -> Result<&'a T, SolverError> {
        cell.get_or_init(f).as_ref().map_err(Clone::clone)
    }

    /// `φ₀ = ω₀ g(f(·), 0, Ω)`, solved on the log-polar image of `D°₀`;
    /// also evaluates `g(·, 0, Ω)` through [`VertexGreen::image_value_at`].
    pub fn phi0_field(&self) -> Result<&VertexGreen, SolverError> {
        Self::cached_ref(&self.phi0, || {
            let b = self.basic;
            fd_vertex_green(Arc::new(move |t| b.radius(t)), b.half_opening, &self.opts.log_polar)
        })
    }

    /// `g(w, 0, Ω)`.
    pub fn green_omega_at(&self, w: Point) -> Result<f64, SolverError> {
        if !self.omega.contains(w) && self.omega.distance_to_boundary(w).distance > 1e-12 {
            return Err(GeometryError::Outside(w).into());
        }
        self.phi0_field()?.image_value_at(w)
    }

    /// `g(·, 0, D°)` on the log-polar grid.
    pub fn green_dcirc(&self) -> Result<&PolarField, SolverError> {
        Self::cached_ref(&self.green_dcirc, || fd_polar_green(&self.dcirc, &self.opts.log_polar))
    }

    /// Finite difference `ω(0, I₀°, D°)`.
    pub fn hm_basic_fd(&self) -> Result<f64, SolverError> {
        Self::cached(&self.hm_dcirc_fd, || {
            fd_polar_harmonic_measure(&self.dcirc, &[0], &self.opts.log_polar)?.value_at(Point::new(0.0, 0.0))
        })
    }

    /// Finite difference `ω(0, I₀, D)`.
    pub fn hm_velling_fd(&self) -> Result<f64, SolverError> {
        Self::cached(&self.hm_velling_fd, || {
            fd_polar_harmonic_measure(&self.velling, &[0], &self.opts.log_polar)?.value_at(Point::new(0.0, 0.0))
        })
    }

    /// Walk-on-spheres `ω(0, I₀°, D°)`.
    pub fn hm_basic_wos(&self) -> Result<Estimate, SolverError> {
        Self::cached(&self.hm_dcirc_wos, || {
            let o = self.opts.wos.with_seed(sub_seed(self.seed, "wos:basic"));
            wos_harmonic_measure(&self.dcirc, Point::new(0.0, 0.0), &[0], &o)
        })
    }

    /// Walk-on-spheres `ω(0, I₀, D)`.
    pub fn hm_velling_wos(&self) -> Result<Estimate, SolverError> {
        Self::cached(&self.hm_velling_wos, || {
            let o = self.opts.wos.with_seed(sub_seed(self.seed, "wos:velling"));
            wos_harmonic_measure(&self.velling, Point::new(0.0, 0.0), &[0], &o)
        })
    }

    /// `φ₀` without the sector check. Directions slightly past `±α₀` use
    /// the continuation across the edge, which is the reflection there.
    pub(crate) fn phi0_unchecked(&self, z: Point) -> Result<f64, SolverError> {
        self.phi0_field()?.value_at(z)
    }

    /// `φ₀(z) = ω₀ g(f(z), 0, Ω)` for `z ∈ D°₀ \ {0}`.
    pub fn phi0_at(&self, z: Point) -> Result<f64, SolverError> {
        if z == Point::new(0.0, 0.0) {
            return Err(SolverError::AtPole);
        }
        if !self.partition.arc(0).sector_contains(z) {
            return Err(GeometryError::ArgumentRange(z).into());
        }
        self.check_in_basic(z)?;
        self.phi0_unchecked(z)
    }

    fn check_in_basic(&self, z: Point) -> Result<(), SolverError> {
        let rb = self.dcirc.radius_at(z.arg());
        if z.norm() > rb * (1.0 + 1e-12) {
            return Err(GeometryError::Outside(z).into());
        }
        Ok(())
    }

    /// Sector index and the two branch arguments `(η_k w, η̄_k w)` with
    /// `w = θ̄_k z`.
    pub fn branches(&self, z: Point) -> (usize, Point, Point) {
        let k = self.partition.sector_of(z.arg());
        let w = z * cis(-self.partition.arc(k).center);
        let eta = self.partition.eta(k);
        (k, eta * w, eta.conj() * w)
    }

    /// The comparison function `φ` on `D° \ {0}`, by the piecewise rule:
    /// `φ₀(η_k w)` when `Im w ≥ 0`, else `φ₀(η̄_k w)`.
    pub fn phi_at(&self, z: Point) -> Result<f64, SolverError> {
        if z == Point::new(0.0, 0.0) {
            return Err(SolverError::AtPole);
        }
        self.check_in_basic(z)?;
        let k = self.partition.sector_of(z.arg());
        let w = z * cis(-self.partition.arc(k).center);
        let d = self.partition.deviation(k);
        let arg = if w.im >= 0.0 { w * cis(d) } else { w * cis(-d) };
        self.phi0_unchecked(arg)
    }

    /// `u = φ - g(·, 0, D°)` and its finite difference uncertainty.
    pub fn u_at(&self, z: Point) -> Result<(f64, f64), SolverError> {
        let phi = self.phi_at(z)?;
        let g = self.green_dcirc()?.value_at(z)?;
        Ok((phi - g, FD_TOLERANCE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_partition, reflect_across_ray};

    fn coarse() -> CheckOptions {
        CheckOptions {
            fd: FdOptions::default().with_h(1.0 / 128.0),
            ..Default::default()
        }
    }

    fn unequal() -> VellingInstance {
        let p = make_partition(&[1.2, 0.7, 0.7, PI - 2.6], 0.0).unwrap();
        VellingInstance::geodesic(p, coarse(), 1).unwrap()
    }

    #[test]
    fn omega0_values() {
        assert_eq!(omega0(&ArcPartition::equal(4).unwrap()), 0.25);
        let p = make_partition(&[1.2, 0.7, 0.7, PI - 2.6], 0.0).unwrap();
        assert!((omega0(&p) - 0.381972).abs() < 1e-6);
    }

    #[test]
    fn phi0_vanishes_on_basic_arc() {
        let inst = unequal();
        let b = *inst.basic();
        for i in 0..=20 {
            let t = -1.1 + 2.2 * i as f64 / 20.0;
            let z = cis(t) * b.radius(t);
            let v = inst.phi0_at(z).unwrap();
            assert!(v.abs() < 1e-9, "t={t}: {v}");
        }
    }

    #[test]
    fn phi0_conjugation_symmetric() {
        let inst = unequal();
        for z in [Point::new(0.1, 0.05), Point::new(0.15, 0.3), Point::new(0.1, 0.03)] {
            let (a, b) = (inst.phi0_at(z).unwrap(), inst.phi0_at(z.conj()).unwrap());
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn phi0_singularity_cancels() {
        let inst = unequal();
        let vals: Vec<f64> = (0..=20)
            .map(|i| {
                let r = 10f64.powf(-3.0 + 2.0 * i as f64 / 20.0);
                let z = cis(0.3) * r;
                inst.phi0_at(z).unwrap() + r.ln()
            })
            .collect();
        let spread = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 0.5, "{vals:?}");
    }

    #[test]
    fn phi0_errors() {
        let inst = unequal();
        assert!(matches!(inst.phi0_at(Point::new(-0.1, 0.0)), Err(SolverError::Geometry(GeometryError::ArgumentRange(_)))));
        assert!(matches!(inst.phi0_at(Point::new(0.9, 0.0)), Err(SolverError::Geometry(GeometryError::Outside(_)))));
        assert_eq!(inst.phi0_at(Point::new(0.0, 0.0)), Err(SolverError::AtPole));
    }

    #[test]
    fn phi_reduces_to_phi0_on_sector_zero() {
        let inst = unequal();
        for z in [Point::new(0.1, 0.05), Point::new(0.12, -0.3), Point::new(0.1, 0.03)] {
            assert_eq!(inst.phi_at(z).unwrap(), inst.phi0_at(z).unwrap());
        }
    }

    #[test]
    fn phi_mirrored_across_rays() {
        let inst = unequal();
        let p = inst.partition().clone();
        for k in 0..p.len() {
            let beta = p.ray_after(k);
            for (r, tau) in [(0.2, 0.05), (0.4, 0.2), (0.6, 0.02)] {
                let z = cis(beta - tau) * r;
                if !inst.basic_domain().contains(z) {
                    continue;
                }
                let zs = reflect_across_ray(z, beta);
                let (a, b) = (inst.phi_at(z).unwrap(), inst.phi_at(zs).unwrap());
                assert!((a - b).abs() < 1e-12, "ray {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn phi_max_form_agrees_where_defined() {
        let inst = unequal();
        let dcirc0 = |z: Point| inst.partition().arc(0).sector_contains(z) && inst.basic_domain().contains(z);
        let mut compared = 0;
        for i in 0..40 {
            for j in 1..10 {
                let z = cis(i as f64 * PI / 20.0 + 0.01) * (0.06 * j as f64);
                if !inst.basic_domain().contains(z) {
                    continue;
                }
                let (_, up, down) = inst.branches(z);
                if dcirc0(up) && dcirc0(down) {
                    let max = inst.phi0_at(up).unwrap().max(inst.phi0_at(down).unwrap());
                    assert!((inst.phi_at(z).unwrap() - max).abs() < 1e-12);
                    compared += 1;
                }
            }
        }
        assert!(compared > 20);
    }

    #[test]
    fn equal_arcs_are_rotation_symmetric() {
        let p = ArcPartition::equal(4).unwrap();
        let inst = VellingInstance::geodesic(p, coarse(), 2).unwrap();
        for z in [Point::new(0.2, 0.1), Point::new(0.05, -0.3)] {
            let a = inst.phi_at(z).unwrap();
            for k in 1..4 {
                let b = inst.phi_at(z * cis(k as f64 * PI / 2.0)).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, "a"), sub_seed(1, "b"));
        assert_ne!(sub_seed(1, "a"), sub_seed(2, "a"));
        assert_eq!(sub_seed(5, "x"), sub_seed(5, "x"));
    }
}
