use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::Instant;

use super::{sub_seed, CheckOptions, CheckReport, Condition, VellingInstance};
use crate::geometry::{cis, reflect_across_ray, ArcPartition, Point, StarDomain};
use crate::solver::{
    fd_green, fd_harmonic_measure, fd_polar_harmonic_measure, flux_along_curve, wos_green,
    wos_harmonic_measure, Estimate, SolverError, VertexGreen,
};

/// Standard errors allowed on Monte Carlo estimates.
pub const SIGMAS: f64 = 3.0;
/// Absolute tolerance attributed to finite difference values.
pub const FD_TOLERANCE: f64 = 5e-3;
/// Relative tolerance of flux identities.
const FLUX_TOLERANCE: f64 = 0.02;
/// Arc-length spread above which the theorem margin must be strictly positive.
const STRICT_SPREAD: f64 = 0.2;
/// Distance from the boundary kept by probe points, in the
/// `(log|z|, arg z)` plane.
const PROBE_MARGIN: f64 = 0.05;
/// Distance from the origin kept by probe points.
const ORIGIN_MARGIN: f64 = 1e-3;
/// Bound on `u` at probe points.
const U_TOLERANCE: f64 = 1e-2;
/// Largest logarithmic slope tolerated in `φ(z) + log|z|` near the origin.
const LOG_SLOPE_TOLERANCE: f64 = 0.05;
/// Bound on `|g(z) - g(z̄)|`.
const SYMMETRY_TOLERANCE: f64 = 1e-2;
/// Bound on the mirrored identity of `φ`.
const MIRROR_TOLERANCE: f64 = 1e-12;
/// Allowed ratio between seam and control mean-value deviations.
const MEAN_VALUE_FACTOR: f64 = 4.0;
/// Points on each mean-value circle.
const CIRCLE_POINTS: usize = 64;

fn combined(e: &Estimate) -> f64 {
    SIGMAS * e.std_error + FD_TOLERANCE
}

fn fingerprint(opts: &CheckOptions) -> String {
    let json = serde_json::to_string(opts).expect("options serialize");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn finish(mut r: CheckReport, opts: &CheckOptions, start: Instant) -> CheckReport {
    r.fingerprint = fingerprint(opts);
    r.runtime_s = start.elapsed().as_secs_f64();
    r
}

/// Agreement of the two backends as a condition: `|wos - fd| ≤ 3σ + 5e-3`.
fn agreement(name: &str, wos: &Estimate, fd: f64) -> Condition {
    Condition::new(name, combined(wos) - (wos.value - fd).abs(), 0.0)
}

/// `ω(0, I₀°, D°) ≥ ω₀`, measured by both backends.
pub fn check_theorem(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let wos = inst.hm_basic_wos()?;
    let fd = inst.hm_basic_fd()?;
    let o = inst.omega0();
    let spread = inst.partition().length_spread();
    let margin = wos.value - o;
    let mut r = CheckReport::new("theorem", wos.value, wos.std_error, wos.seed)
        .quantity("omega0", o, 0.0)
        .quantity("wos", wos.value, wos.std_error)
        .quantity("fd", fd, FD_TOLERANCE)
        .quantity("spread", spread, 0.0)
        .quantity("strict_3sigma", f64::from(margin > SIGMAS * wos.std_error), 0.0)
        .quantity("strict", f64::from(margin > combined(&wos)), 0.0)
        .condition(Condition::new("margin", margin, combined(&wos)))
        .condition(Condition::new("fd_margin", fd - o, FD_TOLERANCE))
        .condition(agreement("backend_agreement", &wos, fd));
    if spread > STRICT_SPREAD {
        r = r.condition(Condition::new("strict_margin", margin - SIGMAS * wos.std_error, 0.0));
    }
    Ok(finish(r, inst.options(), start))
}

/// Theorem-style margin on `Δ \ C₀` with a single lens of half-opening
/// `alpha`, where `ω(0, I₀, Δ \ C₀) = 2α/π` exactly and `ω₀ = α/π`.
pub fn single_lens_theorem(alpha: f64, opts: &CheckOptions, seed: u64) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let d = StarDomain::single_lens(alpha)?;
    let o = opts.wos.with_seed(sub_seed(seed, "wos:lens"));
    let wos = wos_harmonic_measure(&d, Point::new(0.0, 0.0), &[0], &o)?;
    let fd = fd_harmonic_measure(&d, &[0], &opts.fd)?.value_at(Point::new(0.0, 0.0))?;
    let exact = 2.0 * alpha / PI;
    let omega0 = alpha / PI;
    let r = CheckReport::new("single_lens", wos.value, wos.std_error, wos.seed)
        .quantity("alpha", alpha, 0.0)
        .quantity("exact", exact, 0.0)
        .quantity("omega0", omega0, 0.0)
        .quantity("fd", fd, FD_TOLERANCE)
        .condition(Condition::new("margin", wos.value - omega0, combined(&wos)))
        .condition(Condition::new("wos_exact", combined(&wos) - (wos.value - exact).abs(), 0.0))
        .condition(Condition::new("fd_exact", FD_TOLERANCE - (fd - exact).abs(), 0.0))
        .condition(agreement("backend_agreement", &wos, fd));
    Ok(finish(r, opts, start))
}

/// `ω(0, I₀, D) ≥ ω(0, I₀°, D°)` and `ω(0, I₀, D) ≥ ω₀`; reports the implied
/// image length `|I₀′| = 2π ω(0, I₀, D)`.
pub fn check_conjecture(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let wd = inst.hm_velling_wos()?;
    let fd_d = inst.hm_velling_fd()?;
    let wb = inst.hm_basic_wos()?;
    let fd_b = inst.hm_basic_fd()?;
    let o = inst.omega0();
    let joint = SIGMAS * wd.std_error.hypot(wb.std_error) + FD_TOLERANCE;
    let image = TAU * wd.value;
    let arc = 2.0 * inst.partition().alpha0();
    let mut r = CheckReport::new("conjecture", wd.value, wd.std_error, wd.seed)
        .quantity("omega0", o, 0.0)
        .quantity("velling_wos", wd.value, wd.std_error)
        .quantity("velling_fd", fd_d, FD_TOLERANCE)
        .quantity("basic_wos", wb.value, wb.std_error)
        .quantity("basic_fd", fd_b, FD_TOLERANCE)
        .quantity("image_length", image, TAU * wd.std_error)
        .quantity("arc_length", arc, 0.0)
        .condition(Condition::new("velling_vs_basic", wd.value - wb.value, joint))
        .condition(Condition::new("velling_vs_omega0", wd.value - o, combined(&wd)))
        .condition(Condition::new("fd_velling_vs_basic", fd_d - fd_b, 2.0 * FD_TOLERANCE))
        .condition(agreement("velling_agreement", &wd, fd_d))
        .condition(agreement("basic_agreement", &wb, fd_b));
    if inst.partition().all_equal() {
        r = r
            .condition(Condition::new("equality", -(wd.value - wb.value).abs(), joint))
            .condition(Condition::new("image_length", -((image - arc) / arc).abs(), FLUX_TOLERANCE));
    }
    Ok(finish(r, inst.options(), start))
}

/// Removing the lens over the shortest arc from `D` must not decrease
/// `ω(0, I₀, ·)`.
pub fn check_extension(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let p = inst.partition();
    let drop = (1..p.len())
        .min_by(|&a, &b| p.arc(a).half_opening.total_cmp(&p.arc(b).half_opening))
        .unwrap_or(1);
    let keep: Vec<bool> = (0..p.len()).map(|k| k != drop).collect();
    let larger = StarDomain::velling_with_lenses(p, &keep);
    let o = inst.options().wos.with_seed(sub_seed(inst.seed(), "wos:extension"));
    let we = wos_harmonic_measure(&larger, Point::new(0.0, 0.0), &[0], &o)?;
    let fd_e = fd_polar_harmonic_measure(&larger, &[0], &inst.options().log_polar)?.value_at(Point::new(0.0, 0.0))?;
    let wd = inst.hm_velling_wos()?;
    let fd_d = inst.hm_velling_fd()?;
    let joint = SIGMAS * we.std_error.hypot(wd.std_error) + FD_TOLERANCE;
    let r = CheckReport::new("extension", we.value, we.std_error, we.seed)
        .quantity("removed_lens", drop as f64, 0.0)
        .quantity("velling_wos", wd.value, wd.std_error)
        .quantity("extended_fd", fd_e, FD_TOLERANCE)
        .quantity("velling_fd", fd_d, FD_TOLERANCE)
        .condition(Condition::new("margin", we.value - wd.value, joint))
        .condition(Condition::new("fd_margin", fd_e - fd_d, 2.0 * FD_TOLERANCE))
        .condition(agreement("backend_agreement", &we, fd_e));
    Ok(finish(r, inst.options(), start))
}

/// Summary of angular-derivative and symmetry probes of `g(·, 0, Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaStats {
    pub probes: usize,
    pub min_derivative: f64,
    pub max_abs_derivative: f64,
    /// `max |g(w) - g(w̄)|`.
    pub max_asymmetry: f64,
}

/// Probes `∂g(ρe^{it}, 0, Ω)/∂t` on an `n × n` polar grid of the upper half
/// of `Ω`, keeping probes at least `margin` from the boundary in the
/// log-polar plane where the field lives.
///
/// With `w = ρe^{it}` and `(s, θ) = ω(log ρ, t)`, `g(w) = (v(s, θ) - s)/ω`,
/// so `∂g/∂t = ∂v/∂θ`, taken as a central difference with step `ω dt`.
pub fn lemma_probe(field: &VertexGreen, n: usize, dt: f64, margin: f64) -> Result<LemmaStats, SolverError> {
    let om = field.omega();
    let dtheta = om * dt;
    let mut st = LemmaStats {
        probes: 0,
        min_derivative: f64::INFINITY,
        max_abs_derivative: 0.0,
        max_asymmetry: 0.0,
    };
    for j in 0..n {
        let t = PI * (j as f64 + 0.5) / n as f64;
        let theta = om * t;
        let top = field.log_radius(theta);
        for i in 0..n {
            let s = top + om * ((i as f64 + 0.5) / n as f64).ln();
            if field.log_distance_to_boundary(s, theta) < margin
                || !field.contains_log(s, theta + dtheta)
                || !field.contains_log(s, theta - dtheta)
            {
                continue;
            }
            let d = (field.regular_at(s, theta + dtheta)? - field.regular_at(s, theta - dtheta)?) / (2.0 * dtheta);
            st.probes += 1;
            st.min_derivative = st.min_derivative.min(d);
            st.max_abs_derivative = st.max_abs_derivative.max(d.abs());
            let w = cis(t) * (s / om).exp();
            let asym = (field.image_value_at(w)? - field.image_value_at(w.conj())?).abs();
            st.max_asymmetry = st.max_asymmetry.max(asym);
        }
    }
    Ok(st)
}

/// Conjugation symmetry and positive angular derivative of `g(·, 0, Ω)` in
/// the upper half of `Ω`.
pub fn check_lemma(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let opts = inst.options();
    let s = lemma_probe(inst.phi0_field()?, opts.probes, opts.dt, PROBE_MARGIN)?;
    let r = CheckReport::new("lemma", s.min_derivative, 0.0, inst.seed())
        .quantity("probes", s.probes as f64, 0.0)
        .quantity("min_derivative", s.min_derivative, 0.0)
        .quantity("max_asymmetry", s.max_asymmetry, 0.0)
        .condition(Condition::new("min_derivative", s.min_derivative, 0.0))
        .condition(Condition::new("symmetry", SYMMETRY_TOLERANCE - s.max_asymmetry, 0.0))
        .condition(Condition::new("probes", s.probes as f64 - 1.0, 0.0));
    Ok(finish(r, opts, start))
}

/// `(1/2π) ∫_{I₀°} ∂φ₀/∂n = ω₀`, computed in the plane of `D°₀` and again
/// in the log-polar plane, and the flux of `g(·, 0, D°)` over `I₀°` against
/// the directly solved `ω(0, I₀°, D°)`.
pub fn check_flux(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let opts = inst.options();
    let o = inst.omega0();
    let basic = *inst.basic();
    let a0 = basic.half_opening;
    let field = inst.phi0_field()?;

    // The log-polar grid resolves D°₀ at a scale proportional to |z|, and
    // D°₀ itself is only about R(0) wide at its vertex: probe relative to |ξ|.
    let relative = opts.flux_offset.max(2.0 * field.h());
    let pulled = flux_along_curve(
        |t| cis(t) * basic.radius(t),
        -a0,
        a0,
        opts.flux_spacing,
        |xi| relative * xi.norm(),
        |z| {
            let s = z.norm().ln();
            field.contains_log(s, z.arg()).then(|| field.value_at(z).ok()).flatten()
        },
        |_| 0.0,
    );
    let log_polar = field.flux(opts.flux_spacing, 2.0 * field.h())?;
    let green = inst.green_dcirc()?;
    let basic_flux = green.flux(0, opts.flux_spacing, opts.flux_offset.max(2.0 * green.h()))?;
    let direct = inst.hm_basic_fd()?;

    let rel = (pulled.value - o).abs() / o;
    let rel_log = (log_polar.value - o).abs() / o;
    let rel_basic = (basic_flux.value - direct).abs() / direct;
    let r = CheckReport::new("flux", pulled.value, 0.0, inst.seed())
        .quantity("omega0", o, 0.0)
        .quantity("pulled_back_flux", pulled.value, 0.0)
        .quantity("log_polar_flux", log_polar.value, 0.0)
        .quantity("basic_flux", basic_flux.value, 0.0)
        .quantity("basic_direct", direct, FD_TOLERANCE)
        .quantity("skipped", (pulled.skipped + log_polar.skipped + basic_flux.skipped) as f64, 0.0)
        .condition(Condition::new("flux_vs_omega0", -rel, FLUX_TOLERANCE))
        .condition(Condition::new("log_polar_vs_omega0", -rel_log, FLUX_TOLERANCE))
        .condition(Condition::new("flux_vs_direct", -rel_basic, FLUX_TOLERANCE));
    Ok(finish(r, opts, start))
}

/// Depth below the boundary, in units of `log|z|`, spanned by regularity probes.
const REGULARITY_DEPTH: f64 = 3.0;
/// Boundary samples per unit angle for log-plane clearance tests.
const CLEARANCE_SAMPLES: usize = 64;

/// Whether the disk of radius `r` about `(s, θ)` in the `(log|z|, arg z)`
/// plane lies below the boundary curve `log R(θ)` of `d`.
fn log_clearance(d: &StarDomain, s: f64, theta: f64, r: f64) -> bool {
    let curve = |t: f64| Point::new(d.radius_at(t).ln(), t);
    if s + r >= curve(theta).re {
        return false;
    }
    let p = Point::new(s, theta);
    let n = CLEARANCE_SAMPLES;
    let mut prev = curve(theta - r);
    for i in 1..=n {
        let next = curve(theta - r + 2.0 * r * i as f64 / n as f64);
        if segment_distance(p, prev, next) < r {
            return false;
        }
        prev = next;
    }
    true
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 > 0.0 {
        (((p - a).re * ab.re + (p - a).im * ab.im) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + ab * t)).norm()
}

/// `φ` at `(s, θ) = (log|z|, arg z)`.
fn phi_log(inst: &VellingInstance, s: f64, theta: f64) -> Result<f64, SolverError> {
    inst.phi_at(cis(theta) * s.exp())
}

/// Mean of `φ` over the log-plane circle of radius `delta` about `(s, θ)`
/// minus the centre value. The log map is conformal, so this is the usual
/// mean-value defect.
fn mean_defect(inst: &VellingInstance, s: f64, theta: f64, delta: f64) -> Result<f64, SolverError> {
    let mut sum = 0.0;
    for j in 0..CIRCLE_POINTS {
        let c = cis(TAU * j as f64 / CIRCLE_POINTS as f64) * delta;
        sum += phi_log(inst, s + c.re, theta + c.im)?;
    }
    Ok(sum / CIRCLE_POINTS as f64 - phi_log(inst, s, theta)?)
}

/// Continuity and harmonicity of `φ` across the sector rays, and
/// subharmonicity where the two branches meet at the sector centres.
/// Circles live in the `(log|z|, arg z)` plane, where the basic domain has
/// room for them even when it pinches near the origin.
pub fn check_phi_regularity(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let opts = inst.options();
    let p = inst.partition();
    let d = inst.basic_domain();
    let delta = opts.regularity_delta;
    let samples = opts.probes.max(2);
    let depths = |angle: f64, clearance: f64| -> Vec<f64> {
        let top = d.radius_at(angle).ln();
        (1..=samples)
            .map(|i| top - REGULARITY_DEPTH * i as f64 / samples as f64)
            .filter(|&s| log_clearance(d, s, angle, clearance))
            .collect()
    };

    let n = p.len();
    let mut max_mirror: f64 = 0.0;
    let mut ray_dev: f64 = 0.0;
    let mut ray_points = 0usize;
    for k in 0..n {
        let beta = p.ray_after(k);
        let room = p.arc(k).half_opening.min(p.arc((k + 1) % n).half_opening);
        for s in depths(beta, 3.0 * delta) {
            ray_dev = ray_dev.max(mean_defect(inst, s, beta, delta)?.abs());
            ray_points += 1;
            for tau in [1e-3, 0.3 * room, 0.9 * room] {
                let z = cis(beta - tau) * s.exp();
                let mirror = reflect_across_ray(z, beta);
                if d.contains(z) && d.contains(mirror) {
                    max_mirror = max_mirror.max((inst.phi_at(z)? - inst.phi_at(mirror)?).abs());
                }
            }
        }
    }

    let mut control_dev: f64 = 0.0;
    let mut controls = 0usize;
    let mut kink_excess = f64::NEG_INFINITY;
    let mut kinks = 0usize;
    for k in 0..n {
        let arc = p.arc(k);
        // A control circle must stay inside one branch: within α_k/2 of its
        // centre angle.
        if arc.half_opening > 2.0 * delta {
            for side in [-0.5, 0.5] {
                let angle = arc.center + side * arc.half_opening;
                for s in depths(angle, 3.0 * delta) {
                    control_dev = control_dev.max(mean_defect(inst, s, angle, delta)?.abs());
                    controls += 1;
                }
            }
        }
        if p.deviation(k) > 1e-9 {
            for s in depths(arc.center, 3.0 * delta) {
                kink_excess = kink_excess.max(-mean_defect(inst, s, arc.center, delta)?);
                kinks += 1;
            }
        }
    }

    let c = control_dev / (delta * delta);
    let bound = MEAN_VALUE_FACTOR * c * delta * delta;
    let mut r = CheckReport::new("regularity", ray_dev, 0.0, inst.seed())
        .quantity("ray_points", ray_points as f64, 0.0)
        .quantity("controls", controls as f64, 0.0)
        .quantity("kinks", kinks as f64, 0.0)
        .quantity("ray_deviation", ray_dev, 0.0)
        .quantity("control_constant", c, 0.0)
        .quantity("max_mirror", max_mirror, 0.0)
        .condition(Condition::new("ray_mean_value", bound - ray_dev, 0.0))
        .condition(Condition::new("mirror", MIRROR_TOLERANCE - max_mirror, 0.0))
        .condition(Condition::new("samples", (ray_points.min(controls)) as f64 - 1.0, 0.0));
    if kinks > 0 {
        r = r
            .quantity("kink_excess", kink_excess, 0.0)
            .condition(Condition::new("kink_subharmonic", -kink_excess, bound));
    }
    Ok(finish(r, opts, start))
}

/// `u = φ - g(·, 0, D°) ≤ 0` on a polar probe grid of `D°`, `u ≡ 0` for
/// equal arcs, and cancellation of the logarithmic pole in `φ`.
pub fn check_comparison(inst: &VellingInstance) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let opts = inst.options();
    let d = inst.basic_domain();
    let n = opts.probes.max(2);
    let mut max_u = f64::NEG_INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut probes = 0usize;
    for j in 0..4 * n {
        let t = TAU * (j as f64 + 0.5) / (4 * n) as f64;
        let rb = d.radius_at(t);
        for i in 0..n {
            let z = cis(t) * (rb * (i as f64 + 0.5) / n as f64);
            if z.norm() < ORIGIN_MARGIN || !log_clearance(d, z.norm().ln(), t, PROBE_MARGIN) {
                continue;
            }
            let (u, _) = inst.u_at(z)?;
            max_u = max_u.max(u);
            max_abs = max_abs.max(u.abs());
            probes += 1;
        }
    }
    // The window [1e-3, 1e-1] is shrunk with D° when D° is smaller than
    // the unit disk near the origin, keeping every probe well inside.
    let dirs: Vec<f64> = (0..8).map(|j| TAU * (j as f64 + 0.25) / 8.0).collect();
    let scale = dirs.iter().map(|&t| 5.0 * d.radius_at(t)).fold(1.0, f64::min);
    let (mut lo_log, mut hi_log) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &dirs {
        for i in 0..=20 {
            let r = scale * 10f64.powf(-3.0 + 2.0 * i as f64 / 20.0);
            let z = cis(t) * r;
            let residual = inst.phi_at(z)? + r.ln();
            lo_log = lo_log.min(residual);
            hi_log = hi_log.max(residual);
        }
    }
    // A leftover c·log|z| term would spread the residual by |c|·log 100.
    let spread = hi_log - lo_log;
    let log_bound = LOG_SLOPE_TOLERANCE * 100f64.ln();
    let mut r = CheckReport::new("comparison", max_u, 0.0, inst.seed())
        .quantity("probes", probes as f64, 0.0)
        .quantity("max_u", max_u, U_TOLERANCE)
        .quantity("max_abs_u", max_abs, U_TOLERANCE)
        .quantity("origin_residual", hi_log.abs().max(lo_log.abs()), 0.0)
        .quantity("origin_spread", spread, 0.0)
        .quantity("origin_window_scale", scale, 0.0)
        .condition(Condition::new("max_u", -max_u, U_TOLERANCE))
        .condition(Condition::new("origin_bounded", log_bound - spread, 0.0))
        .condition(Condition::new("probes", probes as f64 - 1.0, 0.0));
    if inst.partition().all_equal() {
        r = r.condition(Condition::new("equality", -max_abs, U_TOLERANCE));
    }
    Ok(finish(r, opts, start))
}

/// `ω(0, I₀, P_n) ≥ ω₀` for the inscribed polygon of the partition.
pub fn check_corollary(p: &ArcPartition, opts: &CheckOptions, seed: u64) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let d = StarDomain::polygon(p);
    let o = opts.wos.with_seed(sub_seed(seed, "wos:polygon"));
    let wos = wos_harmonic_measure(&d, Point::new(0.0, 0.0), &[0], &o)?;
    let fd = fd_polar_harmonic_measure(&d, &[0], &opts.log_polar)?.value_at(Point::new(0.0, 0.0))?;
    let omega0 = p.alpha0() / PI;
    let r = CheckReport::new("corollary", wos.value, wos.std_error, wos.seed)
        .quantity("omega0", omega0, 0.0)
        .quantity("fd", fd, FD_TOLERANCE)
        .condition(Condition::new("margin", wos.value - omega0, combined(&wos)))
        .condition(Condition::new("fd_margin", fd - omega0, FD_TOLERANCE))
        .condition(Condition::new("at_most_one", 1.0 - wos.value, 0.0))
        .condition(agreement("backend_agreement", &wos, fd));
    Ok(finish(r, opts, start))
}

/// Closed-form solver checks: the quarter arc of the disk, `g(1/2, 0, Δ)`,
/// and the single lens at three openings.
pub fn selftest_reports(opts: &CheckOptions, seed: u64) -> Vec<Result<CheckReport, SolverError>> {
    let mut out = vec![disk_measure(opts, seed), disk_green(opts, seed)];
    for alpha in [PI / 6.0, PI / 4.0, PI / 3.0] {
        out.push(single_lens_theorem(alpha, opts, sub_seed(seed, &format!("lens:{alpha}"))));
    }
    out
}

fn disk_measure(opts: &CheckOptions, seed: u64) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let d = StarDomain::labeled_disk(&[-FRAC_PI_2 / 2.0, FRAC_PI_2 / 2.0]);
    let o = opts.wos.with_seed(sub_seed(seed, "wos:disk"));
    let wos = wos_harmonic_measure(&d, Point::new(0.0, 0.0), &[0], &o)?;
    let fd = fd_harmonic_measure(&d, &[0], &opts.fd)?.value_at(Point::new(0.0, 0.0))?;
    let exact = 0.25;
    let r = CheckReport::new("disk_measure", wos.value, wos.std_error, wos.seed)
        .quantity("exact", exact, 0.0)
        .quantity("fd", fd, FD_TOLERANCE)
        .condition(Condition::new("wos_exact", SIGMAS * wos.std_error + wos.bias_bound - (wos.value - exact).abs(), 0.0))
        .condition(Condition::new("fd_exact", FD_TOLERANCE - (fd - exact).abs(), 0.0))
        .condition(agreement("backend_agreement", &wos, fd));
    Ok(finish(r, opts, start))
}

fn disk_green(opts: &CheckOptions, seed: u64) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let d = StarDomain::unit_disk();
    let (zero, z) = (Point::new(0.0, 0.0), Point::new(0.5, 0.0));
    let o = opts.wos.with_seed(sub_seed(seed, "wos:green"));
    let wos = wos_green(&d, zero, z, &o)?;
    let fd = fd_green(&d, zero, &opts.fd)?.value_at(z)?;
    let exact = 2f64.ln();
    let r = CheckReport::new("disk_green", wos.value, wos.std_error, wos.seed)
        .quantity("exact", exact, 0.0)
        .quantity("fd", fd, FD_TOLERANCE)
        .condition(Condition::new("wos_exact", SIGMAS * wos.std_error + wos.bias_bound - (wos.value - exact).abs(), 0.0))
        .condition(Condition::new("fd_exact", FD_TOLERANCE - (fd - exact).abs(), 0.0))
        .condition(agreement("backend_agreement", &wos, fd));
    Ok(finish(r, opts, start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_partition;
    use crate::solver::{fd_vertex_green, FdOptions, LogPolarOptions};
    use std::sync::Arc;

    fn quick() -> CheckOptions {
        CheckOptions {
            fd: FdOptions::default().with_h(1.0 / 128.0),
            wos: crate::solver::WosOptions::default().with_samples(100_000),
            ..Default::default()
        }
    }

    fn unequal() -> VellingInstance {
        let p = make_partition(&[1.2, 0.7, 0.7, PI - 2.6], 0.0).unwrap();
        VellingInstance::geodesic(p, quick(), 3).unwrap()
    }

    #[test]
    fn theorem_unequal() {
        let r = check_theorem(&unequal()).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.margin > 0.02);
    }

    #[test]
    fn single_lens_margin_is_omega0() {
        let r = single_lens_theorem(PI / 4.0, &quick(), 9).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!((r.margin - 0.25).abs() < 0.01);
    }

    /// A constant boundary radius makes `Ω` a disk: no angular dependence.
    #[test]
    fn lemma_degenerate_disk() {
        let f = fd_vertex_green(Arc::new(|_| 0.5), 1.0, &LogPolarOptions::default()).unwrap();
        let s = lemma_probe(&f, 20, 0.01, PROBE_MARGIN).unwrap();
        assert!(s.probes > 300);
        assert!(s.max_abs_derivative < 1e-9, "{s:?}");
        assert_eq!(s.max_asymmetry, 0.0);
    }

    #[test]
    fn lemma_unequal() {
        let r = check_lemma(&unequal()).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.get("probes").unwrap() > 100.0);
    }

    #[test]
    fn flux_unequal() {
        let r = check_flux(&unequal()).unwrap();
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn regularity_unequal() {
        let r = check_phi_regularity(&unequal()).unwrap();
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn comparison_equal_arcs() {
        let p = ArcPartition::equal(4).unwrap();
        let inst = VellingInstance::geodesic(p, quick(), 1).unwrap();
        let r = check_comparison(&inst).unwrap();
        assert!(r.passed, "{r:#?}");
        assert!(r.condition_named("equality").is_some());
    }

    #[test]
    fn comparison_unequal() {
        let r = check_comparison(&unequal()).unwrap();
        assert!(r.passed, "{r:#?}");
    }

    #[test]
    fn fingerprint_tracks_options() {
        let a = quick();
        let b = CheckOptions { dt: 0.02, ..a };
        assert_ne!(fingerprint(&a), fingerprint(&b));
        assert_eq!(fingerprint(&a), fingerprint(&quick()));
    }
}
