use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::geometry::{cis, GeometryError, Point, StarDomain};

/// Dirichlet data as a function of (piece label, boundary point).
pub type BoundaryData = Arc<dyn Fn(usize, Point) -> f64 + Send + Sync>;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    /// Grid spacing.
    pub h: f64,
    /// Stop when the largest update of a sweep falls below this.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Start from the interpolated solution on a grid twice as coarse.
    pub warm_start: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            h: 1.0 / 256.0,
            tol: 1e-10,
            max_sweeps: 1_000_000,
            warm_start: true,
        }
    }
}

impl FdOptions {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }
}

/// Normalised five-point stencil `u₀ = rhs + Σ w_d u_d`. Boundary arms point
/// at the trailing zero slot and carry their data in `rhs`.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    nbr: [u32; 4],
    w: [f64; 4],
    rhs: f64,
}

/// A grid function solving the discrete Laplace equation on a star domain.
///
/// With a pole the represented function is `-log|z - pole| + u(z)` and only
/// the regular part `u` lives on the grid.
#[derive(Clone)]
pub struct ScalarField {
    h: f64,
    m: usize,
    index: Vec<u32>,
    coords: Vec<(u32, u32)>,
    values: Vec<f64>,
    domain: StarDomain,
    data: BoundaryData,
    pole: Option<Point>,
    sweeps: usize,
    residual: f64,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("h", &self.h)
            .field("nodes", &self.coords.len())
            .field("pole", &self.pole)
            .field("sweeps", &self.sweeps)
            .field("residual", &self.residual)
            .finish()
    }
}

/// First boundary crossing on the segment `p → p + h·dir`, returned as the
/// arm length.
fn crossing(d: &StarDomain, p: Point, dir: Point, h: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = h;
    for s in 1..=8 {
        let t = h * s as f64 / 8.0;
        if !d.contains(p + dir * t) {
            hi = t;
            break;
        }
        lo = t;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d.contains(p + dir * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(1e-9 * h)
}

struct System {
    h: f64,
    m: usize,
    index: Vec<u32>,
    coords: Vec<(u32, u32)>,
    stencils: Vec<Stencil>,
    reds: usize,
}

impl System {
    fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.m as f64) * self.h
    }

    fn build(d: &StarDomain, data: &BoundaryData, h: f64) -> Self {
        let ext = d.max_radius();
        let m = (ext / h).ceil() as usize + 1;
        let n = 2 * m + 1;
        let coord = |i: usize| (i as f64 - m as f64) * h;
        let mut inside = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                inside[j * n + i] = d.contains(Point::new(coord(i), coord(j)));
            }
        }
        // Red nodes first, then black, so each half-sweep is contiguous.
        let mut index = vec![NONE; n * n];
        let mut coords = Vec::new();
        for color in 0..2 {
            for j in 0..n {
                for i in 0..n {
                    if inside[j * n + i] && (i + j) % 2 == color {
                        index[j * n + i] = coords.len() as u32;
                        coords.push((i as u32, j as u32));
                    }
                }
            }
        }
        let reds = coords.iter().filter(|(i, j)| (i + j) % 2 == 0).count();
        let zero_slot = coords.len() as u32;
        let dirs = [
            (1i64, 0i64, Point::new(1.0, 0.0)),
            (-1, 0, Point::new(-1.0, 0.0)),
            (0, 1, Point::new(0.0, 1.0)),
            (0, -1, Point::new(0.0, -1.0)),
        ];
        let stencils = coords
            .iter()
            .map(|&(i, j)| {
                let p = Point::new(coord(i as usize), coord(j as usize));
                let mut arm = [h; 4];
                let mut nbr = [zero_slot; 4];
                let mut bval = [0.0; 4];
                for (k, &(di, dj, dir)) in dirs.iter().enumerate() {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    let id = if ni >= 0 && nj >= 0 && (ni as usize) < n && (nj as usize) < n {
                        index[nj as usize * n + ni as usize]
                    } else {
                        NONE
                    };
                    if id != NONE {
                        nbr[k] = id;
                    } else {
                        let a = crossing(d, p, dir, h);
                        let xi = p + dir * a;
                        arm[k] = a;
                        bval[k] = data(d.label_at(xi), xi);
                    }
                }
                // Shortley–Weller weights. Pairs are summed so that mirrored
                // nodes produce bitwise mirrored stencils.
                let [he, hw, hn, hs] = arm;
                let ae = 2.0 / (he * (he + hw));
                let aw = 2.0 / (hw * (he + hw));
                let an = 2.0 / (hn * (hn + hs));
                let as_ = 2.0 / (hs * (hn + hs));
                let total = (ae + aw) + (an + as_);
                let w = [ae / total, aw / total, an / total, as_ / total];
                let rhs = (w[0] * bval[0] + w[1] * bval[1]) + (w[2] * bval[2] + w[3] * bval[3]);
                Stencil { nbr, w, rhs }
            })
            .collect();
        Self {
            h,
            m,
            index,
            coords,
            stencils,
            reds,
        }
    }

    /// Red-black SOR. Returns (sweeps, final residual).
    fn relax(&self, u: &mut [f64], omega: f64, tol: f64, max_sweeps: usize) -> Result<(usize, f64), SolverError> {
        let n = self.stencils.len();
        let mut residual = f64::INFINITY;
        for sweep in 1..=max_sweeps {
            residual = 0.0;
            for range in [0..self.reds, self.reds..n] {
                for k in range {
                    let s = &self.stencils[k];
                    let gs = s.rhs
                        + ((s.w[0] * u[s.nbr[0] as usize] + s.w[1] * u[s.nbr[1] as usize])
                            + (s.w[2] * u[s.nbr[2] as usize] + s.w[3] * u[s.nbr[3] as usize]));
                    let delta = gs - u[k];
                    residual = f64::max(residual, delta.abs());
                    u[k] += omega * delta;
                }
            }
            if residual < tol {
                return Ok((sweep, residual));
            }
            if !residual.is_finite() {
                break;
            }
        }
        Err(SolverError::NotConverged {
            iterations: max_sweeps,
            residual,
        })
    }
}

fn solve(
    d: &StarDomain,
    data: BoundaryData,
    pole: Option<Point>,
    opts: &FdOptions,
    tol: f64,
) -> Result<ScalarField, SolverError> {
    if !(opts.h > 0.0 && opts.h < 0.25) {
        return Err(SolverError::BadParameter(format!("grid spacing {}", opts.h)));
    }
    let sys = System::build(d, &data, opts.h);
    let mut u = vec![0.0; sys.stencils.len() + 1];
    if opts.warm_start && opts.h * 2.0 <= 1.0 / 16.0 {
        let coarse = solve(d, data.clone(), None, &FdOptions { h: 2.0 * opts.h, ..*opts }, tol.max(1e-8))?;
        for (k, &(i, j)) in sys.coords.iter().enumerate() {
            let z = Point::new(sys.coord(i as usize), sys.coord(j as usize));
            u[k] = coarse.regular_at(z).unwrap_or(0.0);
        }
    }
    let ext = (sys.m as f64 - 1.0) * sys.h;
    let omega = 2.0 / (1.0 + (PI * sys.h / (2.0 * ext)).sin());
    let (sweeps, residual) = sys.relax(&mut u, omega, tol, opts.max_sweeps)?;
    Ok(ScalarField {
        h: sys.h,
        m: sys.m,
        index: sys.index,
        coords: sys.coords,
        values: u,
        domain: d.clone(),
        data,
        pole,
        sweeps,
        residual,
    })
}

/// Solves the Dirichlet problem for the Laplace equation on `d` with data
/// `boundary_data`, using Shortley–Weller stencils at boundary-adjacent
/// nodes.
pub fn fd_solve(d: &StarDomain, boundary_data: BoundaryData, opts: &FdOptions) -> Result<ScalarField, SolverError> {
    solve(d, boundary_data, None, opts, opts.tol)
}

/// Harmonic measure of the pieces labelled in `target`, as a field.
pub fn fd_harmonic_measure(d: &StarDomain, target: &[usize], opts: &FdOptions) -> Result<ScalarField, SolverError> {
    let target = target.to_vec();
    fd_solve(
        d,
        Arc::new(move |label, _| if target.contains(&label) { 1.0 } else { 0.0 }),
        opts,
    )
}

/// Green function with pole `pole`: the grid carries `u_pole`, the harmonic
/// function with boundary values `log|ξ - pole|`; the logarithm is added
/// analytically on evaluation.
pub fn fd_green(d: &StarDomain, pole: Point, opts: &FdOptions) -> Result<ScalarField, SolverError> {
    if !d.contains(pole) {
        return Err(GeometryError::Outside(pole).into());
    }
    solve(
        d,
        Arc::new(move |_, xi: Point| (xi - pole).norm().ln()),
        Some(pole),
        opts,
        opts.tol,
    )
}

impl ScalarField {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    pub fn pole(&self) -> Option<Point> {
        self.pole
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn node_count(&self) -> usize {
        self.coords.len()
    }

    fn n(&self) -> usize {
        2 * self.m + 1
    }

    fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.m as f64) * self.h
    }

    fn singular(&self, z: Point) -> f64 {
        match self.pole {
            Some(p) => -(z - p).norm().ln(),
            None => 0.0,
        }
    }

    /// Bilinear interpolation of the grid part; `None` unless all four
    /// cell corners are interior nodes.
    fn bilinear(&self, z: Point) -> Option<f64> {
        // Cells are located from |y| and mirrored, so conjugate points use
        // identical weights.
        let fx = z.re / self.h + self.m as f64;
        let fy = z.im.abs() / self.h;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, jj) = (fx.floor() as usize, fy.floor() as usize);
        let n = self.n();
        if i + 1 >= n || self.m + jj + 1 >= n {
            return None;
        }
        let row = |k: usize| if z.im < 0.0 { self.m - k } else { self.m + k };
        let (tx, ty) = (fx - i as f64, fy - jj as f64);
        let at = |i: usize, j: usize| {
            let id = self.index[j * n + i];
            (id != NONE).then(|| self.values[id as usize])
        };
        let (j0, j1) = (row(jj), row(jj + 1));
        let (a, b, c, e) = (at(i, j0)?, at(i + 1, j0)?, at(i, j1)?, at(i + 1, j1)?);
        Some((1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * e))
    }

    /// Dirichlet data of the grid part at a boundary point.
    fn regular_boundary(&self, xi: Point) -> f64 {
        (self.data)(self.domain.label_at(xi), xi)
    }

    /// Grid part at `z`: bilinear where the cell is interior, otherwise
    /// linear along the ray from the origin between the boundary value and
    /// the nearest interpolable point further in.
    fn regular_at(&self, z: Point) -> Result<f64, SolverError> {
        if let Some(v) = self.bilinear(z) {
            return Ok(v);
        }
        let t = z.arg();
        let dir = cis(t);
        let rb = self.domain.radius_at(t);
        let r = z.norm().min(rb);
        let fb = self.regular_boundary(dir * rb);
        if rb - r < 1e-12 {
            return Ok(fb);
        }
        for k in [1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0] {
            let r1 = (rb - k * self.h).min(r);
            if r1 <= 0.0 {
                break;
            }
            if let Some(f1) = self.bilinear(dir * r1) {
                return Ok(f1 + (fb - f1) * (r - r1) / (rb - r1));
            }
        }
        Err(SolverError::NotInterpolable(z))
    }

    /// Field value at a point of the closed domain.
    pub fn value_at(&self, z: Point) -> Result<f64, SolverError> {
        if !self.domain.contains(z) {
            let rb = self.domain.radius_at(z.arg());
            if z.norm() > rb * (1.0 + 1e-12) {
                return Err(GeometryError::Outside(z).into());
            }
        }
        if self.pole == Some(z) {
            return Err(SolverError::AtPole);
        }
        Ok(self.regular_at(z)? + self.singular(z))
    }

    /// Field value using bilinear interpolation only.
    pub fn value_at_strict(&self, z: Point) -> Result<f64, SolverError> {
        if self.pole == Some(z) {
            return Err(SolverError::AtPole);
        }
        self.bilinear(z)
            .map(|v| v + self.singular(z))
            .ok_or(SolverError::NotInterpolable(z))
    }

    /// Exact boundary value of the represented function at `xi ∈ ∂d`.
    pub fn boundary_value(&self, xi: Point) -> f64 {
        self.regular_boundary(xi) + self.singular(xi)
    }

    /// Regular part at a grid node (interior nodes only).
    pub fn node_value(&self, i: usize, j: usize) -> Option<f64> {
        let id = *self.index.get(j * self.n() + i)?;
        (id != NONE).then(|| self.values[id as usize])
    }

    /// Interior nodes with the full field value, `(x, y, value)`. The pole
    /// node, if on the grid, is skipped.
    pub fn samples(&self) -> Vec<(f64, f64, f64)> {
        self.coords
            .iter()
            .enumerate()
            .filter_map(|(k, &(i, j))| {
                let z = Point::new(self.coord(i as usize), self.coord(j as usize));
                (self.pole != Some(z)).then(|| (z.re, z.im, self.values[k] + self.singular(z)))
            })
            .collect()
    }

    /// Writes `x,y,value` rows for every interior node.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "x,y,value")?;
        for (x, y, v) in self.samples() {
            writeln!(w, "{x},{y},{v}")?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArcPartition;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn o(h: f64) -> FdOptions {
        FdOptions::default().with_h(h)
    }

    #[test]
    fn constant_data() {
        let d = StarDomain::velling(&ArcPartition::equal(5).unwrap());
        let f = fd_solve(&d, Arc::new(|_, _| 1.0), &o(1.0 / 64.0)).unwrap();
        for (_, _, v) in f.samples() {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_data_is_reproduced() {
        // Shortley–Weller is exact for linear functions.
        let d = StarDomain::single_lens(1.0).unwrap();
        let f = fd_solve(&d, Arc::new(|_, z: Point| 2.0 * z.re - z.im + 0.5), &o(1.0 / 64.0)).unwrap();
        for (x, y, v) in f.samples() {
            assert!((v - (2.0 * x - y + 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn disk_arc_measure() {
        let d = StarDomain::labeled_disk(&[0.0, FRAC_PI_2]);
        let f = fd_harmonic_measure(&d, &[0], &o(1.0 / 128.0)).unwrap();
        assert!((f.value_at(Point::new(0.0, 0.0)).unwrap() - 0.25).abs() < 5e-3);
    }

    #[test]
    fn lens_third_pi() {
        let d = StarDomain::single_lens(FRAC_PI_3).unwrap();
        let f = fd_harmonic_measure(&d, &[0], &o(1.0 / 128.0)).unwrap();
        assert!((f.value_at(Point::new(0.0, 0.0)).unwrap() - 2.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn disk_green_and_boundary() {
        let d = StarDomain::unit_disk();
        let h = 1.0 / 128.0;
        let g = fd_green(&d, Point::new(0.0, 0.0), &o(h)).unwrap();
        assert!((g.value_at(Point::new(0.5, 0.0)).unwrap() - 2f64.ln()).abs() < 5e-3);
        for i in 0..50 {
            let z = cis(i as f64 * 0.13) * (1.0 - 4.0 * h);
            let v = g.value_at(z).unwrap();
            assert!(v > 0.0 && v < 6.0 * h, "{v}");
        }
        assert_eq!(g.value_at(Point::new(0.0, 0.0)), Err(SolverError::AtPole));
        assert!(g.value_at(Point::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn green_symmetry_two_solves() {
        let d = StarDomain::polygon(&ArcPartition::equal(5).unwrap());
        let opts = o(1.0 / 128.0);
        let pairs = [
            (Point::new(0.2, 0.1), Point::new(-0.3, 0.25)),
            (Point::new(0.0, -0.4), Point::new(0.35, 0.3)),
        ];
        for (a, b) in pairs {
            let ga = fd_green(&d, a, &opts).unwrap();
            let gb = fd_green(&d, b, &opts).unwrap();
            let (x, y) = (ga.value_at(b).unwrap(), gb.value_at(a).unwrap());
            assert!((x - y).abs() < 1e-2, "{x} vs {y}");
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let d = StarDomain::unit_disk();
        let opts = FdOptions {
            max_sweeps: 3,
            warm_start: false,
            ..o(1.0 / 32.0)
        };
        assert!(matches!(
            fd_solve(&d, Arc::new(|_, z: Point| z.re), &opts),
            Err(SolverError::NotConverged { iterations: 3, .. })
        ));
    }

    #[test]
    fn conjugation_symmetric_domain_gives_bitwise_symmetric_field() {
        let d = StarDomain::single_lens(0.9).unwrap();
        let f = fd_harmonic_measure(&d, &[0], &o(1.0 / 64.0)).unwrap();
        let n = 2 * f.m + 1;
        for j in 0..n {
            for i in 0..n {
                assert_eq!(
                    f.node_value(i, j).map(f64::to_bits),
                    f.node_value(i, n - 1 - j).map(f64::to_bits)
                );
            }
        }
    }
}
