//! Laplace problems in log-polar coordinates `(s, θ) = (log|z|, arg z)`.
//!
//! Two shapes share one grid core:
//!
//! * a symmetric sector piece `{|arg z| ≤ α, |z| < R(arg z)}` with its pole
//!   at the vertex and reflecting edges ([`fd_vertex_green`]);
//! * a domain star-shaped about the origin, periodic in `θ`
//!   ([`fd_polar_harmonic_measure`], [`fd_polar_green`]).
//!
//! In both cases the unknown is harmonic in the region below the curve
//! `s = S(θ) = log R(θ)` and bounded as `s → -∞`. A Green function with its
//! pole at the origin is written `-s + v(s, θ)` with `v = s` on the curve.
//! The strip is cut where the slowest non-constant mode has decayed by
//! `e_folds` e-folds and closed with a reflecting bottom.
//!
//! The map is conformal, so harmonic measure and boundary flux carry over
//! unchanged, while the neighbourhood of the origin gets resolution
//! proportional to `|z|`. That matters for thin domains: the power-mapped
//! domain `Ω` of a vertex piece has inradius `R(0)^{π/α}` at the pole, and
//! basic domains pinch to width `cos α₀` near the origin as `α₀ → π/2`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{flux_along_curve, Flux, SolverError};
use crate::geometry::{Point, StarDomain};

/// Boundary radius as a function of the direction.
pub type RadiusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Boundary data of the regular part at `(θ, s)` on the boundary curve.
type DataFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const NONE: u32 = u32::MAX;
/// Nodes closer than this fraction of a cell to the boundary are dropped.
const SNAP: f64 = 1e-3;
/// Samples per column when averaging boundary data.
const DATA_SUBSAMPLES: usize = 8;
/// Boundary samples used for validation and distance queries.
const OUTLINE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogPolarOptions {
    /// Grid spacing in the `(s, θ)` plane.
    pub h: f64,
    /// Depth of the strip below the lowest boundary point, in e-folds of the
    /// slowest decaying mode. The reflecting bottom perturbs the solution by
    /// about `e^{-2 e_folds}`.
    pub e_folds: f64,
    /// Stop when an iteration changes no node by more than this.
    pub tol: f64,
    pub max_cycles: usize,
}

impl Default for LogPolarOptions {
    fn default() -> Self {
        Self {
            h: 1.0 / 64.0,
            e_folds: 7.0,
            tol: 1e-10,
            max_cycles: 500,
        }
    }
}

impl LogPolarOptions {
    fn validate(&self) -> Result<(), SolverError> {
        if !(self.h > 0.0 && self.h <= 0.25) || !(self.e_folds > 0.0) || !(self.tol > 0.0) {
            return Err(SolverError::BadParameter(format!(
                "log-polar h {}, e-folds {}, tol {}",
                self.h, self.e_folds, self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Stencil {
    nbr: [u32; 4],
    w: [f64; 4],
    rhs: f64,
}

/// Column layout: `cells + 1` columns on `[θ₀, θ₀ + cells·h]` with
/// reflecting ends, or `cells` columns wrapping around a full turn.
#[derive(Debug, Clone, Copy)]
struct Layout {
    theta0: f64,
    width: f64,
    cells: usize,
    periodic: bool,
    /// Strip depth below the lowest boundary point.
    depth: f64,
}

impl Layout {
    fn h(&self) -> f64 {
        self.width / self.cells as f64
    }

    fn cols(&self) -> usize {
        if self.periodic {
            self.cells
        } else {
            self.cells + 1
        }
    }

    fn coarser(&self) -> Option<Layout> {
        (self.cells >= 8 && self.cells % 2 == 0).then_some(Layout {
            cells: self.cells / 2,
            ..*self
        })
    }
}

#[derive(Clone)]
struct Grid {
    lay: Layout,
    h: f64,
    s_min: f64,
    rows: usize,
    cols: usize,
    /// Node index per grid point, `NONE` outside.
    index: Vec<u32>,
    values: Vec<f64>,
    log_radius: RadiusFn,
    data: DataFn,
    cycles: usize,
    residual: f64,
}

/// One level of the multigrid hierarchy. Every level shares `s_min`, and
/// coarse node `(i, j)` sits on fine node `(2i, 2j)`.
struct Level {
    lay: Layout,
    h: f64,
    rows: usize,
    cols: usize,
    index: Vec<u32>,
    coords: Vec<(usize, usize)>,
    reds: usize,
    /// Normalised stencils: `u = rhs + Σ w·u_nbr`.
    stencils: Vec<Stencil>,
    /// Diagonal of the unnormalised operator.
    diag: Vec<f64>,
}

fn build_level(log_radius: &RadiusFn, data: &DataFn, lay: Layout, s_min: f64, s_hi: f64) -> Level {
    let h = lay.h();
    let cols = lay.cols();
    let theta = |j: usize| lay.theta0 + j as f64 * h;
    let top: Vec<f64> = (0..cols).map(|j| log_radius(theta(j))).collect();
    let rows = ((s_hi - s_min) / h).ceil() as usize + 2;
    // Data under a column is averaged over the column's width so that jumps
    // between labels land between columns at their true angle.
    let top_data: Vec<f64> = (0..cols)
        .map(|j| {
            (0..DATA_SUBSAMPLES)
                .map(|k| {
                    let t = theta(j) + h * ((k as f64 + 0.5) / DATA_SUBSAMPLES as f64 - 0.5);
                    data(t, top[j])
                })
                .sum::<f64>()
                / DATA_SUBSAMPLES as f64
        })
        .collect();
    let s_of = |i: usize| s_min + i as f64 * h;

    // Red nodes first, so each colour is a contiguous range. Periodic grids
    // have an even number of columns, so the colouring wraps consistently.
    let mut index = vec![NONE; rows * cols];
    let mut coords = Vec::new();
    for parity in 0..2 {
        for i in 0..rows {
            for j in 0..cols {
                if (i + j) % 2 == parity && s_of(i) < top[j] - SNAP * h {
                    index[i * cols + j] = coords.len() as u32;
                    coords.push((i, j));
                }
            }
        }
    }
    let reds = coords.iter().filter(|(i, j)| (i + j) % 2 == 0).count();
    let n = coords.len();
    let inside = |i: usize, j: usize| index[i * cols + j] != NONE;

    // Arm toward a neighbour: (length, node or NONE, boundary value).
    let vertical = |i: usize, j: usize| -> (f64, u32, f64) {
        if i + 1 < rows && inside(i + 1, j) {
            (h, index[(i + 1) * cols + j], 0.0)
        } else {
            (top[j] - s_of(i), NONE, top_data[j])
        }
    };
    let horizontal = |i: usize, j: usize, jn: usize, dir: f64| -> (f64, u32, f64) {
        if inside(i, jn) {
            return (h, index[i * cols + jn], 0.0);
        }
        let s = s_of(i);
        let (mut a, mut b) = (theta(j), theta(j) + dir * h);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if log_radius(m) > s {
                a = m;
            } else {
                b = m;
            }
        }
        let t = 0.5 * (a + b);
        ((t - theta(j)).abs(), NONE, data(t, s))
    };

    let mut stencils = Vec::with_capacity(n);
    let mut diags = Vec::with_capacity(n);
    for &(i, j) in &coords {
        let up = vertical(i, j);
        let down = if i == 0 { up } else { (h, index[(i - 1) * cols + j], 0.0) };
        let (left, right) = if lay.periodic {
            (
                horizontal(i, j, (j + cols - 1) % cols, -1.0),
                horizontal(i, j, (j + 1) % cols, 1.0),
            )
        } else {
            let right = if j + 1 < cols { horizontal(i, j, j + 1, 1.0) } else { horizontal(i, j, j - 1, -1.0) };
            let left = if j > 0 { horizontal(i, j, j - 1, -1.0) } else { right };
            (left, right)
        };
        let mut st = Stencil {
            nbr: [n as u32; 4],
            w: [0.0; 4],
            rhs: 0.0,
        };
        let mut diag = 0.0;
        for (k, (lo, hi)) in [(left, right), (down, up)].into_iter().enumerate() {
            let (wl, wh) = (2.0 / (lo.0 * (lo.0 + hi.0)), 2.0 / (hi.0 * (lo.0 + hi.0)));
            diag += wl + wh;
            for (slot, (w, arm)) in [(2 * k, (wl, lo)), (2 * k + 1, (wh, hi))] {
                if arm.1 == NONE {
                    st.rhs += w * arm.2;
                } else {
                    st.nbr[slot] = arm.1;
                    st.w[slot] = w;
                }
            }
        }
        st.rhs /= diag;
        for w in &mut st.w {
            *w /= diag;
        }
        stencils.push(st);
        diags.push(diag);
    }
    Level {
        lay,
        h,
        rows,
        cols,
        index,
        coords,
        reds,
        stencils,
        diag: diags,
    }
}

impl Level {
    fn len(&self) -> usize {
        self.coords.len()
    }

    fn at(&self, i: usize, j: usize) -> Option<usize> {
        match self.index[i * self.cols + j] {
            NONE => None,
            k => Some(k as usize),
        }
    }

    /// Red-black Gauss-Seidel (over-relaxed by `omega`) for `u = f + Σ w·u`;
    /// returns the largest change.
    fn smooth(&self, u: &mut [f64], f: &[f64], omega: f64) -> f64 {
        let n = self.len();
        let mut change: f64 = 0.0;
        for range in [0..self.reds, self.reds..n] {
            for k in range {
                let s = &self.stencils[k];
                let gs = f[k]
                    + ((s.w[0] * u[s.nbr[0] as usize] + s.w[1] * u[s.nbr[1] as usize])
                        + (s.w[2] * u[s.nbr[2] as usize] + s.w[3] * u[s.nbr[3] as usize]));
                let delta = gs - u[k];
                change = change.max(delta.abs());
                u[k] += omega * delta;
            }
        }
        change
    }

    /// Unnormalised residual per node.
    fn residual(&self, u: &[f64], f: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let s = &self.stencils[k];
                let gs = f[k]
                    + ((s.w[0] * u[s.nbr[0] as usize] + s.w[1] * u[s.nbr[1] as usize])
                        + (s.w[2] * u[s.nbr[2] as usize] + s.w[3] * u[s.nbr[3] as usize]));
                (gs - u[k]) * self.diag[k]
            })
            .collect()
    }

    /// Column `j + dj`, wrapped or mirrored at the ends.
    fn shift_col(&self, j: usize, dj: isize) -> usize {
        let c = self.cols as isize;
        let jj = j as isize + dj;
        if self.lay.periodic {
            jj.rem_euclid(c) as usize
        } else if jj < 0 {
            (-jj) as usize
        } else if jj >= c {
            (2 * (c - 1) - jj) as usize
        } else {
            jj as usize
        }
    }

    /// Row `i + di`, mirrored at the reflecting bottom; `None` past the top.
    fn shift_row(&self, i: usize, di: isize) -> Option<usize> {
        let ii = i as isize + di;
        let ii = if ii < 0 { -ii } else { ii };
        (ii < self.rows as isize).then_some(ii as usize)
    }
}

/// Full-weighting restriction of a fine residual, normalised for the coarse
/// stencils.
fn restrict(fine: &Level, coarse: &Level, r: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; coarse.len() + 1];
    for (k, &(i, j)) in coarse.coords.iter().enumerate() {
        let (fi, fj) = (2 * i, 2 * j);
        let mut acc = 0.0;
        for di in -1isize..=1 {
            let Some(ii) = fine.shift_row(fi, di) else { continue };
            for dj in -1isize..=1 {
                let jj = fine.shift_col(fj, dj);
                if let Some(m) = fine.at(ii, jj) {
                    let w = (if di == 0 { 0.5 } else { 0.25 }) * (if dj == 0 { 0.5 } else { 0.25 });
                    acc += w * r[m];
                }
            }
        }
        f[k] = acc / coarse.diag[k];
    }
    f
}

/// Adds the bilinear interpolation of a coarse correction; coarse nodes
/// outside the domain carry zero.
fn prolong_add(fine: &Level, coarse: &Level, e: &[f64], u: &mut [f64]) {
    let get = |i: usize, j: usize| -> f64 {
        if i >= coarse.rows {
            return 0.0;
        }
        coarse.at(i, j % coarse.cols).map_or(0.0, |k| e[k])
    };
    for (k, &(i, j)) in fine.coords.iter().enumerate() {
        let (ci, cj) = (i / 2, j / 2);
        let (oi, oj) = (i % 2 == 1, j % 2 == 1);
        let v = match (oi, oj) {
            (false, false) => get(ci, cj),
            (true, false) => 0.5 * (get(ci, cj) + get(ci + 1, cj)),
            (false, true) => 0.5 * (get(ci, cj) + get(ci, cj + 1)),
            (true, true) => 0.25 * (get(ci, cj) + get(ci + 1, cj) + get(ci, cj + 1) + get(ci + 1, cj + 1)),
        };
        u[k] += v;
    }
}

const PRE_SMOOTH: usize = 2;
const POST_SMOOTH: usize = 2;

fn v_cycle(levels: &[Level], l: usize, u: &mut [f64], f: &[f64], coarse_tol: f64) {
    let lv = &levels[l];
    if l + 1 == levels.len() {
        // Coarsest level: over-relax to convergence.
        let ext = 2.0 * std::f64::consts::SQRT_2 * (lv.rows as f64 * lv.h).max(lv.lay.width);
        let omega = 2.0 / (1.0 + (PI * lv.h / ext).sin());
        for _ in 0..100_000 {
            if lv.smooth(u, f, omega) < coarse_tol {
                break;
            }
        }
        return;
    }
    for _ in 0..PRE_SMOOTH {
        lv.smooth(u, f, 1.0);
    }
    let r = lv.residual(u, f);
    let next = &levels[l + 1];
    let fc = restrict(lv, next, &r);
    let mut ec = vec![0.0; next.len() + 1];
    v_cycle(levels, l + 1, &mut ec, &fc, coarse_tol);
    prolong_add(lv, next, &ec, u);
    for _ in 0..POST_SMOOTH {
        lv.smooth(u, f, 1.0);
    }
}

/// `x - Σ w·x_nbr` on the finest level; `x` carries a trailing zero slot.
fn apply(lv: &Level, x: &[f64], out: &mut [f64]) {
    for (k, s) in lv.stencils.iter().enumerate() {
        out[k] = x[k]
            - ((s.w[0] * x[s.nbr[0] as usize] + s.w[1] * x[s.nbr[1] as usize])
                + (s.w[2] * x[s.nbr[2] as usize] + s.w[3] * x[s.nbr[3] as usize]));
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BiCGSTAB preconditioned by one multigrid V-cycle. Plain cycling stalls
/// on thin spikes the coarse grids cannot see; the Krylov outer loop
/// removes those few slow modes. Returns iterations and the last update.
fn bicgstab(levels: &[Level], x: &mut [f64], f: &[f64], opts: &LogPolarOptions) -> (usize, f64) {
    let lv = &levels[0];
    let n = lv.len();
    let coarse_tol = 1e-3 * opts.tol;
    let precondition = |r: &[f64]| {
        let mut z = vec![0.0; n + 1];
        v_cycle(levels, 0, &mut z, r, coarse_tol);
        z
    };
    let mut r = vec![0.0; n + 1];
    apply(lv, x, &mut r);
    for k in 0..n {
        r[k] = f[k] - r[k];
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0.0; n + 1];
    let mut t = vec![0.0; n + 1];
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_cycles {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            return (it, 0.0);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let y = precondition(&p);
        apply(lv, &y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for k in 0..n {
            r[k] -= alpha * v[k];
        }
        let z = precondition(&r);
        apply(lv, &z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &r) / tt } else { 0.0 };
        change = 0.0;
        for k in 0..n {
            let dx = alpha * y[k] + omega * z[k];
            x[k] += dx;
            change = change.max(dx.abs());
            r[k] -= omega * t[k];
        }
        if change < opts.tol || !change.is_finite() || omega == 0.0 {
            return (it, change);
        }
    }
    (opts.max_cycles, change)
}

/// Smallest number of nodes worth another coarse level.
const MIN_COARSE_NODES: usize = 64;

fn solve(log_radius: &RadiusFn, data: &DataFn, lay: Layout, opts: &LogPolarOptions) -> Result<Grid, SolverError> {
    let h = lay.h();
    let cols = lay.cols();
    let top: Vec<f64> = (0..cols).map(|j| log_radius(lay.theta0 + j as f64 * h)).collect();
    let s_lo = top.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_hi = top.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s_min = s_lo - lay.depth;

    let mut levels = vec![build_level(log_radius, data, lay, s_min, s_hi)];
    if levels[0].len() == 0 {
        return Err(SolverError::BadParameter("no interior nodes".into()));
    }
    while let Some(c) = levels.last().and_then(|l| l.lay.coarser()) {
        let next = build_level(log_radius, data, c, s_min, s_hi);
        if next.len() < MIN_COARSE_NODES {
            break;
        }
        levels.push(next);
    }

    let fine = &levels[0];
    let n = fine.len();
    let f: Vec<f64> = fine.stencils.iter().map(|s| s.rhs).chain([0.0]).collect();
    let mean_top = top
        .iter()
        .enumerate()
        .map(|(j, &s)| data(lay.theta0 + j as f64 * h, s))
        .sum::<f64>()
        / cols as f64;
    let mut u = vec![mean_top; n + 1];
    u[n] = 0.0;
    let (cycles, residual) = bicgstab(&levels, &mut u, &f, opts);
    if !(residual < opts.tol) {
        return Err(SolverError::NotConverged {
            iterations: cycles,
            residual,
        });
    }
    let fine = levels.swap_remove(0);
    Ok(Grid {
        lay,
        h,
        s_min,
        rows: fine.rows,
        cols: fine.cols,
        index: fine.index,
        values: u,
        log_radius: log_radius.clone(),
        data: data.clone(),
        cycles,
        residual,
    })
}

impl Grid {
    fn node(&self, i: usize, j: usize) -> Option<f64> {
        match self.index[i * self.cols + j] {
            NONE => None,
            k => Some(self.values[k as usize]),
        }
    }

    /// Column coordinate of `θ`; reflecting grids expect `θ` already folded.
    fn column(&self, theta: f64) -> (usize, usize, f64) {
        let y = (theta - self.lay.theta0) / self.h;
        if self.lay.periodic {
            let y = y.rem_euclid(self.cols as f64);
            let j = (y.floor() as usize).min(self.cols - 1);
            (j, (j + 1) % self.cols, y - j as f64)
        } else {
            let y = y.clamp(0.0, self.lay.cells as f64);
            let j = (y.floor() as usize).min(self.cols - 2);
            (j, j + 1, y - j as f64)
        }
    }

    fn bilinear(&self, s: f64, theta: f64) -> Option<f64> {
        let x = ((s - self.s_min) / self.h).max(0.0);
        let i = (x.floor() as usize).min(self.rows - 2);
        let fx = x - i as f64;
        let (j0, j1, fy) = self.column(theta);
        let v00 = self.node(i, j0)?;
        let v10 = self.node(i + 1, j0)?;
        let v01 = self.node(i, j1)?;
        let v11 = self.node(i + 1, j1)?;
        Some((v00 * (1.0 - fx) + v10 * fx) * (1.0 - fy) + (v01 * (1.0 - fx) + v11 * fx) * fy)
    }

    /// Regular part at `(s, θ)`, linear toward the boundary data where the
    /// surrounding cell is cut by the boundary.
    fn regular(&self, s: f64, theta: f64) -> Option<f64> {
        let s = s.max(self.s_min);
        let sb = (self.log_radius)(theta);
        if s > sb + 1e-12 * (1.0 + sb.abs()) {
            return None;
        }
        let s = s.min(sb);
        if let Some(v) = self.bilinear(s, theta) {
            return Some(v);
        }
        let fb = (self.data)(theta, sb);
        let mut s1 = s;
        while s1 > self.s_min {
            s1 = (s1 - self.h).max(self.s_min);
            if let Some(v1) = self.bilinear(s1, theta) {
                return Some(v1 + (fb - v1) * (s - s1) / (sb - s1));
            }
        }
        None
    }

    /// Limit of the regular part as `s → -∞`: the mean over the bottom row.
    fn bottom(&self) -> Option<f64> {
        let mut sum = 0.0;
        for j in 0..self.cols {
            sum += self.node(0, j)?;
        }
        Some(sum / self.cols as f64)
    }

    /// Flux of `regular - singular·s` through the boundary curve over
    /// `[t0, t1]`, in the `(s, θ)` plane.
    fn flux(&self, t0: f64, t1: f64, singular: bool, spacing: f64, offset: f64, fold: impl Fn(f64) -> f64) -> Flux {
        let sing = if singular { 1.0 } else { 0.0 };
        flux_along_curve(
            |t| Point::new((self.log_radius)(t), t),
            t0,
            t1,
            spacing,
            |_| offset,
            |p| {
                let t = fold(p.im);
                (p.re < (self.log_radius)(t))
                    .then(|| self.regular(p.re, t))
                    .flatten()
                    .map(|v| v - sing * p.re)
            },
            |xi| (self.data)(xi.im, xi.re) - sing * xi.re,
        )
    }
}

fn check_radius(radius: &dyn Fn(f64) -> f64, t0: f64, t1: f64) -> Result<(), SolverError> {
    for i in 0..=OUTLINE {
        let r = radius(t0 + (t1 - t0) * i as f64 / OUTLINE as f64);
        if !(r.is_finite() && r > 0.0) {
            return Err(SolverError::BadParameter(format!("boundary radius {r}")));
        }
    }
    Ok(())
}

/// Regular part of the vertex Green function on a log-polar grid.
#[derive(Clone)]
pub struct VertexGreen {
    alpha: f64,
    grid: Grid,
    outline: Vec<Point>,
}

impl std::fmt::Debug for VertexGreen {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VertexGreen")
            .field("alpha", &self.alpha)
            .field("h", &self.grid.h)
            .field("rows", &self.grid.rows)
            .field("cols", &self.grid.cols)
            .field("cycles", &self.grid.cycles)
            .field("residual", &self.grid.residual)
            .finish()
    }
}

/// Solves for the vertex Green function of the sector piece of half-opening
/// `alpha` bounded by `radius`, which must be even, positive and finite on
/// `[-α, α]`. The result is the pull-back `ω g(z^{1/ω}, 0, Ω)` of the Green
/// function of the power-mapped domain `Ω`, `ω = α/π`.
pub fn fd_vertex_green(radius: RadiusFn, alpha: f64, opts: &LogPolarOptions) -> Result<VertexGreen, SolverError> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(SolverError::BadParameter(format!("half-opening {alpha}")));
    }
    opts.validate()?;
    check_radius(&*radius, 0.0, alpha)?;
    let cells = ((alpha / opts.h - 1e-9).ceil() as usize).max(4).next_multiple_of(2);
    let lay = Layout {
        theta0: 0.0,
        width: alpha,
        cells,
        periodic: false,
        // The slowest mode with reflecting edges decays like e^{πs/α}.
        depth: opts.e_folds * alpha / PI,
    };
    let log_radius: RadiusFn = Arc::new(move |t: f64| radius(t.abs()).ln());
    let data: DataFn = Arc::new(|_, s| s);
    let grid = solve(&log_radius, &data, lay, opts)?;
    let outline = (0..=OUTLINE)
        .map(|k| {
            let t = alpha * k as f64 / OUTLINE as f64;
            Point::new(log_radius(t), t)
        })
        .collect();
    Ok(VertexGreen { alpha, grid, outline })
}

impl VertexGreen {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ω = α/π`, the exponent of the power map.
    pub fn omega(&self) -> f64 {
        self.alpha / PI
    }

    /// Log-polar grid spacing.
    pub fn h(&self) -> f64 {
        self.grid.h
    }

    /// Preconditioned Krylov iterations used.
    pub fn cycles(&self) -> usize {
        self.grid.cycles
    }

    pub fn residual(&self) -> f64 {
        self.grid.residual
    }

    pub fn node_count(&self) -> usize {
        self.grid.values.len() - 1
    }

    /// `S(θ) = log R(θ)`.
    pub fn log_radius(&self, theta: f64) -> f64 {
        (self.grid.log_radius)(theta)
    }

    /// Folds a direction into `[0, α]`: by symmetry, and past `α` by the
    /// reflecting edge.
    fn fold(&self, theta: f64) -> f64 {
        let mut t = theta.abs();
        if t > self.alpha {
            t = 2.0 * self.alpha - t;
        }
        t.clamp(0.0, self.alpha)
    }

    /// `v(s, θ)`; the solution is `-s + v`.
    pub fn regular_at(&self, s: f64, theta: f64) -> Result<f64, SolverError> {
        self.grid
            .regular(s, self.fold(theta))
            .ok_or(SolverError::NotInterpolable(Point::new(s, theta)))
    }

    /// Whether `(s, θ)` lies strictly below the boundary curve.
    pub fn contains_log(&self, s: f64, theta: f64) -> bool {
        s < self.log_radius(self.fold(theta))
    }

    /// Euclidean distance in the `(s, θ)` plane from `(s, θ)` to the boundary
    /// curve `s = S(θ)`.
    pub fn log_distance_to_boundary(&self, s: f64, theta: f64) -> f64 {
        let t = self.fold(theta);
        let q = [Point::new(s, t), Point::new(s, -t)];
        let mut best = f64::INFINITY;
        for w in self.outline.windows(2) {
            for p in q {
                best = best.min(segment_distance(p, w[0], w[1]));
            }
        }
        best
    }

    /// Value at `z`, `0 < |z|`, `|arg z| ≤ α`: `-log|z| + v(log|z|, arg z)`.
    pub fn value_at(&self, z: Point) -> Result<f64, SolverError> {
        if z.norm() == 0.0 {
            return Err(SolverError::AtPole);
        }
        let s = z.norm().ln();
        Ok(self.regular_at(s, z.arg())? - s)
    }

    /// `g(w, 0, Ω)` for `w` in the power-mapped domain, through
    /// `g(w) = value(w^ω) / ω`.
    pub fn image_value_at(&self, w: Point) -> Result<f64, SolverError> {
        if w.norm() == 0.0 {
            return Err(SolverError::AtPole);
        }
        let om = self.omega();
        let s = om * w.norm().ln();
        Ok((self.regular_at(s, om * w.arg())? - s) / om)
    }

    /// `(1/2π) ∫ ∂/∂n` of the solution through the whole boundary curve
    /// `|θ| ≤ α`, measured in the `(s, θ)` plane; it equals `α/π`.
    pub fn flux(&self, spacing: f64, offset: f64) -> Result<Flux, SolverError> {
        if offset < 2.0 * self.grid.h {
            return Err(SolverError::OffsetTooSmall { offset, h: self.grid.h });
        }
        Ok(self.grid.flux(-self.alpha, self.alpha, true, spacing, offset, |t| self.fold(t)))
    }
}

/// Harmonic measure or origin-pole Green function of a domain star-shaped
/// about the origin, solved on a periodic log-polar grid.
#[derive(Clone)]
pub struct PolarField {
    domain: StarDomain,
    grid: Grid,
    green: bool,
}

impl std::fmt::Debug for PolarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarField")
            .field("green", &self.green)
            .field("h", &self.grid.h)
            .field("rows", &self.grid.rows)
            .field("cols", &self.grid.cols)
            .field("cycles", &self.grid.cycles)
            .field("residual", &self.grid.residual)
            .finish()
    }
}

fn polar_solve(d: &StarDomain, data: DataFn, green: bool, opts: &LogPolarOptions) -> Result<PolarField, SolverError> {
    opts.validate()?;
    let theta0 = d.pieces()[0].start;
    let dom = d.clone();
    check_radius(&move |t| dom.radius_at(t), theta0, theta0 + TAU)?;
    // Column count divisible by 16 keeps a few coarse levels periodic.
    let cells = ((TAU / opts.h).ceil() as usize).next_multiple_of(16);
    let lay = Layout {
        theta0,
        width: TAU,
        cells,
        periodic: true,
        // The slowest periodic mode decays like e^{s}.
        depth: opts.e_folds,
    };
    let dom = d.clone();
    let log_radius: RadiusFn = Arc::new(move |t: f64| dom.radius_at(t).ln());
    let grid = solve(&log_radius, &data, lay, opts)?;
    Ok(PolarField {
        domain: d.clone(),
        grid,
        green,
    })
}

/// `ω(·, ∪ pieces labelled in target, d)` on a log-polar grid.
pub fn fd_polar_harmonic_measure(d: &StarDomain, target: &[usize], opts: &LogPolarOptions) -> Result<PolarField, SolverError> {
    let dom = d.clone();
    let target = target.to_vec();
    let data: DataFn = Arc::new(move |t, _| if target.contains(&dom.piece_at(t).label) { 1.0 } else { 0.0 });
    polar_solve(d, data, false, opts)
}

/// `g(·, 0, d)` on a log-polar grid.
pub fn fd_polar_green(d: &StarDomain, opts: &LogPolarOptions) -> Result<PolarField, SolverError> {
    polar_solve(d, Arc::new(|_, s| s), true, opts)
}

impl PolarField {
    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    /// Whether this is the Green function with its pole at the origin.
    pub fn is_green(&self) -> bool {
        self.green
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    /// Preconditioned Krylov iterations used.
    pub fn cycles(&self) -> usize {
        self.grid.cycles
    }

    pub fn residual(&self) -> f64 {
        self.grid.residual
    }

    pub fn node_count(&self) -> usize {
        self.grid.values.len() - 1
    }

    /// Value at `z` in the closed domain. For a harmonic measure the origin
    /// is allowed and evaluates to the limit of the bottom rows.
    pub fn value_at(&self, z: Point) -> Result<f64, SolverError> {
        let r = z.norm();
        if r == 0.0 {
            if self.green {
                return Err(SolverError::AtPole);
            }
            return self.grid.bottom().ok_or(SolverError::NotInterpolable(z));
        }
        let s = r.ln();
        let v = self.grid.regular(s, z.arg()).ok_or(SolverError::NotInterpolable(z))?;
        Ok(if self.green { v - s } else { v })
    }

    /// `(1/2π) ∫ ∂/∂n` through the pieces labelled `label`, measured in the
    /// `(s, θ)` plane. For the Green function this is the harmonic measure
    /// of those pieces at the origin.
    pub fn flux(&self, label: usize, spacing: f64, offset: f64) -> Result<Flux, SolverError> {
        if offset < 2.0 * self.grid.h {
            return Err(SolverError::OffsetTooSmall { offset, h: self.grid.h });
        }
        let mut total = Flux {
            value: 0.0,
            length: 0.0,
            samples: 0,
            skipped: 0,
        };
        for p in self.domain.pieces().iter().filter(|p| p.label == label) {
            let f = self.grid.flux(p.start, p.end, self.green, spacing, offset, |t| t);
            total = total.merge(f);
        }
        Ok(total)
    }
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
