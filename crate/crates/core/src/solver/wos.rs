use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Estimate, RunningStats, SolverError};
use crate::geometry::{BoundaryHit, GeometryError, Point, StarDomain};

/// Multiplier turning `eps + δ` into the recorded bias allowance.
pub const BIAS_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosOptions {
    /// Stopping shell width.
    pub eps: f64,
    pub samples: u64,
    pub seed: u64,
    /// Trajectories per independently seeded batch.
    pub batch: u64,
    /// Safety cap on steps per trajectory.
    pub max_steps: u32,
}

impl Default for WosOptions {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            samples: 1_000_000,
            seed: 0,
            batch: 8192,
            max_steps: 1_000_000,
        }
    }
}

impl WosOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }
}

/// Generator for batch `index`: ChaCha is counter based, so each batch gets
/// its own stream of the same key and batches can run in any order.
fn batch_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn walk(d: &StarDomain, start: Point, eps: f64, max_steps: u32, rng: &mut ChaCha8Rng) -> BoundaryHit {
    let mut z = start;
    let mut hit = d.distance_to_boundary(z);
    for _ in 0..max_steps {
        if hit.distance < eps {
            break;
        }
        let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
        z += Point::new(c, s) * hit.distance;
        hit = d.distance_to_boundary(z);
    }
    hit
}

fn run<F>(d: &StarDomain, start: Point, opts: &WosOptions, score: F) -> Result<RunningStats, SolverError>
where
    F: Fn(&BoundaryHit) -> f64 + Sync,
{
    if !(opts.eps > 0.0) || opts.samples == 0 || opts.batch == 0 {
        return Err(SolverError::BadParameter(format!(
            "eps = {}, samples = {}, batch = {}",
            opts.eps, opts.samples, opts.batch
        )));
    }
    if !d.contains(start) {
        return Err(GeometryError::Outside(start).into());
    }
    let d0 = d.distance_to_boundary(start).distance;
    if opts.eps > d0 {
        return Err(SolverError::EpsTooLarge {
            eps: opts.eps,
            distance: d0,
        });
    }
    let batches = opts.samples.div_ceil(opts.batch);
    let parts: Vec<RunningStats> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(opts.seed, b);
            let n = opts.batch.min(opts.samples - b * opts.batch);
            let mut s = RunningStats::default();
            for _ in 0..n {
                let hit = walk(d, start, opts.eps, opts.max_steps, &mut rng);
                s.push(score(&hit));
            }
            s
        })
        .collect();
    // Fixed merge order keeps the result independent of scheduling.
    Ok(parts
        .iter()
        .fold(RunningStats::default(), |acc, s| acc.merge(s)))
}

fn estimate(stats: RunningStats, d: &StarDomain, opts: &WosOptions, shift: f64) -> Estimate {
    Estimate {
        value: stats.mean + shift,
        std_error: stats.std_error(),
        samples: stats.count,
        seed: opts.seed,
        bias_bound: BIAS_CONSTANT * (opts.eps + d.polyline_delta()),
    }
}

/// Harmonic measure `ω(start, K, d)` of the pieces labelled in `target`.
///
/// Each trajectory jumps to a uniform point on the largest inscribed circle
/// until it is within `eps` of the boundary and scores 1 when the nearest
/// piece carries a target label.
pub fn wos_harmonic_measure(
    d: &StarDomain,
    start: Point,
    target: &[usize],
    opts: &WosOptions,
) -> Result<Estimate, SolverError> {
    let stats = run(d, start, opts, |hit| {
        if target.contains(&hit.label) {
            1.0
        } else {
            0.0
        }
    })?;
    Ok(estimate(stats, d, opts, 0.0))
}

/// Green function `g(z, pole, d) = -log|z - pole| + E_z[log|Z_exit - pole|]`.
pub fn wos_green(d: &StarDomain, pole: Point, z: Point, opts: &WosOptions) -> Result<Estimate, SolverError> {
    if !d.contains(pole) {
        return Err(GeometryError::Outside(pole).into());
    }
    if z == pole {
        return Err(SolverError::AtPole);
    }
    let stats = run(d, z, opts, |hit| (hit.nearest - pole).norm().ln())?;
    Ok(estimate(stats, d, opts, -(z - pole).norm().ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArcPartition, PolarArc};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn opts(n: u64, seed: u64) -> WosOptions {
        WosOptions::default().with_samples(n).with_seed(seed)
    }

    #[test]
    fn disk_arc_measure() {
        let d = StarDomain::labeled_disk(&[0.0, FRAC_PI_2]);
        let e = wos_harmonic_measure(&d, Point::new(0.0, 0.0), &[0], &opts(100_000, 1)).unwrap();
        assert!(e.agrees_with(0.25, 3.0), "{e:?}");
    }

    #[test]
    fn six_equal_arcs() {
        let p = ArcPartition::equal(6).unwrap();
        let d = StarDomain::velling(&p);
        let e = wos_harmonic_measure(&d, Point::new(0.0, 0.0), &[0], &opts(100_000, 2)).unwrap();
        assert!(e.agrees_with(1.0 / 6.0, 3.0), "{e:?}");
    }

    #[test]
    fn single_lens_quarter() {
        let d = StarDomain::single_lens(FRAC_PI_4).unwrap();
        let e = wos_harmonic_measure(&d, Point::new(0.0, 0.0), &[0], &opts(100_000, 3)).unwrap();
        assert!(e.agrees_with(0.5, 3.0), "{e:?}");
    }

    #[test]
    fn label_partition_sums_to_one() {
        let p = ArcPartition::equal(4).unwrap();
        let d = StarDomain::velling(&p);
        let o = opts(20_000, 9);
        let total: f64 = d
            .labels()
            .iter()
            .map(|&l| wos_harmonic_measure(&d, Point::new(0.1, 0.05), &[l], &o).unwrap().value)
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        let all = wos_harmonic_measure(&d, Point::new(0.1, 0.05), &d.labels(), &o).unwrap();
        assert_eq!(all.value, 1.0);
        assert_eq!(all.std_error, 0.0);
    }

    #[test]
    fn disk_green() {
        let d = StarDomain::unit_disk();
        let e = wos_green(&d, Point::new(0.0, 0.0), Point::new(0.5, 0.0), &opts(20_000, 4)).unwrap();
        // Exit points lie on the circle up to the shell width.
        assert!((e.value - 2f64.ln()).abs() < 3.0 * e.std_error + 2e-4, "{e:?}");
    }

    #[test]
    fn green_positive() {
        let p = ArcPartition::equal(3).unwrap();
        let d = StarDomain::basic(&p, &PolarArc::geodesic(p.alpha0())).unwrap();
        for z in [Point::new(0.1, 0.05), Point::new(-0.1, 0.1)] {
            let e = wos_green(&d, Point::new(0.0, 0.0), z, &opts(5_000, 5)).unwrap();
            assert!(e.value >= -3.0 * e.std_error);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let d = StarDomain::single_lens(1.0).unwrap();
        let o = opts(30_000, 77);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let z = Point::new(0.1, -0.2);
        let a = one.install(|| wos_green(&d, Point::new(0.0, 0.0), z, &o).unwrap());
        let b = four.install(|| wos_green(&d, Point::new(0.0, 0.0), z, &o).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn errors() {
        let d = StarDomain::unit_disk();
        let o = opts(10, 0);
        assert!(matches!(
            wos_harmonic_measure(&d, Point::new(2.0, 0.0), &[0], &o),
            Err(SolverError::Geometry(_))
        ));
        let wide = WosOptions { eps: 0.5, ..o };
        assert!(matches!(
            wos_harmonic_measure(&d, Point::new(0.6, 0.0), &[0], &wide),
            Err(SolverError::EpsTooLarge { .. })
        ));
        assert_eq!(
            wos_green(&d, Point::new(0.1, 0.0), Point::new(0.1, 0.0), &o),
            Err(SolverError::AtPole)
        );
    }
}
