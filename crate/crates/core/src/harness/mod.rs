//! Experiment configuration, random instances, suite execution and
//! reporting.

mod render;

pub use render::{render_svg, FieldLayer, RenderOptions};

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{make_partition, ArcPartition, GeometryError, PolarArc, RadiusProfile, MAX_HALF_OPENING};
use crate::solver::{FdOptions, LogPolarOptions, SolverError, WosOptions};
use crate::velling::{
    check_comparison, check_conjecture, check_corollary, check_extension, check_flux, check_lemma,
    check_phi_regularity, check_theorem, selftest_reports, sub_seed, CheckOptions, CheckReport,
    VellingInstance,
};

/// Smallest admissible random opening.
pub const MIN_RANDOM_OPENING: f64 = 1e-2;
const REJECTION_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("no partition of {n_arcs} arcs with openings ≥ {min_opening} after {REJECTION_CAP} draws")]
    RejectionCap { n_arcs: usize, min_opening: f64 },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Theorem,
    Conjecture,
    Lemma,
    Flux,
    Regularity,
    Comparison,
    Extension,
    Corollary,
    SolverSelftest,
    All,
}

impl Suite {
    fn per_instance(self) -> &'static [Suite] {
        use Suite::*;
        match self {
            All => &[Theorem, Conjecture, Lemma, Flux, Regularity, Comparison, Extension, Corollary],
            SolverSelftest => &[],
            Theorem => &[Theorem],
            Conjecture => &[Conjecture],
            Lemma => &[Lemma],
            Flux => &[Flux],
            Regularity => &[Regularity],
            Comparison => &[Comparison],
            Extension => &[Extension],
            Corollary => &[Corollary],
        }
    }

    fn includes_selftest(self) -> bool {
        matches!(self, Suite::SolverSelftest | Suite::All)
    }
}

/// Where the instances of a run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    /// Half-openings of each partition, summing to `π`.
    Explicit(Vec<Vec<f64>>),
    Random {
        count: usize,
        min_arcs: usize,
        max_arcs: usize,
        min_opening: f64,
        seed: u64,
    },
}

/// Numerical parameters; every field has a default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub eps: f64,
    pub n_samples: u64,
    pub h: f64,
    pub dt: f64,
    pub spacing: f64,
    pub offset: f64,
    pub probes: usize,
    /// Log-polar grid spacing.
    pub log_polar_h: f64,
    pub delta: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        let c = CheckOptions::default();
        Self {
            eps: c.wos.eps,
            n_samples: c.wos.samples,
            h: c.fd.h,
            dt: c.dt,
            spacing: c.flux_spacing,
            offset: c.flux_offset,
            probes: c.probes,
            log_polar_h: c.log_polar.h,
            delta: c.regularity_delta,
        }
    }
}

impl SolverParams {
    pub fn check_options(&self) -> CheckOptions {
        CheckOptions {
            wos: WosOptions {
                eps: self.eps,
                samples: self.n_samples,
                ..Default::default()
            },
            fd: FdOptions::default().with_h(self.h),
            log_polar: LogPolarOptions {
                h: self.log_polar_h,
                ..Default::default()
            },
            dt: self.dt,
            flux_spacing: self.spacing,
            flux_offset: self.offset,
            probes: self.probes,
            regularity_delta: self.delta,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let positive = [self.eps, self.h, self.dt, self.spacing, self.offset, self.delta, self.log_polar_h];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite()))
            || self.n_samples == 0
            || self.probes == 0
            || self.log_polar_h > 0.25
        {
            return Err(HarnessError::BadConfig(format!("solver parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// A run: which checks, on which instances, with which numerics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub instances: InstanceSource,
    /// Basic arc profile; the geodesic when absent.
    #[serde(default)]
    pub basic: Option<RadiusProfile>,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; all available cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub render: RenderOptions,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let cfg: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.solver.validate()?;
        if let InstanceSource::Random {
            count,
            min_arcs,
            max_arcs,
            min_opening,
            ..
        } = &self.instances
        {
            if *count == 0 || *min_arcs < 3 || max_arcs < min_arcs {
                return Err(HarnessError::BadConfig("random instances need count ≥ 1 and 3 ≤ min_arcs ≤ max_arcs".into()));
            }
            if *min_opening < MIN_RANDOM_OPENING || *max_arcs as f64 * min_opening >= PI {
                return Err(HarnessError::BadConfig(format!("min_opening {min_opening} out of range")));
            }
        }
        if matches!(self.workers, Some(0)) {
            return Err(HarnessError::BadConfig("workers must be positive".into()));
        }
        Ok(())
    }

    /// The partitions of the run, in instance order.
    pub fn partitions(&self) -> Result<Vec<ArcPartition>, HarnessError> {
        match &self.instances {
            InstanceSource::Explicit(list) => list.iter().map(|o| Ok(make_partition(o, 0.0)?)).collect(),
            InstanceSource::Random {
                count,
                min_arcs,
                max_arcs,
                min_opening,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|i| {
                        let n = rng.random_range(*min_arcs..=*max_arcs);
                        random_partition(n, *min_opening, sub_seed(*seed, &format!("partition:{i}")))
                    })
                    .collect()
            }
        }
    }

    fn basic_for(&self, p: &ArcPartition) -> Result<PolarArc, HarnessError> {
        Ok(match self.basic {
            None | Some(RadiusProfile::Geodesic) => PolarArc::geodesic(p.alpha0()),
            Some(profile) => PolarArc::new(p.alpha0(), profile)?,
        })
    }
}

/// Half-openings summing to `π` from normalised exponential spacings,
/// redrawn until all lie in `[min_opening, π/2 - 1e-3]`.
pub fn random_partition(n_arcs: usize, min_opening: f64, seed: u64) -> Result<ArcPartition, HarnessError> {
    if n_arcs < 3 || !(min_opening > 0.0) || n_arcs as f64 * min_opening >= PI {
        return Err(HarnessError::BadConfig(format!("{n_arcs} arcs with min opening {min_opening}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_CAP {
        let draws: Vec<f64> = (0..n_arcs).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        let openings: Vec<f64> = draws.iter().map(|d| PI * d / total).collect();
        if openings.iter().all(|&a| a >= min_opening && a <= MAX_HALF_OPENING) {
            return Ok(make_partition(&openings, 0.0)?);
        }
    }
    Err(HarnessError::RejectionCap { n_arcs, min_opening })
}

/// One (instance, check) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub n_arcs: usize,
    pub openings: Vec<f64>,
    pub check: String,
    pub omega0: f64,
    pub value: f64,
    pub std_error: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
    pub runtime_s: f64,
    pub error: Option<String>,
    pub report: Option<CheckReport>,
}

impl ReportRow {
    fn from_result(id: &str, p: Option<&ArcPartition>, check: &str, seed: u64, r: Result<CheckReport, SolverError>) -> Self {
        let (n_arcs, openings, omega0) = match p {
            Some(p) => (p.len(), p.half_openings(), p.alpha0() / PI),
            None => (0, Vec::new(), f64::NAN),
        };
        match r {
            Ok(rep) => Self {
                instance_id: id.to_string(),
                n_arcs,
                openings,
                check: rep.name.clone(),
                omega0,
                value: rep.value,
                std_error: rep.std_error,
                margin: rep.margin,
                tolerance: rep.tolerance,
                passed: rep.passed,
                seed: rep.seed,
                runtime_s: rep.runtime_s,
                error: None,
                report: Some(rep),
            },
            Err(e) => Self {
                instance_id: id.to_string(),
                n_arcs,
                openings,
                check: check.to_string(),
                omega0,
                value: f64::NAN,
                std_error: f64::NAN,
                margin: f64::NAN,
                tolerance: f64::NAN,
                passed: false,
                seed,
                runtime_s: 0.0,
                error: Some(e.to_string()),
                report: None,
            },
        }
    }

    /// Copy with wall times zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self {
            runtime_s: 0.0,
            report: self.report.as_ref().map(CheckReport::without_runtime),
            ..self.clone()
        }
    }
}

fn check_name(s: Suite) -> &'static str {
    match s {
        Suite::Theorem => "theorem",
        Suite::Conjecture => "conjecture",
        Suite::Lemma => "lemma",
        Suite::Flux => "flux",
        Suite::Regularity => "regularity",
        Suite::Comparison => "comparison",
        Suite::Extension => "extension",
        Suite::Corollary => "corollary",
        Suite::SolverSelftest => "solver-selftest",
        Suite::All => "all",
    }
}

fn run_instance(cfg: &ExperimentConfig, opts: &CheckOptions, i: usize, p: &ArcPartition) -> Vec<ReportRow> {
    let id = format!("i{i:04}");
    let seed = sub_seed(cfg.seed, &id);
    let inst = cfg
        .basic_for(p)
        .and_then(|b| Ok(VellingInstance::new(p.clone(), b, *opts, seed)?));
    cfg.suite
        .per_instance()
        .iter()
        .map(|&check| {
            let result = match &inst {
                Err(e) => Err(SolverError::BadParameter(e.to_string())),
                Ok(inst) => match check {
                    Suite::Theorem => check_theorem(inst),
                    Suite::Conjecture => check_conjecture(inst),
                    Suite::Lemma => check_lemma(inst),
                    Suite::Flux => check_flux(inst),
                    Suite::Regularity => check_phi_regularity(inst),
                    Suite::Comparison => check_comparison(inst),
                    Suite::Extension => check_extension(inst),
                    Suite::Corollary => check_corollary(p, opts, seed),
                    Suite::SolverSelftest | Suite::All => unreachable!(),
                },
            };
            ReportRow::from_result(&id, Some(p), check_name(check), seed, result)
        })
        .collect()
}

/// Runs the configured checks. Rows are sorted by (instance, check), so the
/// output does not depend on scheduling; failures become rows with
/// `passed = false`.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>, HarnessError> {
    cfg.validate()?;
    let opts = cfg.solver.check_options();
    let partitions = if cfg.suite.per_instance().is_empty() {
        Vec::new()
    } else {
        cfg.partitions()?
    };
    let work = || -> Vec<ReportRow> {
        let mut rows: Vec<ReportRow> = partitions
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, p)| run_instance(cfg, &opts, i, p))
            .collect();
        if cfg.suite.includes_selftest() {
            let seed = sub_seed(cfg.seed, "selftest");
            let names = ["disk_measure", "disk_green", "single_lens", "single_lens", "single_lens"];
            for (k, r) in selftest_reports(&opts, seed).into_iter().enumerate() {
                let id = format!("selftest{k}");
                rows.push(ReportRow::from_result(&id, None, names[k], seed, r));
            }
        }
        rows.sort_by(|a, b| (&a.instance_id, &a.check).cmp(&(&b.instance_id, &b.check)));
        rows
    };
    let rows = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::BadConfig(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(rows)
}

const CSV_HEADER: [&str; 11] = [
    "instance_id",
    "n_arcs",
    "openings",
    "check",
    "omega0",
    "value",
    "std_error",
    "margin",
    "passed",
    "seed",
    "runtime_s",
];

/// Writes `report.csv` and `report.json` into `dir`.
pub fn write_reports(rows: &[ReportRow], dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("report.csv"))?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let openings: Vec<String> = r.openings.iter().map(f64::to_string).collect();
        w.write_record([
            r.instance_id.clone(),
            r.n_arcs.to_string(),
            openings.join(";"),
            r.check.clone(),
            r.omega0.to_string(),
            r.value.to_string(),
            r.std_error.to_string(),
            r.margin.to_string(),
            r.passed.to_string(),
            r.seed.to_string(),
            format!("{:.3}", r.runtime_s),
        ])?;
    }
    w.flush()?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(rows)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_partition_constraints() {
        for seed in 0..50 {
            let p = random_partition(3, 0.05, seed).unwrap();
            assert_eq!(p.len(), 3);
            let h = p.half_openings();
            assert!((h.iter().sum::<f64>() - PI).abs() < 1e-12);
            assert!(h.iter().all(|&a| a >= 0.05 && a <= MAX_HALF_OPENING));
        }
    }

    #[test]
    fn random_partition_deterministic() {
        let a = random_partition(6, 0.05, 11).unwrap();
        let b = random_partition(6, 0.05, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_partition(6, 0.05, 12).unwrap());
    }

    #[test]
    fn random_partition_statistics() {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for seed in 0..1000 {
            let p = random_partition(5, 0.1, seed).unwrap();
            let h = p.half_openings();
            lo = lo.min(h.iter().cloned().fold(f64::INFINITY, f64::min));
            hi = hi.max(h.iter().cloned().fold(0.0, f64::max));
            assert!(h.iter().all(|&a| a <= h[0]), "longest arc not first");
        }
        assert!(lo >= 0.1 && hi <= MAX_HALF_OPENING);
        assert!(hi > 1.3 && lo < 0.15, "{lo} {hi}");
    }

    #[test]
    fn random_partition_rejection_cap() {
        assert!(matches!(random_partition(3, 1.047, 0), Err(HarnessError::RejectionCap { .. })));
        assert!(random_partition(2, 0.1, 0).is_err());
        assert!(random_partition(4, 0.8, 0).is_err());
    }

    #[test]
    fn config_roundtrip_and_defaults() {
        let json = r#"{"suite": "theorem", "instances": {"random": {"count": 2, "min_arcs": 3, "max_arcs": 5, "min_opening": 0.05, "seed": 4}}}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.solver, SolverParams::default());
        assert_eq!(cfg.output, PathBuf::from("out"));
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.partitions().unwrap(), cfg.partitions().unwrap());
    }

    #[test]
    fn config_validation() {
        let mut cfg: ExperimentConfig = serde_json::from_str(r#"{"suite": "all", "instances": {"explicit": [[1.0, 1.0, 1.1415926535897931]]}}"#).unwrap();
        assert!(cfg.validate().is_ok());
        cfg.solver.h = -1.0;
        assert!(cfg.validate().is_err());
        cfg.solver.h = 0.01;
        cfg.instances = InstanceSource::Random {
            count: 1,
            min_arcs: 3,
            max_arcs: 3,
            min_opening: 1e-3,
            seed: 0,
        };
        assert!(matches!(cfg.validate(), Err(HarnessError::BadConfig(_))));
    }

    #[test]
    fn csv_schema() {
        let dir = tempfile::tempdir().unwrap();
        let p = ArcPartition::equal(3).unwrap();
        let row = ReportRow::from_result("i0000", Some(&p), "theorem", 1, Err(SolverError::AtPole));
        write_reports(&[row], dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 11);
        assert_eq!(fields[8], "false");
        assert_eq!(fields[2].split(';').count(), 3);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(json[0]["error"], SolverError::AtPole.to_string());
    }
}
