use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use velling::harness::{render_svg, run_suite, write_reports, ExperimentConfig, HarnessError, Suite};
use velling::velling::VellingInstance;

#[derive(Parser)]
#[command(version, about = "Numerical checks of harmonic-measure inequalities on disks with lenses removed")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a check suite and write report.csv / report.json.
    Verify {
        suite: Suite,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_samples: Option<u64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        grid_h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Draw one instance of the configuration as SVG.
    Render {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Index of the instance to draw.
        #[arg(long, default_value_t = 0)]
        instance: usize,
    },
}

fn verify(
    suite: Suite,
    config: PathBuf,
    seed: Option<u64>,
    n_samples: Option<u64>,
    eps: Option<f64>,
    grid_h: Option<f64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<bool, HarnessError> {
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.suite = suite;
    cfg.seed = seed.unwrap_or(cfg.seed);
    cfg.solver.n_samples = n_samples.unwrap_or(cfg.solver.n_samples);
    cfg.solver.eps = eps.unwrap_or(cfg.solver.eps);
    cfg.solver.h = grid_h.unwrap_or(cfg.solver.h);
    cfg.output = out.unwrap_or(cfg.output);
    cfg.workers = workers.or(cfg.workers);
    let rows = run_suite(&cfg)?;
    write_reports(&rows, &cfg.output)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    for r in &rows {
        println!(
            "{:<10} {:<12} {:>6} value={:<10.6} margin={:<+10.6} tol={:<9.6} {}",
            r.instance_id,
            r.check,
            if r.passed { "pass" } else { "FAIL" },
            r.value,
            r.margin,
            r.tolerance,
            r.error.as_deref().unwrap_or("")
        );
    }
    println!("{} rows, {} failed; reports in {}", rows.len(), failed, cfg.output.display());
    Ok(failed == 0)
}

fn render(config: PathBuf, out: PathBuf, instance: usize) -> Result<(), HarnessError> {
    let cfg = ExperimentConfig::load(&config)?;
    let partitions = cfg.partitions()?;
    let p = partitions
        .get(instance)
        .ok_or_else(|| HarnessError::BadConfig(format!("no instance {instance}")))?;
    let inst = VellingInstance::geodesic(p.clone(), cfg.solver.check_options(), cfg.seed)?;
    render_svg(&inst, &cfg.render, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify {
            suite,
            config,
            seed,
            n_samples,
            eps,
            grid_h,
            out,
            workers,
        } => verify(suite, config, seed, n_samples, eps, grid_h, out, workers),
        Command::Render { config, out, instance } => render(config, out, instance).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
