//! Acceptance gate: one pass/fail line per criterion. Exits non-zero if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use velling::geometry::ArcPartition;
use velling::harness::{run_suite, ExperimentConfig, ReportRow};
use velling::velling::{
    check_comparison, check_conjecture, check_corollary, check_flux, check_lemma, check_phi_regularity,
    check_theorem, selftest_reports, sub_seed, CheckOptions, CheckReport, VellingInstance, FD_TOLERANCE,
    SIGMAS,
};

/// Walk-on-spheres samples for the closed-form oracles (criteria 1-3).
const ORACLE_SAMPLES: u64 = 1_000_000;
/// Walk-on-spheres samples per estimate in the batches.
const BATCH_SAMPLES: u64 = 200_000;
/// Cartesian grid of the closed-form oracles.
const ORACLE_H: f64 = 1.0 / 256.0;
const BATCH_SIZE: usize = 100;
/// Instances used by the field checks (lemma, flux, regularity).
const FIELD_INSTANCES: usize = 10;
const SEED: u64 = 2024;

struct Gate {
    failed: usize,
}

impl Gate {
    fn line(&mut self, k: usize, name: &str, ok: bool, detail: String, start: Instant) {
        if !ok {
            self.failed += 1;
        }
        println!(
            "criterion {k:>2} {name:<24} {} {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
}

fn config() -> ExperimentConfig {
    serde_json::from_value(serde_json::json!({
        "suite": "theorem",
        "instances": {"random": {"count": BATCH_SIZE, "min_arcs": 3, "max_arcs": 8, "min_opening": 0.05, "seed": SEED}},
        "solver": {"n_samples": BATCH_SAMPLES},
        "seed": SEED
    }))
    .expect("config")
}

fn oracle_options() -> CheckOptions {
    let mut o = CheckOptions::default();
    o.wos = o.wos.with_samples(ORACLE_SAMPLES);
    o.wos.eps = 1e-4;
    o.fd = o.fd.with_h(ORACLE_H);
    o
}

fn failing(reports: &[(String, CheckReport)]) -> Vec<String> {
    reports
        .iter()
        .filter(|(_, r)| !r.passed)
        .map(|(id, r)| {
            let bad: Vec<_> = r.conditions.iter().filter(|c| !c.holds()).map(|c| c.name.as_str()).collect();
            format!("{id}:{}", bad.join("+"))
        })
        .collect()
}

fn summary(reports: &[(String, CheckReport)]) -> (bool, String) {
    let bad = failing(reports);
    let mut s = format!("{}/{} passed", reports.len() - bad.len(), reports.len());
    if !bad.is_empty() {
        s += &format!(" failing {}", bad.join(" "));
    }
    (bad.is_empty(), s)
}

/// `|x - exact| ≤ 3σ + 5e-3` for a Monte Carlo value and `≤ 5e-3` for a
/// grid value.
fn near(value: f64, sigma: f64, exact: f64) -> bool {
    (value - exact).abs() <= SIGMAS * sigma + FD_TOLERANCE
}

fn min_of(reports: &[(String, CheckReport)], f: impl Fn(&CheckReport) -> f64) -> f64 {
    reports.iter().map(|(_, r)| f(r)).fold(f64::INFINITY, f64::min)
}

fn max_of(reports: &[(String, CheckReport)], f: impl Fn(&CheckReport) -> f64) -> f64 {
    reports.iter().map(|(_, r)| f(r)).fold(f64::NEG_INFINITY, f64::max)
}

fn q(r: &CheckReport, name: &str) -> f64 {
    r.get(name).unwrap_or(f64::NAN)
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: 0 };
    let mut all: Vec<(String, CheckReport)> = Vec::new();

    // 1-3: closed forms on the disk and the single lens.
    let t = Instant::now();
    let selftests: Vec<CheckReport> = selftest_reports(&oracle_options(), sub_seed(SEED, "selftest"))
        .into_iter()
        .map(|r| r.expect("selftest solve"))
        .collect();
    for (k, r) in selftests.iter().take(2).enumerate() {
        let name = ["disk_quarter_arc", "disk_green_half"][k];
        gate.line(
            k + 1,
            name,
            r.passed,
            format!("wos {:.5}±{:.5} fd {:.5} exact {:.5}", r.value, r.std_error, q(r, "fd"), q(r, "exact")),
            t,
        );
    }
    let lenses = &selftests[2..];
    let detail: Vec<String> = lenses
        .iter()
        .map(|r| format!("α={:.4}: wos {:.5} fd {:.5} exact {:.5}", q(r, "alpha"), r.value, q(r, "fd"), q(r, "exact")))
        .collect();
    gate.line(3, "single_lens_closed_form", lenses.iter().all(|r| r.passed), detail.join("; "), t);
    all.extend(selftests.iter().map(|r| ("selftest".to_string(), r.clone())));

    // 4: equal arcs.
    let t = Instant::now();
    let cfg = config();
    let opts = cfg.solver.check_options();
    let mut equal_conj = Vec::new();
    let mut equal_comp = Vec::new();
    let mut ok4 = true;
    let mut detail = Vec::new();
    for n in [3, 4, 6] {
        let inst = VellingInstance::geodesic(ArcPartition::equal(n).unwrap(), opts, sub_seed(SEED, &format!("equal{n}")))
            .unwrap();
        let r = check_conjecture(&inst).expect("conjecture");
        let exact = 1.0 / n as f64;
        let vals = [
            near(q(&r, "velling_wos"), r.std_error, exact),
            near(q(&r, "basic_wos"), inst.hm_basic_wos().unwrap().std_error, exact),
            (q(&r, "velling_fd") - exact).abs() <= FD_TOLERANCE,
            (q(&r, "basic_fd") - exact).abs() <= FD_TOLERANCE,
        ];
        let cond = ["equality", "image_length"].iter().all(|c| r.condition_named(c).is_some_and(|c| c.holds()));
        ok4 &= r.passed && cond && vals.iter().all(|&v| v);
        detail.push(format!(
            "n={n}: D {:.4} D° {:.4} |I₀′|/|L₀| {:.4}",
            q(&r, "velling_wos"),
            q(&r, "basic_wos"),
            q(&r, "image_length") / q(&r, "arc_length")
        ));
        equal_comp.push((format!("equal{n}"), check_comparison(&inst).expect("comparison")));
        equal_conj.push((format!("equal{n}"), r));
    }
    gate.line(4, "equal_arcs", ok4, detail.join("; "), t);
    all.extend(equal_conj.iter().cloned());

    // 5, 6, 9, 11 on the batch; 7, 8, 10 on its first instances.
    let t = Instant::now();
    let partitions = cfg.partitions().expect("partitions");
    let mut theorem = Vec::new();
    let mut conjecture = Vec::new();
    let mut comparison = Vec::new();
    let mut corollary = Vec::new();
    let mut lemma = Vec::new();
    let mut flux = Vec::new();
    let mut regularity = Vec::new();
    let mut times = [0.0f64; 7];
    for (i, p) in partitions.iter().enumerate() {
        let id = format!("i{i:04}");
        let seed = sub_seed(SEED, &id);
        let inst = VellingInstance::geodesic(p.clone(), opts, seed).expect("instance");
        let mut run = |slot: usize, out: &mut Vec<(String, CheckReport)>, f: &dyn Fn() -> CheckReport| {
            let s = Instant::now();
            out.push((id.clone(), f()));
            times[slot] += s.elapsed().as_secs_f64();
        };
        run(0, &mut theorem, &|| check_theorem(&inst).expect("theorem"));
        run(1, &mut conjecture, &|| check_conjecture(&inst).expect("conjecture"));
        run(2, &mut comparison, &|| check_comparison(&inst).expect("comparison"));
        run(3, &mut corollary, &|| check_corollary(p, &opts, seed).expect("corollary"));
        if i < FIELD_INSTANCES {
            run(4, &mut lemma, &|| check_lemma(&inst).expect("lemma"));
            run(5, &mut flux, &|| check_flux(&inst).expect("flux"));
            run(6, &mut regularity, &|| check_phi_regularity(&inst).expect("regularity"));
        }
    }
    println!(
        "batch: {} instances in {:.1}s (theorem {:.0}s, conjecture {:.0}s, comparison {:.0}s, corollary {:.0}s, lemma {:.0}s, flux {:.0}s, regularity {:.0}s)",
        partitions.len(),
        t.elapsed().as_secs_f64(),
        times[0],
        times[1],
        times[2],
        times[3],
        times[4],
        times[5],
        times[6]
    );

    let t = Instant::now();
    let (ok, s) = summary(&theorem);
    let spread: Vec<_> = theorem.iter().filter(|(_, r)| q(r, "spread") > 0.2).collect();
    let strict = spread.iter().filter(|(_, r)| r.margin > SIGMAS * r.std_error).count();
    let min_sig = spread.iter().map(|(_, r)| r.margin / r.std_error).fold(f64::INFINITY, f64::min);
    gate.line(
        5,
        "theorem_batch",
        ok && strict == spread.len(),
        format!(
            "{s}; min margin {:.4}; strict beyond 3σ {strict}/{} (min {min_sig:.1}σ)",
            min_of(&theorem, |r| r.margin),
            spread.len()
        ),
        t,
    );

    let (ok, s) = summary(&conjecture);
    gate.line(
        6,
        "conjecture_chain",
        ok,
        format!(
            "{s}; min D−D° {:.4}, min D−ω₀ {:.4}",
            min_of(&conjecture, |r| r.condition_named("velling_vs_basic").unwrap().margin),
            min_of(&conjecture, |r| r.condition_named("velling_vs_omega0").unwrap().margin)
        ),
        t,
    );

    let (ok, s) = summary(&lemma);
    gate.line(
        7,
        "lemma_angular_monotone",
        ok,
        format!(
            "{s}; min ∂g/∂t {:.3e}, max |g(z)−g(z̄)| {:.1e}, min probes {}",
            min_of(&lemma, |r| q(r, "min_derivative")),
            max_of(&lemma, |r| q(r, "max_asymmetry")),
            min_of(&lemma, |r| q(r, "probes"))
        ),
        t,
    );

    let (ok, s) = summary(&flux);
    let worst = max_of(&flux, |r| {
        r.conditions.iter().map(|c| -c.margin).fold(f64::NEG_INFINITY, f64::max)
    });
    gate.line(8, "flux_identity", ok, format!("{s}; worst relative error {worst:.2e}"), t);

    let mut comp = comparison.clone();
    comp.extend(equal_comp);
    let (ok, s) = summary(&comp);
    gate.line(
        9,
        "comparison_function",
        ok,
        format!(
            "{s}; max u {:.2e}, equal-arc max|u| {:.2e}, max origin spread {:.3}",
            max_of(&comparison, |r| q(r, "max_u")),
            max_of(&comp[comparison.len()..], |r| q(r, "max_abs_u")),
            max_of(&comp, |r| q(r, "origin_spread"))
        ),
        t,
    );

    let (ok, s) = summary(&regularity);
    gate.line(
        10,
        "regularity_across_rays",
        ok,
        format!(
            "{s}; max ray deviation / (C·δ²) {:.2}, max mirror {:.1e}",
            max_of(&regularity, |r| q(r, "ray_deviation") / (q(r, "control_constant") * 1e-4)),
            max_of(&regularity, |r| q(r, "max_mirror"))
        ),
        t,
    );

    let square = check_corollary(&ArcPartition::equal(4).unwrap(), &opts, sub_seed(SEED, "square")).expect("square");
    let square_ok = near(square.value, square.std_error, 0.25) && (q(&square, "fd") - 0.25).abs() <= FD_TOLERANCE;
    let (ok, s) = summary(&corollary);
    gate.line(
        11,
        "corollary_polygons",
        ok && square.passed && square_ok,
        format!(
            "{s}; min margin {:.4}; square wos {:.5}±{:.5} fd {:.5}",
            min_of(&corollary, |r| r.margin),
            square.value,
            square.std_error,
            q(&square, "fd")
        ),
        t,
    );

    // 12: every backend comparison made above, and worker-count independence.
    let t = Instant::now();
    for set in [&theorem, &conjecture, &corollary] {
        all.extend(set.iter().cloned());
    }
    all.push(("square".to_string(), square));
    let agreements: Vec<_> = all
        .iter()
        .flat_map(|(id, r)| r.conditions.iter().filter(|c| c.name.ends_with("agreement")).map(move |c| (id, c)))
        .collect();
    let disagree: Vec<_> = agreements.iter().filter(|(_, c)| !c.holds()).map(|(id, c)| format!("{id}:{}", c.name)).collect();
    let mut small = config();
    small.suite = serde_json::from_str("\"all\"").unwrap();
    small.instances = serde_json::from_value(serde_json::json!(
        {"random": {"count": 3, "min_arcs": 3, "max_arcs": 8, "min_opening": 0.05, "seed": SEED}}
    ))
    .unwrap();
    small.solver.n_samples = 20_000;
    let reports = |workers: usize| -> String {
        let mut c = small.clone();
        c.workers = Some(workers);
        let rows: Vec<ReportRow> = run_suite(&c).unwrap().iter().map(ReportRow::without_runtime).collect();
        serde_json::to_string(&rows).unwrap()
    };
    let identical = reports(1) == reports(4);
    gate.line(
        12,
        "backends_and_determinism",
        disagree.is_empty() && identical,
        format!(
            "{}/{} backend comparisons agree{}; reports identical across 1 and 4 workers: {identical}",
            agreements.len() - disagree.len(),
            agreements.len(),
            if disagree.is_empty() { String::new() } else { format!(" (failing {})", disagree.join(" ")) }
        ),
        t,
    );

    println!("{} of 12 criteria failed", gate.failed);
    if gate.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
