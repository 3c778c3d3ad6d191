//! Acceptance checks. Runs as a plain binary so that the per-criterion
//! verdict lines are always printed.

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use maplearn::cli::cli_main;
use maplearn::generators::{gen_grid, GeneratorSpec, LandmarkPlan};
use maplearn::harness::stats::{chi_squared_p_value, exact_upper_bound, proportion_sigma};
use maplearn::harness::suites::{
    filter_experiment, filter_plant_world, landmark_paths, movement_histogram, plant_candidates, selection_experiment,
};
use maplearn::harness::{
    run_pac_campaign, run_separation_suite, ExperimentConfig, LearnerConfig, OutputSpec, SeparationConfig,
};
use maplearn::learner::{num_filter_traversals, num_selection_attempts};
use maplearn::par::Execution;
use maplearn::rng::substream;
use maplearn::sim::{MovementModel, SensorSuite, World};

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn learner(delta_g: f64, alpha: f64, gamma: f64) -> LearnerConfig {
    LearnerConfig {
        delta_g,
        c: 4,
        r: None,
        d: None,
        alpha,
        gamma,
        m: None,
        reverse_certainty: false,
        exploration_length: None,
    }
}

fn pac_connectivity() -> Verdict {
    let config = ExperimentConfig {
        generator: GeneratorSpec::Grid {
            width: 4,
            height: 4,
            landmarks: LandmarkPlan::Density { count: 6, target_r: 1 },
            seed: 1,
        },
        learn: learner(0.2, 0.95, 0.9),
        trials: 50,
        seed: 2024,
        outputs: OutputSpec::default(),
        execution: Execution::Parallel,
    };
    let report = run_pac_campaign(&config).expect("campaign runs");
    let r = report.world.r.unwrap();
    let worst = report.trials.iter().filter(|t| t.pass).filter_map(|t| t.max_stretch()).fold(0.0, f64::max);
    let s = report.success;
    let upper = exact_upper_bound(s.successes, s.trials, 0.95);
    let pass = r <= 2 && s.trials == 50 && upper >= 0.8 && worst <= 2.0 && report.stretch_bound == 2.0;
    verdict(
        pass,
        format!(
            "r = {r}, {}/{} trials passed (exact 95% upper bound {upper:.3} vs 0.8), worst stretch {worst:.3} <= 2",
            s.successes, s.trials
        ),
    )
}

fn all_landmark_edge_set() -> Verdict {
    let config = ExperimentConfig {
        generator: GeneratorSpec::Grid { width: 5, height: 5, landmarks: LandmarkPlan::All, seed: 0 },
        learn: learner(0.1, 0.9, 0.85),
        trials: 50,
        seed: 99,
        outputs: OutputSpec::default(),
        execution: Execution::Parallel,
    };
    let report = run_pac_campaign(&config).expect("campaign runs");
    let e = report.edge_set_exact;
    let upper = exact_upper_bound(e.successes, e.trials, 0.95);
    verdict(
        report.world.r == Some(0) && e.trials == 50 && upper >= 0.9,
        format!(
            "learned edge set exact in {}/{} trials (exact 95% upper bound {upper:.3} vs 0.9)",
            e.successes, e.trials
        ),
    )
}

fn filtering_bound() -> Verdict {
    let n = num_filter_traversals(0.75, 0.1).unwrap();
    let (graph, partition) = filter_plant_world();
    let paths = landmark_paths(&graph, &partition, 3);
    let (real, fake) = plant_candidates(&graph, &partition, &paths, 20, &mut substream(5, "plants"));
    let world = World::new(
        Arc::new(graph),
        Arc::new(partition),
        MovementModel::new(0.95).unwrap(),
        SensorSuite::new(0.75, false).unwrap(),
    )
    .unwrap();
    let reps = 200;
    let limit = 0.1 + 3.0 * proportion_sigma(0.1, reps as u64);
    let mut worst: f64 = 0.0;
    for (i, c) in real.iter().chain(&fake).enumerate() {
        let (r, f) =
            if i < real.len() { (std::slice::from_ref(c), &[][..]) } else { (&[][..], std::slice::from_ref(c)) };
        let out = filter_experiment(&world, r, f, n, reps, 1000 + i as u64, Execution::Parallel);
        let miss = if i < real.len() { out.real_rejected } else { out.false_accepted };
        worst = worst.max(miss.estimate.unwrap());
    }
    verdict(
        n == 40 && real.len() == 20 && fake.len() == 20 && worst <= limit,
        format!("n = {n}, worst per-candidate misclassification {worst:.3} over {reps} runs (limit {limit:.3})"),
    )
}

/// `1 - delta_s <= [1 - (1 - (alpha/d)^r)^n]^(d^r)` evaluated exactly.
fn selection_inequality(n: u32) -> bool {
    let rat = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let one = rat(1, 1);
    let per = rat(9, 40); // 0.9 / 4
    let miss = rational_pow(&(one.clone() - per), n);
    let all = rational_pow(&(one.clone() - miss), 4);
    all >= one - rat(1, 10)
}

fn rational_pow(x: &BigRational, n: u32) -> BigRational {
    (0..n).fold(BigRational::from_integer(BigInt::from(1)), |acc, _| acc * x)
}

fn selection_bound() -> Verdict {
    let n = num_selection_attempts(0.9, 4, 1, 0.1).unwrap();
    let reps = 500;
    let p = selection_experiment(0.9, 4, 1, 15, reps, 77, Execution::Parallel).unwrap();
    let limit = 0.9 - 3.0 * proportion_sigma(0.9, reps as u64);
    let rate = p.estimate.unwrap();
    let (holds, fails) = (selection_inequality(15), !selection_inequality(14));
    verdict(
        n == 15 && holds && fails && rate >= limit,
        format!("n = {n}, all paths recorded in {rate:.3} of {reps} runs (limit {limit:.3}); 15 satisfies: {holds}, 14 violates: {fails}"),
    )
}

fn separation() -> Verdict {
    let config = SeparationConfig {
        alpha: 0.9,
        lengths: vec![3],
        experiments: 1000,
        planted: 100,
        seed: 11,
        ..Default::default()
    };
    let report = run_separation_suite(&config).unwrap();
    let row = &report.rows[0];
    let sd_real = (1000.0 * 0.729 * 0.271f64).sqrt();
    let sd_false = (1000.0 * 0.081 * 0.919f64).sqrt();
    let first_real = row.real_hits[0] as f64;
    let worst_false = *row.false_hits.iter().max().unwrap() as f64;
    let pass = (first_real - 729.0).abs() <= 3.0 * sd_real
        && row.real_within
        && worst_false <= 81.0 + 3.0 * sd_false
        && row.false_within
        && row.accuracy == 1.0
        && row.real_hits.len() + row.false_hits.len() == 100;
    verdict(
        pass,
        format!(
            "real hits {first_real} (729 +/- {:.1}), pooled real rate {:.4}; max false hits {worst_false} (<= {:.1}); accuracy {:.2}",
            3.0 * sd_real,
            row.real_rate,
            81.0 + 3.0 * sd_false,
            row.accuracy
        ),
    )
}

fn movement_calibration() -> Verdict {
    let g = gen_grid(3, 3, &LandmarkPlan::All, 0).unwrap();
    let center = 4;
    assert_eq!(g.graph.degree(center), 4);
    let world = World::new(
        Arc::new(g.graph),
        Arc::new(g.partition),
        MovementModel::new(0.7).unwrap(),
        SensorSuite::new(0.9, false).unwrap(),
    )
    .unwrap();
    let counts = movement_histogram(&world, center, 10_000, 2);
    let p = chi_squared_p_value(&counts, &[0.7, 0.1, 0.1, 0.1]);
    verdict(p > 0.01, format!("counts {counts:?}, chi-squared p = {p:.4}"))
}

fn composition_arithmetic() -> Verdict {
    let mut checked = 0;
    let mut ok = true;
    for (num, den) in [(1, 100), (1, 20), (1, 10), (1, 5), (1, 2)] {
        for m in [1u32, 2, 7, 50] {
            let delta = BigRational::new(BigInt::from(num), BigInt::from(den));
            let one = BigRational::from_integer(BigInt::from(1));
            let local = &delta / BigRational::from_integer(BigInt::from(m));
            ok &= rational_pow(&(one.clone() - local), m) >= one - delta;
            checked += 1;
        }
    }
    verdict(ok && checked == 20, format!("(1 - d/m)^m >= 1 - d exactly for {checked} pairs"))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "generator": {"kind": "grid", "width": 3, "height": 3,
                      "landmarks": {"explicit": [0, 2, 4, 6, 8]}, "seed": 4},
        "learn": {"delta_g": 0.2, "alpha": 0.9, "gamma": 0.9},
        "trials": 6,
        "seed": 31,
        "outputs": {"maps": true, "stats": true, "dot": true}
    }"#;
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, config).unwrap();
    let mut statuses = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let args = ["maplearn", "evaluate", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()];
        statuses.push(cli_main(args));
    }
    let mut files = vec!["stats.csv".to_owned(), "summary.json".to_owned(), "world.json".to_owned()];
    for t in 0..6 {
        files.push(format!("maps/trial_{t:04}.json"));
        files.push(format!("maps/trial_{t:04}.dot"));
    }
    let identical = files.iter().all(|f| {
        let a = fs::read(dir.path().join("a").join(f));
        let b = fs::read(dir.path().join("b").join(f));
        matches!((a, b), (Ok(a), Ok(b)) if a == b && !a.is_empty())
    });
    verdict(
        identical && statuses.iter().all(|&s| s != 2),
        format!("{} files compared byte for byte across two evaluate runs; exit codes {statuses:?}", files.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Check; 8] = [
        ("1 PAC global connectivity", pac_connectivity),
        ("2 all-landmark edge set", all_landmark_edge_set),
        ("3 filtering bound", filtering_bound),
        ("4 selection bound", selection_bound),
        ("5 reverse-retrace separation", separation),
        ("6 movement calibration", movement_calibration),
        ("7 composition arithmetic", composition_arithmetic),
        ("8 evaluate determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut stdout = std::io::stdout();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = std::time::Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(stdout, "[{tag}] criterion {name}: {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!v.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        let _ = writeln!(stdout, "{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
