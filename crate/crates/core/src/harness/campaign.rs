use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::{exact_upper_bound, Proportion};
use super::HarnessError;
use crate::generators::GeneratedWorld;
use crate::graph::{world_to_dot, ClassId, LabeledGraph, LandmarkPartition};
use crate::learner::{learn_global_with, LearnOptions, LearnParams};
use crate::map::{answer_is_valid, LearnedMap, PhaseSteps, QueryAnswer};
use crate::par::{self, Execution};
use crate::rng::derive_seed;
use crate::sim::{write_trace_ndjson, TraceEvent};

/// Float tolerance when comparing a stretch to its bound.
const STRETCH_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub from: ClassId,
    pub to: ClassId,
    pub answered: bool,
    /// Replaying the answer on the true graph ends at `to`.
    pub valid: bool,
    /// Present exactly when `valid`.
    pub stretch: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub queries: Vec<QueryResult>,
    pub steps: PhaseSteps,
    /// Every query answered, valid and within the stretch bound.
    pub pass: bool,
    /// The learned single-edge routes are exactly the true edges between
    /// adjacent landmarks.
    pub edge_set_exact: bool,
    pub map: LearnedMap,
    pub traces: Vec<(String, Vec<TraceEvent>)>,
}

impl TrialReport {
    pub fn answered(&self) -> usize {
        self.queries.iter().filter(|q| q.answered).count()
    }

    pub fn valid(&self) -> usize {
        self.queries.iter().filter(|q| q.valid).count()
    }

    pub fn max_stretch(&self) -> Option<f64> {
        self.queries.iter().filter_map(|q| q.stretch).reduce(f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub world: GeneratedWorld,
    pub params: LearnParams,
    pub trials: Vec<TrialReport>,
    /// Fraction of trials that passed.
    pub success: Proportion,
    /// Fraction of individual queries answered validly within the bound.
    pub query_success: Proportion,
    pub edge_set_exact: Proportion,
    /// `1 - delta_g`.
    pub target: f64,
    pub stretch_bound: f64,
    /// The one-sided exact 95% upper bound on the success rate reaches the
    /// target, i.e. the data do not reject "success rate >= 1 - delta_g".
    pub accepted: bool,
}

/// Directed single-edge adjacencies between landmarks, as
/// `(from, to, label)`.
pub fn landmark_edges(graph: &LabeledGraph, partition: &LandmarkPartition) -> BTreeSet<(ClassId, ClassId, String)> {
    let mut out = BTreeSet::new();
    for a in partition.landmarks() {
        for port in graph.ports(a) {
            if partition.is_landmark(port.to) {
                out.insert((
                    partition.class_of(a),
                    partition.class_of(port.to),
                    graph.label_name(port.label).to_owned(),
                ));
            }
        }
    }
    out
}

/// Single-edge routes recorded in a map.
pub fn learned_edges(map: &LearnedMap) -> BTreeSet<(ClassId, ClassId, String)> {
    map.routes().filter(|r| r.length == 1).map(|r| (r.from, r.to, r.labels[0].clone())).collect()
}

/// Checks every ordered pair of true landmarks against the true graph.
pub fn evaluate_map(
    map: &LearnedMap,
    graph: &LabeledGraph,
    partition: &LandmarkPartition,
    stretch_bound: f64,
) -> (Vec<QueryResult>, bool) {
    let landmarks = partition.landmarks();
    let mut results = Vec::new();
    let mut pass = true;
    for &a in &landmarks {
        let dist = graph.bfs_distances(a);
        for &b in &landmarks {
            if a == b {
                continue;
            }
            let (u, v) = (partition.class_of(a), partition.class_of(b));
            let answer = match map.global_path_query(u, v) {
                Ok(QueryAnswer::Path(p)) => Some(p),
                _ => None,
            };
            let valid = answer.as_ref().is_some_and(|p| answer_is_valid(p, graph, partition, u, v));
            let stretch = match (&answer, dist[b]) {
                (Some(p), Some(opt)) if valid => Some(p.length as f64 / opt as f64),
                _ => None,
            };
            pass &= valid && stretch.is_some_and(|s| s <= stretch_bound + STRETCH_EPS);
            results.push(QueryResult { from: u, to: v, answered: answer.is_some(), valid, stretch });
        }
    }
    (results, pass)
}

/// Generates the world once, then runs `trials` independent learn-and-check
/// trials, trial `i` seeded from the root seed and `trial/i`.
pub fn run_pac_campaign(config: &ExperimentConfig) -> Result<CampaignReport, HarnessError> {
    let generated = config.generator.generate()?;
    let params = config.learn.resolve(&generated.graph, &generated.partition)?;
    let world = config.learn.build_world(generated.graph.clone(), generated.partition.clone())?;
    let stretch_bound = params.stretch_bound();
    let truth = landmark_edges(&generated.graph, &generated.partition);
    let options = LearnOptions { execution: Execution::Sequential, trace: config.outputs.traces };

    let results = par::map_indexed(config.execution, config.trials, |trial| {
        let seed = derive_seed(config.seed, &format!("trial/{trial}"));
        let run = learn_global_with(&world, &params, seed, &options)?;
        let (queries, pass) = evaluate_map(&run.map, world.graph(), world.partition(), stretch_bound);
        Ok::<_, HarnessError>(TrialReport {
            trial,
            seed,
            queries,
            steps: run.map.provenance().steps,
            pass,
            edge_set_exact: learned_edges(&run.map) == truth,
            map: run.map,
            traces: run.traces,
        })
    });
    let trials = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let k = trials.len() as u64;
    let passed = trials.iter().filter(|t| t.pass).count() as u64;
    let queries: u64 = trials.iter().map(|t| t.queries.len() as u64).sum();
    let good_queries: u64 = trials
        .iter()
        .flat_map(|t| &t.queries)
        .filter(|q| q.stretch.is_some_and(|s| s <= stretch_bound + STRETCH_EPS))
        .count() as u64;
    let exact = trials.iter().filter(|t| t.edge_set_exact).count() as u64;
    let target = 1.0 - params.delta_g;
    Ok(CampaignReport {
        accepted: exact_upper_bound(passed, k, 0.95) >= target,
        success: Proportion::new(passed, k),
        query_success: Proportion::new(good_queries, queries),
        edge_set_exact: Proportion::new(exact, k),
        target,
        stretch_bound,
        world: generated,
        params,
        trials,
    })
}

#[derive(Serialize)]
struct CsvRow {
    trial: usize,
    queries: usize,
    answered: usize,
    valid: usize,
    max_stretch: String,
    steps_identify: u64,
    steps_select: u64,
    steps_filter: u64,
    pass: bool,
}

pub fn write_stats_csv<W: std::io::Write>(report: &CampaignReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for t in &report.trials {
        w.serialize(CsvRow {
            trial: t.trial,
            queries: t.queries.len(),
            answered: t.answered(),
            valid: t.valid(),
            max_stretch: t.max_stretch().map(|s| format!("{s:.6}")).unwrap_or_default(),
            steps_identify: t.steps.identify,
            steps_select: t.steps.select,
            steps_filter: t.steps.filter,
            pass: t.pass,
        })?;
    }
    if report.trials.is_empty() {
        w.write_record([
            "trial",
            "queries",
            "answered",
            "valid",
            "max_stretch",
            "steps_identify",
            "steps_select",
            "steps_filter",
            "pass",
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    trials: usize,
    success: &'a Proportion,
    query_success: &'a Proportion,
    edge_set_exact: &'a Proportion,
    target: f64,
    stretch_bound: f64,
    accepted: bool,
    world_r: Option<usize>,
    params: &'a LearnParams,
}

pub fn summary_json(report: &CampaignReport) -> String {
    let doc = SummaryDoc {
        trials: report.trials.len(),
        success: &report.success,
        query_success: &report.query_success,
        edge_set_exact: &report.edge_set_exact,
        target: report.target,
        stretch_bound: report.stretch_bound,
        accepted: report.accepted,
        world_r: report.world.r,
        params: &report.params,
    };
    serde_json::to_string_pretty(&doc).expect("summary serializes")
}

pub fn summary_text(report: &CampaignReport) -> String {
    let mut s = String::new();
    let p = &report.params;
    let landmarks = report.world.partition.landmarks().len();
    let _ = writeln!(
        s,
        "world: {} vertices, {} edges, {} landmarks, r = {}",
        report.world.graph.vertex_count(),
        report.world.graph.edge_count(),
        landmarks,
        report.world.r.map_or("-".into(), |r| r.to_string())
    );
    let _ = writeln!(
        s,
        "learner: delta_g = {}, c = {}, alpha = {}, gamma = {}, m = {}, exploration length = {}",
        p.delta_g,
        p.c,
        p.alpha,
        p.gamma,
        p.m,
        p.exploration_length()
    );
    let sp = &report.success;
    match sp.estimate {
        Some(rate) => {
            let _ = writeln!(
                s,
                "trials: {}/{} passed ({rate:.3}, 95% CI [{:.3}, {:.3}])",
                sp.successes, sp.trials, sp.lower, sp.upper
            );
        }
        None => {
            let _ = writeln!(s, "trials: none run");
        }
    }
    if let Some(q) = report.query_success.estimate {
        let _ =
            writeln!(s, "queries: {}/{} correct ({q:.4})", report.query_success.successes, report.query_success.trials);
    }
    let worst = report.trials.iter().filter(|t| t.pass).filter_map(TrialReport::max_stretch).reduce(f64::max);
    if let Some(w) = worst {
        let _ = writeln!(s, "max stretch over passing trials: {w:.3} (bound {:.3})", report.stretch_bound);
    }
    let _ =
        writeln!(s, "target success {:.3}: {}", report.target, if report.accepted { "ACCEPTED" } else { "REJECTED" });
    s
}

/// Writes `world.json`, `summary.json`, and the artifacts requested in
/// `outputs` under `dir`.
pub fn write_campaign(report: &CampaignReport, config: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("world.json"), report.world.to_world_file().to_json())?;
    fs::write(dir.join("summary.json"), summary_json(report))?;
    let outputs = &config.outputs;
    if outputs.stats {
        write_stats_csv(report, fs::File::create(dir.join("stats.csv"))?)?;
    }
    if outputs.dot {
        fs::write(dir.join("world.dot"), world_to_dot(&report.world.graph, &report.world.partition))?;
    }
    if outputs.maps || outputs.dot {
        fs::create_dir_all(dir.join("maps"))?;
    }
    for t in &report.trials {
        let stem = format!("trial_{:04}", t.trial);
        if outputs.maps {
            fs::write(dir.join("maps").join(format!("{stem}.json")), t.map.to_json())?;
        }
        if outputs.dot {
            fs::write(dir.join("maps").join(format!("{stem}.dot")), t.map.to_dot())?;
        }
        if outputs.traces && !t.traces.is_empty() {
            let tdir = dir.join("traces").join(&stem);
            fs::create_dir_all(&tdir)?;
            for (name, events) in &t.traces {
                let file = fs::File::create(tdir.join(format!("{}.ndjson", name.replace('/', "_"))))?;
                write_trace_ndjson(&report.world.graph, events, std::io::BufWriter::new(file))?;
            }
        }
    }
    Ok(())
}
