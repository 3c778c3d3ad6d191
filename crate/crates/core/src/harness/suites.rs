//! Monte Carlo checks of the sample-size bounds and of reverse-retrace
//! separation, using candidates planted from the true graph.

use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::{proportion_sigma, Proportion};
use super::HarnessError;
use crate::generators::{gen_grid, gen_probe_tree, GeneratorSpec, LandmarkPlan};
use crate::graph::{LabeledGraph, LandmarkPartition, VertexId};
use crate::learner::{
    filter_candidate_with, filter_with_reverse_certainty, num_filter_traversals, num_selection_attempts,
    reverse_hit_rates, reverse_threshold, select_candidates_with, CandidatePath,
};
use crate::par::{self, Execution};
use crate::rng::{derive_seed, substream, SimRng};
use crate::sim::{MovementModel, Robot, SensorSuite, World};

/// Every walk of at most `max_len` moves that leaves a landmark, passes only
/// non-landmarks and stops at a different landmark, recorded as a faithful
/// traversal would record it.
pub fn landmark_paths(graph: &LabeledGraph, partition: &LandmarkPartition, max_len: usize) -> Vec<CandidatePath> {
    fn extend(
        graph: &LabeledGraph,
        partition: &LandmarkPartition,
        at: VertexId,
        max_len: usize,
        partial: &mut CandidatePath,
        out: &mut Vec<CandidatePath>,
    ) {
        for port in graph.ports(at) {
            partial.out_labels.push(port.label);
            partial.in_labels.as_mut().unwrap().push(port.back);
            if partition.is_landmark(port.to) {
                let end = partition.class_of(port.to);
                if end != partial.start {
                    out.push(CandidatePath { end, ..partial.clone() });
                }
            } else if partial.out_labels.len() < max_len {
                partial.observed_classes.push(partition.class_of(port.to));
                extend(graph, partition, port.to, max_len, partial, out);
                partial.observed_classes.pop();
            }
            partial.out_labels.pop();
            partial.in_labels.as_mut().unwrap().pop();
        }
    }
    let mut out = Vec::new();
    for a in partition.landmarks() {
        let start = partition.class_of(a);
        let mut partial = CandidatePath {
            start,
            end: start,
            out_labels: Vec::new(),
            in_labels: Some(Vec::new()),
            observed_classes: Vec::new(),
        };
        extend(graph, partition, a, max_len, &mut partial, &mut out);
    }
    out
}

/// Replays a candidate with certain movement and reports whether it really
/// leads from its start, through its recorded classes, to its end.
pub fn candidate_is_real(graph: &LabeledGraph, partition: &LandmarkPartition, c: &CandidatePath) -> bool {
    let Some(mut at) = partition.landmark_vertex(c.start) else {
        return false;
    };
    for (i, &label) in c.out_labels.iter().enumerate() {
        let Some(port) = graph.port(at, label) else {
            return false;
        };
        if c.in_labels.as_ref().is_some_and(|ins| ins[i] != port.back) {
            return false;
        }
        at = port.to;
        if i + 1 < c.out_labels.len() && partition.class_of(at) != c.observed_classes[i] {
            return false;
        }
    }
    partition.landmark_vertex(c.end) == Some(at)
}

/// A recording error planted into a real candidate: one out-label replaced
/// by another label present at that vertex, everything observed kept. The
/// result is checked not to be a real path itself.
pub fn corrupt_candidate(
    graph: &LabeledGraph,
    partition: &LandmarkPartition,
    real: &CandidatePath,
    rng: &mut SimRng,
) -> Option<CandidatePath> {
    let mut at = partition.landmark_vertex(real.start)?;
    let mut options = Vec::new();
    for (j, &label) in real.out_labels.iter().enumerate() {
        for port in graph.ports(at) {
            if port.label != label {
                options.push((j, port.label));
            }
        }
        at = graph.port(at, label)?.to;
    }
    options.shuffle(rng);
    options.into_iter().find_map(|(j, label)| {
        let mut fake = real.clone();
        fake.out_labels[j] = label;
        let without_entries = CandidatePath { in_labels: None, ..fake.clone() };
        (!candidate_is_real(graph, partition, &without_entries)).then_some(fake)
    })
}

/// `count` real and `count` corrupted candidates drawn from `paths`.
pub fn plant_candidates(
    graph: &LabeledGraph,
    partition: &LandmarkPartition,
    paths: &[CandidatePath],
    count: usize,
    rng: &mut SimRng,
) -> (Vec<CandidatePath>, Vec<CandidatePath>) {
    assert!(!paths.is_empty(), "no paths to plant from");
    let mut real = Vec::with_capacity(count);
    let mut fake = Vec::with_capacity(count);
    while real.len() < count || fake.len() < count {
        let pick = paths.choose(rng).unwrap();
        if real.len() < count {
            real.push(pick.clone());
        }
        if fake.len() < count {
            if let Some(f) = corrupt_candidate(graph, partition, pick, rng) {
                fake.push(f);
            }
        }
    }
    (real, fake)
}

/// Simple path of exactly `k` moves between two distinct landmarks, found
/// by rejection over random self-avoiding walks. Interior vertices may be
/// landmarks.
pub fn random_landmark_path(
    graph: &LabeledGraph,
    partition: &LandmarkPartition,
    k: usize,
    rng: &mut SimRng,
) -> Option<CandidatePath> {
    let landmarks = partition.landmarks();
    for _ in 0..10_000 {
        let &a = landmarks.choose(rng)?;
        let mut visited = vec![a];
        let mut c = CandidatePath {
            start: partition.class_of(a),
            end: partition.class_of(a),
            out_labels: Vec::new(),
            in_labels: Some(Vec::new()),
            observed_classes: Vec::new(),
        };
        let mut at = a;
        for step in 0..k {
            let fresh: Vec<_> = graph.ports(at).iter().filter(|p| !visited.contains(&p.to)).collect();
            let Some(port) = fresh.choose(rng) else { break };
            c.out_labels.push(port.label);
            c.in_labels.as_mut().unwrap().push(port.back);
            at = port.to;
            visited.push(at);
            if step + 1 < k {
                c.observed_classes.push(partition.class_of(at));
            }
        }
        if c.out_labels.len() == k && partition.is_landmark(at) {
            c.end = partition.class_of(at);
            return Some(c);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionPoint {
    pub alpha: f64,
    pub d: usize,
    pub r: usize,
    pub delta_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterPoint {
    pub alpha: f64,
    pub gamma: f64,
    pub delta_fl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSuiteConfig {
    pub seed: u64,
    pub repetitions: usize,
    pub selection: Vec<SelectionPoint>,
    pub filter: Vec<FilterPoint>,
    /// Real and corrupted candidates planted per filter point.
    pub plants: usize,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for BoundSuiteConfig {
    fn default() -> Self {
        BoundSuiteConfig {
            seed: 0,
            repetitions: 500,
            selection: vec![
                SelectionPoint { alpha: 0.9, d: 4, r: 1, delta_s: 0.1 },
                SelectionPoint { alpha: 0.8, d: 3, r: 2, delta_s: 0.1 },
                SelectionPoint { alpha: 1.0, d: 3, r: 2, delta_s: 0.2 },
            ],
            filter: vec![
                FilterPoint { alpha: 0.95, gamma: 0.75, delta_fl: 0.1 },
                FilterPoint { alpha: 1.0, gamma: 0.9, delta_fl: 0.05 },
            ],
            plants: 20,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionCheck {
    pub point: SelectionPoint,
    pub attempts: u64,
    /// Chance of recording one given path per attempt, computed from the
    /// simulator's move distributions.
    pub per_path_exact: f64,
    /// `(alpha / d)^r`.
    pub per_path_formula: f64,
    /// Runs in which every path out of the test landmark was recorded.
    pub all_recorded: Proportion,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterCheck {
    pub point: FilterPoint,
    pub traversals: u64,
    pub real_rejected: Proportion,
    pub false_accepted: Proportion,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub selection: Vec<SelectionCheck>,
    pub filter: Vec<FilterCheck>,
    pub pass: bool,
}

fn plain_world(graph: LabeledGraph, partition: LandmarkPartition, alpha: f64, gamma: f64, reverse: bool) -> World {
    World::new(
        Arc::new(graph),
        Arc::new(partition),
        MovementModel::new(alpha).expect("alpha checked by caller"),
        SensorSuite::new(gamma, reverse).expect("gamma checked by caller"),
    )
    .expect("generated worlds are consistent")
}

/// Runs `attempts` exploration walks of length `r` from the root of a probe
/// tree, `repetitions` times, and counts the runs that record every
/// root-to-leaf path.
pub fn selection_experiment(
    alpha: f64,
    d: usize,
    r: usize,
    attempts: u64,
    repetitions: usize,
    seed: u64,
    execution: Execution,
) -> Result<Proportion, HarnessError> {
    let tree = gen_probe_tree(d, r)?;
    let paths = landmark_paths(&tree.graph, &tree.partition, r);
    let root = tree.partition.class_of(0);
    let wanted: Vec<&CandidatePath> = paths.iter().filter(|p| p.start == root).collect();
    let world = plain_world(tree.graph, tree.partition, alpha, 0.9, false);
    let hits = par::map_indexed(execution, repetitions, |rep| {
        let mut robot = Robot::untraced(&world, 0, derive_seed(seed, &format!("selection/{rep}")));
        let found = select_candidates_with(&mut robot, root, r, attempts).candidates;
        wanted.iter().all(|w| found.iter().any(|c| c.out_labels == w.out_labels && c.end == w.end))
    });
    Ok(Proportion::new(hits.iter().filter(|&&h| h).count() as u64, repetitions as u64))
}

/// Chance that one exploration walk from the probe-tree root records the
/// path along port 0 at every level, from the simulator's policy and move
/// distributions.
fn per_path_probability(alpha: f64, d: usize, r: usize) -> Result<f64, HarnessError> {
    let tree = gen_probe_tree(d, r)?;
    let movement = MovementModel::new(alpha)?;
    let mut at = 0;
    let mut p = 1.0;
    for level in 0..r {
        let port = usize::from(level > 0);
        let degree = tree.graph.degree(at);
        p *= movement.port_distribution(&tree.graph, at, port)[port] / degree as f64;
        at = tree.graph.ports(at)[port].to;
    }
    Ok(p)
}

/// Outcome of majority filtering over planted candidates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterExperiment {
    pub real_rejected: Proportion,
    pub false_accepted: Proportion,
}

/// Filters every planted candidate with `n` traversals in each of
/// `repetitions` independent runs.
pub fn filter_experiment(
    world: &World,
    real: &[CandidatePath],
    fake: &[CandidatePath],
    n: u64,
    repetitions: usize,
    seed: u64,
    execution: Execution,
) -> FilterExperiment {
    let start = world.partition().landmarks()[0];
    let counts = par::map_indexed(execution, repetitions, |rep| {
        let mut robot = Robot::untraced(world, start, derive_seed(seed, &format!("filter/{rep}")));
        let rejected = real.iter().filter(|c| !filter_candidate_with(&mut robot, c, n).accepted).count();
        let accepted = fake.iter().filter(|c| filter_candidate_with(&mut robot, c, n).accepted).count();
        (rejected as u64, accepted as u64)
    });
    let reps = repetitions as u64;
    FilterExperiment {
        real_rejected: Proportion::new(counts.iter().map(|c| c.0).sum(), reps * real.len() as u64),
        false_accepted: Proportion::new(counts.iter().map(|c| c.1).sum(), reps * fake.len() as u64),
    }
}

/// The grid used for filter plants: 5x5 with every other vertex of the even
/// rows a landmark (r = 2).
pub fn filter_plant_world() -> (LabeledGraph, LandmarkPartition) {
    let g = gen_grid(5, 5, &LandmarkPlan::Explicit(vec![0, 2, 4, 10, 12, 14, 20, 22, 24]), 0)
        .expect("fixed layout is valid");
    (g.graph, g.partition)
}

pub fn run_bound_suite(config: &BoundSuiteConfig) -> Result<BoundReport, HarnessError> {
    let mut selection = Vec::new();
    for (i, &point) in config.selection.iter().enumerate() {
        let attempts = num_selection_attempts(point.alpha, point.d, point.r, point.delta_s)?;
        let seed = derive_seed(config.seed, &format!("bounds/selection/{i}"));
        let all_recorded =
            selection_experiment(point.alpha, point.d, point.r, attempts, config.repetitions, seed, config.execution)?;
        let per_path_exact = per_path_probability(point.alpha, point.d, point.r)?;
        let per_path_formula = (point.alpha / point.d as f64).powi(point.r as i32);
        let target = 1.0 - point.delta_s;
        let sigma = proportion_sigma(target, config.repetitions as u64);
        let pass = all_recorded.estimate.is_some_and(|e| e >= target - 3.0 * sigma)
            && (per_path_exact - per_path_formula).abs() <= 1e-12 * per_path_formula.max(1e-300);
        selection.push(SelectionCheck { point, attempts, per_path_exact, per_path_formula, all_recorded, sigma, pass });
    }

    let (graph, partition) = filter_plant_world();
    let paths = landmark_paths(&graph, &partition, 3);
    let mut filter = Vec::new();
    for (i, &point) in config.filter.iter().enumerate() {
        let traversals = num_filter_traversals(point.gamma, point.delta_fl)?;
        let mut rng = substream(config.seed, &format!("bounds/plants/{i}"));
        let (real, fake) = plant_candidates(&graph, &partition, &paths, config.plants, &mut rng);
        let world = plain_world(graph.clone(), partition.clone(), point.alpha, point.gamma, false);
        let seed = derive_seed(config.seed, &format!("bounds/filter/{i}"));
        let result = filter_experiment(&world, &real, &fake, traversals, config.repetitions, seed, config.execution);
        let sigma = proportion_sigma(point.delta_fl, result.real_rejected.trials);
        let within = |p: &Proportion| p.estimate.is_some_and(|e| e <= point.delta_fl + 3.0 * sigma);
        let pass = within(&result.real_rejected) && within(&result.false_accepted);
        filter.push(FilterCheck {
            point,
            traversals,
            real_rejected: result.real_rejected,
            false_accepted: result.false_accepted,
            sigma,
            pass,
        });
    }
    let pass = selection.iter().all(|s| s.pass) && filter.iter().all(|f| f.pass);
    Ok(BoundReport { selection, filter, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationConfig {
    pub alpha: f64,
    pub lengths: Vec<usize>,
    /// Reverse experiments per candidate.
    pub experiments: u64,
    /// Planted candidates per length, half real and half corrupted.
    pub planted: usize,
    pub seed: u64,
    pub world: GeneratorSpec,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            alpha: 0.9,
            lengths: vec![1, 2, 3],
            experiments: 1000,
            planted: 100,
            seed: 0,
            world: GeneratorSpec::Grid { width: 5, height: 5, landmarks: LandmarkPlan::All, seed: 0 },
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationRow {
    pub k: usize,
    pub expected_real: f64,
    pub expected_false: f64,
    pub threshold: f64,
    pub real_hits: Vec<u64>,
    pub false_hits: Vec<u64>,
    /// Pooled hit rate over all real candidates.
    pub real_rate: f64,
    pub false_rate: f64,
    pub real_within: bool,
    pub false_within: bool,
    pub accuracy: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    pub alpha: f64,
    pub experiments: u64,
    pub rows: Vec<SeparationRow>,
    pub pass: bool,
}

pub fn run_separation_suite(config: &SeparationConfig) -> Result<SeparationReport, HarnessError> {
    MovementModel::new(config.alpha)?;
    let generated = config.world.generate()?;
    let world = plain_world(generated.graph, generated.partition, config.alpha, 0.9, true);
    let n = config.experiments;
    let mut rows = Vec::new();
    for &k in &config.lengths {
        if k == 0 {
            return Err(HarnessError::Config("lengths: paths need at least one move".into()));
        }
        let mut rng = substream(config.seed, &format!("separation/plants/{k}"));
        let half = config.planted / 2;
        let mut real = Vec::with_capacity(half);
        let mut fake = Vec::with_capacity(config.planted - half);
        let mut tries = 0;
        while real.len() < half || fake.len() < config.planted - half {
            tries += 1;
            if tries > 100 * config.planted.max(1) {
                return Err(HarnessError::Config(format!("world: no landmark paths of length {k} to plant")));
            }
            let Some(path) = random_landmark_path(world.graph(), world.partition(), k, &mut rng) else {
                continue;
            };
            if real.len() < half {
                real.push(path);
            } else if let Some(f) = corrupt_candidate(world.graph(), world.partition(), &path, &mut rng) {
                fake.push(f);
            }
        }
        let planted: Vec<(bool, CandidatePath)> =
            real.into_iter().map(|c| (true, c)).chain(fake.into_iter().map(|c| (false, c))).collect();
        let seed = derive_seed(config.seed, &format!("separation/run/{k}"));
        let outcomes = par::map_indexed(config.execution, planted.len(), |i| {
            let (_, c) = &planted[i];
            let start = world.partition().landmark_vertex(c.start).expect("planted from landmarks");
            let mut robot = Robot::untraced(&world, start, derive_seed(seed, &i.to_string()));
            filter_with_reverse_certainty(&mut robot, c, n, config.alpha)
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
        let (expected_real, expected_false) = reverse_hit_rates(config.alpha, k);
        let mut real_hits = Vec::new();
        let mut false_hits = Vec::new();
        let mut correct = 0;
        for ((is_real, _), o) in planted.iter().zip(&outcomes) {
            if *is_real {
                real_hits.push(o.positives);
            } else {
                false_hits.push(o.positives);
            }
            if o.accepted == *is_real {
                correct += 1;
            }
        }
        let pooled = |hits: &[u64]| hits.iter().sum::<u64>() as f64 / (hits.len() as u64 * n).max(1) as f64;
        let (real_rate, false_rate) = (pooled(&real_hits), pooled(&false_hits));
        let real_sigma = proportion_sigma(expected_real, n * real_hits.len().max(1) as u64);
        let false_sigma = proportion_sigma(expected_false, n * false_hits.len().max(1) as u64);
        let real_within = (real_rate - expected_real).abs() <= 3.0 * real_sigma;
        let false_within = false_rate <= expected_false + 3.0 * false_sigma;
        let accuracy = if planted.is_empty() { 1.0 } else { correct as f64 / planted.len() as f64 };
        rows.push(SeparationRow {
            k,
            expected_real,
            expected_false,
            threshold: reverse_threshold(config.alpha, k, n),
            real_hits,
            false_hits,
            real_rate,
            false_rate,
            real_within,
            false_within,
            accuracy,
            pass: real_within && false_within,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(SeparationReport { alpha: config.alpha, experiments: n, rows, pass })
}

/// Draws `moves` attempted moves through port 0 of `vertex` and counts the
/// port actually taken. The robot is put back on `vertex` after each move.
pub fn movement_histogram(world: &World, vertex: VertexId, moves: u64, seed: u64) -> Vec<u64> {
    let ports = world.graph().ports(vertex);
    let mut counts = vec![0u64; ports.len()];
    let intended = ports[0].label;
    let mut rng = substream(seed, "histogram");
    for _ in 0..moves {
        let mut robot = Robot::untraced(world, vertex, rng.random());
        robot.attempt_move(intended).expect("label exists at vertex");
        let port = ports.iter().position(|p| p.to == robot.position()).expect("moved along a port");
        counts[port] += 1;
    }
    counts
}
