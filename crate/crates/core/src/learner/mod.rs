//! PAC map learning on landmark graphs.
//!
//! Learning runs in three phases. A random walk identifies the landmarks.
//! From each landmark, random exploration walks record candidate routes to
//! nearby landmarks. Each candidate is then re-traversed many times and
//! kept only if the traversal-guess oracle votes for it more than half the
//! time (or, with reverse movement certainty, if retracing its entry labels
//! hits often enough). The per-landmark results are stitched into a
//! [`LearnedMap`].

pub mod bounds;

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ClassId, LabelId, VertexId};
use crate::map::{LearnedMap, PhaseSteps, Provenance, Route};
use crate::par::{self, Execution};
use crate::rng::{derive_seed, substream};
use crate::sim::{Robot, TraceEvent, World};

pub use bounds::{
    identification_walk_length, num_filter_traversals, num_reverse_experiments, num_selection_attempts,
    reverse_hit_rates, reverse_threshold, selection_success_probability,
};

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("{name} must lie in (0, 1), got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("alpha must lie in (0.5, 1], got {0}")]
    Alpha(f64),
    #[error("gamma must lie in (0.5, 1], got {0}")]
    Gamma(f64),
    #[error("stretch parameter c must be an integer greater than 2, got {0}")]
    Stretch(u32),
    #[error("maximum degree d must be positive")]
    Degree,
    #[error("answer length m must be positive")]
    AnswerLength,
    #[error("graph size bound must be positive")]
    GraphSize,
    #[error("reverse-certainty filtering needs entry-label sensing in the world")]
    NoReverseSensing,
    #[error("candidate carries no entry labels")]
    NoEntryLabels,
}

/// Upper bounds on the world size, used to size the identification walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSizeBound {
    pub vertices: usize,
    pub edges: usize,
}

/// Everything the learner is told in advance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnParams {
    /// Global failure budget.
    pub delta_g: f64,
    /// Exploration radius multiplier; the stretch bound is `c / (c - 2)`.
    pub c: u32,
    /// Landmark distribution parameter.
    pub r: usize,
    /// Maximum degree.
    pub d: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Longest expected answer, in local routes.
    pub m: usize,
    /// Exploration walk length. Defaults to `c * r` (at least 1).
    #[serde(default)]
    pub exploration_length: Option<usize>,
    pub graph_size_bound: GraphSizeBound,
    #[serde(default)]
    pub reverse_certainty: bool,
}

/// The failure budget split across phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budgets {
    pub local: f64,
    pub identify: f64,
    pub select: f64,
    pub filter: f64,
}

impl LearnParams {
    pub fn validate(&self) -> Result<(), LearnError> {
        if !(self.delta_g > 0.0 && self.delta_g < 1.0) {
            return Err(LearnError::Probability { name: "delta_g", value: self.delta_g });
        }
        if self.c <= 2 {
            return Err(LearnError::Stretch(self.c));
        }
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return Err(LearnError::Alpha(self.alpha));
        }
        if !(self.gamma > 0.5 && self.gamma <= 1.0) {
            return Err(LearnError::Gamma(self.gamma));
        }
        if self.d == 0 {
            return Err(LearnError::Degree);
        }
        if self.m == 0 {
            return Err(LearnError::AnswerLength);
        }
        if self.graph_size_bound.vertices == 0 {
            return Err(LearnError::GraphSize);
        }
        Ok(())
    }

    /// `delta_l = delta_g / m`, then a third each for identification,
    /// selection and filtering.
    pub fn budgets(&self) -> Budgets {
        let local = self.delta_g / self.m as f64;
        Budgets { local, identify: local / 3.0, select: local / 3.0, filter: local / 3.0 }
    }

    pub fn exploration_length(&self) -> usize {
        self.exploration_length.unwrap_or(self.c as usize * self.r).max(1)
    }

    pub fn stretch_bound(&self) -> f64 {
        self.c as f64 / (self.c as f64 - 2.0)
    }
}

/// A recorded walk between two landmarks:
/// `A out_0, in_1 X_1 out_1, ..., in_k B`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandidatePath {
    pub start: ClassId,
    pub end: ClassId,
    /// Directions attempted, `out_0 .. out_{k-1}`.
    pub out_labels: Vec<LabelId>,
    /// Entry labels `in_1 .. in_k`, present with reverse movement certainty.
    pub in_labels: Option<Vec<LabelId>>,
    /// Classes of the interior vertices `X_1 .. X_{k-1}`.
    pub observed_classes: Vec<ClassId>,
}

impl CandidatePath {
    pub fn len(&self) -> usize {
        self.out_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out_labels.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    pub landmarks: BTreeSet<ClassId>,
    pub steps: u64,
}

/// Random walk of `walk_length` moves, collecting every landmark seen
/// (including the starting vertex).
pub fn identify_landmarks_for(robot: &mut Robot<'_>, walk_length: u64) -> Identification {
    let start = robot.step_count();
    let mut landmarks = BTreeSet::new();
    if robot.is_landmark() {
        landmarks.insert(robot.sense_class());
    }
    for _ in 0..walk_length {
        let (_, obs) = robot.random_step();
        if obs.is_landmark {
            landmarks.insert(obs.arrived_class);
        }
    }
    Identification { landmarks, steps: robot.step_count() - start }
}

/// Identification with the walk length implied by `params`.
pub fn identify_landmarks(robot: &mut Robot<'_>, params: &LearnParams) -> Result<Identification, LearnError> {
    let b = params.graph_size_bound;
    let length = identification_walk_length(b.vertices, b.edges, params.budgets().identify)?;
    Ok(identify_landmarks_for(robot, length))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub start: ClassId,
    pub attempts: u64,
    /// Distinct candidates in discovery order.
    pub candidates: Vec<CandidatePath>,
    pub steps: u64,
}

/// Runs `attempts` exploration walks of up to `length` moves from the
/// landmark `start`, re-homing before each one. A walk ends at the first
/// landmark it reaches; reaching a landmark other than `start` records the
/// walk as a candidate. Identical observation sequences are merged.
pub fn select_candidates_with(robot: &mut Robot<'_>, start: ClassId, length: usize, attempts: u64) -> Selection {
    let first_step = robot.step_count();
    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    for _ in 0..attempts {
        robot.walk_to_landmark(start);
        let mut out_labels = Vec::with_capacity(length);
        let mut in_labels = Vec::with_capacity(length);
        let mut observed_classes = Vec::with_capacity(length);
        for _ in 0..length {
            let (label, obs) = robot.random_step();
            out_labels.push(label);
            in_labels.push(obs.entry_label);
            if obs.is_landmark {
                if obs.arrived_class != start {
                    let candidate = CandidatePath {
                        start,
                        end: obs.arrived_class,
                        out_labels,
                        in_labels: in_labels.into_iter().collect(),
                        observed_classes,
                    };
                    if seen.insert(candidate.clone()) {
                        candidates.push(candidate);
                    }
                }
                break;
            }
            observed_classes.push(obs.arrived_class);
        }
    }
    Selection { start, attempts, candidates, steps: robot.step_count() - first_step }
}

/// Candidate selection with the attempt count from the selection bound at
/// the configured exploration length.
pub fn select_candidates(robot: &mut Robot<'_>, start: ClassId, params: &LearnParams) -> Result<Selection, LearnError> {
    let length = params.exploration_length();
    let attempts = num_selection_attempts(params.alpha, params.d, length, params.budgets().select)?;
    Ok(select_candidates_with(robot, start, length, attempts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub candidate: CandidatePath,
    /// Budgeted experiments.
    pub trials: u64,
    /// Experiments actually run; majority votes stop once decided.
    pub executed: u64,
    /// Positive guesses, or hits for reverse-certainty filtering.
    pub positives: u64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtering {
    pub outcomes: Vec<FilterOutcome>,
    /// Per-candidate failure budget used to size the experiments.
    pub per_candidate_budget: f64,
    pub steps: u64,
}

impl Filtering {
    pub fn accepted(&self) -> impl Iterator<Item = &CandidatePath> {
        self.outcomes.iter().filter(|o| o.accepted).map(|o| &o.candidate)
    }
}

/// One filtering traversal: re-home to the start landmark, follow the
/// out-labels, and if the run completes with the recorded classes and ends
/// at the recorded landmark, ask the guess oracle. Anything else is a
/// negative answer.
pub fn filter_traversal(robot: &mut Robot<'_>, candidate: &CandidatePath) -> bool {
    robot.walk_to_landmark(candidate.start);
    let record = robot.run_instruction_sequence(&candidate.out_labels);
    let Some((last, interior)) = record.observations.split_last() else {
        return false;
    };
    let completed = !record.aborted
        && record.observations.len() == candidate.len()
        && last.is_landmark
        && last.arrived_class == candidate.end
        && interior.iter().map(|o| o.arrived_class).eq(candidate.observed_classes.iter().copied());
    completed && robot.guess_traversal(&record.attempted, &record.traversed)
}

/// Majority-vote filtering of one candidate with `n` traversals; accepted
/// on strictly more than `n / 2` positive answers. Traversals stop as soon
/// as the remaining ones cannot change the verdict.
pub fn filter_candidate_with(robot: &mut Robot<'_>, candidate: &CandidatePath, n: u64) -> FilterOutcome {
    let (mut positives, mut executed) = (0, 0);
    while executed < n && 2 * positives <= n && 2 * (positives + n - executed) > n {
        if filter_traversal(robot, candidate) {
            positives += 1;
        }
        executed += 1;
    }
    FilterOutcome { candidate: candidate.clone(), trials: n, executed, positives, accepted: 2 * positives > n }
}

/// Filters every candidate with `num_filter_traversals(gamma, delta_f / count)`
/// traversals each.
pub fn filter_candidates(
    robot: &mut Robot<'_>,
    candidates: &[CandidatePath],
    gamma: f64,
    delta_f: f64,
) -> Result<Filtering, LearnError> {
    let first_step = robot.step_count();
    if candidates.is_empty() {
        return Ok(Filtering { outcomes: Vec::new(), per_candidate_budget: delta_f, steps: 0 });
    }
    let budget = delta_f / candidates.len() as f64;
    let n = num_filter_traversals(gamma, budget)?;
    let outcomes = candidates.iter().map(|c| filter_candidate_with(robot, c, n)).collect();
    Ok(Filtering { outcomes, per_candidate_budget: budget, steps: robot.step_count() - first_step })
}

/// One reverse experiment: re-home to the end landmark, follow the entry
/// labels backwards and report a hit when the labels observed on entering
/// each vertex are `out_{k-1}, ..., out_0`.
pub fn reverse_experiment(robot: &mut Robot<'_>, candidate: &CandidatePath) -> Result<bool, LearnError> {
    if !robot.world().sensors().reverse_certainty() {
        return Err(LearnError::NoReverseSensing);
    }
    let in_labels = candidate.in_labels.as_ref().ok_or(LearnError::NoEntryLabels)?;
    robot.walk_to_landmark(candidate.end);
    let mut expected = candidate.out_labels.iter().rev().copied();
    for &label in in_labels.iter().rev() {
        match robot.attempt_move(label) {
            Ok(obs) if obs.entry_label == expected.next() => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Reverse-certainty filtering of one candidate with `n` experiments;
/// accepted when hits exceed the midpoint threshold.
pub fn filter_with_reverse_certainty(
    robot: &mut Robot<'_>,
    candidate: &CandidatePath,
    n: u64,
    alpha: f64,
) -> Result<FilterOutcome, LearnError> {
    let mut hits = 0;
    for _ in 0..n {
        if reverse_experiment(robot, candidate)? {
            hits += 1;
        }
    }
    let threshold = reverse_threshold(alpha, candidate.len(), n);
    Ok(FilterOutcome {
        candidate: candidate.clone(),
        trials: n,
        executed: n,
        positives: hits,
        accepted: hits as f64 > threshold,
    })
}

fn filter_candidates_reverse(
    robot: &mut Robot<'_>,
    candidates: &[CandidatePath],
    alpha: f64,
    delta_f: f64,
) -> Result<Filtering, LearnError> {
    let first_step = robot.step_count();
    if candidates.is_empty() {
        return Ok(Filtering { outcomes: Vec::new(), per_candidate_budget: delta_f, steps: 0 });
    }
    let budget = delta_f / candidates.len() as f64;
    let mut outcomes = Vec::with_capacity(candidates.len());
    for c in candidates {
        let n = num_reverse_experiments(alpha, c.len(), budget)?;
        outcomes.push(filter_with_reverse_certainty(robot, c, n, alpha)?);
    }
    Ok(Filtering { outcomes, per_candidate_budget: budget, steps: robot.step_count() - first_step })
}

/// Routes learned around one landmark.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub landmark: ClassId,
    /// Accepted routes as `(end landmark, out-labels)`.
    pub routes: Vec<(ClassId, Vec<LabelId>)>,
    pub candidates: usize,
    pub steps_select: u64,
    pub steps_filter: u64,
}

/// Candidate selection followed by filtering, with the selection and
/// filtering budgets from `params`. The robot must already be able to
/// reach `landmark`; it re-homes there as needed.
pub fn learn_local(robot: &mut Robot<'_>, landmark: ClassId, params: &LearnParams) -> Result<LocalMap, LearnError> {
    let budgets = params.budgets();
    let selection = select_candidates(robot, landmark, params)?;
    let filtering = if params.reverse_certainty {
        filter_candidates_reverse(robot, &selection.candidates, params.alpha, budgets.filter)?
    } else {
        filter_candidates(robot, &selection.candidates, params.gamma, budgets.filter)?
    };
    let mut routes: Vec<(ClassId, Vec<LabelId>)> =
        filtering.accepted().map(|c| (c.end, c.out_labels.clone())).collect();
    routes.sort_by(|a, b| (a.1.len(), a.0, &a.1).cmp(&(b.1.len(), b.0, &b.1)));
    routes.dedup();
    Ok(LocalMap {
        landmark,
        routes,
        candidates: selection.candidates.len(),
        steps_select: selection.steps,
        steps_filter: filtering.steps,
    })
}

#[derive(Debug, Clone, Default)]
pub struct LearnOptions {
    pub execution: Execution,
    /// Keep per-robot traces (named `identify`, `landmark/L<id>`).
    pub trace: bool,
}

#[derive(Debug, Clone)]
pub struct LearnRun {
    pub map: LearnedMap,
    pub identified: BTreeSet<ClassId>,
    pub local_maps: Vec<LocalMap>,
    pub traces: Vec<(String, Vec<TraceEvent>)>,
}

/// Learns a global map: identify landmarks with one robot, then learn each
/// landmark's neighbourhood with its own robot and random substream. The
/// per-landmark robots start where the identification walk ended.
pub fn learn_global(world: &World, params: &LearnParams, seed: u64) -> Result<LearnedMap, LearnError> {
    learn_global_with(world, params, seed, &LearnOptions::default()).map(|run| run.map)
}

pub fn learn_global_with(
    world: &World,
    params: &LearnParams,
    seed: u64,
    options: &LearnOptions,
) -> Result<LearnRun, LearnError> {
    params.validate()?;
    if params.reverse_certainty && !world.sensors().reverse_certainty() {
        return Err(LearnError::NoReverseSensing);
    }
    let start: VertexId = substream(seed, "start").random_range(0..world.graph().vertex_count());
    let spawn = |pos: VertexId, name: &str| {
        let s = derive_seed(seed, name);
        if options.trace {
            Robot::new(world, pos, s)
        } else {
            Robot::untraced(world, pos, s)
        }
    };

    let mut explorer = spawn(start, "identify");
    let identification = identify_landmarks(&mut explorer, params)?;
    let meeting_point = explorer.position();
    let mut traces = Vec::new();
    if let Some(t) = explorer.trace() {
        traces.push(("identify".to_owned(), t.to_vec()));
    }

    let landmarks: Vec<ClassId> = identification.landmarks.iter().copied().collect();
    let locals = par::map_indexed(options.execution, landmarks.len(), |i| {
        let name = format!("landmark/{}", landmarks[i]);
        let mut robot = spawn(meeting_point, &name);
        let travel = robot.walk_to_landmark(landmarks[i]);
        let mut local = learn_local(&mut robot, landmarks[i], params)?;
        local.steps_select += travel;
        let trace = robot.trace().map(|t| (name, t.to_vec()));
        Ok::<_, LearnError>((local, trace))
    });

    let mut local_maps = Vec::with_capacity(locals.len());
    let mut steps = PhaseSteps { identify: identification.steps, select: 0, filter: 0 };
    for result in locals {
        let (local, trace) = result?;
        steps.select += local.steps_select;
        steps.filter += local.steps_filter;
        traces.extend(trace);
        local_maps.push(local);
    }

    let graph = world.graph();
    let routes = local_maps.iter().flat_map(|local| {
        local.routes.iter().map(move |(to, labels)| {
            Route::new(local.landmark, *to, labels.iter().map(|&l| graph.label_name(l).to_owned()).collect())
        })
    });
    let routes: Vec<Route> = routes.collect();
    // Routes may end at a landmark the identification walk missed.
    let known: BTreeSet<ClassId> = landmarks.iter().copied().chain(routes.iter().map(|r| r.to)).collect();
    let map = LearnedMap::new(known, routes, params.clone(), Provenance { seed, steps })
        .expect("learned routes connect identified landmarks");
    Ok(LearnRun { map, identified: identification.landmarks, local_maps, traces })
}
