//! The robot's view of the world: noisy movement, exact class sensing,
//! the landmark detector, the traversal-guess oracle and (optionally)
//! reverse-entry sensing.
//!
//! A [`Robot`] owns three independent random streams derived from its seed:
//! `motion` drives the movement noise, `guess` drives the guess oracle and
//! `policy` is handed to whatever is choosing directions. Feeding the same
//! intended labels to two robots with the same seed therefore reproduces the
//! same path no matter how many guesses or coin flips happen in between.

use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{ClassId, LabelId, LabeledGraph, LandmarkPartition, VertexId};
use crate::rng::{substream, SimRng};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("alpha must lie in (0.5, 1], got {0}")]
    Alpha(f64),
    #[error("gamma must lie in (0.5, 1], got {0}")]
    Gamma(f64),
    #[error("error-spread table: {0}")]
    SpreadTable(String),
    #[error("partition covers {partition} vertices but the graph has {graph}")]
    PartitionSize { partition: usize, graph: usize },
    #[error("label {label:?} is not available at the robot's position")]
    LabelAbsent { label: String },
}

/// How the `1 - alpha` error mass is spread over the unintended edges.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorSpread {
    /// Uniform over the other incident edges.
    Uniform,
    /// Per-vertex weights, one per port in port order. The residual mass is
    /// split over the other ports in proportion to their weights; when all
    /// of them weigh zero it stays on the intended edge.
    Weighted(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementModel {
    alpha: f64,
    spread: ErrorSpread,
}

impl MovementModel {
    pub fn new(alpha: f64) -> Result<Self, SimError> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(SimError::Alpha(alpha));
        }
        Ok(MovementModel { alpha, spread: ErrorSpread::Uniform })
    }

    pub fn with_spread(alpha: f64, spread: ErrorSpread) -> Result<Self, SimError> {
        let mut m = Self::new(alpha)?;
        if let ErrorSpread::Weighted(table) = &spread {
            for (v, row) in table.iter().enumerate() {
                if row.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(SimError::SpreadTable(format!("vertex {v}: weights must be finite and non-negative")));
                }
            }
        }
        m.spread = spread;
        Ok(m)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn spread(&self) -> &ErrorSpread {
        &self.spread
    }

    /// Probability of leaving `v` through each port when aiming at port
    /// `intended`. Sums to one.
    pub fn port_distribution(&self, graph: &LabeledGraph, v: VertexId, intended: usize) -> Vec<f64> {
        let degree = graph.degree(v);
        let mut dist = vec![0.0; degree];
        if degree == 1 {
            dist[0] = 1.0;
            return dist;
        }
        let residual = 1.0 - self.alpha;
        dist[intended] = self.alpha;
        match &self.spread {
            ErrorSpread::Uniform => {
                let share = residual / (degree - 1) as f64;
                for (i, p) in dist.iter_mut().enumerate() {
                    if i != intended {
                        *p = share;
                    }
                }
            }
            ErrorSpread::Weighted(table) => {
                let row = &table[v];
                let total: f64 = row.iter().enumerate().filter(|&(i, _)| i != intended).map(|(_, w)| w).sum();
                if total > 0.0 {
                    for (i, p) in dist.iter_mut().enumerate() {
                        if i != intended {
                            *p = residual * row[i] / total;
                        }
                    }
                } else {
                    dist[intended] = 1.0;
                }
            }
        }
        dist
    }

    fn sample_port(&self, graph: &LabeledGraph, v: VertexId, intended: usize, rng: &mut SimRng) -> usize {
        let degree = graph.degree(v);
        if degree == 1 {
            return 0;
        }
        match self.spread {
            ErrorSpread::Uniform => {
                if rng.random::<f64>() < self.alpha {
                    intended
                } else {
                    let other = rng.random_range(0..degree - 1);
                    if other >= intended {
                        other + 1
                    } else {
                        other
                    }
                }
            }
            ErrorSpread::Weighted(_) => {
                let dist = self.port_distribution(graph, v, intended);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, p) in dist.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return i;
                    }
                }
                intended
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSuite {
    gamma: f64,
    reverse_certainty: bool,
}

impl SensorSuite {
    pub fn new(gamma: f64, reverse_certainty: bool) -> Result<Self, SimError> {
        if !(gamma > 0.5 && gamma <= 1.0) {
            return Err(SimError::Gamma(gamma));
        }
        Ok(SensorSuite { gamma, reverse_certainty })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reverse_certainty(&self) -> bool {
        self.reverse_certainty
    }
}

/// Shared, immutable ground truth plus the noise models.
#[derive(Debug, Clone)]
pub struct World {
    graph: Arc<LabeledGraph>,
    partition: Arc<LandmarkPartition>,
    movement: MovementModel,
    sensors: SensorSuite,
}

impl World {
    pub fn new(
        graph: Arc<LabeledGraph>,
        partition: Arc<LandmarkPartition>,
        movement: MovementModel,
        sensors: SensorSuite,
    ) -> Result<Self, SimError> {
        let n = graph.vertex_count();
        let covered: usize = partition.classes().iter().map(Vec::len).sum();
        if covered != n {
            return Err(SimError::PartitionSize { partition: covered, graph: n });
        }
        if let ErrorSpread::Weighted(table) = movement.spread() {
            if table.len() != n {
                return Err(SimError::SpreadTable(format!("{} rows for {n} vertices", table.len())));
            }
            for (v, row) in table.iter().enumerate() {
                if row.len() != graph.degree(v) {
                    return Err(SimError::SpreadTable(format!(
                        "vertex {v}: {} weights for degree {}",
                        row.len(),
                        graph.degree(v)
                    )));
                }
            }
        }
        Ok(World { graph, partition, movement, sensors })
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn partition(&self) -> &LandmarkPartition {
        &self.partition
    }

    pub fn movement(&self) -> &MovementModel {
        &self.movement
    }

    pub fn sensors(&self) -> &SensorSuite {
        &self.sensors
    }
}

/// What the robot perceives on arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub arrived_class: ClassId,
    pub is_landmark: bool,
    /// Label, at the new vertex, of the edge just traversed. Present only
    /// with reverse movement certainty.
    pub entry_label: Option<LabelId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub intended: LabelId,
    pub traversed: LabelId,
    pub arrived_class: ClassId,
    pub landmark: bool,
    pub entry_label: Option<LabelId>,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    step: u64,
    intended: &'a str,
    traversed_label: &'a str,
    arrived_class: u32,
    landmark: bool,
    entry_label: Option<&'a str>,
}

/// Result of following a list of instructions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraversalRecord {
    /// The full instruction list.
    pub attempted: Vec<LabelId>,
    /// Labels (at the departure vertex) of the edges actually taken.
    pub traversed: Vec<LabelId>,
    pub observations: Vec<Observation>,
    /// An instruction named a label missing at the robot's actual position.
    pub aborted: bool,
}

impl TraversalRecord {
    /// Every instruction executed exactly as intended.
    pub fn faithful(&self) -> bool {
        !self.aborted && self.attempted == self.traversed
    }
}

#[derive(Debug, Clone)]
pub struct Robot<'w> {
    world: &'w World,
    position: VertexId,
    motion: SimRng,
    guess: SimRng,
    policy: SimRng,
    steps: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl<'w> Robot<'w> {
    /// A robot at `start` that records every move in its trace.
    pub fn new(world: &'w World, start: VertexId, seed: u64) -> Self {
        Robot {
            world,
            position: start,
            motion: substream(seed, "motion"),
            guess: substream(seed, "guess"),
            policy: substream(seed, "policy"),
            steps: 0,
            trace: Some(Vec::new()),
        }
    }

    /// Same as [`new`](Self::new) but keeps no trace; long experiments use this.
    pub fn untraced(world: &'w World, start: VertexId, seed: u64) -> Self {
        Robot { trace: None, ..Self::new(world, start, seed) }
    }

    pub fn world(&self) -> &'w World {
        self.world
    }

    /// Ground-truth position. Learners must not read this; it exists for
    /// the simulator, tests and evaluation.
    pub fn position(&self) -> VertexId {
        self.position
    }

    pub fn step_count(&self) -> u64 {
        self.steps
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn policy_rng(&mut self) -> &mut SimRng {
        &mut self.policy
    }

    /// Labels available at the current vertex, in port order.
    pub fn available_labels(&self) -> impl ExactSizeIterator<Item = LabelId> + '_ {
        self.world.graph.ports(self.position).iter().map(|p| p.label)
    }

    pub fn sense_class(&self) -> ClassId {
        self.world.partition.class_of(self.position)
    }

    pub fn is_landmark(&self) -> bool {
        self.world.partition.is_landmark(self.position)
    }

    fn observe(&self, entry: LabelId) -> Observation {
        Observation {
            arrived_class: self.sense_class(),
            is_landmark: self.is_landmark(),
            entry_label: self.world.sensors.reverse_certainty.then_some(entry),
        }
    }

    /// Tries to leave along `intended`. With probability at least `alpha`
    /// that edge is taken; otherwise another incident edge per the error spread.
    pub fn attempt_move(&mut self, intended: LabelId) -> Result<Observation, SimError> {
        self.step(intended).map(|(_, obs)| obs)
    }

    fn step(&mut self, intended: LabelId) -> Result<(LabelId, Observation), SimError> {
        let graph = &*self.world.graph;
        let ports = graph.ports(self.position);
        let Some(intended_port) = ports.iter().position(|p| p.label == intended) else {
            return Err(SimError::LabelAbsent { label: graph.label_name(intended).to_owned() });
        };
        let taken = self.world.movement.sample_port(graph, self.position, intended_port, &mut self.motion);
        let port = ports[taken];
        self.position = port.to;
        self.steps += 1;
        let obs = self.observe(port.back);
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEvent {
                step: self.steps,
                intended,
                traversed: port.label,
                arrived_class: obs.arrived_class,
                landmark: obs.is_landmark,
                entry_label: obs.entry_label,
            });
        }
        Ok((port.label, obs))
    }

    /// Picks a direction uniformly from the labels here (policy stream) and
    /// tries it.
    pub fn random_step(&mut self) -> (LabelId, Observation) {
        let ports = self.world.graph.ports(self.position);
        let label = ports[self.policy.random_range(0..ports.len())].label;
        let obs = self.attempt_move(label).expect("label drawn from current vertex");
        (label, obs)
    }

    /// The guess oracle: reports whether `attempted` was executed faithfully,
    /// correctly with probability `gamma` and independently per call.
    pub fn guess_traversal(&mut self, attempted: &[LabelId], actually_traversed: &[LabelId]) -> bool {
        let truth = attempted == actually_traversed;
        if self.guess.random::<f64>() < self.world.sensors.gamma {
            truth
        } else {
            !truth
        }
    }

    /// Follows `labels` one move at a time. Stops early, marking the record
    /// aborted, when a label is missing at the actual position.
    pub fn run_instruction_sequence(&mut self, labels: &[LabelId]) -> TraversalRecord {
        let mut record = TraversalRecord { attempted: labels.to_vec(), ..Default::default() };
        for &label in labels {
            match self.step(label) {
                Ok((taken, obs)) => {
                    record.traversed.push(taken);
                    record.observations.push(obs);
                }
                Err(_) => {
                    record.aborted = true;
                    break;
                }
            }
        }
        record
    }

    /// Random-walks until standing on the landmark `class`. Returns the
    /// number of moves taken (zero if already there).
    pub fn walk_to_landmark(&mut self, class: ClassId) -> u64 {
        assert!(self.world.partition.is_landmark_class(class), "{class} is not a landmark class");
        let start = self.steps;
        while !(self.is_landmark() && self.sense_class() == class) {
            self.random_step();
        }
        self.steps - start
    }

    /// Writes the trace as newline-delimited JSON.
    pub fn write_trace_ndjson<W: Write>(&self, out: W) -> io::Result<()> {
        write_trace_ndjson(&self.world.graph, self.trace.as_deref().unwrap_or_default(), out)
    }
}

/// Writes trace events as newline-delimited JSON, one move per line.
pub fn write_trace_ndjson<W: Write>(graph: &LabeledGraph, events: &[TraceEvent], mut out: W) -> io::Result<()> {
    for e in events {
        let line = TraceLine {
            step: e.step,
            intended: graph.label_name(e.intended),
            traversed_label: graph.label_name(e.traversed),
            arrived_class: e.arrived_class.0,
            landmark: e.landmark,
            entry_label: e.entry_label.map(|l| graph.label_name(l)),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
