//! Reproducible test worlds: grids, corridor buildings, random landmark
//! graphs and small probe trees for bound checks.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::graph::{
    landmark_parameter, EdgeSpec, GraphError, LabeledGraph, LandmarkPartition, PartitionError, VertexId, WorldFile,
};
use crate::rng::{substream, SimRng};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("grid must be at least 2x2, got {width}x{height}")]
    GridTooSmall { width: usize, height: usize },
    #[error("landmark count {count} is outside 1..={vertices}")]
    LandmarkCount { count: usize, vertices: usize },
    #[error("landmark plan leaves a single indistinguishable vertex, which would itself be a landmark")]
    LoneIndistinguishable,
    #[error("target r = {target} exceeds the graph diameter {diameter}")]
    TargetBeyondDiameter { target: usize, diameter: usize },
    #[error("no placement of {count} landmarks with r = {target} found after {tries} tries")]
    PlacementNotFound { count: usize, target: usize, tries: usize },
    #[error("all vertices are landmarks, so r = 0, but target r = {target}")]
    AllLandmarksNeedZero { target: usize },
    #[error("random graph needs at least 2 vertices and max degree at least 2")]
    RandomShape,
    #[error("corridor spec: {0}")]
    Corridor(String),
    #[error("probe tree needs branching >= 2 and depth >= 1")]
    ProbeShape,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// Which vertices become landmarks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkPlan {
    All,
    Explicit(Vec<VertexId>),
    /// `count` landmarks placed at random until the distribution parameter
    /// equals `target_r`.
    Density {
        count: usize,
        target_r: usize,
    },
}

/// A world description that generation can reproduce exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Grid { width: usize, height: usize, landmarks: LandmarkPlan, seed: u64 },
    Building { corridors: CorridorSpec, seed: u64 },
    Random { vertex_count: usize, max_degree: usize, landmark_count: usize, target_r: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<GeneratedWorld, GenError> {
        match self {
            GeneratorSpec::Grid { width, height, landmarks, seed } => gen_grid(*width, *height, landmarks, *seed),
            GeneratorSpec::Building { corridors, seed } => gen_building(corridors, *seed),
            GeneratorSpec::Random { vertex_count, max_degree, landmark_count, target_r, seed } => {
                gen_random_landmark_graph(*vertex_count, *max_degree, *landmark_count, *target_r, *seed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedWorld {
    pub graph: LabeledGraph,
    pub partition: LandmarkPartition,
    /// Achieved landmark distribution parameter.
    pub r: Option<usize>,
    pub meta: serde_json::Value,
}

impl GeneratedWorld {
    fn assemble(graph: LabeledGraph, partition: LandmarkPartition, mut meta: serde_json::Value) -> Self {
        let r = landmark_parameter(&graph, &partition);
        meta["r"] = json!(r);
        meta["max_degree"] = json!(graph.max_degree());
        GeneratedWorld { graph, partition, r, meta }
    }

    pub fn to_world_file(&self) -> WorldFile {
        WorldFile::from_parts(&self.graph, &self.partition, self.meta.clone())
    }
}

fn check_plan_count(count: usize, vertices: usize) -> Result<(), GenError> {
    if count == 0 || count > vertices {
        return Err(GenError::LandmarkCount { count, vertices });
    }
    if count + 1 == vertices {
        return Err(GenError::LoneIndistinguishable);
    }
    Ok(())
}

/// Rejection-samples `count` landmarks until `landmark_parameter == target`.
fn place_landmarks(
    graph: &LabeledGraph,
    count: usize,
    target: usize,
    tries: usize,
    rng: &mut SimRng,
) -> Result<LandmarkPartition, GenError> {
    let n = graph.vertex_count();
    check_plan_count(count, n)?;
    if count == n {
        if target != 0 {
            return Err(GenError::AllLandmarksNeedZero { target });
        }
        return Ok(LandmarkPartition::all_landmarks(n));
    }
    let diameter = graph.diameter();
    if target > diameter {
        return Err(GenError::TargetBeyondDiameter { target, diameter });
    }
    let vertices: Vec<VertexId> = (0..n).collect();
    for _ in 0..tries {
        let mut chosen: Vec<VertexId> = vertices.choose_multiple(rng, count).copied().collect();
        chosen.sort_unstable();
        let partition = LandmarkPartition::from_landmarks(n, &chosen)?;
        if landmark_parameter(graph, &partition) == Some(target) {
            return Ok(partition);
        }
    }
    Err(GenError::PlacementNotFound { count, target, tries })
}

const PLACEMENT_TRIES: usize = 20_000;

/// `width x height` grid, vertex `(x, y)` numbered `y * width + x`, with
/// North = `y + 1` and East = `x + 1` at every vertex.
pub fn gen_grid(width: usize, height: usize, plan: &LandmarkPlan, seed: u64) -> Result<GeneratedWorld, GenError> {
    if width < 2 || height < 2 {
        return Err(GenError::GridTooSmall { width, height });
    }
    let id = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::new();
    for y in 0..height {
        for x in 0..width {
            if x + 1 < width {
                edges.push(EdgeSpec::new(id(x, y), id(x + 1, y), "E", "W"));
            }
            if y + 1 < height {
                edges.push(EdgeSpec::new(id(x, y), id(x, y + 1), "N", "S"));
            }
        }
    }
    let n = width * height;
    let graph = LabeledGraph::build(n, edges, Some(4))?;
    let partition = match plan {
        LandmarkPlan::All => LandmarkPartition::all_landmarks(n),
        LandmarkPlan::Explicit(vs) => {
            check_plan_count(vs.len(), n)?;
            LandmarkPartition::from_landmarks(n, vs)?
        }
        LandmarkPlan::Density { count, target_r } => {
            let mut rng = substream(seed, "grid/landmarks");
            place_landmarks(&graph, *count, *target_r, PLACEMENT_TRIES, &mut rng)?
        }
    };
    let coords: Vec<[usize; 2]> = (0..n).map(|v| [v % width, v / width]).collect();
    let meta = json!({ "generator": "grid", "width": width, "height": height, "seed": seed, "coords": coords });
    Ok(GeneratedWorld::assemble(graph, partition, meta))
}

/// Connected random graph: a random spanning tree under the degree cap
/// plus random extra edges, with per-vertex labels `0..degree` in random
/// order. Landmarks are placed so that r equals `target_r`.
pub fn gen_random_landmark_graph(
    vertex_count: usize,
    max_degree: usize,
    landmark_count: usize,
    target_r: usize,
    seed: u64,
) -> Result<GeneratedWorld, GenError> {
    if vertex_count < 2 || max_degree < 2 {
        return Err(GenError::RandomShape);
    }
    check_plan_count(landmark_count, vertex_count)?;
    let mut rng = substream(seed, "random/graph");

    let mut order: Vec<VertexId> = (0..vertex_count).collect();
    order.shuffle(&mut rng);
    let mut degree = vec![0usize; vertex_count];
    let mut pairs: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
    for i in 1..vertex_count {
        let open: Vec<VertexId> = order[..i].iter().copied().filter(|&u| degree[u] < max_degree).collect();
        let parent = *open.choose(&mut rng).expect("a tree always has a vertex below the cap");
        let child = order[i];
        pairs.insert((parent.min(child), parent.max(child)));
        degree[parent] += 1;
        degree[child] += 1;
    }
    for _ in 0..vertex_count / 2 {
        let (u, v) = (rng.random_range(0..vertex_count), rng.random_range(0..vertex_count));
        let key = (u.min(v), u.max(v));
        if u != v && degree[u] < max_degree && degree[v] < max_degree && pairs.insert(key) {
            degree[u] += 1;
            degree[v] += 1;
        }
    }

    let mut slots: Vec<Vec<usize>> = degree
        .iter()
        .map(|&d| {
            let mut s: Vec<usize> = (0..d).collect();
            s.shuffle(&mut rng);
            s
        })
        .collect();
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let lu = slots[u].pop().expect("slot per incident edge");
            let lv = slots[v].pop().expect("slot per incident edge");
            EdgeSpec::new(u, v, lu.to_string(), lv.to_string())
        })
        .collect();
    let graph = LabeledGraph::build(vertex_count, edges, Some(max_degree))?;

    let mut placement = substream(seed, "random/landmarks");
    let partition = place_landmarks(&graph, landmark_count, target_r, PLACEMENT_TRIES, &mut placement)?;
    let meta = json!({
        "generator": "random",
        "vertex_count": vertex_count,
        "landmark_count": landmark_count,
        "target_r": target_r,
        "seed": seed,
    });
    Ok(GeneratedWorld::assemble(graph, partition, meta))
}

/// Straight hallway between two grid points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub from: [i64; 2],
    pub to: [i64; 2],
}

/// Axis-aligned corridors. Segment endpoints are the graph's vertices;
/// a segment may not pass through another endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorridorSpec {
    pub segments: Vec<Segment>,
}

impl CorridorSpec {
    /// A small office floor: a main hall with two side wings joined by a
    /// cross corridor.
    pub fn sample_floor() -> Self {
        let seg = |a: [i64; 2], b: [i64; 2]| Segment { from: a, to: b };
        CorridorSpec {
            segments: vec![
                seg([0, 0], [2, 0]),
                seg([2, 0], [5, 0]),
                seg([5, 0], [7, 0]),
                seg([2, 0], [2, 3]),
                seg([5, 0], [5, 3]),
                seg([2, 3], [5, 3]),
                seg([5, 3], [5, 5]),
                seg([5, 0], [5, -2]),
            ],
        }
    }
}

fn compass(from: [i64; 2], to: [i64; 2]) -> Option<&'static str> {
    match (to[0] - from[0], to[1] - from[1]) {
        (0, dy) if dy > 0 => Some("N"),
        (0, dy) if dy < 0 => Some("S"),
        (dx, 0) if dx > 0 => Some("E"),
        (dx, 0) if dx < 0 => Some("W"),
        _ => None,
    }
}

fn junction_type(labels: &BTreeSet<&str>) -> &'static str {
    match labels.len() {
        1 => "dead-end",
        2 if labels == &BTreeSet::from(["N", "S"]) || labels == &BTreeSet::from(["E", "W"]) => "straight",
        2 => "L",
        3 => "T",
        _ => "+",
    }
}

/// Building graph from corridors. Vertices are classed by junction type
/// (dead-end, straight, L, T, +); a type that occurs once is a landmark.
/// The seed only permutes vertex numbering.
pub fn gen_building(spec: &CorridorSpec, seed: u64) -> Result<GeneratedWorld, GenError> {
    if spec.segments.is_empty() {
        return Err(GenError::Corridor("no segments".into()));
    }
    let mut points: BTreeSet<[i64; 2]> = BTreeSet::new();
    for (i, s) in spec.segments.iter().enumerate() {
        if compass(s.from, s.to).is_none() {
            return Err(GenError::Corridor(format!("segment {i} is not axis-aligned or has zero length")));
        }
        points.insert(s.from);
        points.insert(s.to);
    }
    for (i, s) in spec.segments.iter().enumerate() {
        let (lo_x, hi_x) = (s.from[0].min(s.to[0]), s.from[0].max(s.to[0]));
        let (lo_y, hi_y) = (s.from[1].min(s.to[1]), s.from[1].max(s.to[1]));
        for p in &points {
            let inside = p[0] >= lo_x && p[0] <= hi_x && p[1] >= lo_y && p[1] <= hi_y;
            if inside && *p != s.from && *p != s.to {
                return Err(GenError::Corridor(format!("segment {i} passes through endpoint {p:?}")));
            }
        }
    }

    let mut ids: Vec<[i64; 2]> = points.into_iter().collect();
    ids.shuffle(&mut substream(seed, "building/numbering"));
    let index: BTreeMap<[i64; 2], VertexId> = ids.iter().enumerate().map(|(i, p)| (*p, i)).collect();

    let mut labels_at: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); ids.len()];
    let mut edges = Vec::new();
    for (i, s) in spec.segments.iter().enumerate() {
        let (u, v) = (index[&s.from], index[&s.to]);
        let (lu, lv) = (compass(s.from, s.to).unwrap(), compass(s.to, s.from).unwrap());
        if !labels_at[u].insert(lu) || !labels_at[v].insert(lv) {
            return Err(GenError::Corridor(format!("segment {i} overlaps another corridor")));
        }
        edges.push(EdgeSpec::new(u, v, lu, lv));
    }
    let graph = LabeledGraph::build(ids.len(), edges, Some(4))?;

    let mut by_type: BTreeMap<&str, Vec<VertexId>> = BTreeMap::new();
    for (v, labels) in labels_at.iter().enumerate() {
        by_type.entry(junction_type(labels)).or_default().push(v);
    }
    let class_names: Vec<&str> = by_type.keys().copied().collect();
    let classes: Vec<Vec<VertexId>> = by_type.into_values().collect();
    let partition = LandmarkPartition::new(ids.len(), classes)?;
    let meta = json!({ "generator": "building", "seed": seed, "coords": ids, "class_names": class_names });
    Ok(GeneratedWorld::assemble(graph, partition, meta))
}

/// Tree with a landmark root of degree `branching`, interior vertices of
/// degree `branching` (one parent, `branching - 1` children) sharing one
/// class, and landmark leaves at `depth`. Every root-to-leaf path has
/// length `depth`, and there are `branching * (branching - 1)^(depth - 1)`
/// of them.
pub fn gen_probe_tree(branching: usize, depth: usize) -> Result<GeneratedWorld, GenError> {
    if branching < 2 || depth == 0 {
        return Err(GenError::ProbeShape);
    }
    let mut edges = Vec::new();
    let mut level = vec![0usize];
    let mut next_id = 1;
    let mut interior = Vec::new();
    for layer in 0..depth {
        let mut children = Vec::new();
        for &parent in &level {
            let (first_port, fanout) = if layer == 0 { (0, branching) } else { (1, branching - 1) };
            for k in 0..fanout {
                let child = next_id;
                next_id += 1;
                edges.push(EdgeSpec::new(parent, child, (first_port + k).to_string(), "0"));
                children.push(child);
            }
        }
        if layer + 1 < depth {
            interior.extend(children.iter().copied());
        }
        level = children;
    }
    let n = next_id;
    let graph = LabeledGraph::build(n, edges, Some(branching))?;
    let mut classes: Vec<Vec<VertexId>> = (0..n).filter(|v| !interior.contains(v)).map(|v| vec![v]).collect();
    if !interior.is_empty() {
        classes.push(interior);
    }
    let partition = LandmarkPartition::new(n, classes)?;
    let meta = json!({ "generator": "probe_tree", "branching": branching, "depth": depth });
    Ok(GeneratedWorld::assemble(graph, partition, meta))
}
