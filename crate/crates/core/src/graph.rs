//! Ground-truth world: edge-labeled undirected graphs, recognition
//! partitions and the breadth-first oracles used to score learned maps.
//!
//! Labels are interned per graph. A [`LabelId`] is only meaningful for the
//! graph that issued it; use [`LabeledGraph::label_name`] and
//! [`LabeledGraph::label_id`] to cross that boundary.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;

/// Interned edge label, local to one [`LabeledGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelId(pub u16);

/// Recognition class. Classes are numbered by their position in the
/// partition's class list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

impl ClassId {
    /// Parses `L3` or `3`.
    pub fn parse(s: &str) -> Option<ClassId> {
        let digits = s.strip_prefix('L').or_else(|| s.strip_prefix('l')).unwrap_or(s);
        digits.parse().ok().map(ClassId)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("edge {index}: vertex {vertex} out of range (graph has {count} vertices)")]
    VertexOutOfRange { index: usize, vertex: VertexId, count: usize },
    #[error("edge {index}: self-loop at vertex {vertex}")]
    SelfLoop { index: usize, vertex: VertexId },
    #[error("edge {index}: duplicate edge between {u} and {v}")]
    DuplicateEdge { index: usize, u: VertexId, v: VertexId },
    #[error("vertex {vertex}: label {label:?} used on more than one edge")]
    DuplicateLabel { vertex: VertexId, label: String },
    #[error("edge {index}: empty label")]
    EmptyLabel { index: usize },
    #[error("vertex {vertex} has degree {degree}, above the bound {bound}")]
    DegreeTooHigh { vertex: VertexId, degree: usize, bound: usize },
    #[error("graph is disconnected: vertex {unreachable} is unreachable from vertex 0")]
    Disconnected { unreachable: VertexId },
    #[error("too many distinct labels (limit {limit})")]
    TooManyLabels { limit: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("class {class} is empty")]
    EmptyClass { class: usize },
    #[error("vertex {vertex} out of range")]
    VertexOutOfRange { vertex: VertexId },
    #[error("vertex {vertex} appears in more than one class")]
    Overlap { vertex: VertexId },
    #[error("vertex {vertex} is not in any class")]
    Uncovered { vertex: VertexId },
}

/// One undirected edge as it appears in world files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: VertexId,
    pub v: VertexId,
    pub label_u: String,
    pub label_v: String,
}

impl EdgeSpec {
    pub fn new(u: VertexId, v: VertexId, label_u: impl Into<String>, label_v: impl Into<String>) -> Self {
        EdgeSpec { u, v, label_u: label_u.into(), label_v: label_v.into() }
    }
}

/// An incident edge seen from one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Port {
    /// Label of the edge at this vertex.
    pub label: LabelId,
    /// Far endpoint.
    pub to: VertexId,
    /// Label of the same edge at the far endpoint.
    pub back: LabelId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    alphabet: Vec<String>,
    label_index: HashMap<String, LabelId>,
    adjacency: Vec<Vec<Port>>,
    edges: Vec<EdgeSpec>,
    max_degree: usize,
}

impl LabeledGraph {
    /// Validates and builds a graph. `degree_bound`, when given, is the
    /// maximum degree `d`; otherwise the observed maximum is used.
    pub fn build(vertex_count: usize, edges: Vec<EdgeSpec>, degree_bound: Option<usize>) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut alphabet: Vec<String> = Vec::new();
        let mut label_index: HashMap<String, LabelId> = HashMap::new();
        let mut intern = |s: &str| -> Result<LabelId, GraphError> {
            if let Some(&id) = label_index.get(s) {
                return Ok(id);
            }
            if alphabet.len() >= u16::MAX as usize {
                return Err(GraphError::TooManyLabels { limit: u16::MAX as usize });
            }
            let id = LabelId(alphabet.len() as u16);
            alphabet.push(s.to_owned());
            label_index.insert(s.to_owned(), id);
            Ok(id)
        };

        let mut adjacency: Vec<Vec<Port>> = vec![Vec::new(); vertex_count];
        let mut seen_pairs = BTreeSet::new();
        for (index, e) in edges.iter().enumerate() {
            for &vertex in &[e.u, e.v] {
                if vertex >= vertex_count {
                    return Err(GraphError::VertexOutOfRange { index, vertex, count: vertex_count });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop { index, vertex: e.u });
            }
            if e.label_u.is_empty() || e.label_v.is_empty() {
                return Err(GraphError::EmptyLabel { index });
            }
            if !seen_pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(GraphError::DuplicateEdge { index, u: e.u, v: e.v });
            }
            let lu = intern(&e.label_u)?;
            let lv = intern(&e.label_v)?;
            for (at, label) in [(e.u, lu), (e.v, lv)] {
                if adjacency[at].iter().any(|p| p.label == label) {
                    let label = if at == e.u { &e.label_u } else { &e.label_v };
                    return Err(GraphError::DuplicateLabel { vertex: at, label: label.clone() });
                }
            }
            adjacency[e.u].push(Port { label: lu, to: e.v, back: lv });
            adjacency[e.v].push(Port { label: lv, to: e.u, back: lu });
        }

        let observed = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let max_degree = match degree_bound {
            Some(bound) => {
                if let Some((vertex, ports)) = adjacency.iter().enumerate().find(|(_, p)| p.len() > bound) {
                    return Err(GraphError::DegreeTooHigh { vertex, degree: ports.len(), bound });
                }
                bound
            }
            None => observed,
        };

        let graph = LabeledGraph { alphabet, label_index, adjacency, edges, max_degree };
        let dist = graph.bfs_distances(0);
        if let Some(unreachable) = dist.iter().position(Option::is_none) {
            return Err(GraphError::Disconnected { unreachable });
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn ports(&self, v: VertexId) -> &[Port] {
        &self.adjacency[v]
    }

    /// The non-null labels at `v`, in port order.
    pub fn labels_at(&self, v: VertexId) -> Vec<LabelId> {
        self.adjacency[v].iter().map(|p| p.label).collect()
    }

    /// Deterministic move: the vertex across the edge labeled `label` at `v`,
    /// or `None` (the null label case) when `v` has no such edge.
    pub fn neighbor(&self, v: VertexId, label: LabelId) -> Option<VertexId> {
        self.port(v, label).map(|p| p.to)
    }

    pub fn port(&self, v: VertexId, label: LabelId) -> Option<&Port> {
        self.adjacency[v].iter().find(|p| p.label == label)
    }

    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.label_index.get(name).copied()
    }

    pub fn label_name(&self, label: LabelId) -> &str {
        &self.alphabet[label.0 as usize]
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Follows `labels` from `start` without noise. Returns `None` as soon as
    /// a label is missing at the current vertex.
    pub fn follow(&self, start: VertexId, labels: &[LabelId]) -> Option<VertexId> {
        labels.iter().try_fold(start, |v, &l| self.neighbor(v, l))
    }

    /// Same as [`follow`](Self::follow) for label names.
    pub fn follow_names<S: AsRef<str>>(&self, start: VertexId, labels: &[S]) -> Option<VertexId> {
        labels.iter().try_fold(start, |v, l| self.neighbor(v, self.label_id(l.as_ref())?))
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: VertexId) -> Vec<Option<usize>> {
        self.multi_source_bfs(std::iter::once(source))
    }

    pub(crate) fn multi_source_bfs(&self, sources: impl IntoIterator<Item = VertexId>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].expect("queued vertices have a distance");
            for p in &self.adjacency[v] {
                if dist[p.to].is_none() {
                    dist[p.to] = Some(dv + 1);
                    queue.push_back(p.to);
                }
            }
        }
        dist
    }

    /// A shortest label sequence from `u` to `v`; empty when `u == v`.
    /// Ties are broken by port order.
    pub fn oracle_shortest_path(&self, u: VertexId, v: VertexId) -> Vec<LabelId> {
        if u == v {
            return Vec::new();
        }
        let mut parent: Vec<Option<(VertexId, LabelId)>> = vec![None; self.vertex_count()];
        let mut visited = vec![false; self.vertex_count()];
        visited[u] = true;
        let mut queue = VecDeque::from([u]);
        'search: while let Some(x) = queue.pop_front() {
            for p in &self.adjacency[x] {
                if !visited[p.to] {
                    visited[p.to] = true;
                    parent[p.to] = Some((x, p.label));
                    if p.to == v {
                        break 'search;
                    }
                    queue.push_back(p.to);
                }
            }
        }
        let mut labels = Vec::new();
        let mut at = v;
        while let Some((prev, label)) = parent[at] {
            labels.push(label);
            at = prev;
        }
        labels.reverse();
        labels
    }

    /// Largest shortest-path distance over all vertex pairs.
    pub fn diameter(&self) -> usize {
        (0..self.vertex_count())
            .map(|s| self.bfs_distances(s).into_iter().flatten().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Partition of the vertices into recognition classes. Singleton classes
/// are the landmarks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkPartition {
    classes: Vec<Vec<VertexId>>,
    class_of: Vec<ClassId>,
}

impl LandmarkPartition {
    pub fn new(vertex_count: usize, classes: Vec<Vec<VertexId>>) -> Result<Self, PartitionError> {
        let mut class_of: Vec<Option<ClassId>> = vec![None; vertex_count];
        for (ci, members) in classes.iter().enumerate() {
            if members.is_empty() {
                return Err(PartitionError::EmptyClass { class: ci });
            }
            for &v in members {
                let slot = class_of.get_mut(v).ok_or(PartitionError::VertexOutOfRange { vertex: v })?;
                if slot.is_some() {
                    return Err(PartitionError::Overlap { vertex: v });
                }
                *slot = Some(ClassId(ci as u32));
            }
        }
        let class_of = class_of
            .into_iter()
            .enumerate()
            .map(|(v, c)| c.ok_or(PartitionError::Uncovered { vertex: v }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LandmarkPartition { classes, class_of })
    }

    /// Every vertex in its own class.
    pub fn all_landmarks(vertex_count: usize) -> Self {
        let classes = (0..vertex_count).map(|v| vec![v]).collect();
        Self::new(vertex_count, classes).expect("singleton partition is valid")
    }

    /// Landmarks get singleton classes (in the given order); every other
    /// vertex shares one class.
    pub fn from_landmarks(vertex_count: usize, landmarks: &[VertexId]) -> Result<Self, PartitionError> {
        let mut is_landmark = vec![false; vertex_count];
        let mut classes = Vec::new();
        for &v in landmarks {
            let slot = is_landmark.get_mut(v).ok_or(PartitionError::VertexOutOfRange { vertex: v })?;
            if *slot {
                return Err(PartitionError::Overlap { vertex: v });
            }
            *slot = true;
            classes.push(vec![v]);
        }
        let rest: Vec<VertexId> = (0..vertex_count).filter(|&v| !is_landmark[v]).collect();
        if !rest.is_empty() {
            classes.push(rest);
        }
        Self::new(vertex_count, classes)
    }

    pub fn classes(&self) -> &[Vec<VertexId>] {
        &self.classes
    }

    pub fn class_of(&self, v: VertexId) -> ClassId {
        self.class_of[v]
    }

    pub fn members(&self, class: ClassId) -> &[VertexId] {
        &self.classes[class.0 as usize]
    }

    pub fn is_landmark(&self, v: VertexId) -> bool {
        self.classes[self.class_of[v].0 as usize].len() == 1
    }

    pub fn is_landmark_class(&self, class: ClassId) -> bool {
        self.classes.get(class.0 as usize).is_some_and(|m| m.len() == 1)
    }

    /// The vertex of a landmark class, `None` for non-singleton or unknown classes.
    pub fn landmark_vertex(&self, class: ClassId) -> Option<VertexId> {
        match self.classes.get(class.0 as usize).map(Vec::as_slice) {
            Some([v]) => Some(*v),
            _ => None,
        }
    }

    /// The landmark set D, ascending.
    pub fn landmarks(&self) -> Vec<VertexId> {
        (0..self.class_of.len()).filter(|&v| self.is_landmark(v)).collect()
    }

    /// Landmark class ids, ascending.
    pub fn landmark_classes(&self) -> Vec<ClassId> {
        (0..self.classes.len() as u32).map(ClassId).filter(|&c| self.is_landmark_class(c)).collect()
    }

    /// The indistinguishable set I, ascending.
    pub fn indistinguishable(&self) -> Vec<VertexId> {
        (0..self.class_of.len()).filter(|&v| !self.is_landmark(v)).collect()
    }
}

/// Landmark distribution parameter: the largest distance from an
/// indistinguishable vertex to its nearest landmark. `Some(0)` when every
/// vertex is a landmark, `None` when there are no landmarks.
pub fn landmark_parameter(graph: &LabeledGraph, partition: &LandmarkPartition) -> Option<usize> {
    let landmarks = partition.landmarks();
    if landmarks.is_empty() {
        return None;
    }
    let dist = graph.multi_source_bfs(landmarks);
    dist.into_iter().map(|d| d.expect("graph is connected")).max()
}

/// On-disk world description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldFile {
    pub vertices: usize,
    pub edges: Vec<EdgeSpec>,
    pub classes: Vec<Vec<VertexId>>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

#[derive(Debug, Error)]
pub enum WorldFileError {
    #[error("malformed world document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error("invalid classes: {0}")]
    Partition(#[from] PartitionError),
}

impl WorldFile {
    /// Records the graph's degree bound as `meta.max_degree` unless `meta`
    /// already carries one.
    pub fn from_parts(graph: &LabeledGraph, partition: &LandmarkPartition, mut meta: serde_json::Value) -> Self {
        if meta.is_null() {
            meta = serde_json::json!({});
        }
        if let Some(obj) = meta.as_object_mut() {
            obj.entry("max_degree").or_insert(graph.max_degree().into());
        }
        WorldFile {
            vertices: graph.vertex_count(),
            edges: graph.edges().to_vec(),
            classes: partition.classes().to_vec(),
            meta,
        }
    }

    /// Builds and validates the graph and partition. A `max_degree` entry in
    /// `meta` is used as the degree bound.
    pub fn into_parts(self) -> Result<(LabeledGraph, LandmarkPartition), WorldFileError> {
        let bound = self.meta.get("max_degree").and_then(|d| d.as_u64()).map(|d| d as usize);
        let graph = LabeledGraph::build(self.vertices, self.edges, bound)?;
        let partition = LandmarkPartition::new(self.vertices, self.classes)?;
        Ok((graph, partition))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, WorldFileError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Graphviz rendering: one edge per graph edge, annotated `label_u/label_v`;
/// landmarks drawn as boxes.
pub fn world_to_dot(graph: &LabeledGraph, partition: &LandmarkPartition) -> String {
    let mut out = String::from("graph world {\n");
    for v in 0..graph.vertex_count() {
        let class = partition.class_of(v);
        if partition.is_landmark(v) {
            let _ = writeln!(out, "  {v} [label=\"{v} ({class})\", shape=box];");
        } else {
            let _ = writeln!(out, "  {v} [label=\"{v} (c{})\", shape=ellipse];", class.0);
        }
    }
    for e in graph.edges() {
        let _ =
            writeln!(out, "  {} -- {} [label=\"{}/{}\"];", e.u, e.v, escape_dot(&e.label_u), escape_dot(&e.label_v));
    }
    out.push_str("}\n");
    out
}

pub(crate) fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize) -> LabeledGraph {
        let id = |x: usize, y: usize| y * w + x;
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    edges.push(EdgeSpec::new(id(x, y), id(x + 1, y), "E", "W"));
                }
                if y + 1 < h {
                    edges.push(EdgeSpec::new(id(x, y), id(x, y + 1), "N", "S"));
                }
            }
        }
        LabeledGraph::build(w * h, edges, Some(4)).unwrap()
    }

    #[test]
    fn smallest_graph() {
        let g = LabeledGraph::build(2, vec![EdgeSpec::new(0, 1, "a", "b")], None).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.neighbor(0, g.label_id("a").unwrap()), Some(1));
        assert_eq!(g.neighbor(1, g.label_id("b").unwrap()), Some(0));
        assert_eq!(g.neighbor(0, g.label_id("b").unwrap()), None);
    }

    #[test]
    fn grid_cell() {
        let g = grid(2, 2);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        for v in 0..4 {
            assert_eq!(g.degree(v), 2);
        }
    }

    #[test]
    fn rejects_duplicate_label() {
        let err = LabeledGraph::build(3, vec![EdgeSpec::new(0, 1, "a", "x"), EdgeSpec::new(0, 2, "a", "y")], None)
            .unwrap_err();
        assert_eq!(err, GraphError::DuplicateLabel { vertex: 0, label: "a".into() });
    }

    #[test]
    fn rejects_parallel_edges_self_loops_and_disconnection() {
        let dup = LabeledGraph::build(2, vec![EdgeSpec::new(0, 1, "a", "b"), EdgeSpec::new(1, 0, "c", "d")], None);
        assert!(matches!(dup, Err(GraphError::DuplicateEdge { .. })));
        let looped = LabeledGraph::build(2, vec![EdgeSpec::new(0, 0, "a", "b")], None);
        assert!(matches!(looped, Err(GraphError::SelfLoop { .. })));
        let split = LabeledGraph::build(3, vec![EdgeSpec::new(0, 1, "a", "b")], None);
        assert_eq!(split.unwrap_err(), GraphError::Disconnected { unreachable: 2 });
        let isolated = LabeledGraph::build(2, vec![], None);
        assert!(matches!(isolated, Err(GraphError::Disconnected { .. })));
    }

    #[test]
    fn rejects_degree_over_bound() {
        let edges = vec![EdgeSpec::new(0, 1, "a", "x"), EdgeSpec::new(0, 2, "b", "x"), EdgeSpec::new(0, 3, "c", "x")];
        let err = LabeledGraph::build(4, edges, Some(2)).unwrap_err();
        assert_eq!(err, GraphError::DegreeTooHigh { vertex: 0, degree: 3, bound: 2 });
    }

    #[test]
    fn neighbor_and_degree_on_grid() {
        let g = grid(3, 3);
        let north = g.label_id("N").unwrap();
        // (1,1) -> (1,2)
        assert_eq!(g.neighbor(4, north), Some(7));
        assert_eq!(g.degree(4), 4);
        assert_eq!(g.degree(0), 2);
        let names: BTreeSet<&str> = g.labels_at(4).into_iter().map(|l| g.label_name(l)).collect();
        assert_eq!(names, BTreeSet::from(["N", "S", "E", "W"]));
        // top row has no North edge
        assert_eq!(g.neighbor(7, north), None);
    }

    #[test]
    fn path_end_vertex() {
        let g =
            LabeledGraph::build(3, vec![EdgeSpec::new(0, 1, "a", "b"), EdgeSpec::new(1, 2, "c", "d")], None).unwrap();
        assert_eq!(g.labels_at(0).len(), 1);
        assert_eq!(g.neighbor(0, g.labels_at(0)[0]), Some(1));
    }

    #[test]
    fn landmark_parameter_cases() {
        let g = grid(5, 5);
        let all = LandmarkPartition::all_landmarks(25);
        assert_eq!(landmark_parameter(&g, &all), Some(0));
        let center = LandmarkPartition::from_landmarks(25, &[12]).unwrap();
        assert_eq!(landmark_parameter(&g, &center), Some(4));

        // A lone middle vertex would form a singleton class and so be a
        // landmark itself; two middle vertices share the non-landmark class.
        let path4 = LabeledGraph::build(
            4,
            vec![EdgeSpec::new(0, 1, "a", "b"), EdgeSpec::new(1, 2, "c", "d"), EdgeSpec::new(2, 3, "e", "f")],
            None,
        )
        .unwrap();
        let p4 = LandmarkPartition::from_landmarks(4, &[0, 3]).unwrap();
        assert_eq!(landmark_parameter(&path4, &p4), Some(1));
    }

    #[test]
    fn no_landmarks_means_no_parameter() {
        let g = grid(2, 2);
        let p = LandmarkPartition::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(landmark_parameter(&g, &p), None);
    }

    #[test]
    fn partition_validation() {
        assert_eq!(
            LandmarkPartition::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap_err(),
            PartitionError::Overlap { vertex: 1 }
        );
        assert_eq!(LandmarkPartition::new(3, vec![vec![0, 1]]).unwrap_err(), PartitionError::Uncovered { vertex: 2 });
        assert_eq!(
            LandmarkPartition::new(3, vec![vec![0, 1, 2], vec![]]).unwrap_err(),
            PartitionError::EmptyClass { class: 1 }
        );
    }

    #[test]
    fn oracle_paths() {
        let g = grid(3, 3);
        assert!(g.oracle_shortest_path(4, 4).is_empty());
        let p = g.oracle_shortest_path(0, 6);
        assert_eq!(p.len(), 2);
        assert_eq!(g.follow(0, &p), Some(6));
        let n = g.label_id("N").unwrap();
        assert_eq!(p, vec![n, n]);
        let e = g.oracle_shortest_path(0, 1);
        assert_eq!(e, vec![g.label_id("E").unwrap()]);
    }

    #[test]
    fn world_file_round_trip_and_dot() {
        let g = grid(2, 2);
        let p = LandmarkPartition::from_landmarks(4, &[0, 3]).unwrap();
        let wf = WorldFile::from_parts(&g, &p, serde_json::json!({"kind": "grid"}));
        let back = WorldFile::from_json(&wf.to_json()).unwrap();
        let (g2, p2) = back.into_parts().unwrap();
        assert_eq!(g2, g);
        assert_eq!(p2, p);
        let dot = world_to_dot(&g, &p);
        assert_eq!(dot.matches(" -- ").count(), 4);
        assert_eq!(dot.matches("shape=box").count(), 2);
        assert!(dot.contains("label=\"E/W\""));
    }

    #[test]
    fn class_id_parse() {
        assert_eq!(ClassId::parse("L3"), Some(ClassId(3)));
        assert_eq!(ClassId::parse("7"), Some(ClassId(7)));
        assert_eq!(ClassId::parse("X"), None);
        assert_eq!(ClassId(4).to_string(), "L4");
    }
}
