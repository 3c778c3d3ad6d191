//! The learned map: landmarks plus direction-sequence routes between them,
//! and the global query engine.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ClassId, LabeledGraph, LandmarkPartition};
use crate::learner::LearnParams;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("unknown landmark {0}")]
    UnknownLandmark(ClassId),
    #[error("route {from} -> {to}: endpoint is not a landmark of the map")]
    DanglingRoute { from: ClassId, to: ClassId },
    #[error("route {from} -> {to}: length {length} does not match {labels} labels")]
    LengthMismatch { from: ClassId, to: ClassId, length: usize, labels: usize },
    #[error("route {from} -> {to}: empty label sequence")]
    EmptyRoute { from: ClassId, to: ClassId },
    #[error("malformed map document: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub from: ClassId,
    pub to: ClassId,
    pub labels: Vec<String>,
    pub length: usize,
}

impl Route {
    pub fn new(from: ClassId, to: ClassId, labels: Vec<String>) -> Self {
        let length = labels.len();
        Route { from, to, labels, length }
    }
}

/// Move counts per learning phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PhaseSteps {
    pub identify: u64,
    pub select: u64,
    pub filter: u64,
}

impl PhaseSteps {
    pub fn total(&self) -> u64 {
        self.identify + self.select + self.filter
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub steps: PhaseSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MapDocument {
    landmarks: Vec<ClassId>,
    routes: Vec<Route>,
    params_used: LearnParams,
    provenance: Provenance,
}

/// Landmarks and the routes learned between them. Routes per ordered pair
/// are kept shortest first, without duplicate label sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MapDocument", try_from = "MapDocument")]
pub struct LearnedMap {
    landmarks: BTreeSet<ClassId>,
    routes: BTreeMap<(ClassId, ClassId), Vec<Vec<String>>>,
    params_used: LearnParams,
    provenance: Provenance,
}

/// A global path: landmark waypoints and the concatenated directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathAnswer {
    pub waypoints: Vec<ClassId>,
    pub labels: Vec<String>,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryAnswer {
    Path(PathAnswer),
    NotConnected,
}

impl QueryAnswer {
    pub fn path(&self) -> Option<&PathAnswer> {
        match self {
            QueryAnswer::Path(p) => Some(p),
            QueryAnswer::NotConnected => None,
        }
    }
}

impl LearnedMap {
    pub fn new(
        landmarks: impl IntoIterator<Item = ClassId>,
        routes: impl IntoIterator<Item = Route>,
        params_used: LearnParams,
        provenance: Provenance,
    ) -> Result<Self, MapError> {
        let landmarks: BTreeSet<ClassId> = landmarks.into_iter().collect();
        let mut table: BTreeMap<(ClassId, ClassId), Vec<Vec<String>>> = BTreeMap::new();
        for r in routes {
            if !landmarks.contains(&r.from) || !landmarks.contains(&r.to) {
                return Err(MapError::DanglingRoute { from: r.from, to: r.to });
            }
            if r.length != r.labels.len() {
                return Err(MapError::LengthMismatch {
                    from: r.from,
                    to: r.to,
                    length: r.length,
                    labels: r.labels.len(),
                });
            }
            if r.labels.is_empty() {
                return Err(MapError::EmptyRoute { from: r.from, to: r.to });
            }
            table.entry((r.from, r.to)).or_default().push(r.labels);
        }
        for list in table.values_mut() {
            list.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            list.dedup();
        }
        Ok(LearnedMap { landmarks, routes: table, params_used, provenance })
    }

    pub fn landmarks(&self) -> &BTreeSet<ClassId> {
        &self.landmarks
    }

    pub fn params_used(&self) -> &LearnParams {
        &self.params_used
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Routes from `from` to `to`, shortest first.
    pub fn routes_between(&self, from: ClassId, to: ClassId) -> &[Vec<String>] {
        self.routes.get(&(from, to)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All routes in (from, to, length, labels) order.
    pub fn routes(&self) -> impl Iterator<Item = Route> + '_ {
        self.routes
            .iter()
            .flat_map(|(&(from, to), list)| list.iter().map(move |labels| Route::new(from, to, labels.clone())))
    }

    pub fn route_count(&self) -> usize {
        self.routes.values().map(Vec::len).sum()
    }

    /// Shortest composition of stored routes from `u` to `v`, measured in
    /// moves. Ties go to the lower landmark id.
    pub fn global_path_query(&self, u: ClassId, v: ClassId) -> Result<QueryAnswer, MapError> {
        for x in [u, v] {
            if !self.landmarks.contains(&x) {
                return Err(MapError::UnknownLandmark(x));
            }
        }
        if u == v {
            return Ok(QueryAnswer::Path(PathAnswer { waypoints: vec![u], labels: Vec::new(), length: 0 }));
        }
        let mut dist: BTreeMap<ClassId, usize> = BTreeMap::from([(u, 0)]);
        let mut prev: BTreeMap<ClassId, ClassId> = BTreeMap::new();
        let mut heap = BinaryHeap::from([Reverse((0usize, u))]);
        while let Some(Reverse((d, x))) = heap.pop() {
            if dist.get(&x).is_some_and(|&best| d > best) {
                continue;
            }
            if x == v {
                break;
            }
            for (&(_, y), list) in self.routes.range((x, ClassId(0))..=(x, ClassId(u32::MAX))) {
                let nd = d + list[0].len();
                if dist.get(&y).is_none_or(|&best| nd < best) {
                    dist.insert(y, nd);
                    prev.insert(y, x);
                    heap.push(Reverse((nd, y)));
                }
            }
        }
        let Some(&length) = dist.get(&v) else {
            return Ok(QueryAnswer::NotConnected);
        };
        let mut waypoints = vec![v];
        while let Some(&p) = prev.get(waypoints.last().expect("non-empty")) {
            waypoints.push(p);
            if p == u {
                break;
            }
        }
        waypoints.reverse();
        let labels = waypoints.windows(2).flat_map(|w| self.routes_between(w[0], w[1])[0].iter().cloned()).collect();
        Ok(QueryAnswer::Path(PathAnswer { waypoints, labels, length }))
    }

    /// Graphviz rendering of the landmark route graph; each directed edge
    /// carries the length of the shortest stored route.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph routes {\n");
        for l in &self.landmarks {
            let _ = writeln!(out, "  \"{l}\" [shape=box];");
        }
        for (&(from, to), list) in &self.routes {
            let _ = writeln!(out, "  \"{from}\" -> \"{to}\" [label=\"{}\"];", list[0].len());
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let doc: MapDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

impl From<LearnedMap> for MapDocument {
    fn from(map: LearnedMap) -> Self {
        let routes = map.routes().collect();
        MapDocument {
            landmarks: map.landmarks.into_iter().collect(),
            routes,
            params_used: map.params_used,
            provenance: map.provenance,
        }
    }
}

impl TryFrom<MapDocument> for LearnedMap {
    type Error = MapError;

    fn try_from(doc: MapDocument) -> Result<Self, MapError> {
        LearnedMap::new(doc.landmarks, doc.routes, doc.params_used, doc.provenance)
    }
}

/// Answer length over the true shortest distance between two landmarks.
/// `None` when either class is not a landmark of the world, the query is
/// not answered, or `u == v`.
pub fn stretch_ratio(
    map: &LearnedMap,
    graph: &LabeledGraph,
    partition: &LandmarkPartition,
    u: ClassId,
    v: ClassId,
) -> Option<f64> {
    let (a, b) = (partition.landmark_vertex(u)?, partition.landmark_vertex(v)?);
    let optimal = graph.bfs_distances(a)[b]?;
    if optimal == 0 {
        return None;
    }
    let answer = map.global_path_query(u, v).ok()?;
    Some(answer.path()?.length as f64 / optimal as f64)
}

/// Replays an answer with certain movement on the true graph and checks
/// that it ends at `v`.
pub fn answer_is_valid(
    answer: &PathAnswer,
    graph: &LabeledGraph,
    partition: &LandmarkPartition,
    u: ClassId,
    v: ClassId,
) -> bool {
    match (partition.landmark_vertex(u), partition.landmark_vertex(v)) {
        (Some(a), Some(b)) => graph.follow_names(a, &answer.labels) == Some(b),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::GraphSizeBound;

    fn params() -> LearnParams {
        LearnParams {
            delta_g: 0.1,
            c: 4,
            r: 1,
            d: 4,
            alpha: 0.9,
            gamma: 0.9,
            m: 4,
            exploration_length: None,
            graph_size_bound: GraphSizeBound { vertices: 16, edges: 24 },
            reverse_certainty: false,
        }
    }

    fn labels(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    fn four_landmark_map() -> LearnedMap {
        let (a, b, c, d) = (ClassId(0), ClassId(1), ClassId(2), ClassId(3));
        LearnedMap::new(
            [a, b, c, d],
            [
                Route::new(a, b, labels("NN")),
                Route::new(b, c, labels("EE")),
                Route::new(c, d, labels("N")),
                Route::new(a, d, labels("NNNNNNNN")),
            ],
            params(),
            Provenance { seed: 1, steps: PhaseSteps::default() },
        )
        .unwrap()
    }

    #[test]
    fn identity_query() {
        let m = four_landmark_map();
        let ans = m.global_path_query(ClassId(2), ClassId(2)).unwrap();
        assert_eq!(ans.path().unwrap().length, 0);
        assert!(ans.path().unwrap().labels.is_empty());
    }

    #[test]
    fn composes_through_waypoints() {
        let m = four_landmark_map();
        let ans = m.global_path_query(ClassId(0), ClassId(3)).unwrap();
        let p = ans.path().unwrap();
        assert_eq!(p.waypoints, vec![ClassId(0), ClassId(1), ClassId(2), ClassId(3)]);
        assert_eq!(p.labels, labels("NNEEN"));
        assert_eq!(p.length, 5);
    }

    #[test]
    fn directed_routes_and_disconnection() {
        let m = four_landmark_map();
        assert_eq!(m.global_path_query(ClassId(3), ClassId(0)).unwrap(), QueryAnswer::NotConnected);
        assert!(matches!(m.global_path_query(ClassId(0), ClassId(9)), Err(MapError::UnknownLandmark(_))));
    }

    #[test]
    fn routes_sorted_and_deduplicated() {
        let (a, b) = (ClassId(0), ClassId(1));
        let m = LearnedMap::new(
            [a, b],
            [Route::new(a, b, labels("NNN")), Route::new(a, b, labels("E")), Route::new(a, b, labels("NNN"))],
            params(),
            Provenance { seed: 0, steps: PhaseSteps::default() },
        )
        .unwrap();
        assert_eq!(m.routes_between(a, b), &[labels("E"), labels("NNN")]);
        assert_eq!(m.route_count(), 2);
    }

    #[test]
    fn rejects_dangling_routes() {
        let r = LearnedMap::new(
            [ClassId(0)],
            [Route::new(ClassId(0), ClassId(1), labels("N"))],
            params(),
            Provenance { seed: 0, steps: PhaseSteps::default() },
        );
        assert!(matches!(r, Err(MapError::DanglingRoute { .. })));
    }

    #[test]
    fn json_round_trip() {
        let m = four_landmark_map();
        let back = LearnedMap::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let empty = LearnedMap::new([], [], params(), Provenance { seed: 0, steps: PhaseSteps::default() }).unwrap();
        let text = empty.to_json();
        assert_eq!(LearnedMap::from_json(&text).unwrap(), empty);
    }

    #[test]
    fn corrupted_documents_fail_with_location() {
        let text = four_landmark_map().to_json();
        let truncated = &text[..text.len() / 2];
        let err = LearnedMap::from_json(truncated).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let bad_length = text.replacen("\"length\": 2", "\"length\": 7", 1);
        assert!(matches!(LearnedMap::from_json(&bad_length), Err(MapError::LengthMismatch { .. })));
    }

    #[test]
    fn dot_has_route_lengths() {
        let dot = four_landmark_map().to_dot();
        assert!(dot.contains("\"L0\" -> \"L1\" [label=\"2\"]"));
        assert!(dot.contains("\"L0\" -> \"L3\" [label=\"8\"]"));
    }
}
