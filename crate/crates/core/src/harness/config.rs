use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::generators::GeneratorSpec;
use crate::graph::{landmark_parameter, LabeledGraph, LandmarkPartition};
use crate::learner::{GraphSizeBound, LearnParams};
use crate::par::Execution;
use crate::sim::{MovementModel, SensorSuite, World};

fn default_c() -> u32 {
    4
}

fn yes() -> bool {
    true
}

/// Learner settings as written in config files. Unset fields are filled
/// from the world: `r` from its landmark layout, `d` from its maximum
/// degree, `m` as the landmark count minus one, and the size bound from
/// its vertex and edge counts. `alpha` and `gamma` also configure the
/// simulated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub delta_g: f64,
    #[serde(default = "default_c")]
    pub c: u32,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    pub alpha: f64,
    pub gamma: f64,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub reverse_certainty: bool,
    #[serde(default)]
    pub exploration_length: Option<usize>,
}

impl LearnerConfig {
    pub fn resolve(&self, graph: &LabeledGraph, partition: &LandmarkPartition) -> Result<LearnParams, HarnessError> {
        let r = match self.r {
            Some(r) => r,
            None => landmark_parameter(graph, partition)
                .ok_or_else(|| HarnessError::Config("r: the world has no landmarks".into()))?,
        };
        let landmarks = partition.landmarks().len();
        let params = LearnParams {
            delta_g: self.delta_g,
            c: self.c,
            r,
            d: self.d.unwrap_or(graph.max_degree()),
            alpha: self.alpha,
            gamma: self.gamma,
            m: self.m.unwrap_or(landmarks.saturating_sub(1).max(1)),
            exploration_length: self.exploration_length,
            graph_size_bound: GraphSizeBound { vertices: graph.vertex_count(), edges: graph.edge_count() },
            reverse_certainty: self.reverse_certainty,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn build_world(&self, graph: LabeledGraph, partition: LandmarkPartition) -> Result<World, HarnessError> {
        let movement = MovementModel::new(self.alpha)?;
        let sensors = SensorSuite::new(self.gamma, self.reverse_certainty)?;
        Ok(World::new(Arc::new(graph), Arc::new(partition), movement, sensors)?)
    }
}

/// Artifacts written by `write_campaign`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "yes")]
    pub maps: bool,
    #[serde(default)]
    pub traces: bool,
    #[serde(default = "yes")]
    pub stats: bool,
    #[serde(default)]
    pub dot: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { maps: true, traces: false, stats: true, dot: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub learn: LearnerConfig,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_grid, LandmarkPlan};

    #[test]
    fn defaults_come_from_the_world() {
        let w = gen_grid(4, 4, &LandmarkPlan::Explicit(vec![0, 3, 12, 15]), 0).unwrap();
        let cfg: LearnerConfig = serde_json::from_str(r#"{"delta_g": 0.2, "alpha": 0.95, "gamma": 0.9}"#).unwrap();
        let p = cfg.resolve(&w.graph, &w.partition).unwrap();
        assert_eq!((p.c, p.r, p.d, p.m), (4, 2, 4, 3));
        assert_eq!(p.graph_size_bound, GraphSizeBound { vertices: 16, edges: 24 });
        assert_eq!(p.exploration_length(), 8);
    }

    #[test]
    fn unknown_and_missing_fields_are_named() {
        let err = serde_json::from_str::<LearnerConfig>(r#"{"delta_g": 0.2, "alpha": 0.9}"#).unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        let err = serde_json::from_str::<LearnerConfig>(r#"{"delta_g": 0.2, "alpha": 0.9, "gamma": 0.9, "beta": 1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("beta"), "{err}");
    }

    #[test]
    fn bad_values_fail_resolution() {
        let w = gen_grid(3, 3, &LandmarkPlan::All, 0).unwrap();
        let cfg = LearnerConfig {
            delta_g: 0.2,
            c: 2,
            r: None,
            d: None,
            alpha: 0.9,
            gamma: 0.9,
            m: None,
            reverse_certainty: false,
            exploration_length: None,
        };
        assert!(cfg.resolve(&w.graph, &w.partition).is_err());
    }
}
