//! Experiment orchestration: PAC trial campaigns, bound checks and
//! separation measurements.

pub mod campaign;
pub mod config;
pub mod stats;
pub mod suites;

use thiserror::Error;

use crate::generators::GenError;
use crate::graph::WorldFileError;
use crate::learner::LearnError;
use crate::map::MapError;
use crate::sim::SimError;

pub use campaign::{
    evaluate_map, landmark_edges, learned_edges, run_pac_campaign, summary_json, summary_text, write_campaign,
    write_stats_csv, CampaignReport, QueryResult, TrialReport,
};
pub use config::{ExperimentConfig, LearnerConfig, OutputSpec};
pub use suites::{
    run_bound_suite, run_separation_suite, BoundReport, BoundSuiteConfig, SeparationConfig, SeparationReport,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    World(#[from] WorldFileError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
