//! Map learning on landmark graphs under directional and recognition
//! uncertainty: world model, robot simulator, learner, learned maps,
//! world generators and an experiment harness.

pub mod cli;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod learner;
pub mod map;
pub mod par;
pub mod rng;
pub mod sim;
