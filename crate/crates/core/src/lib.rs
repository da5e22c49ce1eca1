//! Deterministic UAV swarm simulator: pheromone-driven search mobility, pipe
//! routing with proactive switching, pheromone-mask topology control, and the
//! AODV and relay baselines, with routing and coverage metrics.

pub mod clock;
pub mod config;
pub mod engine;
pub mod error;
pub mod grid;
pub mod batch;
pub mod metrics;
pub mod mobility;
pub mod output;
pub mod pheromone;
pub mod radio;
pub mod relay;
pub mod rng;
pub mod routing;
pub mod scenario;
pub mod topology;

/// Node identifier. The base station is node 0; UAVs are 1..=n.
pub type NodeId = u32;

/// The base station's node id.
pub const BS: NodeId = 0;

pub use config::SimConfig;
pub use error::{Error, Result};
