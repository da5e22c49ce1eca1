use thiserror::Error;

use crate::grid::CellIndex;
use crate::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("position ({x}, {y}) lies outside the {width} x {height} m map")]
    OutOfBounds { x: f64, y: f64, width: f64, height: f64 },

    #[error("cell ({}, {}) lies outside the grid", .0.col, .0.row)]
    CellOutOfBounds(CellIndex),

    #[error("rectangle axis has zero length")]
    DegenerateAxis,

    #[error("rectangle extents must be positive (long {long_m} m, short {short_m} m)")]
    InvalidExtent { long_m: f64, short_m: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("node {0} on the route is not alive")]
    DeadRouteNode(NodeId),

    #[error("empty feasible route set")]
    NoFeasibleRoute,

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error("config serialize error: {0}")]
    ConfigSerialize(#[from] toml::ser::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
