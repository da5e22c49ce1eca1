//! Route metrics and selection, gated discovery, and pipe maintenance.

pub mod discovery;
pub mod pipe;
pub mod route;

pub use discovery::{discover_route, Discovered, Discovery, DiscoveryMode, DiscoveryParams, NetView};
pub use pipe::{
    enumerate_pipe_routes, form_pipe, maybe_switch, shortest_feasible_hc, EnumLimits, PipeNode, PipeTopology, SwitchDecision, SwitchOutcome,
    TopologyView, Triggers,
};
pub use route::{
    feasible, route_cost, route_energy, route_lifetime, route_metrics, select_active_route, select_shortest, Candidate,
    CostParams, Route, RouteMetrics, Selection, SelectionParams,
};
