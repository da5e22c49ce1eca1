//! Browser front end: one simulation behind a small handle that a canvas page
//! can step and read flat arrays from.

use wasm_bindgen::prelude::*;

use pipesim::engine::{RunSpec, Simulation};
use pipesim::mobility::Role;
use pipesim::scenario::{scenario_by_name, Scheme};
use pipesim::SimConfig;

/// Separator between routes in [`Swarm::routes`].
pub const ROUTE_END: u32 = u32::MAX;

/// Role codes returned by [`Swarm::roles`].
pub const ROLE_SEARCHER: u8 = 0;
pub const ROLE_TARGET: u8 = 1;
pub const ROLE_RELAY: u8 = 2;
pub const ROLE_BS: u8 = 3;
pub const ROLE_DEAD: u8 = 4;

#[wasm_bindgen]
pub struct Swarm {
    sim: Simulation,
}

impl Swarm {
    pub fn create(scenario: &str, scheme: &str, n_uavs: u32, seed: u64) -> pipesim::Result<Swarm> {
        let scheme: Scheme = scheme.parse()?;
        let config = SimConfig { seed, n_uavs, ..SimConfig::default() };
        let sim = Simulation::new(&RunSpec::new(scenario_by_name(scenario)?, scheme, config))?;
        Ok(Swarm { sim })
    }

    pub fn simulation(&self) -> &Simulation {
        &self.sim
    }
}

#[wasm_bindgen]
impl Swarm {
    /// `scheme` is one of AODV, Pipe, TC-Pipe, Relay; `scenario` one of C1–C4.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: &str, scheme: &str, n_uavs: u32, seed: u32) -> Result<Swarm, JsError> {
        Swarm::create(scenario, scheme, n_uavs, u64::from(seed)).map_err(|e| JsError::new(&e.to_string()))
    }

    /// Advances simulated time by `seconds` (stops at the horizon).
    pub fn advance(&mut self, seconds: f64) {
        let until = self.sim.now() + seconds;
        self.sim.run_until(until);
    }

    pub fn time(&self) -> f64 {
        self.sim.now()
    }

    pub fn horizon(&self) -> f64 {
        self.sim.config().total_s()
    }

    pub fn finished(&self) -> bool {
        self.sim.is_finished()
    }

    pub fn scheme(&self) -> String {
        self.sim.scheme().as_str().to_string()
    }

    pub fn width_m(&self) -> f64 {
        self.sim.map().width_m
    }

    pub fn height_m(&self) -> f64 {
        self.sim.map().height_m
    }

    pub fn cols(&self) -> u32 {
        self.sim.map().cols()
    }

    pub fn rows(&self) -> u32 {
        self.sim.map().rows()
    }

    /// `x, y` per node, indexed by node id (the BS is node 0).
    pub fn positions(&self) -> Vec<f32> {
        self.sim.uavs().iter().flat_map(|u| [u.pos.x as f32, u.pos.y as f32]).collect()
    }

    /// One role code per node, indexed by node id.
    pub fn roles(&self) -> Vec<u8> {
        self.sim
            .uavs()
            .iter()
            .map(|u| match (u.alive, u.role) {
                (false, _) => ROLE_DEAD,
                (true, Role::Searcher) => ROLE_SEARCHER,
                (true, Role::TargetUav) => ROLE_TARGET,
                (true, Role::Relay) => ROLE_RELAY,
                (true, Role::Bs) => ROLE_BS,
            })
            .collect()
    }

    /// Installed routes as node ids, source first, each closed by `ROUTE_END`.
    pub fn routes(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for r in self.sim.routes().into_iter().flatten() {
            out.extend_from_slice(r);
            out.push(ROUTE_END);
        }
        out
    }

    pub fn flows(&self) -> u32 {
        self.sim.routes().len() as u32
    }

    pub fn routed_flows(&self) -> u32 {
        self.sim.routes().iter().filter(|r| r.is_some()).count() as u32
    }

    /// `x, y` per target.
    pub fn targets(&self) -> Vec<f32> {
        self.sim.targets().iter().flat_map(|p| [p.x as f32, p.y as f32]).collect()
    }

    /// Raw pheromone per cell, row-major.
    pub fn pheromone(&self) -> Vec<f32> {
        self.sim.field().values().iter().map(|&v| v as f32).collect()
    }

    /// Row-major indices of cells inside any mask.
    pub fn masked_cells(&self) -> Vec<u32> {
        let map = self.sim.map();
        let mut cells: Vec<u32> =
            self.sim.masks().flat_map(|(_, m)| m.cells.iter().map(|c| map.linear(*c) as u32)).collect();
        cells.sort_unstable();
        cells.dedup();
        cells
    }

    pub fn mask_count(&self) -> u32 {
        self.sim.masks().count() as u32
    }

    /// Percent of cells scanned at least once so far.
    pub fn coverage(&self) -> f64 {
        let scans = self.sim.scans();
        100.0 * scans.iter().filter(|&&s| s > 0).count() as f64 / scans.len().max(1) as f64
    }
}
