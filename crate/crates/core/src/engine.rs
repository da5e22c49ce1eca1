//! The single-run simulation loop.
//!
//! Kinematics, physical link state and the data plane advance every `dt`;
//! Hello exchange, routing, topology control and waypoint decisions run on
//! protocol ticks. Protocol logic reads only Hello-derived state, while link
//! breaks and packet fates follow ground truth.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::Rng;

use crate::clock::SimClock;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::grid::{AreaMap, CellIndex, Vec2};
use crate::metrics::{self, MetricsReport, SeriesRow};
use crate::mobility::{
    orbit_step, select_waypoint, step_kinematics, NeighborHint, Orbit, Role, UavState, WaypointDecision, WaypointParams,
};
use crate::pheromone::{MaskRect, PheromoneField};
use crate::radio::hello::{hello_bits, NO_ROUTE_HOPS, PATCH_SIDE};
use crate::radio::{active_links, estimate_llt, interfering_links, DataPlane, DataPlaneParams, NeighborEntry, NeighborTable};
use crate::relay::RelayBook;
use crate::rng::{stream, SimRng, Stream};
use crate::routing::{
    discover_route, form_pipe, maybe_switch, select_active_route, Candidate, DiscoveryMode, DiscoveryParams,
    EnumLimits, NetView, RouteMetrics, SelectionParams, SwitchDecision, TopologyView,
};
use crate::scenario::{FailurePlan, Scenario, Scheme};
use crate::topology::{self, MaskEvent};
use crate::{NodeId, BS};

/// Sampling period of the long-format time series.
pub const SERIES_INTERVAL_S: f64 = 50.0;

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scenario: Scenario,
    pub scheme: Scheme,
    /// Percentage of UAVs that fail during the measurement window.
    pub failure_pct: f64,
    pub config: SimConfig,
    /// Record per-tick positions for trajectory export.
    pub trace: bool,
}

impl RunSpec {
    pub fn new(scenario: Scenario, scheme: Scheme, config: SimConfig) -> Self {
        RunSpec { scenario, scheme, failure_pct: 0.0, config, trace: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteEventKind {
    Discovered,
    Switched,
    Break,
    Rediscover,
    Expired,
    Routeless,
    RelayEstablished,
    RelayReestablished,
}

impl RouteEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RouteEventKind::Discovered => "discovered",
            RouteEventKind::Switched => "switched",
            RouteEventKind::Break => "break",
            RouteEventKind::Rediscover => "rediscover",
            RouteEventKind::Expired => "expired",
            RouteEventKind::Routeless => "routeless",
            RouteEventKind::RelayEstablished => "relay_established",
            RouteEventKind::RelayReestablished => "relay_reestablished",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteEvent {
    pub t: f64,
    pub flow: usize,
    pub kind: RouteEventKind,
    pub nodes: Vec<NodeId>,
    pub metrics: Option<RouteMetrics>,
}

/// One trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub id: NodeId,
    pub pos: Vec2,
    pub role: Role,
}

#[derive(Debug, Clone)]
struct Pending {
    install_at: f64,
    nodes: Vec<NodeId>,
    metrics: RouteMetrics,
}

#[derive(Debug, Clone)]
struct Flow {
    target: usize,
    source: NodeId,
    started_at: f64,
    route: Option<Vec<NodeId>>,
    /// Ground-truth time at which the installed route stopped working.
    broken_at: Option<f64>,
    pending: Option<Pending>,
    failed_attempts: u32,
    ever_routed: bool,
    up_since: Option<f64>,
    up: Vec<(f64, f64)>,
    hop_seconds: f64,
    up_seconds: f64,
    breaks: u32,
    discoveries: u32,
    switches: u32,
    routeless: u32,
    reestablished: u32,
}

#[derive(Debug, Clone, Copy)]
struct Target {
    pos: Vec2,
    cell: CellIndex,
    flow: Option<usize>,
}

/// Cached pheromone knowledge of one node: values heard in Hello patches and
/// when they were heard.
#[derive(Debug, Clone)]
struct LocalMap {
    value: Vec<f32>,
    heard_at: Vec<f32>,
}

pub struct Simulation {
    cfg: SimConfig,
    map: AreaMap,
    scenario: Scenario,
    scheme: Scheme,
    failure_pct: f64,
    clock: SimClock,
    total_steps: u64,
    uavs: Vec<UavState>,
    field: PheromoneField,
    tables: Vec<NeighborTable>,
    hops: Vec<u8>,
    il: Vec<u32>,
    adv_en: Vec<f64>,
    adv_il: Vec<u32>,
    adv_mask: Vec<Option<CellIndex>>,
    local: Vec<LocalMap>,
    waypoint_due: Vec<bool>,
    targets: Vec<Target>,
    flows: Vec<Flow>,
    dp: DataPlane,
    relays: RelayBook,
    rng_failures: SimRng,
    rng_traffic: SimRng,
    failures: FailurePlan,
    next_failure: usize,
    failures_drawn: bool,
    scans_window: Vec<u64>,
    scans_full: Vec<u64>,
    events: Vec<RouteEvent>,
    mask_events: Vec<MaskEvent>,
    series: Vec<(f64, &'static str, f64)>,
    trace: Option<Vec<TracePoint>>,
    hello_bits_total: f64,
    wp_params: WaypointParams,
    sel_params: SelectionParams,
    limits: EnumLimits,
    bs_cell: CellIndex,
}

struct TableView<'a> {
    tables: &'a [NeighborTable],
    en: &'a [f64],
    il: &'a [u32],
    now: f64,
}

impl TopologyView for TableView<'_> {
    fn neighbors(&self, n: NodeId) -> Vec<NodeId> {
        self.tables[n as usize].ids().collect()
    }

    fn llt(&self, a: NodeId, b: NodeId) -> f64 {
        self.tables[a as usize]
            .get(b)
            .or_else(|| self.tables[b as usize].get(a))
            .map_or(0.0, |e| (e.llt_s - (self.now - e.last_heard)).max(0.0))
    }

    fn energy(&self, n: NodeId) -> f64 {
        self.en[n as usize]
    }

    fn il(&self, n: NodeId) -> u32 {
        self.il[n as usize]
    }
}

fn in_window(t: f64, cfg: &SimConfig) -> bool {
    t >= cfg.warmup_s && t < cfg.total_s()
}

impl Simulation {
    pub fn new(spec: &RunSpec) -> Result<Self> {
        let cfg = spec.config.clone();
        cfg.validate()?;
        let map = cfg.area_map()?;
        for t in &spec.scenario.targets {
            if !map.contains(*t) {
                return Err(Error::InvalidConfig(format!("target ({}, {}) lies outside the map", t.x, t.y)));
            }
        }
        if !(0.0..=100.0).contains(&spec.failure_pct) {
            return Err(Error::InvalidConfig(format!("failure percentage {} outside [0, 100]", spec.failure_pct)));
        }
        let n_nodes = cfg.n_uavs as usize + 1;
        let bs_pos = spec.scenario.bs_pos;
        let bs_cell = map.cell_of(bs_pos)?;

        let mut rng_launch = stream(cfg.seed, Stream::Launch);
        let mut uavs = Vec::with_capacity(n_nodes);
        uavs.push(UavState {
            id: BS,
            pos: bs_pos,
            heading: 0.0,
            speed: 0.0,
            waypoint: bs_cell,
            energy: cfg.en_initial,
            role: Role::Bs,
            alive: true,
            orbit: None,
        });
        for id in 1..n_nodes as NodeId {
            let pos = loop {
                let r = cfg.launch_radius_m * rng_launch.random::<f64>().sqrt();
                let a = rng_launch.random_range(0.0..2.0 * PI);
                let p = bs_pos + Vec2::from_angle(a) * r;
                if map.contains(p) {
                    break p;
                }
            };
            uavs.push(UavState {
                id,
                pos,
                heading: rng_launch.random_range(-PI..PI),
                speed: cfg.speed_mps,
                waypoint: map.cell_of(pos)?,
                energy: cfg.en_initial,
                role: Role::Searcher,
                alive: true,
                orbit: None,
            });
        }

        let total_steps = (cfg.total_s() / cfg.kinematics_dt_s).round() as u64;
        let dp = DataPlane::new(
            n_nodes,
            DataPlaneParams {
                channel_rate_bps: cfg.channel_rate_bps,
                packet_bits: cfg.packet_bits(),
                processing_s: cfg.processing_delay_s,
                ttl_s: cfg.ttl_s,
                range_m: cfg.tx_range_m,
                window_start_s: cfg.warmup_s,
                window_end_s: cfg.total_s(),
                bin_s: SERIES_INTERVAL_S,
            },
        );
        let targets = spec
            .scenario
            .targets
            .iter()
            .map(|&pos| Ok(Target { pos, cell: map.cell_of(pos)?, flow: None }))
            .collect::<Result<Vec<_>>>()?;
        let n_cells = map.n_cells();
        let wp_params = WaypointParams {
            beta: cfg.beta,
            degree_cap: cfg.degree_cap,
            ranges_m: cfg.candidate_ranges_m.clone(),
            bearings_rad: cfg.candidate_bearings_deg.iter().map(|d| d.to_radians()).collect(),
            tx_range_m: cfg.tx_range_m * cfg.connect_margin,
        };
        let sel_params = cfg.selection_params();
        let limits = cfg.enum_limits();
        let mut hops = vec![NO_ROUTE_HOPS; n_nodes];
        hops[BS as usize] = 0;
        Ok(Simulation {
            clock: SimClock::new(cfg.kinematics_dt_s, cfg.steps_per_tick()),
            total_steps,
            field: PheromoneField::new(map),
            tables: vec![NeighborTable::new(); n_nodes],
            hops,
            il: vec![0; n_nodes],
            adv_en: vec![cfg.en_initial; n_nodes],
            adv_il: vec![0; n_nodes],
            adv_mask: vec![None; n_nodes],
            local: vec![LocalMap { value: vec![0.0; n_cells], heard_at: vec![0.0; n_cells] }; n_nodes],
            waypoint_due: (0..n_nodes).map(|i| i != BS as usize).collect(),
            targets,
            flows: Vec::new(),
            dp,
            relays: RelayBook::new(),
            rng_failures: stream(cfg.seed, Stream::Failures),
            rng_traffic: stream(cfg.seed, Stream::Traffic),
            failures: FailurePlan::default(),
            next_failure: 0,
            failures_drawn: false,
            scans_window: vec![0; n_cells],
            scans_full: vec![0; n_cells],
            events: Vec::new(),
            mask_events: Vec::new(),
            series: Vec::new(),
            trace: spec.trace.then(Vec::new),
            hello_bits_total: 0.0,
            wp_params,
            sel_params,
            limits,
            bs_cell,
            map,
            scenario: spec.scenario.clone(),
            scheme: spec.scheme,
            failure_pct: spec.failure_pct,
            uavs,
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn now(&self) -> f64 {
        self.clock.now_s()
    }

    pub fn is_finished(&self) -> bool {
        self.clock.step >= self.total_steps
    }

    pub fn uavs(&self) -> &[UavState] {
        &self.uavs
    }

    pub fn field(&self) -> &PheromoneField {
        &self.field
    }

    pub fn map(&self) -> &AreaMap {
        &self.map
    }

    pub fn targets(&self) -> Vec<Vec2> {
        self.targets.iter().map(|t| t.pos).collect()
    }

    /// Installed route of each flow, if any.
    pub fn routes(&self) -> Vec<Option<&[NodeId]>> {
        self.flows.iter().map(|f| f.route.as_deref()).collect()
    }

    pub fn events(&self) -> &[RouteEvent] {
        &self.events
    }

    pub fn mask_events(&self) -> &[MaskEvent] {
        &self.mask_events
    }

    pub fn trace(&self) -> Option<&[TracePoint]> {
        self.trace.as_deref()
    }

    pub fn failure_plan(&self) -> &FailurePlan {
        &self.failures
    }

    pub fn tables(&self) -> &[NeighborTable] {
        &self.tables
    }

    pub fn data_plane(&self) -> &DataPlane {
        &self.dp
    }

    pub fn relay_book(&self) -> &RelayBook {
        &self.relays
    }

    /// Scan count of every cell since t = 0, row-major.
    pub fn scans(&self) -> &[u64] {
        &self.scans_full
    }

    pub fn masks(&self) -> impl Iterator<Item = (NodeId, &MaskRect)> {
        self.field.masks()
    }

    /// Runs to the end of the configured horizon.
    pub fn run_to_end(&mut self) {
        while !self.is_finished() {
            self.step();
        }
    }

    /// Runs until simulated time reaches `t_s` (or the horizon).
    pub fn run_until(&mut self, t_s: f64) {
        while !self.is_finished() && self.now() + 1e-9 < t_s {
            self.step();
        }
    }

    /// Advances one kinematics step.
    pub fn step(&mut self) {
        if self.is_finished() {
            return;
        }
        let t = self.now();
        let dt = self.cfg.kinematics_dt_s;
        if self.clock.on_tick_boundary() {
            self.protocol_tick(t);
        }
        self.fire_failures(t, t + dt);
        self.move_nodes(dt);
        self.check_physical_breaks(t + dt);
        self.install_pending(t + dt);

        let pos: Vec<Vec2> = self.uavs.iter().map(|u| u.pos).collect();
        let alive: Vec<bool> = self.uavs.iter().map(|u| u.alive).collect();
        self.dp.step(t, dt, &pos, &alive);

        for u in self.uavs.iter_mut().skip(1) {
            let tx = self.dp.take_tx_count(u.id);
            if u.alive {
                u.energy = (u.energy - self.cfg.en_drain_flight_per_s * dt - self.cfg.en_drain_per_packet * tx as f64).max(0.0);
            }
        }
        self.account_route_time(t, dt);
        self.clock.advance();
        if self.is_finished() {
            self.close_intervals(self.now());
        }
    }

    fn account_route_time(&mut self, t: f64, dt: f64) {
        let (ws, we) = (self.cfg.warmup_s, self.cfg.total_s());
        let overlap = ((t + dt).min(we) - t.max(ws)).max(0.0);
        if overlap == 0.0 {
            return;
        }
        for f in &mut self.flows {
            if let (Some(r), None) = (&f.route, f.broken_at) {
                f.hop_seconds += (r.len() - 1) as f64 * overlap;
                f.up_seconds += overlap;
            }
        }
    }

    fn close_intervals(&mut self, t: f64) {
        for f in &mut self.flows {
            if let Some(s) = f.up_since.take() {
                f.up.push((s, t));
            }
        }
    }

    // ---------------------------------------------------------------- motion

    fn move_nodes(&mut self, dt: f64) {
        let turn = self.cfg.max_turn_rate_deg_s.to_radians();
        for i in 1..self.uavs.len() {
            let u = &mut self.uavs[i];
            if !u.alive {
                continue;
            }
            match (u.role, u.orbit) {
                (Role::TargetUav | Role::Relay, Some(o)) => orbit_step(u, o.center, o.radius_m, dt, turn, &self.map),
                _ => {
                    if step_kinematics(u, dt, turn, &self.map) {
                        self.waypoint_due[i] = true;
                    }
                }
            }
        }
    }

    fn fire_failures(&mut self, t0: f64, t1: f64) {
        while let Some(&(node, at)) = self.failures.events.get(self.next_failure) {
            if at >= t1 {
                break;
            }
            debug_assert!(at >= t0 - 1e-9);
            self.next_failure += 1;
            self.kill(node, at);
        }
    }

    fn kill(&mut self, node: NodeId, t: f64) {
        let u = &mut self.uavs[node as usize];
        if !u.alive {
            return;
        }
        u.alive = false;
        for tab in &mut self.tables {
            tab.remove(node);
        }
        self.tables[node as usize] = NeighborTable::new();
        self.dp.kill_node(node);
        if let Some(ev) = topology::remove(&mut self.field, node, t) {
            self.mask_events.push(ev);
        }
    }

    // ---------------------------------------------------------- route state

    fn route_physically_ok(&self, nodes: &[NodeId]) -> bool {
        let r2 = self.cfg.tx_range_m * self.cfg.tx_range_m;
        nodes.iter().all(|&n| self.uavs[n as usize].alive)
            && nodes.windows(2).all(|w| (self.uavs[w[0] as usize].pos - self.uavs[w[1] as usize].pos).norm_sq() <= r2)
    }

    fn check_physical_breaks(&mut self, t: f64) {
        for fi in 0..self.flows.len() {
            let f = &self.flows[fi];
            let Some(route) = &f.route else { continue };
            if f.broken_at.is_some() || self.route_physically_ok(route) {
                continue;
            }
            let f = &mut self.flows[fi];
            f.broken_at = Some(t);
            if let Some(s) = f.up_since.take() {
                f.up.push((s, t));
            }
        }
    }

    fn install_pending(&mut self, t: f64) {
        for fi in 0..self.flows.len() {
            let due = matches!(&self.flows[fi].pending, Some(p) if p.install_at <= t);
            if !due {
                continue;
            }
            let p = self.flows[fi].pending.take().unwrap();
            if self.route_physically_ok(&p.nodes) {
                self.install(fi, p.nodes, p.metrics, t, false);
            } else {
                self.discovery_failed(fi, t);
            }
        }
    }

    fn install(&mut self, fi: usize, nodes: Vec<NodeId>, metrics: RouteMetrics, t: f64, switched: bool) {
        let relay = self.scheme == Scheme::Relay;
        let f = &mut self.flows[fi];
        let reestablish = relay && f.ever_routed;
        let kind = match (relay, reestablish, switched) {
            (true, false, _) => RouteEventKind::RelayEstablished,
            (true, true, _) => RouteEventKind::RelayReestablished,
            (false, _, true) => RouteEventKind::Switched,
            (false, _, false) => RouteEventKind::Discovered,
        };
        if in_window(t, &self.cfg) {
            match kind {
                RouteEventKind::Switched => f.switches += 1,
                RouteEventKind::RelayReestablished => f.reestablished += 1,
                _ => {}
            }
        }
        f.route = Some(nodes.clone());
        f.broken_at = None;
        f.failed_attempts = 0;
        f.ever_routed = true;
        if f.up_since.is_none() {
            f.up_since = Some(t);
        }
        self.dp.set_route(fi, Some(&nodes));
        if relay {
            for n in self.relays.establish(fi, &nodes) {
                let u = &mut self.uavs[n as usize];
                u.role = Role::Relay;
                let center = self.map.cell_center(self.map.cell_of(self.map.clamp(u.pos)).unwrap_or(self.bs_cell));
                u.orbit = Some(Orbit { center, radius_m: self.cfg.relay_orbit_radius_m() });
                self.waypoint_due[n as usize] = false;
            }
        }
        self.events.push(RouteEvent { t, flow: fi, kind, nodes, metrics: Some(metrics) });
    }

    fn drop_route(&mut self, fi: usize, t: f64) {
        let f = &mut self.flows[fi];
        let Some(nodes) = f.route.take() else { return };
        let broke_at = f.broken_at.take().unwrap_or(t);
        if let Some(s) = f.up_since.take() {
            f.up.push((s, broke_at));
        }
        if in_window(broke_at, &self.cfg) && self.scheme != Scheme::Relay {
            f.breaks += 1;
        }
        f.failed_attempts = 0;
        f.pending = None;
        self.dp.set_route(fi, None);
        self.events.push(RouteEvent { t, flow: fi, kind: RouteEventKind::Break, nodes, metrics: None });
        if self.scheme == Scheme::Relay {
            for n in self.relays.release(fi) {
                let u = &mut self.uavs[n as usize];
                if u.alive && u.role == Role::Relay {
                    u.role = Role::Searcher;
                    u.orbit = None;
                    self.waypoint_due[n as usize] = true;
                }
            }
        }
    }

    fn discovery_failed(&mut self, fi: usize, t: f64) {
        let retries = self.cfg.discovery_retries;
        let f = &mut self.flows[fi];
        f.failed_attempts += 1;
        self.events.push(RouteEvent { t, flow: fi, kind: RouteEventKind::Expired, nodes: Vec::new(), metrics: None });
        if f.failed_attempts == retries + 1 {
            if in_window(t, &self.cfg) {
                f.routeless += 1;
            }
            self.events.push(RouteEvent { t, flow: fi, kind: RouteEventKind::Routeless, nodes: Vec::new(), metrics: None });
        }
    }

    // --------------------------------------------------------- protocol tick

    fn protocol_tick(&mut self, t: f64) {
        self.update_pheromone(t);
        self.sense_targets(t);
        self.exchange_hellos(t);
        self.detect_breaks(t);
        self.route_flows(t);
        self.update_interference();
        if self.scheme == Scheme::TcPipe {
            self.topology_control(t);
        }
        self.choose_waypoints(t);
        self.sample_series(t);
        if let Some(trace) = &mut self.trace {
            trace.extend(self.uavs.iter().filter(|u| u.alive).map(|u| TracePoint { t, id: u.id, pos: u.pos, role: u.role }));
        }
    }

    fn update_pheromone(&mut self, t: f64) {
        self.field.step(self.cfg.lambda_evap, self.cfg.psi_diff);
        let window = in_window(t, &self.cfg);
        for u in &self.uavs {
            if !u.alive || u.role != Role::Searcher {
                continue;
            }
            if let Ok(c) = self.map.cell_of(self.map.clamp(u.pos)) {
                let _ = self.field.deposit(c, self.cfg.deposit_magnitude);
                let i = self.map.linear(c);
                self.scans_full[i] += 1;
                if window {
                    self.scans_window[i] += 1;
                }
            }
        }
    }

    fn sense_targets(&mut self, t: f64) {
        for ti in 0..self.targets.len() {
            if self.targets[ti].flow.is_some() {
                continue;
            }
            let cell = self.targets[ti].cell;
            let finder = self.uavs.iter().find(|u| {
                u.alive && u.role == Role::Searcher && self.map.cell_of(self.map.clamp(u.pos)).ok() == Some(cell)
            });
            if let Some(u) = finder {
                let id = u.id;
                self.assign_target(ti, id, t);
            }
        }
        if t + 1e-9 >= self.cfg.warmup_s && !self.failures_drawn {
            for ti in 0..self.targets.len() {
                if self.targets[ti].flow.is_some() {
                    continue;
                }
                let tp = self.targets[ti].pos;
                let pick = |role_ok: &dyn Fn(Role) -> bool| {
                    self.uavs
                        .iter()
                        .filter(|u| u.alive && role_ok(u.role))
                        .min_by(|a, b| a.pos.distance(tp).total_cmp(&b.pos.distance(tp)).then(a.id.cmp(&b.id)))
                        .map(|u| u.id)
                };
                let chosen = pick(&|r| r == Role::Searcher).or_else(|| pick(&|r| r == Role::Relay));
                if let Some(id) = chosen {
                    if self.uavs[id as usize].role == Role::Relay {
                        for fl in self.relays.fail(id) {
                            self.flows[fl].broken_at.get_or_insert(t);
                        }
                    }
                    self.assign_target(ti, id, t);
                }
            }
            self.draw_failures(t);
        }
    }

    fn assign_target(&mut self, ti: usize, node: NodeId, t: f64) {
        let pos = self.targets[ti].pos;
        let u = &mut self.uavs[node as usize];
        u.role = Role::TargetUav;
        u.orbit = Some(Orbit { center: pos, radius_m: self.cfg.orbit_radius_m });
        self.waypoint_due[node as usize] = false;
        let fid = self.dp.add_flow(node, self.cfg.data_rate_bps, t);
        debug_assert_eq!(fid, self.flows.len());
        self.flows.push(Flow {
            target: ti,
            source: node,
            started_at: t,
            route: None,
            broken_at: None,
            pending: None,
            failed_attempts: 0,
            ever_routed: false,
            up_since: None,
            up: Vec::new(),
            hop_seconds: 0.0,
            up_seconds: 0.0,
            breaks: 0,
            discoveries: 0,
            switches: 0,
            routeless: 0,
            reestablished: 0,
        });
        self.targets[ti].flow = Some(fid);
    }

    fn draw_failures(&mut self, t: f64) {
        self.failures_drawn = true;
        let eligible: Vec<NodeId> =
            self.uavs.iter().filter(|u| u.alive && u.role != Role::Bs && u.role != Role::TargetUav).map(|u| u.id).collect();
        let start = t.max(self.cfg.warmup_s);
        self.failures =
            FailurePlan::draw(&mut self.rng_failures, self.failure_pct / 100.0, self.cfg.n_uavs, &eligible, start, self.cfg.total_s());
    }

    fn exchange_hellos(&mut self, t: f64) {
        let n = self.uavs.len();
        let range2 = self.cfg.tx_range_m * self.cfg.tx_range_m;
        let max_age = self.cfg.neighbor_expiry_intervals as f64 * self.cfg.hello_interval_s;
        let on_route: BTreeSet<NodeId> = self.flows.iter().filter_map(|f| f.route.as_ref()).flatten().copied().collect();

        // What each node advertises this round.
        for i in 0..n {
            self.adv_en[i] = self.uavs[i].energy;
            self.adv_il[i] = self.il[i];
            self.adv_mask[i] = self.field.mask(i as NodeId).map(|m| m.center);
        }
        let own_mask = self.adv_mask.clone();
        for i in 0..n {
            if own_mask[i].is_none() {
                self.adv_mask[i] = self.tables[i].ids().find_map(|j| own_mask[j as usize]);
            }
        }

        let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for i in 0..n {
            if !self.uavs[i].alive {
                continue;
            }
            for j in (i + 1)..n {
                if self.uavs[j].alive && (self.uavs[i].pos - self.uavs[j].pos).norm_sq() <= range2 {
                    adjacency[i].push(j as NodeId);
                    adjacency[j].push(i as NodeId);
                }
            }
        }

        let vel: Vec<Vec2> = self.uavs.iter().map(|u| u.velocity()).collect();
        let mut bits = 0.0;
        for i in 0..n {
            if !self.uavs[i].alive {
                continue;
            }
            let near_route = adjacency[i].iter().any(|j| on_route.contains(j));
            bits += f64::from(hello_bits(near_route.then_some(adjacency[i].len())));
        }
        self.hello_bits_total += bits;

        for i in 0..n {
            if !self.uavs[i].alive {
                continue;
            }
            for &j in &adjacency[i] {
                let ju = j as usize;
                let near_route = adjacency[ju].iter().any(|k| on_route.contains(k));
                let entry = NeighborEntry {
                    id: j,
                    pos: self.uavs[ju].pos,
                    velocity: vel[ju],
                    next_waypoint: self.uavs[ju].waypoint,
                    hops_to_bs: self.hops[ju],
                    en: self.adv_en[ju],
                    il: self.adv_il[ju],
                    llt_s: estimate_llt(self.uavs[i].pos, vel[i], self.uavs[ju].pos, vel[ju], self.cfg.tx_range_m, self.cfg.llt_cap_s),
                    last_heard: t,
                    mask_cell: self.adv_mask[ju],
                    summary_count: near_route.then_some(adjacency[ju].len() as u32),
                };
                self.tables[i].upsert(entry);
            }
            self.tables[i].expire(t, max_age);
        }

        // Distance-vector hop count toward the BS over the search layer;
        // relays form a separate layer and neither carry nor lend routes.
        let prev = self.hops.clone();
        for i in 0..n {
            if i == BS as usize {
                continue;
            }
            if self.uavs[i].role == Role::Relay {
                self.hops[i] = NO_ROUTE_HOPS;
                continue;
            }
            let best = self.tables[i]
                .iter()
                .filter(|e| e.last_heard == t && self.uavs[e.id as usize].role != Role::Relay)
                .map(|e| prev[e.id as usize])
                .min()
                .unwrap_or(NO_ROUTE_HOPS);
            self.hops[i] = if best >= NO_ROUTE_HOPS - 1 { NO_ROUTE_HOPS } else { best + 1 };
        }

        // Searchers refresh cached pheromone from the patches they heard.
        let half = (PATCH_SIDE / 2) as i64;
        for i in 1..n {
            let u = &self.uavs[i];
            if !u.alive || u.role != Role::Searcher {
                continue;
            }
            let mut senders: Vec<NodeId> = self.tables[i].iter().filter(|e| e.last_heard == t).map(|e| e.id).collect();
            senders.push(i as NodeId);
            for s in senders {
                let Ok(c) = self.map.cell_of(self.map.clamp(self.uavs[s as usize].pos)) else { continue };
                for dr in -half..=half {
                    for dc in -half..=half {
                        let (cc, rr) = (c.col as i64 + dc, c.row as i64 + dr);
                        if cc < 0 || rr < 0 || cc >= self.map.cols() as i64 || rr >= self.map.rows() as i64 {
                            continue;
                        }
                        let k = self.map.linear(CellIndex::new(cc as u32, rr as u32));
                        self.local[i].value[k] = self.field.values()[k] as f32;
                        self.local[i].heard_at[k] = t as f32;
                    }
                }
            }
        }
    }

    /// Turns ground-truth breaks into protocol breaks once the upstream node
    /// notices: the downstream neighbor has left its table, a route node died,
    /// or the neighbor-expiry horizon has passed.
    fn detect_breaks(&mut self, t: f64) {
        let horizon = self.cfg.neighbor_expiry_intervals as f64 * self.cfg.hello_interval_s;
        for fi in 0..self.flows.len() {
            let f = &self.flows[fi];
            let (Some(route), Some(at)) = (&f.route, f.broken_at) else { continue };
            let noticed = t - at >= horizon - 1e-9
                || route.iter().any(|&n| !self.uavs[n as usize].alive)
                || route.windows(2).any(|w| !self.tables[w[0] as usize].contains(w[1]));
            if noticed {
                self.drop_route(fi, t);
            }
        }
    }

    fn net_view_anchors(&self) -> Vec<(Vec2, f64)> {
        let r = self.cfg.relay_orbit_radius_m();
        self.uavs
            .iter()
            .map(|u| match (u.role, u.orbit) {
                (Role::Bs, _) => (u.pos, 0.0),
                (_, Some(o)) => (o.center, o.radius_m),
                _ => {
                    let c = self.map.cell_of(self.map.clamp(u.pos)).unwrap_or(self.bs_cell);
                    (self.map.cell_center(c), r)
                }
            })
            .collect()
    }

    fn attempt_discovery(&mut self, fi: usize, t: f64) -> bool {
        let source = self.flows[fi].source;
        let pos: Vec<Vec2> = self.uavs.iter().map(|u| u.pos).collect();
        let vel: Vec<Vec2> = self.uavs.iter().map(|u| u.velocity()).collect();
        let energy: Vec<f64> = self.uavs.iter().map(|u| u.energy).collect();
        let alive: Vec<bool> = self.uavs.iter().map(|u| u.alive).collect();
        let anchors = (self.scheme == Scheme::Relay).then(|| self.net_view_anchors());
        let view = NetView {
            pos: &pos,
            vel: &vel,
            energy: &energy,
            il: &self.il,
            alive: &alive,
            anchors: anchors.as_deref(),
            range_m: self.cfg.tx_range_m,
            llt_cap_s: self.cfg.llt_cap_s,
        };
        let mode = match self.scheme {
            Scheme::Aodv => DiscoveryMode::Aodv,
            Scheme::Pipe | Scheme::TcPipe => DiscoveryMode::Pipe,
            Scheme::Relay => DiscoveryMode::Relay,
        };
        let params = DiscoveryParams {
            mode,
            ttl_s: self.cfg.ttl_s,
            en_threshold: self.cfg.en_threshold,
            directional_slack_m: self.cfg.directional_slack_m,
            jitter_s: self.cfg.rreq_jitter_s,
            tx_s: self.cfg.rreq_tx_s,
        };
        let found = discover_route(source, BS, &view, &params, &mut self.rng_traffic);
        if in_window(t, &self.cfg) {
            self.flows[fi].discoveries += 1;
        }
        let rtt_all = found.routes_rtt_max();
        let chosen = if mode == DiscoveryMode::Pipe {
            let cands: Vec<Candidate> = found.routes.iter().map(|d| d.candidate.clone()).collect();
            select_active_route(&cands, &self.sel_params).ok().map(|sel| {
                let rtt = found.routes.iter().find(|d| d.candidate.nodes == sel.nodes).map_or(0.0, |d| d.rtt_s);
                (sel.nodes, sel.metrics, rtt)
            })
        } else {
            found.routes.into_iter().next().map(|d| (d.candidate.nodes, d.candidate.metrics, d.rtt_s))
        };
        match chosen {
            Some((nodes, metrics, rtt)) => {
                self.flows[fi].pending = Some(Pending { install_at: t + rtt_all.max(rtt), nodes, metrics });
                true
            }
            None => false,
        }
    }

    fn route_flows(&mut self, t: f64) {
        let tick = self.clock.tick();
        let notify_ticks = (self.cfg.notify_interval_s / self.cfg.protocol_tick_s).round().max(1.0) as u64;
        for fi in 0..self.flows.len() {
            if !self.uavs[self.flows[fi].source as usize].alive {
                continue;
            }
            let has_route = self.flows[fi].route.is_some();
            if has_route && self.scheme.uses_pipe() && tick % notify_ticks == 0 && self.flows[fi].pending.is_none() {
                let current = self.flows[fi].route.clone().unwrap();
                let view = TableView { tables: &self.tables, en: &self.adv_en, il: &self.adv_il, now: t };
                let pipe = form_pipe(&current, &view, t);
                let outcome = maybe_switch(&pipe, &current, &self.sel_params, &self.limits);
                match outcome.decision {
                    SwitchDecision::Keep => {}
                    SwitchDecision::Switched(sel) => {
                        self.install(fi, sel.nodes, sel.metrics, t, true);
                    }
                    SwitchDecision::Rediscover => {
                        self.events.push(RouteEvent {
                            t,
                            flow: fi,
                            kind: RouteEventKind::Rediscover,
                            nodes: current,
                            metrics: Some(outcome.current),
                        });
                        self.attempt_discovery(fi, t);
                    }
                }
            }
            let f = &self.flows[fi];
            if f.route.is_none() && f.pending.is_none() && !self.attempt_discovery(fi, t) {
                self.discovery_failed(fi, t);
            }
        }
    }

    fn update_interference(&mut self) {
        let routes: Vec<&[NodeId]> = self.flows.iter().filter_map(|f| f.route.as_deref()).collect();
        let links = active_links(routes);
        let pos: Vec<Vec2> = self.uavs.iter().map(|u| u.pos).collect();
        for i in 0..self.uavs.len() {
            self.il[i] = if self.uavs[i].alive { interfering_links(&pos, i as NodeId, &links, self.cfg.tx_range_m) } else { 0 };
        }
    }

    fn topology_control(&mut self, t: f64) {
        let mut on_route: BTreeSet<NodeId> = self.flows.iter().filter_map(|f| f.route.as_ref()).flatten().copied().collect();
        on_route.extend(self.flows.iter().filter(|f| self.uavs[f.source as usize].alive).map(|f| f.source));
        let owners: Vec<NodeId> = self.field.masks().map(|(o, _)| o).filter(|o| !on_route.contains(o)).collect();
        for o in owners {
            if let Some(ev) = topology::remove(&mut self.field, o, t) {
                self.mask_events.push(ev);
            }
        }
        let pos: Vec<Vec2> = self.uavs.iter().map(|u| u.pos).collect();
        let headings: Vec<f64> = self.uavs.iter().map(|u| u.heading).collect();
        for fi in 0..self.flows.len() {
            let source = self.flows[fi].source;
            let Some(route) = self.flows[fi].route.clone() else {
                if self.uavs[source as usize].alive {
                    let bs_pos = self.uavs[BS as usize].pos;
                    let ev = topology::tc_routeless_source(
                        source,
                        bs_pos,
                        &pos,
                        &headings,
                        &self.tables,
                        &mut self.field,
                        self.cfg.th_degree,
                        self.cfg.tx_range_m,
                        t,
                    );
                    self.mask_events.extend(ev);
                }
                continue;
            };
            let evs = topology::tc_step(
                &route,
                &pos,
                &headings,
                &self.tables,
                &mut self.field,
                self.cfg.th_degree,
                self.cfg.tx_range_m,
                t,
            );
            self.mask_events.extend(evs);
        }
    }

    fn choose_waypoints(&mut self, t: f64) {
        let decay = 1.0 - self.cfg.lambda_evap;
        for i in 1..self.uavs.len() {
            let u = &self.uavs[i];
            if !u.alive || u.role != Role::Searcher {
                continue;
            }
            let table = &self.tables[i];
            // Only neighbors no farther from the BS anchor connectivity;
            // a neighbor whose route runs back through us would not.
            let own = self.hops[i];
            let hints: Vec<NeighborHint> = table
                .iter()
                .filter(|e| self.uavs[e.id as usize].role != Role::Relay)
                .map(|e| NeighborHint {
                    id: e.id,
                    pos: e.pos,
                    waypoint_center: self.map.cell_center(e.next_waypoint),
                    has_route: e.hops_to_bs < NO_ROUTE_HOPS && e.hops_to_bs <= own,
                })
                .collect();
            // Re-plan early when the current waypoint no longer keeps a
            // BS-connected neighbor in predicted range.
            let wp_center = self.map.cell_center(u.waypoint);
            let reach = self.wp_params.tx_range_m;
            let still_connected = hints.iter().any(|h| h.has_route && h.waypoint_center.distance(wp_center) <= reach);
            if !self.waypoint_due[i] && still_connected {
                continue;
            }
            // Masks recruit off-route searchers; route nodes keep reading the
            // raw map so they are not pinned inside their own masks.
            let on_route = self.flows.iter().any(|f| f.route.as_ref().is_some_and(|r| r.contains(&(i as NodeId))));
            let known: BTreeSet<CellIndex> = if on_route {
                BTreeSet::new()
            } else {
                table.iter().filter_map(|e| e.mask_cell).collect()
            };
            let masks: Vec<&MaskRect> = self.field.masks().map(|(_, m)| m).filter(|m| known.contains(&m.center)).collect();
            let local = &self.local[i];
            let map = self.map;
            let read = |c: CellIndex| -> f64 {
                if masks.iter().any(|m| m.cells.binary_search(&c).is_ok()) {
                    return 0.0;
                }
                let k = map.linear(c);
                let v = f64::from(local.value[k]);
                if v == 0.0 {
                    0.0
                } else {
                    v * decay.powf(t - f64::from(local.heard_at[k]))
                }
            };
            let decision = select_waypoint(u.pos, u.heading, &self.map, read, &hints, &self.wp_params);
            let (wp, due) = match decision {
                WaypointDecision::Candidate(c) => (c.cell, false),
                WaypointDecision::TowardNeighbor(_, c) => (c, false),
                // Isolated: drift back toward the BS, re-deciding every tick
                // so the node resumes searching as soon as it hears anyone.
                WaypointDecision::Hold => (self.bs_cell, true),
            };
            self.uavs[i].waypoint = wp;
            self.waypoint_due[i] = due;
        }
    }

    fn sample_series(&mut self, t: f64) {
        let k = (t / SERIES_INTERVAL_S).round();
        if (t - k * SERIES_INTERVAL_S).abs() > 1e-6 {
            return;
        }
        let cov = metrics::coverage_and_fairness(&self.scans_full);
        self.series.push((t, "coverage", cov.c_v));
        if t >= self.cfg.warmup_s {
            let w = metrics::coverage_and_fairness(&self.scans_window);
            self.series.push((t, "coverage_window", w.c_v));
        }
        if !self.flows.is_empty() {
            let up = self.flows.iter().filter(|f| f.route.is_some() && f.broken_at.is_none()).count() as f64;
            self.series.push((t, "routes_up", up / self.flows.len() as f64));
        }
        self.series.push((t, "masks", self.field.masks().count() as f64));
    }

    // ---------------------------------------------------------------- report

    pub fn report(&self) -> MetricsReport {
        let cfg = &self.cfg;
        let (ws, we) = (cfg.warmup_s, cfg.total_s());
        let nf = self.flows.len().max(1) as f64;
        let per_flow_pdr: Vec<Option<f64>> = (0..self.flows.len())
            .map(|fi| {
                let c = self.dp.counters(fi);
                metrics::pdr(c.generated, c.delivered)
            })
            .collect();
        let mut up_pct = Vec::new();
        let mut lens = Vec::new();
        for f in &self.flows {
            let mut iv = f.up.clone();
            if let Some(s) = f.up_since {
                iv.push((s, self.now()));
            }
            up_pct.push(metrics::route_up(&iv, ws, we));
            if f.up_seconds > 0.0 {
                lens.push(f.hop_seconds / f.up_seconds);
            }
        }
        let sum = |g: &dyn Fn(&Flow) -> u32| self.flows.iter().map(|f| f64::from(g(f))).sum::<f64>();
        let counters: Vec<_> = (0..self.flows.len()).map(|fi| self.dp.counters(fi)).collect();
        let tot = |g: &dyn Fn(&crate::radio::FlowCounters) -> u64| counters.iter().map(|c| g(c) as f64).sum::<f64>();
        let delivered = tot(&|c| c.delivered);
        let latency: f64 = counters.iter().map(|c| c.latency_sum_s).sum();
        let win = metrics::coverage_and_fairness(&self.scans_window);
        let full = metrics::coverage_and_fairness(&self.scans_full);
        let elapsed = self.now().max(cfg.kinematics_dt_s);
        let in_flight: f64 = (0..self.flows.len()).map(|fi| self.dp.in_flight(fi) as f64).sum();
        MetricsReport {
            scenario: self.scenario.name.clone(),
            scheme: self.scheme.as_str().to_string(),
            n_uavs: cfg.n_uavs,
            speed_mps: cfg.speed_mps,
            data_rate_bps: cfg.data_rate_bps,
            failure_pct: self.failure_pct,
            seed: cfg.seed,
            runs: 1,
            flows: self.flows.len() as u32,
            pdr: metrics::mean_pdr(&per_flow_pdr),
            r_b: if self.scheme == Scheme::Relay { 0.0 } else { sum(&|f| f.breaks) / nf },
            r_u: if up_pct.is_empty() { 0.0 } else { up_pct.iter().sum::<f64>() / up_pct.len() as f64 },
            route_length: (!lens.is_empty()).then(|| lens.iter().sum::<f64>() / lens.len() as f64),
            c_v: win.c_v,
            c_v_full: full.c_v,
            fairness: win.fairness,
            v_f: win.v_f,
            relay_reestablished: sum(&|f| f.reestablished) / nf,
            discoveries: sum(&|f| f.discoveries) / nf,
            switches: sum(&|f| f.switches) / nf,
            routeless_events: sum(&|f| f.routeless) / nf,
            mask_applications: self
                .mask_events
                .iter()
                .filter(|e| e.kind == topology::MaskEventKind::Applied && in_window(e.t, cfg))
                .count() as f64,
            generated: tot(&|c| c.generated),
            delivered,
            expired: tot(&|c| c.expired),
            dropped: tot(&|c| c.dropped),
            in_flight,
            mean_latency_s: (delivered > 0.0).then(|| latency / delivered),
            hello_bits_per_node_s: self.hello_bits_total / (self.uavs.len() as f64 * elapsed),
        }
    }

    /// Long-format time series: sampled coverage, route availability, active
    /// masks, and per-bin PDR by packet creation time.
    pub fn series(&self) -> Vec<SeriesRow> {
        let cfg = &self.cfg;
        let row = |t: f64, metric: &str, value: f64| SeriesRow {
            scenario: self.scenario.name.clone(),
            scheme: self.scheme.as_str().to_string(),
            n_uavs: cfg.n_uavs,
            speed_mps: cfg.speed_mps,
            data_rate_bps: cfg.data_rate_bps,
            failure_pct: self.failure_pct,
            seed: cfg.seed,
            t,
            metric: metric.to_string(),
            value,
        };
        let mut out: Vec<SeriesRow> = self.series.iter().map(|&(t, m, v)| row(t, m, v)).collect();
        if !self.flows.is_empty() {
            let n_bins = self.dp.bins(0).len();
            for b in 0..n_bins {
                let pdrs: Vec<Option<f64>> =
                    (0..self.flows.len()).map(|fi| self.dp.bins(fi)[b]).map(|(g, d)| metrics::pdr(g, d)).collect();
                if let Some(p) = metrics::mean_pdr(&pdrs) {
                    out.push(row((b as f64 + 1.0) * SERIES_INTERVAL_S, "pdr", p));
                }
            }
        }
        out
    }

    /// Per-flow packet accounting: (generated, delivered, expired, dropped, in flight).
    pub fn flow_accounting(&self) -> Vec<(u64, u64, u64, u64, u64)> {
        (0..self.flows.len())
            .map(|fi| {
                let c = self.dp.counters(fi);
                (c.generated, c.delivered, c.expired, c.dropped, self.dp.in_flight(fi))
            })
            .collect()
    }

    /// Flow sources and the time each flow started.
    pub fn flow_sources(&self) -> Vec<(NodeId, f64)> {
        self.flows.iter().map(|f| (f.source, f.started_at)).collect()
    }

    /// Target index served by each flow.
    pub fn flow_targets(&self) -> Vec<usize> {
        self.flows.iter().map(|f| f.target).collect()
    }
}

/// Runs one spec to completion and returns its report.
pub fn run(spec: &RunSpec) -> Result<MetricsReport> {
    let mut sim = Simulation::new(spec)?;
    sim.run_to_end();
    Ok(sim.report())
}

