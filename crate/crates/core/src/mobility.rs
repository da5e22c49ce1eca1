//! Pheromone-and-degree waypoint choice, fixed-wing kinematics and orbiting.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::grid::{AreaMap, CellIndex, Vec2};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Searcher,
    TargetUav,
    Relay,
    Bs,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Searcher => "searcher",
            Role::TargetUav => "target_uav",
            Role::Relay => "relay",
            Role::Bs => "bs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub center: Vec2,
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub id: NodeId,
    pub pos: Vec2,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub speed: f64,
    pub waypoint: CellIndex,
    pub energy: f64,
    pub role: Role,
    pub alive: bool,
    pub orbit: Option<Orbit>,
}

impl UavState {
    pub fn velocity(&self) -> Vec2 {
        if !self.alive || self.role == Role::Bs {
            Vec2::ZERO
        } else {
            Vec2::from_angle(self.heading) * self.speed
        }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

/// Turns toward `target` by at most `max_turn_rad`, advances `speed * dt`, and
/// reflects off the map edges.
fn steer_and_advance(uav: &mut UavState, target: Vec2, dt: f64, max_turn_rad: f64, map: &AreaMap) {
    let to = target - uav.pos;
    if to.norm_sq() > 0.0 {
        let err = wrap_angle(to.angle() - uav.heading);
        uav.heading = wrap_angle(uav.heading + err.clamp(-max_turn_rad, max_turn_rad));
    }
    let mut p = uav.pos + Vec2::from_angle(uav.heading) * (uav.speed * dt);
    let mut h = uav.heading;
    if p.x < 0.0 {
        p.x = -p.x;
        h = PI - h;
    } else if p.x > map.width_m {
        p.x = 2.0 * map.width_m - p.x;
        h = PI - h;
    }
    if p.y < 0.0 {
        p.y = -p.y;
        h = -h;
    } else if p.y > map.height_m {
        p.y = 2.0 * map.height_m - p.y;
        h = -h;
    }
    uav.pos = map.clamp(p);
    uav.heading = wrap_angle(h);
}

/// Advances a searcher toward its waypoint. Returns `true` once within one cell
/// of the waypoint center.
pub fn step_kinematics(uav: &mut UavState, dt: f64, max_turn_rate_rad_s: f64, map: &AreaMap) -> bool {
    let target = map.cell_center(uav.waypoint);
    steer_and_advance(uav, target, dt, max_turn_rate_rad_s * dt, map);
    uav.pos.distance(target) < map.cell_size_m
}

/// Advances an orbiting node counter-clockwise around `center` at constant
/// speed. A node far from its circle flies there first; a node near it spirals
/// onto the radius over a few steps.
pub fn orbit_step(uav: &mut UavState, center: Vec2, radius_m: f64, dt: f64, max_turn_rate_rad_s: f64, map: &AreaMap) {
    let rel = uav.pos - center;
    let r0 = rel.norm();
    let step = uav.speed * dt;
    if r0 > 2.0 * radius_m + step {
        steer_and_advance(uav, center, dt, max_turn_rate_rad_s * dt, map);
        return;
    }
    let theta = if r0 > 0.0 { rel.angle() } else { uav.heading - PI / 2.0 };
    let theta_next = theta + step / radius_m;
    let r_next = r0 + (radius_m - r0).clamp(-step, step);
    uav.pos = map.clamp(center + Vec2::from_angle(theta_next) * r_next);
    uav.heading = wrap_angle(theta_next + PI / 2.0);
}

/// What a searcher knows about one neighbor from its Hello.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborHint {
    pub id: NodeId,
    pub pos: Vec2,
    pub waypoint_center: Vec2,
    pub has_route: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointParams {
    pub beta: f64,
    pub degree_cap: u32,
    pub ranges_m: Vec<f64>,
    pub bearings_rad: Vec<f64>,
    pub tx_range_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointCandidate {
    pub cell: CellIndex,
    pub score: f64,
    pub predicted_degree: u32,
    pub bs_connected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaypointDecision {
    Candidate(WaypointCandidate),
    /// No candidate keeps a route to the BS; head for this neighbor's cell.
    TowardNeighbor(NodeId, CellIndex),
    /// No usable neighbor information; keep the current waypoint.
    Hold,
}

impl WaypointDecision {
    pub fn cell(&self) -> Option<CellIndex> {
        match self {
            WaypointDecision::Candidate(c) => Some(c.cell),
            WaypointDecision::TowardNeighbor(_, c) => Some(*c),
            WaypointDecision::Hold => None,
        }
    }
}

/// Scores every candidate cell around the UAV. Duplicate cells are scored once.
pub fn waypoint_candidates(
    pos: Vec2,
    heading: f64,
    map: &AreaMap,
    pheromone: impl Fn(CellIndex) -> f64,
    neighbors: &[NeighborHint],
    params: &WaypointParams,
) -> Vec<WaypointCandidate> {
    let mut cells: Vec<CellIndex> = Vec::new();
    for &range in &params.ranges_m {
        for &bearing in &params.bearings_rad {
            let p = pos + Vec2::from_angle(heading + bearing) * range;
            if !map.contains(p) {
                continue;
            }
            if let Ok(c) = map.cell_of(p) {
                if !cells.contains(&c) {
                    cells.push(c);
                }
            }
        }
    }
    cells
        .into_iter()
        .map(|cell| {
            let center = map.cell_center(cell);
            let mut patch = 0.0;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (c, r) = (cell.col as i64 + dc, cell.row as i64 + dr);
                    if c >= 0 && r >= 0 && c < map.cols() as i64 && r < map.rows() as i64 {
                        patch += pheromone(CellIndex::new(c as u32, r as u32));
                    }
                }
            }
            let mut degree = 0u32;
            let mut bs_connected = false;
            for n in neighbors {
                if n.waypoint_center.distance(center) <= params.tx_range_m {
                    degree += 1;
                    bs_connected |= n.has_route;
                }
            }
            let score = patch - params.beta * f64::from(degree.min(params.degree_cap));
            WaypointCandidate { cell, score, predicted_degree: degree, bs_connected }
        })
        .collect()
}

/// Lowest score among BS-connected candidates; equal scores go to the lower
/// `(col, row)`.
pub fn best_candidate(cands: &[WaypointCandidate]) -> Option<WaypointCandidate> {
    cands
        .iter()
        .filter(|c| c.bs_connected)
        .min_by(|a, b| a.score.total_cmp(&b.score).then(a.cell.cmp(&b.cell)))
        .copied()
}

/// Next waypoint for a searcher given only its local view.
pub fn select_waypoint(
    pos: Vec2,
    heading: f64,
    map: &AreaMap,
    pheromone: impl Fn(CellIndex) -> f64,
    neighbors: &[NeighborHint],
    params: &WaypointParams,
) -> WaypointDecision {
    if neighbors.is_empty() {
        return WaypointDecision::Hold;
    }
    let cands = waypoint_candidates(pos, heading, map, pheromone, neighbors, params);
    if let Some(best) = best_candidate(&cands) {
        return WaypointDecision::Candidate(best);
    }
    neighbors
        .iter()
        .filter(|n| n.has_route)
        .min_by(|a, b| a.pos.distance(pos).total_cmp(&b.pos.distance(pos)).then(a.id.cmp(&b.id)))
        .and_then(|n| map.cell_of(map.clamp(n.pos)).ok().map(|c| WaypointDecision::TowardNeighbor(n.id, c)))
        .unwrap_or(WaypointDecision::Hold)
}
