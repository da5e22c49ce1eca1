//! Link model, Hello-derived neighbor tables, link lifetime, interference and
//! the fair-share TDMA data plane.

pub mod dataplane;
pub mod hello;
pub mod interference;
pub mod llt;

pub use dataplane::{DataPlane, DataPlaneParams, FlowCounters};
pub use hello::{HelloPacket, LinkSummary};
pub use interference::{active_links, interfering_links, Link};
pub use llt::estimate_llt;

use crate::grid::{CellIndex, Vec2};
use crate::NodeId;

/// All alive nodes other than `node` within `range_m`, ascending by id.
pub fn neighbors(positions: &[Vec2], alive: &[bool], node: NodeId, range_m: f64) -> Vec<NodeId> {
    let p = positions[node as usize];
    let r2 = range_m * range_m;
    (0..positions.len() as NodeId)
        .filter(|&j| j != node && alive[j as usize] && (positions[j as usize] - p).norm_sq() <= r2)
        .collect()
}

pub fn in_range(a: Vec2, b: Vec2, range_m: f64) -> bool {
    (a - b).norm_sq() <= range_m * range_m
}

/// What a node remembers about one neighbor from its latest Hello.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborEntry {
    pub id: NodeId,
    pub pos: Vec2,
    pub velocity: Vec2,
    pub next_waypoint: CellIndex,
    pub hops_to_bs: u8,
    pub en: f64,
    pub il: u32,
    pub llt_s: f64,
    pub last_heard: f64,
    pub mask_cell: Option<CellIndex>,
    /// Number of link digests carried; only nodes next to an active route send them.
    pub summary_count: Option<u32>,
}

/// A node's neighbor table, kept sorted by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborTable {
    entries: Vec<NeighborEntry>,
}

impl NeighborTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn upsert(&mut self, entry: NeighborEntry) {
        match self.entries.binary_search_by_key(&entry.id, |e| e.id) {
            Ok(i) => self.entries[i] = entry,
            Err(i) => self.entries.insert(i, entry),
        }
    }

    /// Drops entries not heard within `max_age_s` of `now`.
    pub fn expire(&mut self, now: f64, max_age_s: f64) {
        self.entries.retain(|e| now - e.last_heard < max_age_s - 1e-9);
    }

    pub fn remove(&mut self, id: NodeId) {
        if let Ok(i) = self.entries.binary_search_by_key(&id, |e| e.id) {
            self.entries.remove(i);
        }
    }

    pub fn get(&self, id: NodeId) -> Option<&NeighborEntry> {
        self.entries.binary_search_by_key(&id, |e| e.id).ok().map(|i| &self.entries[i])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.get(id).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &NeighborEntry> {
        self.entries.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
