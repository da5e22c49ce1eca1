//! Timed RREQ flood toward the BS with optional forwarding gates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use crate::grid::Vec2;
use crate::radio::estimate_llt;
use crate::routing::route::{route_metrics, Candidate};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscoveryMode {
    /// Directional, link-stability and energy gates; the BS answers every copy.
    Pipe,
    /// Plain flood; the BS answers the first copy only.
    Aodv,
    /// Plain flood restricted to links that stay up while both ends orbit
    /// their anchors; the BS answers the first copy only.
    Relay,
}

/// Snapshot of the network as seen by one discovery round.
#[derive(Debug, Clone, Copy)]
pub struct NetView<'a> {
    pub pos: &'a [Vec2],
    pub vel: &'a [Vec2],
    pub energy: &'a [f64],
    pub il: &'a [u32],
    pub alive: &'a [bool],
    /// Orbit anchor (center, radius) each node would hold as a relay.
    pub anchors: Option<&'a [(Vec2, f64)]>,
    pub range_m: f64,
    pub llt_cap_s: f64,
}

impl NetView<'_> {
    pub fn n(&self) -> usize {
        self.pos.len()
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        (self.pos[a as usize] - self.pos[b as usize]).norm_sq() <= self.range_m * self.range_m
    }

    pub fn llt(&self, a: NodeId, b: NodeId) -> f64 {
        let (a, b) = (a as usize, b as usize);
        estimate_llt(self.pos[a], self.vel[a], self.pos[b], self.vel[b], self.range_m, self.llt_cap_s)
    }

    pub fn neighbors(&self, a: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n() as NodeId).filter(move |&j| j != a && self.alive[j as usize] && self.in_range(a, j))
    }

    pub fn energy_of(&self, n: NodeId) -> Option<f64> {
        self.alive[n as usize].then(|| self.energy[n as usize])
    }

    pub fn candidate(&self, nodes: Vec<NodeId>) -> Option<Candidate> {
        let metrics = route_metrics(&nodes, |n| self.energy_of(n), |a, b| self.llt(a, b), |n| self.il[n as usize]).ok()?;
        Some(Candidate { nodes, metrics })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryParams {
    pub mode: DiscoveryMode,
    pub ttl_s: f64,
    pub en_threshold: f64,
    pub directional_slack_m: f64,
    pub jitter_s: f64,
    pub tx_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discovered {
    pub candidate: Candidate,
    /// Time from the first RREQ broadcast until the RREP reaches the source.
    pub rtt_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Discovery {
    pub routes: Vec<Discovered>,
    /// RREQ (re)broadcasts, for overhead accounting.
    pub broadcasts: u32,
}

impl Discovery {
    /// Time until the source has heard every reply.
    pub fn routes_rtt_max(&self) -> f64 {
        self.routes.iter().map(|r| r.rtt_s).fold(0.0, f64::max)
    }
}

#[derive(PartialEq)]
struct Broadcast {
    t: f64,
    seq: u32,
    node: NodeId,
}

impl Eq for Broadcast {}
impl PartialOrd for Broadcast {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Broadcast {
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then(other.seq.cmp(&self.seq))
    }
}

/// Whether `n` rebroadcasts a copy it heard from `prev`.
pub fn passes_gate(view: &NetView, p: &DiscoveryParams, prev: NodeId, n: NodeId, bs: NodeId) -> bool {
    match p.mode {
        DiscoveryMode::Aodv => true,
        DiscoveryMode::Pipe => {
            if n == bs {
                return true;
            }
            let bs_pos = view.pos[bs as usize];
            let closer = view.pos[n as usize].distance(bs_pos) < view.pos[prev as usize].distance(bs_pos) + p.directional_slack_m;
            closer && view.llt(prev, n) > p.ttl_s && view.energy[n as usize] > p.en_threshold
        }
        DiscoveryMode::Relay => match view.anchors {
            Some(a) => {
                let (ca, ra) = a[prev as usize];
                let (cb, rb) = a[n as usize];
                ca.distance(cb) + ra + rb <= view.range_m
            }
            None => true,
        },
    }
}

fn path_to(parent: &[Option<NodeId>], mut n: NodeId) -> Vec<NodeId> {
    let mut path = vec![n];
    while let Some(p) = parent[n as usize] {
        path.push(p);
        n = p;
    }
    path.reverse();
    path
}

/// Floods an RREQ from `source` and collects the BS's replies.
pub fn discover_route<R: Rng>(source: NodeId, bs: NodeId, view: &NetView, p: &DiscoveryParams, rng: &mut R) -> Discovery {
    let n = view.n();
    let mut out = Discovery::default();
    if !view.alive[source as usize] || !view.alive[bs as usize] || source == bs {
        return out;
    }
    let mut parent: Vec<Option<NodeId>> = vec![None; n];
    let mut forwarded = vec![false; n];
    forwarded[source as usize] = true;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u32;
    heap.push(Broadcast { t: p.tx_s, seq, node: source });
    let first_only = p.mode != DiscoveryMode::Pipe;

    while let Some(Broadcast { t, node: b, .. }) = heap.pop() {
        out.broadcasts += 1;
        for nb in view.neighbors(b).collect::<Vec<_>>() {
            if nb == bs {
                if !passes_gate(view, p, b, bs, bs) {
                    continue;
                }
                let mut nodes = path_to(&parent, b);
                nodes.push(bs);
                let hc = (nodes.len() - 1) as f64;
                if let Some(candidate) = view.candidate(nodes) {
                    out.routes.push(Discovered { candidate, rtt_s: t + hc * p.tx_s });
                }
                if first_only {
                    return out;
                }
                continue;
            }
            if forwarded[nb as usize] || !passes_gate(view, p, b, nb, bs) {
                continue;
            }
            forwarded[nb as usize] = true;
            parent[nb as usize] = Some(b);
            seq += 1;
            let jitter = if p.jitter_s > 0.0 { rng.random_range(0.0..p.jitter_s) } else { 0.0 };
            heap.push(Broadcast { t: t + jitter + p.tx_s, seq, node: nb });
        }
    }
    out
}
