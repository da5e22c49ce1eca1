//! Pipe formation and proactive route switching.
//!
//! The pipe is the source's picture of the active route plus every node within
//! two hops of it. Links are known only when one endpoint is on the route or
//! next to it, since only those nodes attach link digests to their Hellos.

use std::collections::{BTreeMap, VecDeque};

use crate::routing::route::{feasible, select_active_route, Candidate, RouteMetrics, Selection, SelectionParams};
use crate::NodeId;

/// Read access to the neighbor information a pipe is built from.
pub trait TopologyView {
    /// Neighbors of `n`, ascending by id.
    fn neighbors(&self, n: NodeId) -> Vec<NodeId>;
    fn llt(&self, a: NodeId, b: NodeId) -> f64;
    fn energy(&self, n: NodeId) -> f64;
    fn il(&self, n: NodeId) -> u32;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeNode {
    /// Hops from the nearest route node (0 for route nodes).
    pub depth: u8,
    pub en: f64,
    pub il: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipeTopology {
    pub source: NodeId,
    pub dest: NodeId,
    pub nodes: BTreeMap<NodeId, PipeNode>,
    /// Undirected adjacency with per-link lifetime, neighbor lists sorted.
    pub adj: BTreeMap<NodeId, Vec<(NodeId, f64)>>,
    pub formed_at: f64,
}

impl PipeTopology {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn link_llt(&self, a: NodeId, b: NodeId) -> Option<f64> {
        self.adj.get(&a)?.iter().find(|(n, _)| *n == b).map(|(_, l)| *l)
    }

    pub fn n_links(&self) -> usize {
        self.adj.values().map(Vec::len).sum::<usize>() / 2
    }

    /// Metrics of a node list as the pipe sees it; unknown links and nodes
    /// count as broken (lifetime 0, energy 0).
    pub fn metrics_of(&self, nodes: &[NodeId]) -> RouteMetrics {
        RouteMetrics {
            hc: nodes.len().saturating_sub(1) as u32,
            il: nodes.iter().map(|n| self.nodes.get(n).map_or(0, |p| p.il)).sum(),
            rlt_s: nodes
                .windows(2)
                .map(|w| self.link_llt(w[0], w[1]).unwrap_or(0.0))
                .fold(f64::INFINITY, f64::min),
            en_r: nodes.iter().map(|n| self.nodes.get(n).map_or(0.0, |p| p.en)).fold(f64::INFINITY, f64::min),
        }
    }
}

/// Builds the pipe around `route` (source first, destination last).
pub fn form_pipe(route: &[NodeId], view: &impl TopologyView, now: f64) -> PipeTopology {
    let mut depth: BTreeMap<NodeId, u8> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &n in route {
        if depth.insert(n, 0).is_none() {
            queue.push_back(n);
        }
    }
    let mut nbrs: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    while let Some(n) = queue.pop_front() {
        let d = depth[&n];
        if d >= 2 {
            continue;
        }
        let list = view.neighbors(n);
        for &m in &list {
            if !depth.contains_key(&m) {
                depth.insert(m, d + 1);
                queue.push_back(m);
            }
        }
        nbrs.insert(n, list);
    }

    let mut adj: BTreeMap<NodeId, Vec<(NodeId, f64)>> = depth.keys().map(|&n| (n, Vec::new())).collect();
    for (&a, list) in &nbrs {
        for &b in list {
            if !depth.contains_key(&b) {
                continue;
            }
            // Report each link once: from the lower id when both ends report it.
            if nbrs.contains_key(&b) && b < a {
                continue;
            }
            let l = view.llt(a, b);
            adj.get_mut(&a).unwrap().push((b, l));
            adj.get_mut(&b).unwrap().push((a, l));
        }
    }
    for list in adj.values_mut() {
        list.sort_by_key(|(n, _)| *n);
        list.dedup_by_key(|(n, _)| *n);
    }
    let nodes = depth
        .into_iter()
        .map(|(n, d)| (n, PipeNode { depth: d, en: view.energy(n), il: view.il(n) }))
        .collect();
    PipeTopology { source: route[0], dest: *route.last().unwrap(), nodes, adj, formed_at: now }
}

/// Cap on path enumeration for large pipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    /// Pipes with more members than this use the per-node visit budget.
    pub node_limit: usize,
    pub visit_budget: u32,
}

impl Default for EnumLimits {
    fn default() -> Self {
        EnumLimits { node_limit: 15, visit_budget: 64 }
    }
}

/// The pipe restricted to nodes and links that individually clear the
/// thresholds, plus hop distances to the destination over it.
struct Filtered {
    good: BTreeMap<NodeId, Vec<NodeId>>,
    dist: BTreeMap<NodeId, u32>,
}

impl Filtered {
    fn new(pipe: &PipeTopology, p: &SelectionParams) -> Self {
        let en_floor = p.en_threshold + p.en_tolerance;
        let good_node = |n: NodeId| pipe.nodes.get(&n).is_some_and(|x| x.en > en_floor);
        let good: BTreeMap<NodeId, Vec<NodeId>> = pipe
            .adj
            .iter()
            .filter(|(n, _)| good_node(**n))
            .map(|(&n, list)| (n, list.iter().filter(|(m, l)| *l > p.ttl_s && good_node(*m)).map(|(m, _)| *m).collect()))
            .collect();
        let mut dist: BTreeMap<NodeId, u32> = BTreeMap::new();
        if good.contains_key(&pipe.source) && good.contains_key(&pipe.dest) {
            dist.insert(pipe.dest, 0);
            let mut q = VecDeque::from([pipe.dest]);
            while let Some(n) = q.pop_front() {
                let d = dist[&n];
                for &m in &good[&n] {
                    if !dist.contains_key(&m) {
                        dist.insert(m, d + 1);
                        q.push_back(m);
                    }
                }
            }
        }
        Filtered { good, dist }
    }

    fn shortest(&self, source: NodeId) -> Option<u32> {
        self.dist.get(&source).copied()
    }
}

/// Hop count of the shortest feasible source→destination path in the pipe.
pub fn shortest_feasible_hc(pipe: &PipeTopology, p: &SelectionParams) -> Option<u32> {
    Filtered::new(pipe, p).shortest(pipe.source)
}

/// Every feasible simple source→destination path in the pipe whose HC is within
/// the selection window of the shortest feasible one. A path is feasible iff
/// all its links and nodes individually clear the thresholds, so the search
/// runs on the filtered subgraph and prunes prefixes that cannot reach the
/// destination within the depth cap.
pub fn enumerate_pipe_routes(pipe: &PipeTopology, p: &SelectionParams, limits: &EnumLimits) -> Vec<Candidate> {
    enumerate_filtered(pipe, &Filtered::new(pipe, p), p, limits)
}

fn enumerate_filtered(pipe: &PipeTopology, f: &Filtered, p: &SelectionParams, limits: &EnumLimits) -> Vec<Candidate> {
    let (good, dist) = (&f.good, &f.dist);
    let Some(h_min) = f.shortest(pipe.source) else {
        return Vec::new();
    };
    let cap = h_min + p.hc_window;
    let budgeted = pipe.len() > limits.node_limit;
    let mut visits: BTreeMap<NodeId, u32> = BTreeMap::new();

    let mut found = Vec::new();
    let mut level: Vec<Vec<NodeId>> = vec![vec![pipe.source]];
    for depth in 1..=cap {
        let mut next = Vec::new();
        for path in &level {
            let tail = *path.last().unwrap();
            for &m in &good[&tail] {
                let Some(&dm) = dist.get(&m) else { continue };
                if depth + dm > cap || path.contains(&m) {
                    continue;
                }
                if budgeted {
                    let v = visits.entry(m).or_insert(0);
                    if *v >= limits.visit_budget {
                        continue;
                    }
                    *v += 1;
                }
                let mut ext = path.clone();
                ext.push(m);
                if m == pipe.dest {
                    let metrics = pipe.metrics_of(&ext);
                    found.push(Candidate { nodes: ext, metrics });
                } else {
                    next.push(ext);
                }
            }
        }
        level = next;
        if level.is_empty() {
            break;
        }
    }
    found
}

/// Which switching conditions held at evaluation time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Triggers {
    pub lifetime: bool,
    pub energy: bool,
    pub shorter: bool,
}

impl Triggers {
    pub fn any(&self) -> bool {
        self.lifetime || self.energy || self.shorter
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SwitchDecision {
    Keep,
    Switched(Selection),
    Rediscover,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchOutcome {
    pub decision: SwitchDecision,
    pub triggers: Triggers,
    pub current: RouteMetrics,
}

/// Evaluates the current route against its pipe and switches when the route is
/// about to fail or a strictly shorter feasible path exists.
pub fn maybe_switch(pipe: &PipeTopology, current: &[NodeId], p: &SelectionParams, limits: &EnumLimits) -> SwitchOutcome {
    let cur = pipe.metrics_of(current);
    let filtered = Filtered::new(pipe, p);
    let triggers = Triggers {
        lifetime: cur.rlt_s <= p.ttl_s,
        energy: cur.en_r <= p.en_threshold,
        shorter: filtered.shortest(pipe.source).is_some_and(|h| h + 1 <= cur.hc),
    };
    let decision = if !triggers.any() {
        SwitchDecision::Keep
    } else {
        match select_active_route(&enumerate_filtered(pipe, &filtered, p, limits), p) {
            Ok(sel) if sel.nodes == current => SwitchDecision::Keep,
            Ok(sel) => SwitchDecision::Switched(sel),
            Err(_) => SwitchDecision::Rediscover,
        }
    };
    SwitchOutcome { decision, triggers, current: cur }
}

/// Whether the current route is feasible by the pipe's view.
pub fn current_feasible(pipe: &PipeTopology, current: &[NodeId], p: &SelectionParams) -> bool {
    feasible(&pipe.metrics_of(current), p.ttl_s, p.en_threshold, p.en_tolerance)
}
