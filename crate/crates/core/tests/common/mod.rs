//! Shared fixtures: random pipes and brute-force oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pipesim::grid::{AreaMap, CellIndex, Vec2, RECT_EPS_M};
use pipesim::routing::{
    feasible, select_active_route, Candidate, PipeNode, PipeTopology, SelectionParams, SwitchDecision, Triggers,
};
use pipesim::NodeId;

/// A sparse random geometric graph on `n` nodes in the unit square, dressed as a pipe
/// from node 0 to node n−1. Link lifetimes, energies and interference counts
/// are drawn so that a fair share of links and nodes sit at or below the
/// feasibility thresholds.
pub fn random_pipe(seed: u64, n: usize, p: &SelectionParams) -> PipeTopology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // expected degree ≈ n·π·r², kept around 3–5 so the full path set stays enumerable
    let radius = (rng.random_range(3.0..5.0) / (std::f64::consts::PI * n as f64)).sqrt();
    let pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let mut adj: BTreeMap<NodeId, Vec<(NodeId, f64)>> = (0..n as NodeId).map(|i| (i, Vec::new())).collect();
    for a in 0..n {
        for b in a + 1..n {
            let (dx, dy) = (pos[a].0 - pos[b].0, pos[a].1 - pos[b].1);
            if dx.hypot(dy) > radius {
                continue;
            }
            let llt = match rng.random_range(0..10) {
                0 => p.ttl_s,
                1 | 2 => rng.random_range(0.0..p.ttl_s),
                _ => rng.random_range(p.ttl_s..60.0),
            };
            adj.get_mut(&(a as NodeId)).unwrap().push((b as NodeId, llt));
            adj.get_mut(&(b as NodeId)).unwrap().push((a as NodeId, llt));
        }
    }
    for list in adj.values_mut() {
        list.sort_by_key(|(m, _)| *m);
    }
    let floor = p.en_threshold + p.en_tolerance;
    let nodes = (0..n as NodeId)
        .map(|i| {
            let en = match rng.random_range(0..12) {
                0 => floor,
                1 => p.en_threshold,
                2 => rng.random_range(0.0..p.en_threshold),
                _ => rng.random_range(floor..100.0),
            };
            (i, PipeNode { depth: 0, en, il: rng.random_range(0..6) })
        })
        .collect();
    PipeTopology { source: 0, dest: n as NodeId - 1, nodes, adj, formed_at: 0.0 }
}

/// Every simple source→destination path, by depth-first search.
pub fn simple_paths(pipe: &PipeTopology) -> Vec<Vec<NodeId>> {
    fn dfs(pipe: &PipeTopology, path: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        let tail = *path.last().unwrap();
        if tail == pipe.dest {
            out.push(path.clone());
            return;
        }
        for &(m, _) in &pipe.adj[&tail] {
            if !path.contains(&m) {
                path.push(m);
                dfs(pipe, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    dfs(pipe, &mut vec![pipe.source], &mut out);
    out
}

/// A random simple source→destination path (ignoring feasibility), if any.
pub fn random_path(seed: u64, pipe: &PipeTopology) -> Option<Vec<NodeId>> {
    let paths = simple_paths(pipe);
    if paths.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Some(paths[rng.random_range(0..paths.len())].clone())
}

pub fn all_candidates(pipe: &PipeTopology) -> Vec<Candidate> {
    simple_paths(pipe)
        .into_iter()
        .map(|nodes| {
            let metrics = pipe.metrics_of(&nodes);
            Candidate { nodes, metrics }
        })
        .collect()
}

/// Switching decision computed from the full path set: the triggers from the
/// current route's metrics and the shortest feasible path, then the argmin of
/// the selection rule over every simple path.
pub fn oracle_switch(pipe: &PipeTopology, current: &[NodeId], p: &SelectionParams) -> (Triggers, SwitchDecision) {
    let cands = all_candidates(pipe);
    let cur = pipe.metrics_of(current);
    let shortest = cands
        .iter()
        .filter(|c| feasible(&c.metrics, p.ttl_s, p.en_threshold, p.en_tolerance))
        .map(|c| c.metrics.hc)
        .min();
    let triggers = Triggers {
        lifetime: cur.rlt_s <= p.ttl_s,
        energy: cur.en_r <= p.en_threshold,
        shorter: shortest.is_some_and(|h| h < cur.hc),
    };
    let decision = if !triggers.any() {
        SwitchDecision::Keep
    } else {
        match select_active_route(&cands, p) {
            Ok(sel) if sel.nodes == current => SwitchDecision::Keep,
            Ok(sel) => SwitchDecision::Switched(sel),
            Err(_) => SwitchDecision::Rediscover,
        }
    };
    (triggers, decision)
}

/// Cells whose centers lie in the rectangle, by scanning the whole grid.
pub fn rect_cells_brute(map: &AreaMap, center: Vec2, long_m: f64, short_m: f64, axis: Vec2) -> Vec<CellIndex> {
    let u = axis.normalized().unwrap();
    let w = u.perp();
    let mut out = Vec::new();
    for col in 0..map.cols() {
        for row in 0..map.rows() {
            let c = CellIndex::new(col, row);
            let d = map.cell_center(c) - center;
            if d.dot(u).abs() <= long_m / 2.0 + RECT_EPS_M && d.dot(w).abs() <= short_m / 2.0 + RECT_EPS_M {
                out.push(c);
            }
        }
    }
    out.sort();
    out
}

/// Link lifetime by bisection on the separation: the set of times the pair is
/// in range is an interval starting at 0, so its end is found by halving.
pub fn llt_bisect(pi: Vec2, vi: Vec2, pj: Vec2, vj: Vec2, range_m: f64, cap_s: f64) -> f64 {
    let sep = |t: f64| ((pj + vj * t) - (pi + vi * t)).norm();
    if sep(0.0) > range_m {
        return 0.0;
    }
    if sep(cap_s) <= range_m {
        return cap_s;
    }
    let (mut lo, mut hi) = (0.0, cap_s);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sep(mid) <= range_m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
