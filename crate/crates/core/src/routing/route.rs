//! Route metrics, feasibility and multi-metric route selection.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    /// Source (target UAV) first, BS last.
    pub nodes: Vec<NodeId>,
    pub established_at: f64,
}

impl Route {
    pub fn hc(&self) -> u32 {
        self.nodes.len().saturating_sub(1) as u32
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    /// Upstream (toward the source) and downstream (toward the BS) neighbors of `n`.
    pub fn neighbors_of(&self, n: NodeId) -> Option<(Option<NodeId>, Option<NodeId>)> {
        let i = self.nodes.iter().position(|&x| x == n)?;
        let up = if i > 0 { Some(self.nodes[i - 1]) } else { None };
        Some((up, self.nodes.get(i + 1).copied()))
    }

    pub fn has_repeats(&self) -> bool {
        let mut v = self.nodes.clone();
        v.sort_unstable();
        v.windows(2).any(|w| w[0] == w[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteMetrics {
    pub hc: u32,
    pub il: u32,
    pub rlt_s: f64,
    pub en_r: f64,
}

/// Weakest-node residual energy. `energy` returns `None` for dead nodes.
pub fn route_energy(nodes: &[NodeId], energy: impl Fn(NodeId) -> Option<f64>) -> Result<f64> {
    let mut min = f64::INFINITY;
    for &n in nodes {
        min = min.min(energy(n).ok_or(Error::DeadRouteNode(n))?);
    }
    Ok(min)
}

/// Shortest link lifetime along the route; a broken link yields 0.
pub fn route_lifetime(nodes: &[NodeId], llt: impl Fn(NodeId, NodeId) -> f64) -> f64 {
    nodes.windows(2).map(|w| llt(w[0], w[1]).max(0.0)).fold(f64::INFINITY, f64::min)
}

/// Sum of per-node interfering-link counts over the route.
pub fn route_il(nodes: &[NodeId], il: impl Fn(NodeId) -> u32) -> u32 {
    nodes.iter().map(|&n| il(n)).sum()
}

pub fn route_metrics(
    nodes: &[NodeId],
    energy: impl Fn(NodeId) -> Option<f64>,
    llt: impl Fn(NodeId, NodeId) -> f64,
    il: impl Fn(NodeId) -> u32,
) -> Result<RouteMetrics> {
    Ok(RouteMetrics {
        hc: nodes.len().saturating_sub(1) as u32,
        il: route_il(nodes, il),
        rlt_s: route_lifetime(nodes, llt),
        en_r: route_energy(nodes, energy)?,
    })
}

/// Lifetime and energy conditions, both strict.
pub fn feasible(m: &RouteMetrics, ttl_s: f64, en_threshold: f64, en_tolerance: f64) -> bool {
    m.rlt_s > ttl_s && m.en_r > en_threshold + en_tolerance
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub w1: f64,
    pub w2: f64,
    pub alpha: f64,
}

/// `w1·HC/HC_min + w2·IL/(IL_min + α·IL)`. When both `IL` and `IL_min` are
/// zero the congestion ratio takes its floor value `1/(1+α)`, the same value
/// it has whenever `IL = IL_min`.
pub fn route_cost(m: &RouteMetrics, hc_min: u32, il_min: u32, p: &CostParams) -> f64 {
    let hc_ratio = f64::from(m.hc) / f64::from(hc_min.max(1));
    let il = f64::from(m.il);
    let denom = f64::from(il_min) + p.alpha * il;
    let il_ratio = if denom == 0.0 { 1.0 / (1.0 + p.alpha) } else { il / denom };
    p.w1 * hc_ratio + p.w2 * il_ratio
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub ttl_s: f64,
    pub en_threshold: f64,
    pub en_tolerance: f64,
    pub hc_window: u32,
    pub cost: CostParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub nodes: Vec<NodeId>,
    pub metrics: RouteMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub nodes: Vec<NodeId>,
    pub metrics: RouteMetrics,
    pub cost: f64,
}

fn rank(a: &Selection, b: &Selection) -> Ordering {
    a.cost
        .total_cmp(&b.cost)
        .then(a.metrics.hc.cmp(&b.metrics.hc))
        .then(a.metrics.il.cmp(&b.metrics.il))
        .then_with(|| a.nodes.cmp(&b.nodes))
}

/// Feasibility filter, hop-count window, then lowest cost with ties broken by
/// (HC, IL, node ids). Errors when nothing survives the filters.
pub fn select_active_route(candidates: &[Candidate], p: &SelectionParams) -> Result<Selection> {
    let feas: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| feasible(&c.metrics, p.ttl_s, p.en_threshold, p.en_tolerance))
        .collect();
    let hc_min = feas.iter().map(|c| c.metrics.hc).min().ok_or(Error::NoFeasibleRoute)?;
    let window: Vec<&Candidate> = feas.into_iter().filter(|c| c.metrics.hc <= hc_min + p.hc_window).collect();
    let il_min = window.iter().map(|c| c.metrics.il).min().unwrap_or(0);
    window
        .into_iter()
        .map(|c| Selection { nodes: c.nodes.clone(), metrics: c.metrics, cost: route_cost(&c.metrics, hc_min, il_min, &p.cost) })
        .min_by(rank)
        .ok_or(Error::NoFeasibleRoute)
}

/// Shortest-HC candidate (AODV / Relay): ties by node ids. Ignores feasibility.
pub fn select_shortest(candidates: &[Candidate]) -> Option<&Candidate> {
    candidates.iter().min_by(|a, b| a.metrics.hc.cmp(&b.metrics.hc).then_with(|| a.nodes.cmp(&b.nodes)))
}
