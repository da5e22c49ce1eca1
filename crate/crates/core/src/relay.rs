//! Bookkeeping for the relay baseline: which nodes serve which flows.

use std::collections::{BTreeMap, BTreeSet};

use crate::NodeId;

pub type FlowId = usize;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelayBook {
    serving: BTreeMap<NodeId, BTreeSet<FlowId>>,
    routes: BTreeMap<FlowId, Vec<NodeId>>,
}

impl RelayBook {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `route` as the flow's permanent route. Returns the interior
    /// nodes that were not relays before.
    pub fn establish(&mut self, flow: FlowId, route: &[NodeId]) -> Vec<NodeId> {
        let mut fresh = Vec::new();
        let interior = if route.len() > 2 { &route[1..route.len() - 1] } else { &[][..] };
        for &n in interior {
            let set = self.serving.entry(n).or_default();
            if set.is_empty() {
                fresh.push(n);
            }
            set.insert(flow);
        }
        self.routes.insert(flow, route.to_vec());
        fresh
    }

    /// Forgets the flow's route. Returns the surviving relays that now serve
    /// no flow and should go back to searching.
    pub fn release(&mut self, flow: FlowId) -> Vec<NodeId> {
        let Some(route) = self.routes.remove(&flow) else {
            return Vec::new();
        };
        let mut freed = Vec::new();
        for n in route {
            if let Some(set) = self.serving.get_mut(&n) {
                set.remove(&flow);
                if set.is_empty() {
                    self.serving.remove(&n);
                    freed.push(n);
                }
            }
        }
        freed
    }

    /// Drops a dead node from the books; returns the flows it served.
    pub fn fail(&mut self, node: NodeId) -> Vec<FlowId> {
        self.serving.remove(&node).map(|s| s.into_iter().collect()).unwrap_or_default()
    }

    pub fn route(&self, flow: FlowId) -> Option<&[NodeId]> {
        self.routes.get(&flow).map(Vec::as_slice)
    }

    pub fn is_relay(&self, node: NodeId) -> bool {
        self.serving.contains_key(&node)
    }

    pub fn flows_of(&self, node: NodeId) -> impl Iterator<Item = FlowId> + '_ {
        self.serving.get(&node).into_iter().flatten().copied()
    }

    /// Distinct relay nodes across all flows.
    pub fn relay_count(&self) -> usize {
        self.serving.len()
    }

    pub fn relays(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.serving.keys().copied()
    }
}
