//! Fair-share TDMA abstraction with TTL-ordered queues and source routing.
//!
//! Each node owns a queue served in ascending time-to-expiry. A transmitting
//! node gets `channel_rate / (1 + contenders)`, where contenders are the other
//! nodes in range that transmitted during the previous step. Packets carry the
//! route they were stamped with when they left the source.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::grid::Vec2;
use crate::NodeId;

pub type FlowId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPlaneParams {
    pub channel_rate_bps: f64,
    pub packet_bits: f64,
    pub processing_s: f64,
    pub ttl_s: f64,
    pub range_m: f64,
    /// Packets created in `[window_start_s, window_end_s)` count toward PDR.
    pub window_start_s: f64,
    pub window_end_s: f64,
    /// Width of the PDR time-series bins.
    pub bin_s: f64,
}

impl DataPlaneParams {
    /// Time to push one packet through a link at the given share.
    pub fn hop_latency_s(&self, contenders: u32) -> f64 {
        self.packet_bits / (self.channel_rate_bps / f64::from(1 + contenders)) + self.processing_s
    }
}

/// Window-restricted per-flow packet accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlowCounters {
    pub generated: u64,
    pub delivered: u64,
    pub expired: u64,
    pub dropped: u64,
    pub latency_sum_s: f64,
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    seq: u64,
    flow: u32,
    route: u32,
    hop: u32,
    created: f64,
    expires: f64,
    avail: f64,
    counted: bool,
}

impl PartialEq for Packet {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Packet {}
impl PartialOrd for Packet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Packet {
    // Max-heap: the smallest time-to-expiry must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other.expires.total_cmp(&self.expires).then(other.seq.cmp(&self.seq))
    }
}

struct FlowState {
    source: NodeId,
    route: Option<u32>,
    buffer: VecDeque<Packet>,
    counters: FlowCounters,
    next_gen_s: f64,
    interval_s: f64,
    active: bool,
    bins: Vec<(u64, u64)>,
}

/// Outcome of one packet-level event, for tests and tracing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Delivered,
    Expired,
    Dropped,
}

pub struct DataPlane {
    params: DataPlaneParams,
    queues: Vec<BinaryHeap<Packet>>,
    cursor: Vec<f64>,
    tx_prev: Vec<bool>,
    tx_now: Vec<bool>,
    tx_count: Vec<u64>,
    routes: Vec<Vec<NodeId>>,
    flows: Vec<FlowState>,
    next_seq: u64,
    in_flight_total: u64,
}

impl DataPlane {
    pub fn new(n_nodes: usize, params: DataPlaneParams) -> Self {
        DataPlane {
            params,
            queues: (0..n_nodes).map(|_| BinaryHeap::new()).collect(),
            cursor: vec![0.0; n_nodes],
            tx_prev: vec![false; n_nodes],
            tx_now: vec![false; n_nodes],
            tx_count: vec![0; n_nodes],
            routes: Vec::new(),
            flows: Vec::new(),
            next_seq: 0,
            in_flight_total: 0,
        }
    }

    pub fn params(&self) -> &DataPlaneParams {
        &self.params
    }

    /// Registers a constant-bit-rate flow from `source` starting at `start_s`.
    pub fn add_flow(&mut self, source: NodeId, rate_bps: f64, start_s: f64) -> FlowId {
        let n_bins = (self.params.window_end_s / self.params.bin_s).ceil().max(1.0) as usize;
        self.flows.push(FlowState {
            source,
            route: None,
            buffer: VecDeque::new(),
            counters: FlowCounters::default(),
            next_gen_s: start_s,
            interval_s: self.params.packet_bits / rate_bps,
            active: true,
            bins: vec![(0, 0); n_bins],
        });
        self.flows.len() - 1
    }

    pub fn n_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn counters(&self, flow: FlowId) -> FlowCounters {
        self.flows[flow].counters
    }

    /// Per-bin (generated, delivered) counts by creation time, window packets only.
    pub fn bins(&self, flow: FlowId) -> &[(u64, u64)] {
        &self.flows[flow].bins
    }

    /// Window packets of `flow` still queued or buffered.
    pub fn in_flight(&self, flow: FlowId) -> u64 {
        let f = &self.flows[flow];
        let buffered = f.buffer.iter().filter(|p| p.counted).count() as u64;
        let queued: u64 = self
            .queues
            .iter()
            .map(|q| q.iter().filter(|p| p.flow as usize == flow && p.counted).count() as u64)
            .sum();
        buffered + queued
    }

    /// Total packets (any flow, any time) sitting in the network.
    pub fn in_flight_total(&self) -> u64 {
        self.in_flight_total
    }

    /// Data packets transmitted by `node` since the last call; resets the count.
    pub fn take_tx_count(&mut self, node: NodeId) -> u64 {
        std::mem::take(&mut self.tx_count[node as usize])
    }

    pub fn transmitted_last_step(&self, node: NodeId) -> bool {
        self.tx_prev[node as usize]
    }

    pub fn queue_len(&self, node: NodeId) -> usize {
        self.queues[node as usize].len()
    }

    /// Installs or clears the route used for packets leaving the source. Packets
    /// still waiting at the source are re-stamped with the new route.
    pub fn set_route(&mut self, flow: FlowId, route: Option<&[NodeId]>) {
        let source = self.flows[flow].source;
        let current = self.flows[flow].route.map(|r| self.routes[r as usize].as_slice());
        if current == route {
            return;
        }
        let id = route.map(|r| {
            debug_assert_eq!(r[0], source);
            self.routes.push(r.to_vec());
            (self.routes.len() - 1) as u32
        });
        self.flows[flow].route = id;
        let q = std::mem::take(&mut self.queues[source as usize]);
        let (mine, rest): (Vec<Packet>, Vec<Packet>) = q.into_iter().partition(|p| p.flow as usize == flow && p.hop == 0);
        self.queues[source as usize] = rest.into();
        let f = &mut self.flows[flow];
        let mut recalled = mine;
        recalled.sort_by(|a, b| a.seq.cmp(&b.seq));
        for p in recalled.into_iter().rev() {
            f.buffer.push_front(p);
        }
        f.buffer.make_contiguous().sort_by(|a, b| a.seq.cmp(&b.seq));
    }

    /// Stops generation for a flow (its source is gone).
    pub fn stop_flow(&mut self, flow: FlowId) {
        self.flows[flow].active = false;
    }

    /// Drops everything queued at a dead node.
    pub fn kill_node(&mut self, node: NodeId) {
        let q = std::mem::take(&mut self.queues[node as usize]);
        for p in q {
            self.finish(p, Fate::Dropped, 0.0);
        }
        self.tx_prev[node as usize] = false;
    }

    fn finish(&mut self, p: Packet, fate: Fate, at: f64) {
        self.in_flight_total -= 1;
        if !p.counted {
            return;
        }
        let bin_s = self.params.bin_s;
        let f = &mut self.flows[p.flow as usize];
        match fate {
            Fate::Delivered => {
                f.counters.delivered += 1;
                f.counters.latency_sum_s += at - p.created;
                let b = ((p.created / bin_s) as usize).min(f.bins.len() - 1);
                f.bins[b].1 += 1;
            }
            Fate::Expired => f.counters.expired += 1,
            Fate::Dropped => f.counters.dropped += 1,
        }
    }

    fn generate(&mut self, t_end: f64) {
        let (ws, we, ttl, bin_s) = (self.params.window_start_s, self.params.window_end_s, self.params.ttl_s, self.params.bin_s);
        for fi in 0..self.flows.len() {
            let f = &mut self.flows[fi];
            if !f.active {
                continue;
            }
            while f.next_gen_s < t_end {
                let t = f.next_gen_s;
                let counted = t >= ws && t < we;
                f.buffer.push_back(Packet {
                    seq: self.next_seq,
                    flow: fi as u32,
                    route: u32::MAX,
                    hop: 0,
                    created: t,
                    expires: t + ttl,
                    avail: t,
                    counted,
                });
                self.next_seq += 1;
                self.in_flight_total += 1;
                if counted {
                    f.counters.generated += 1;
                    let b = ((t / bin_s) as usize).min(f.bins.len() - 1);
                    f.bins[b].0 += 1;
                }
                f.next_gen_s = t + f.interval_s;
            }
        }
    }

    /// Advances the data plane over `[t0, t0 + dt)`.
    pub fn step(&mut self, t0: f64, dt: f64, positions: &[Vec2], alive: &[bool]) {
        let t_end = t0 + dt;
        self.generate(t_end);

        // Expire buffered packets; hand the rest to the source queue when routed.
        for fi in 0..self.flows.len() {
            while let Some(p) = self.flows[fi].buffer.front() {
                if p.expires < t0 {
                    let p = self.flows[fi].buffer.pop_front().unwrap();
                    self.finish(p, Fate::Expired, t0);
                } else {
                    break;
                }
            }
            if let Some(r) = self.flows[fi].route {
                let src = self.flows[fi].source as usize;
                if alive[src] {
                    while let Some(mut p) = self.flows[fi].buffer.pop_front() {
                        p.route = r;
                        self.queues[src].push(p);
                    }
                }
            }
        }

        let range2 = self.params.range_m * self.params.range_m;
        let n = self.queues.len();
        let transmitters: Vec<usize> = (0..n).filter(|&i| self.tx_prev[i]).collect();
        let mut rate = vec![0.0; n];
        for i in 0..n {
            if self.queues[i].is_empty() {
                continue;
            }
            let contenders = transmitters
                .iter()
                .filter(|&&j| j != i && (positions[j] - positions[i]).norm_sq() <= range2)
                .count();
            rate[i] = self.params.channel_rate_bps / (1 + contenders) as f64;
        }
        for c in self.cursor.iter_mut() {
            *c = c.max(t0);
        }

        loop {
            let mut progress = false;
            for i in 0..n {
                if self.queues[i].is_empty() {
                    continue;
                }
                if rate[i] == 0.0 {
                    // Became non-empty within this step: it was silent last step too.
                    let contenders = transmitters
                        .iter()
                        .filter(|&&j| j != i && (positions[j] - positions[i]).norm_sq() <= range2)
                        .count();
                    rate[i] = self.params.channel_rate_bps / (1 + contenders) as f64;
                }
                let tx_time = self.params.packet_bits / rate[i];
                while let Some(head) = self.queues[i].peek() {
                    let start = self.cursor[i].max(head.avail);
                    if start >= t_end {
                        break;
                    }
                    let p = self.queues[i].pop().unwrap();
                    if start > p.expires {
                        self.finish(p, Fate::Expired, start);
                        progress = true;
                        continue;
                    }
                    let route = &self.routes[p.route as usize];
                    let next = route[p.hop as usize + 1] as usize;
                    let finish = start + tx_time;
                    self.cursor[i] = finish;
                    self.tx_now[i] = true;
                    self.tx_count[i] += 1;
                    progress = true;
                    if !alive[next] || (positions[next] - positions[i]).norm_sq() > range2 {
                        self.finish(p, Fate::Dropped, finish);
                        continue;
                    }
                    let arrival = finish + self.params.processing_s;
                    if p.hop as usize + 2 == route.len() {
                        let fate = if arrival <= p.expires { Fate::Delivered } else { Fate::Expired };
                        self.finish(p, fate, arrival);
                    } else {
                        let mut q = p;
                        q.hop += 1;
                        q.avail = arrival;
                        self.queues[next].push(q);
                    }
                }
            }
            if !progress {
                break;
            }
        }
        std::mem::swap(&mut self.tx_prev, &mut self.tx_now);
        self.tx_now.iter_mut().for_each(|b| *b = false);
    }
}
