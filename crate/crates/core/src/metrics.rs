//! Routing and coverage metrics, per-run reports and their averages.

use serde::{Deserialize, Serialize};

/// Delivered over generated; `None` when nothing was generated.
pub fn pdr(generated: u64, delivered: u64) -> Option<f64> {
    (generated > 0).then(|| delivered as f64 / generated as f64)
}

/// Unweighted mean over flows that generated traffic.
pub fn mean_pdr(per_flow: &[Option<f64>]) -> Option<f64> {
    let v: Vec<f64> = per_flow.iter().flatten().copied().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Total length of the union of `intervals` clipped to `[start, end)`.
pub fn union_length(intervals: &[(f64, f64)], start: f64, end: f64) -> f64 {
    let mut v: Vec<(f64, f64)> = intervals
        .iter()
        .map(|&(a, b)| (a.max(start), b.min(end)))
        .filter(|(a, b)| b > a)
        .collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in v {
        match cur {
            Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += cb - ca;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    total
}

/// Percentage of the window covered by route-up intervals.
pub fn route_up(intervals: &[(f64, f64)], start: f64, end: f64) -> f64 {
    if end <= start {
        return 0.0;
    }
    100.0 * union_length(intervals, start, end) / (end - start)
}

/// Jain's index of the counts; 0 when all are zero.
pub fn jain(x: &[u64]) -> f64 {
    let s: f64 = x.iter().map(|&v| v as f64).sum();
    let s2: f64 = x.iter().map(|&v| (v as f64) * (v as f64)).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / (x.len() as f64 * s2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    /// Percent of cells scanned at least once.
    pub c_v: f64,
    pub fairness: f64,
    /// Mean scans per cell.
    pub v_f: f64,
    /// Set when no cell was scanned (fairness reported as 0).
    pub all_zero: bool,
}

pub fn coverage_and_fairness(scans: &[u64]) -> Coverage {
    let n = scans.len().max(1) as f64;
    let visited = scans.iter().filter(|&&x| x > 0).count() as f64;
    let total: u64 = scans.iter().sum();
    Coverage { c_v: 100.0 * visited / n, fairness: jain(scans), v_f: total as f64 / n, all_zero: total == 0 }
}

/// One row of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub scheme: String,
    pub n_uavs: u32,
    pub speed_mps: f64,
    pub data_rate_bps: f64,
    pub failure_pct: f64,
    pub seed: u64,
    /// Number of runs folded into this row (1 for a single run).
    pub runs: u32,
    pub flows: u32,
    /// Mean of per-flow PDRs; empty when no flow generated traffic.
    pub pdr: Option<f64>,
    /// Route breaks per flow in the window.
    pub r_b: f64,
    /// Percent of the window with a valid route, mean over flows.
    pub r_u: f64,
    /// Time-weighted hop count of installed routes, mean over flows.
    pub route_length: Option<f64>,
    pub c_v: f64,
    pub c_v_full: f64,
    pub fairness: f64,
    pub v_f: f64,
    /// Relay routes rebuilt after a relay died, per flow.
    pub relay_reestablished: f64,
    pub discoveries: f64,
    pub switches: f64,
    pub routeless_events: f64,
    pub mask_applications: f64,
    pub generated: f64,
    pub delivered: f64,
    pub expired: f64,
    pub dropped: f64,
    pub in_flight: f64,
    pub mean_latency_s: Option<f64>,
    /// Informational: mean Hello payload per node per second.
    pub hello_bits_per_node_s: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn mean_opt(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| mean(v.into_iter()))
}

/// Field-wise arithmetic mean of reports sharing one configuration. Identity
/// columns come from the first report; `seed` is the first seed and `runs` the
/// total number of runs.
pub fn average(reports: &[MetricsReport]) -> Option<MetricsReport> {
    let first = reports.first()?;
    macro_rules! m {
        ($f:ident) => {
            mean(reports.iter().map(|r| r.$f))
        };
    }
    macro_rules! mo {
        ($f:ident) => {
            mean_opt(reports.iter().map(|r| r.$f))
        };
    }
    Some(MetricsReport {
        scenario: first.scenario.clone(),
        scheme: first.scheme.clone(),
        n_uavs: first.n_uavs,
        speed_mps: first.speed_mps,
        data_rate_bps: first.data_rate_bps,
        failure_pct: first.failure_pct,
        seed: first.seed,
        runs: reports.iter().map(|r| r.runs).sum(),
        flows: first.flows,
        pdr: mo!(pdr),
        r_b: m!(r_b),
        r_u: m!(r_u),
        route_length: mo!(route_length),
        c_v: m!(c_v),
        c_v_full: m!(c_v_full),
        fairness: m!(fairness),
        v_f: m!(v_f),
        relay_reestablished: m!(relay_reestablished),
        discoveries: m!(discoveries),
        switches: m!(switches),
        routeless_events: m!(routeless_events),
        mask_applications: m!(mask_applications),
        generated: m!(generated),
        delivered: m!(delivered),
        expired: m!(expired),
        dropped: m!(dropped),
        in_flight: m!(in_flight),
        mean_latency_s: mo!(mean_latency_s),
        hello_bits_per_node_s: m!(hello_bits_per_node_s),
    })
}

/// One row of the long-format time-series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub scenario: String,
    pub scheme: String,
    pub n_uavs: u32,
    pub speed_mps: f64,
    pub data_rate_bps: f64,
    pub failure_pct: f64,
    pub seed: u64,
    pub t: f64,
    pub metric: String,
    pub value: f64,
}
