//! Fan-out of independent runs and deterministic aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::engine::{run, RunSpec};
use crate::error::Result;
use crate::metrics::{average, MetricsReport};
use crate::scenario::{Scenario, Scheme};

/// Cartesian sweep over scenarios, schemes, densities, speeds, rates,
/// failure levels and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPlan {
    pub base: SimConfig,
    pub scenarios: Vec<Scenario>,
    pub schemes: Vec<Scheme>,
    pub n_uavs: Vec<u32>,
    pub speeds_mps: Vec<f64>,
    pub rates_bps: Vec<f64>,
    pub failure_pcts: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl BatchPlan {
    pub fn specs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for sc in &self.scenarios {
            for &scheme in &self.schemes {
                for &n in &self.n_uavs {
                    for &v in &self.speeds_mps {
                        for &rate in &self.rates_bps {
                            for &fp in &self.failure_pcts {
                                for &seed in &self.seeds {
                                    let config = SimConfig { seed, n_uavs: n, speed_mps: v, data_rate_bps: rate, ..self.base.clone() };
                                    out.push(RunSpec { scenario: sc.clone(), scheme, failure_pct: fp, config, trace: false });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Runs every spec (in parallel when a pool is available) and returns the
/// reports in spec order.
pub fn run_all(specs: &[RunSpec]) -> Result<Vec<MetricsReport>> {
    specs.par_iter().map(run).collect()
}

/// Grouping key of a report: everything but the seed.
pub fn group_key(r: &MetricsReport) -> (String, String, u32, u64, u64, u64) {
    (r.scenario.clone(), r.scheme.clone(), r.n_uavs, r.speed_mps.to_bits(), r.data_rate_bps.to_bits(), r.failure_pct.to_bits())
}

/// One averaged report per configuration, ordered by configuration key.
pub fn average_groups(reports: &[MetricsReport]) -> Vec<MetricsReport> {
    let mut groups: BTreeMap<_, Vec<MetricsReport>> = BTreeMap::new();
    for r in reports {
        groups.entry(group_key(r)).or_default().push(r.clone());
    }
    groups
        .into_values()
        .filter_map(|mut g| {
            g.sort_by_key(|r| r.seed);
            average(&g)
        })
        .collect()
}
