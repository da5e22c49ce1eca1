//! Target layouts, routing schemes and node-failure plans.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::Vec2;
use crate::NodeId;

/// Fixed base-station position: bottom center of the map.
pub const BS_POS: Vec2 = Vec2::new(3000.0, 200.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Aodv,
    Pipe,
    TcPipe,
    Relay,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Aodv, Scheme::Pipe, Scheme::TcPipe, Scheme::Relay];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Aodv => "AODV",
            Scheme::Pipe => "Pipe",
            Scheme::TcPipe => "TC-Pipe",
            Scheme::Relay => "Relay",
        }
    }

    /// Whether the scheme maintains a pipe and switches proactively.
    pub fn uses_pipe(self) -> bool {
        matches!(self, Scheme::Pipe | Scheme::TcPipe)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match k.as_str() {
            "aodv" => Ok(Scheme::Aodv),
            "pipe" => Ok(Scheme::Pipe),
            "tcpipe" => Ok(Scheme::TcPipe),
            "relay" => Ok(Scheme::Relay),
            _ => Err(Error::UnknownScheme(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub targets: Vec<Vec2>,
    pub bs_pos: Vec2,
}

impl Scenario {
    pub fn new(name: &str, targets: &[(f64, f64)]) -> Self {
        Scenario {
            name: name.to_string(),
            targets: targets.iter().map(|&(x, y)| Vec2::new(x, y)).collect(),
            bs_pos: BS_POS,
        }
    }
}

/// The six target layouts C1–C6.
pub fn builtin_scenarios() -> Vec<Scenario> {
    vec![
        Scenario::new("C1", &[(1500.0, 5000.0)]),
        Scenario::new("C2", &[(4000.0, 4000.0)]),
        Scenario::new("C3", &[(2000.0, 2000.0)]),
        Scenario::new("C4", &[(1000.0, 4500.0), (3000.0, 5000.0), (5000.0, 4500.0)]),
        Scenario::new("C5", &[(1000.0, 4000.0), (3600.0, 2500.0), (5000.0, 4800.0)]),
        Scenario::new("C6", &[(1000.0, 1500.0), (3000.0, 2000.0), (5000.0, 1500.0)]),
    ]
}

pub fn scenario_by_name(name: &str) -> Result<Scenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// Nodes to kill and when, sorted by time then id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FailurePlan {
    pub events: Vec<(NodeId, f64)>,
}

impl FailurePlan {
    /// Picks `round(fraction · n_uavs)` victims among `eligible` (capped at
    /// its size) with failure times uniform in `[start_s, end_s)`.
    pub fn draw<R: Rng>(rng: &mut R, fraction: f64, n_uavs: u32, eligible: &[NodeId], start_s: f64, end_s: f64) -> Self {
        let want = ((fraction * f64::from(n_uavs)).round() as usize).min(eligible.len());
        let picks = sample(rng, eligible.len(), want);
        let mut events: Vec<(NodeId, f64)> = picks.into_iter().map(|i| (eligible[i], rng.random_range(start_s..end_s))).collect();
        events.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        FailurePlan { events }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}
