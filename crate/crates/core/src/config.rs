//! Simulation parameters and their flat key-value file form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AreaMap;
use crate::routing::{CostParams, EnumLimits, SelectionParams};

/// All tunables of one run. Every key has a default, so a config file only
/// needs to list the values it overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,

    // Area and swarm.
    pub map_width_m: f64,
    pub map_height_m: f64,
    pub cell_size_m: f64,
    pub n_uavs: u32,
    pub speed_mps: f64,
    pub launch_radius_m: f64,
    pub max_turn_rate_deg_s: f64,
    pub orbit_radius_m: f64,

    // Radio and traffic.
    pub tx_range_m: f64,
    pub channel_rate_bps: f64,
    pub packet_bytes: u32,
    pub ttl_s: f64,
    pub data_rate_bps: f64,
    pub processing_delay_s: f64,

    // Phases and cadences.
    pub warmup_s: f64,
    pub measure_s: f64,
    pub kinematics_dt_s: f64,
    pub protocol_tick_s: f64,
    pub hello_interval_s: f64,
    pub neighbor_expiry_intervals: u32,
    pub notify_interval_s: f64,

    // Pheromone mobility.
    pub lambda_evap: f64,
    pub psi_diff: f64,
    pub deposit_magnitude: f64,
    pub beta: f64,
    pub degree_cap: u32,
    pub candidate_ranges_m: Vec<f64>,
    pub candidate_bearings_deg: Vec<f64>,
    /// Fraction of the radio range within which a neighbor's announced
    /// waypoint must lie for a candidate to count as connected.
    pub connect_margin: f64,

    // Topology control.
    pub th_degree: u32,

    // Route selection.
    pub alpha: f64,
    pub w1: f64,
    pub w2: f64,
    pub hc_window: u32,
    pub llt_cap_s: f64,
    pub directional_slack_m: f64,
    pub rreq_jitter_s: f64,
    pub rreq_tx_s: f64,
    pub discovery_retries: u32,
    pub pipe_enum_node_limit: usize,
    pub pipe_visit_budget: u32,

    // Energy.
    pub en_initial: f64,
    pub en_drain_flight_per_s: f64,
    pub en_drain_per_packet: f64,
    pub en_threshold: f64,
    pub en_tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            map_width_m: 6000.0,
            map_height_m: 6000.0,
            cell_size_m: 100.0,
            n_uavs: 30,
            speed_mps: 20.0,
            launch_radius_m: 500.0,
            max_turn_rate_deg_s: 30.0,
            orbit_radius_m: 100.0,
            tx_range_m: 1000.0,
            channel_rate_bps: 11e6,
            packet_bytes: 1500,
            ttl_s: 3.0,
            data_rate_bps: 2e6,
            processing_delay_s: 0.010,
            warmup_s: 1000.0,
            measure_s: 2000.0,
            kinematics_dt_s: 0.1,
            protocol_tick_s: 1.0,
            hello_interval_s: 1.0,
            neighbor_expiry_intervals: 2,
            notify_interval_s: 2.0,
            lambda_evap: 0.006,
            psi_diff: 0.006,
            deposit_magnitude: 1.0,
            beta: 1.5,
            degree_cap: 4,
            candidate_ranges_m: vec![300.0, 500.0],
            candidate_bearings_deg: vec![-90.0, -45.0, 0.0, 45.0, 90.0],
            connect_margin: 1.0,
            th_degree: 2,
            alpha: 0.3,
            w1: 0.5,
            w2: 0.5,
            hc_window: 3,
            llt_cap_s: 3600.0,
            directional_slack_m: 200.0,
            rreq_jitter_s: 0.010,
            rreq_tx_s: 0.0005,
            discovery_retries: 3,
            pipe_enum_node_limit: 15,
            pipe_visit_budget: 64,
            en_initial: 100.0,
            en_drain_flight_per_s: 0.01,
            en_drain_per_packet: 0.0001,
            en_threshold: 10.0,
            en_tolerance: 0.02,
        }
    }
}

impl SimConfig {
    pub fn total_s(&self) -> f64 {
        self.warmup_s + self.measure_s
    }

    /// Relays loiter over their cell on the tightest circle the airframe can
    /// hold (10% above the minimum turn radius), never wider than the
    /// target-monitoring orbit.
    pub fn relay_orbit_radius_m(&self) -> f64 {
        let min_turn = self.speed_mps / self.max_turn_rate_deg_s.to_radians();
        (1.1 * min_turn).min(self.orbit_radius_m)
    }

    /// Route feasibility thresholds and cost weights.
    pub fn selection_params(&self) -> SelectionParams {
        SelectionParams {
            ttl_s: self.ttl_s,
            en_threshold: self.en_threshold,
            en_tolerance: self.en_tolerance,
            hc_window: self.hc_window,
            cost: CostParams { w1: self.w1, w2: self.w2, alpha: self.alpha },
        }
    }

    pub fn enum_limits(&self) -> EnumLimits {
        EnumLimits { node_limit: self.pipe_enum_node_limit, visit_budget: self.pipe_visit_budget }
    }

    pub fn area_map(&self) -> Result<AreaMap> {
        AreaMap::new(self.map_width_m, self.map_height_m, self.cell_size_m)
    }

    pub fn packet_bits(&self) -> f64 {
        f64::from(self.packet_bytes) * 8.0
    }

    /// Kinematic sub-steps per protocol tick.
    pub fn steps_per_tick(&self) -> u64 {
        (self.protocol_tick_s / self.kinematics_dt_s).round() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if (self.w1 + self.w2 - 1.0).abs() > 1e-9 {
            return bad("w1 + w2 must equal 1");
        }
        let positive = [
            ("speed_mps", self.speed_mps),
            ("tx_range_m", self.tx_range_m),
            ("channel_rate_bps", self.channel_rate_bps),
            ("ttl_s", self.ttl_s),
            ("data_rate_bps", self.data_rate_bps),
            ("kinematics_dt_s", self.kinematics_dt_s),
            ("protocol_tick_s", self.protocol_tick_s),
            ("hello_interval_s", self.hello_interval_s),
            ("notify_interval_s", self.notify_interval_s),
            ("orbit_radius_m", self.orbit_radius_m),
            ("max_turn_rate_deg_s", self.max_turn_rate_deg_s),
            ("alpha", self.alpha),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.packet_bytes == 0 {
            return bad("packet_bytes must be positive");
        }
        if self.n_uavs == 0 || self.n_uavs > 126 {
            return bad("n_uavs must be in 1..=126 (7-bit node ids, id 0 is the BS)");
        }
        if !(0.0..1.0).contains(&self.lambda_evap) || !(0.0..1.0).contains(&self.psi_diff) {
            return bad("lambda_evap and psi_diff must lie in [0, 1)");
        }
        if self.warmup_s < 0.0 || self.measure_s <= 0.0 {
            return bad("warmup_s must be >= 0 and measure_s > 0");
        }
        let ratio = self.protocol_tick_s / self.kinematics_dt_s;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return bad("kinematics_dt_s must divide protocol_tick_s");
        }
        for (name, v) in [("hello_interval_s", self.hello_interval_s), ("notify_interval_s", self.notify_interval_s)] {
            let r = v / self.protocol_tick_s;
            if (r - r.round()).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("{name} must be a multiple of protocol_tick_s")));
            }
        }
        if !(self.connect_margin > 0.0 && self.connect_margin <= 1.0) {
            return bad("connect_margin must be in (0, 1]");
        }
        if self.candidate_ranges_m.is_empty() || self.candidate_bearings_deg.is_empty() {
            return bad("waypoint candidate geometry must not be empty");
        }
        self.area_map()?;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_orbit_is_tightest_sustainable_circle() {
        let mut cfg = SimConfig::default();
        cfg.speed_mps = 20.0;
        let r = 1.1 * 20.0 / 30f64.to_radians();
        assert!((cfg.relay_orbit_radius_m() - r).abs() < 1e-9);
        cfg.speed_mps = 200.0;
        assert_eq!(cfg.relay_orbit_radius_m(), cfg.orbit_radius_m);
    }

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn round_trips_through_file_text() {
        let mut cfg = SimConfig::default();
        cfg.n_uavs = 50;
        cfg.seed = 0xDEAD_BEEF;
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(SimConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = SimConfig::from_toml_str("n_uavs = 50\nspeed_mps = 40.0\n").unwrap();
        assert_eq!(cfg.n_uavs, 50);
        assert_eq!(cfg.ttl_s, 3.0);
        assert_eq!(cfg.channel_rate_bps, 11e6);
    }

    #[test]
    fn rejects_unbalanced_weights() {
        let err = SimConfig::from_toml_str("w1 = 0.7\nw2 = 0.5\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(SimConfig::from_toml_str("bogus = 1\n").is_err());
    }

    #[test]
    fn dt_must_divide_tick() {
        let cfg = SimConfig { kinematics_dt_s: 0.3, ..SimConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
