use serde::{Deserialize, Serialize};

/// Fixed-step clock. Time is derived from the integer step count so it never drifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    pub dt_s: f64,
    pub steps_per_tick: u64,
    pub step: u64,
}

impl SimClock {
    pub fn new(dt_s: f64, steps_per_tick: u64) -> Self {
        assert!(dt_s > 0.0 && steps_per_tick > 0);
        Self { dt_s, steps_per_tick, step: 0 }
    }

    pub fn now_s(&self) -> f64 {
        self.step as f64 * self.dt_s
    }

    /// Number of completed protocol ticks.
    pub fn tick(&self) -> u64 {
        self.step / self.steps_per_tick
    }

    pub fn on_tick_boundary(&self) -> bool {
        self.step % self.steps_per_tick == 0
    }

    pub fn advance(&mut self) {
        self.step += 1;
    }
}
