use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Switch processing model, in abstract cycles.
///
/// The defaults are a modelling calibration, not a measurement: a switch
/// forwarding 1000 packets/s with no hosted function sits at 30% load, and a
/// switch hosting the full 72-feature model on every attack flow runs out of
/// headroom once each of three attackers exceeds roughly 700 packets/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    /// Cycles per second of one switch.
    pub capacity: u64,
    /// Per packet received. Charged even when the packet is then dropped.
    pub c_fwd: u64,
    /// Per feature per buffered packet, charged when a flow triggers.
    pub c_feat: u64,
    /// Per tree node visited during inference.
    pub c_node: u64,
    /// Per chain-header operation (create, append, finalize).
    pub c_hdr: u64,
    /// A packet arriving to more than this much queued work is dropped.
    pub queue_bound_s: f64,
    /// One-way latency of every switch-to-switch link.
    pub link_latency_us: u64,
    /// Flow-table entries idle this long are evicted.
    pub idle_timeout_s: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            capacity: 1_000_000_000,
            c_fwd: 300_000,
            c_feat: 25_000,
            c_node: 20_000,
            c_hdr: 25_000_000,
            queue_bound_s: 1.0,
            link_latency_us: 1_000,
            idle_timeout_s: 60.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::InvalidArgument("switch capacity must be positive".into()));
        }
        if !(self.queue_bound_s > 0.0 && self.queue_bound_s.is_finite()) {
            return Err(Error::InvalidArgument("queue bound must be positive".into()));
        }
        if self.idle_timeout_s.is_nan() || self.idle_timeout_s <= 0.0 {
            return Err(Error::InvalidArgument("idle timeout must be positive".into()));
        }
        Ok(())
    }

    /// Service time for `cycles` of work, rounded up to whole microseconds.
    pub fn service_us(&self, cycles: u64) -> u64 {
        (u128::from(cycles) * 1_000_000).div_ceil(u128::from(self.capacity)) as u64
    }

    pub fn queue_bound_us(&self) -> u64 {
        (self.queue_bound_s * 1e6).round() as u64
    }

    pub fn load(path: &Path) -> Result<Self> {
        let model: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        model.validate()?;
        Ok(model)
    }
}
