use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::ensemble::Confusion;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchUsage {
    pub name: String,
    /// `"-"`, `"sl"` or the hosted learner ids joined by `+`.
    pub hosted: String,
    /// Busy share of the run window.
    pub mean_util: f64,
    /// Busiest one-second window.
    pub peak_util: f64,
    pub cycles: u64,
    pub inference_cycles: u64,
    pub accepted: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TtiStats {
    /// Milliseconds, in finalization order.
    pub samples_ms: Vec<f64>,
    pub mean_ms: f64,
    pub max_ms: f64,
    /// Flows that triggered at their first evaluator but never finalized.
    pub censored: u64,
}

impl TtiStats {
    pub fn from_samples(samples_ms: Vec<f64>, censored: u64) -> Self {
        let (mean_ms, max_ms) = if samples_ms.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (
                samples_ms.iter().sum::<f64>() / samples_ms.len() as f64,
                samples_ms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        Self {
            samples_ms,
            mean_ms,
            max_ms,
            censored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mode: String,
    /// Attack rate per attacker (the largest, if they differ); 0 without attackers.
    pub attack_rate: f64,
    pub duration_s: f64,
    pub injected: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub suppressed: u64,
    /// Benign payload delivered (drain included) per second of the run window, in bits.
    pub throughput_bps: f64,
    /// Same, for all payload.
    pub total_throughput_bps: f64,
    /// Mean utilization of the switches hosting a learner.
    pub mean_util: f64,
    pub mean_util_all: f64,
    pub peak_util: f64,
    pub switches: Vec<SwitchUsage>,
    pub tti: TtiStats,
    pub inferences: u64,
    pub confusion: Confusion,
    pub blocked_flows: u64,
    pub stretch_pct: f64,
}

pub const CSV_HEADER: &str = "rate,mode,throughput_bps,mean_util,mean_tti_ms,fpr,fnr,total_throughput_bps,\
mean_util_all,peak_util,max_tti_ms,tti_samples,tti_censored,inferences,injected,delivered,dropped,suppressed,\
blocked_flows,tp,tn,fp,fn,stretch_pct";

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.6}")
    }
}

impl MetricsReport {
    pub fn conserved(&self) -> bool {
        self.injected == self.delivered + self.dropped + self.suppressed
    }

    pub fn csv_row(&self) -> String {
        let c = &self.confusion;
        [
            num(self.attack_rate),
            self.mode.clone(),
            num(self.throughput_bps),
            num(self.mean_util),
            num(self.tti.mean_ms),
            num(c.fpr()),
            num(c.fnr()),
            num(self.total_throughput_bps),
            num(self.mean_util_all),
            num(self.peak_util),
            num(self.tti.max_ms),
            self.tti.samples_ms.len().to_string(),
            self.tti.censored.to_string(),
            self.inferences.to_string(),
            self.injected.to_string(),
            self.delivered.to_string(),
            self.dropped.to_string(),
            self.suppressed.to_string(),
            self.blocked_flows.to_string(),
            c.tp.to_string(),
            c.tn.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            num(self.stretch_pct),
        ]
        .join(",")
    }
}

pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in reports {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    out
}

/// Writes via a sibling `.partial` file so a failed run leaves nothing behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_row_width() {
        let r = MetricsReport {
            mode: "wl".into(),
            attack_rate: 100.0,
            duration_s: 1.0,
            injected: 3,
            delivered: 1,
            dropped: 1,
            suppressed: 1,
            throughput_bps: 0.0,
            total_throughput_bps: 0.0,
            mean_util: 0.5,
            mean_util_all: 0.5,
            peak_util: 0.5,
            switches: vec![],
            tti: TtiStats::from_samples(vec![], 0),
            inferences: 0,
            confusion: Confusion::default(),
            blocked_flows: 0,
            stretch_pct: 0.0,
        };
        assert!(r.conserved());
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
        assert!(r.csv_row().contains(",nan,"));
    }
}
