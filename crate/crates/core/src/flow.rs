//! Per-flow packet tracking, the detection trigger and flow statistics.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::Ipv4Addr;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::FeatureVector;
use crate::error::{Error, Result};

/// Smallest packet the generators emit (bytes).
pub const MIN_PACKET_SIZE: u32 = 68;
/// Packets below this size count towards `small_pkt_fraction`.
pub const SMALL_PACKET_BYTES: u32 = 128;
pub const DEFAULT_TRIGGER_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowKey {
    pub src_ip: Ipv4Addr,
    pub dst_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: u8,
}

impl FlowKey {
    pub fn reversed(&self) -> Self {
        Self {
            src_ip: self.dst_ip,
            dst_ip: self.src_ip,
            src_port: self.dst_port,
            dst_port: self.src_port,
            protocol: self.protocol,
        }
    }
}

impl std::fmt::Display for FlowKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}->{}:{}/{}",
            self.src_ip, self.src_port, self.dst_ip, self.dst_port, self.protocol
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    /// Emission time at the source, seconds.
    pub timestamp: f64,
    pub key: FlowKey,
    pub size: u32,
    /// Ground truth; simulation bookkeeping only, never a model input.
    pub label: u8,
}

impl PacketRecord {
    pub fn validate(&self) -> Result<()> {
        if self.size < MIN_PACKET_SIZE {
            return Err(Error::InvalidArgument(format!(
                "packet of {} bytes is below the {MIN_PACKET_SIZE}-byte minimum",
                self.size
            )));
        }
        if !(self.timestamp >= 0.0 && self.timestamp.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad timestamp {}", self.timestamp)));
        }
        Ok(())
    }
}

pub fn flow_key_of(pkt: &PacketRecord) -> FlowKey {
    pkt.key
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowVerdict {
    None,
    Pending,
    Benign,
    Malicious,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TriggerSignal {
    NotYet,
    Triggered(FeatureVector),
}

/// The twelve per-window statistics, in feature-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseStat {
    PacketCount,
    ByteSum,
    SizeMean,
    SizeStd,
    SizeMin,
    SizeMax,
    Duration,
    IatMean,
    IatStd,
    PktsPerSec,
    BytesPerSec,
    SmallPktFraction,
}

impl BaseStat {
    pub const ALL: [BaseStat; 12] = [
        BaseStat::PacketCount,
        BaseStat::ByteSum,
        BaseStat::SizeMean,
        BaseStat::SizeStd,
        BaseStat::SizeMin,
        BaseStat::SizeMax,
        BaseStat::Duration,
        BaseStat::IatMean,
        BaseStat::IatStd,
        BaseStat::PktsPerSec,
        BaseStat::BytesPerSec,
        BaseStat::SmallPktFraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseStat::PacketCount => "packet_count",
            BaseStat::ByteSum => "byte_sum",
            BaseStat::SizeMean => "size_mean",
            BaseStat::SizeStd => "size_std",
            BaseStat::SizeMin => "size_min",
            BaseStat::SizeMax => "size_max",
            BaseStat::Duration => "duration",
            BaseStat::IatMean => "iat_mean",
            BaseStat::IatStd => "iat_std",
            BaseStat::PktsPerSec => "pkts_per_sec",
            BaseStat::BytesPerSec => "bytes_per_sec",
            BaseStat::SmallPktFraction => "small_pkt_fraction",
        }
    }
}

/// Feature layout: for each prefix window `w` (ascending) and each base
/// statistic `s`, `feature[w_idx * 12 + s_idx]` is `s` over the first `w`
/// packets of the flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRegistry {
    windows: Vec<usize>,
}

impl Default for FeatureRegistry {
    fn default() -> Self {
        Self {
            windows: vec![10, 20, 40, 60, 80, 100],
        }
    }
}

impl FeatureRegistry {
    pub fn new(windows: Vec<usize>) -> Result<Self> {
        if windows.is_empty() || windows[0] == 0 {
            return Err(Error::InvalidArgument("windows must be non-empty and positive".into()));
        }
        if windows.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("windows must be strictly ascending".into()));
        }
        Ok(Self { windows })
    }

    /// Registry with a single window equal to the trigger count.
    pub fn single(trigger_count: usize) -> Result<Self> {
        Self::new(vec![trigger_count])
    }

    pub fn windows(&self) -> &[usize] {
        &self.windows
    }

    pub fn trigger_count(&self) -> usize {
        *self.windows.last().expect("non-empty by construction")
    }

    pub fn feature_count(&self) -> usize {
        self.windows.len() * BaseStat::ALL.len()
    }

    pub fn feature_name(&self, index: usize) -> Option<String> {
        let w = self.windows.get(index / BaseStat::ALL.len())?;
        let s = BaseStat::ALL[index % BaseStat::ALL.len()];
        Some(format!("{}_w{w}", s.name()))
    }
}

pub fn extract_features(buffer: &[PacketRecord], registry: &FeatureRegistry) -> Result<FeatureVector> {
    let need = registry.trigger_count();
    if buffer.len() < need {
        return Err(Error::ShortBuffer {
            have: buffer.len(),
            need,
        });
    }
    let mut out = Vec::with_capacity(registry.feature_count());
    for &w in registry.windows() {
        window_stats(&buffer[..w], &mut out);
    }
    Ok(out)
}

fn window_stats(pkts: &[PacketRecord], out: &mut Vec<f64>) {
    let n = pkts.len() as f64;
    let sizes = pkts.iter().map(|p| f64::from(p.size));
    let byte_sum: f64 = sizes.clone().sum();
    let size_mean = byte_sum / n;
    let size_var = sizes.clone().map(|s| (s - size_mean).powi(2)).sum::<f64>() / n;
    let size_min = sizes.clone().fold(f64::INFINITY, f64::min);
    let size_max = sizes.fold(f64::NEG_INFINITY, f64::max);
    let duration = pkts[pkts.len() - 1].timestamp - pkts[0].timestamp;

    let (iat_mean, iat_std) = if pkts.len() > 1 {
        let gaps: Vec<f64> = pkts.windows(2).map(|w| w[1].timestamp - w[0].timestamp).collect();
        let m = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let v = gaps.iter().map(|g| (g - m).powi(2)).sum::<f64>() / gaps.len() as f64;
        (m, v.sqrt())
    } else {
        (0.0, 0.0)
    };
    let (pps, bps) = if duration > 0.0 {
        (n / duration, byte_sum / duration)
    } else {
        (0.0, 0.0)
    };
    let small = pkts.iter().filter(|p| p.size < SMALL_PACKET_BYTES).count() as f64 / n;

    out.extend_from_slice(&[
        n,
        byte_sum,
        size_mean,
        size_var.sqrt(),
        size_min,
        size_max,
        duration,
        iat_mean,
        iat_std,
        pps,
        bps,
        small,
    ]);
}

/// `out[i] = vec[subset[i]]`.
pub fn project_features(vec: &[f64], subset: &[usize]) -> Result<FeatureVector> {
    subset
        .iter()
        .map(|&i| {
            vec.get(i).copied().ok_or(Error::FeatureOutOfRange {
                index: i,
                len: vec.len(),
            })
        })
        .collect()
}

/// Packet buffer for one flow up to the detection trigger.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub key: FlowKey,
    packets: Vec<PacketRecord>,
    trigger_count: usize,
    pub verdict: FlowVerdict,
    /// Simulated time of the last observed packet, for idle eviction.
    pub last_seen: f64,
}

impl FlowState {
    pub fn new(key: FlowKey, trigger_count: usize) -> Self {
        Self {
            key,
            packets: Vec::with_capacity(trigger_count),
            trigger_count,
            verdict: FlowVerdict::None,
            last_seen: 0.0,
        }
    }

    pub fn triggered(&self) -> bool {
        self.packets.len() >= self.trigger_count
    }

    pub fn buffered(&self) -> usize {
        self.packets.len()
    }

    pub fn packets(&self) -> &[PacketRecord] {
        &self.packets
    }

    /// Buffers one packet; the `trigger_count`-th packet yields the feature
    /// vector and marks the flow pending.
    pub fn observe_packet(&mut self, pkt: &PacketRecord, registry: &FeatureRegistry) -> Result<TriggerSignal> {
        if pkt.key != self.key {
            return Err(Error::FlowKeyMismatch);
        }
        if self.triggered() {
            return Err(Error::AlreadyTriggered);
        }
        self.packets.push(*pkt);
        self.last_seen = pkt.timestamp;
        if self.triggered() {
            self.verdict = FlowVerdict::Pending;
            Ok(TriggerSignal::Triggered(extract_features(&self.packets, registry)?))
        } else {
            Ok(TriggerSignal::NotYet)
        }
    }
}

/// Flow-trace CSV: `ts,src_ip,dst_ip,src_port,dst_port,proto,size,label`.
pub fn write_trace(path: &Path, packets: &[PacketRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "ts,src_ip,dst_ip,src_port,dst_port,proto,size,label")?;
    for p in packets {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.timestamp, p.key.src_ip, p.key.dst_ip, p.key.src_port, p.key.dst_port, p.key.protocol, p.size, p.label
        )?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct TraceRow {
    ts: f64,
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    src_port: u16,
    dst_port: u16,
    proto: u8,
    size: u32,
    label: u8,
}

pub fn read_trace(path: &Path) -> Result<Vec<PacketRecord>> {
    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let r: TraceRow = row?;
        let pkt = PacketRecord {
            timestamp: r.ts,
            key: FlowKey {
                src_ip: r.src_ip,
                dst_ip: r.dst_ip,
                src_port: r.src_port,
                dst_port: r.dst_port,
                protocol: r.proto,
            },
            size: r.size,
            label: r.label,
        };
        pkt.validate()?;
        out.push(pkt);
    }
    Ok(out)
}
