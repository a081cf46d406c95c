//! Seeded packet sources.

use std::collections::BTreeMap;
use std::fs;
use std::net::Ipv4Addr;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::deploy::NetworkGraph;
use crate::ensemble::{BENIGN, MALICIOUS};
use crate::error::{Error, Result};
use crate::flow::{FlowKey, PacketRecord, MIN_PACKET_SIZE};

pub const PROTO_TCP: u8 = 6;
pub const HTTP_PORT: u16 = 80;

/// Inter-arrival law of one source.
pub trait ArrivalProcess: Send + Sync {
    fn name(&self) -> &'static str;
    /// Next gap in seconds for a source of mean rate `rate` packets/s.
    fn next_gap(&self, rate: f64, rng: &mut ChaCha8Rng) -> f64;
}

pub struct Poisson;

impl ArrivalProcess for Poisson {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn next_gap(&self, rate: f64, rng: &mut ChaCha8Rng) -> f64 {
        Exp::new(rate).map(|d| d.sample(rng)).unwrap_or(f64::INFINITY)
    }
}

/// Constant bit rate.
pub struct Cbr;

impl ArrivalProcess for Cbr {
    fn name(&self) -> &'static str {
        "cbr"
    }

    fn next_gap(&self, rate: f64, _rng: &mut ChaCha8Rng) -> f64 {
        1.0 / rate
    }
}

#[derive(Default)]
pub struct ArrivalRegistry {
    processes: BTreeMap<&'static str, Box<dyn ArrivalProcess>>,
}

impl ArrivalRegistry {
    pub fn with_defaults() -> Self {
        let mut r = Self::default();
        r.register(Box::new(Poisson));
        r.register(Box::new(Cbr));
        r
    }

    pub fn register(&mut self, p: Box<dyn ArrivalProcess>) {
        self.processes.insert(p.name(), p);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ArrivalProcess> {
        self.processes
            .get(name)
            .map(Box::as_ref)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string(), self.names().join(", ")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.processes.keys().copied().collect()
    }
}

fn default_process() -> String {
    "poisson".into()
}

/// One host-to-host packet source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSource {
    pub src: String,
    pub dst: String,
    /// Mean packets per second.
    pub rate: f64,
    #[serde(default = "default_process")]
    pub process: String,
    /// Inclusive size range in bytes.
    pub size: [u32; 2],
    /// Packets per connection; each connection gets a fresh source port.
    /// `None` keeps one connection for the whole run.
    #[serde(default)]
    pub conn_packets: Option<u64>,
}

impl FlowSource {
    fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{}->{}: rate must be positive",
                self.src, self.dst
            )));
        }
        let [lo, hi] = self.size;
        if lo < MIN_PACKET_SIZE || hi < lo {
            return Err(Error::InvalidArgument(format!(
                "{}->{}: size range [{lo}, {hi}] invalid",
                self.src, self.dst
            )));
        }
        if self.conn_packets == Some(0) {
            return Err(Error::InvalidArgument("conn_packets must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSpec {
    pub duration_s: f64,
    #[serde(default)]
    pub benign: Vec<FlowSource>,
    #[serde(default)]
    pub attack: Vec<FlowSource>,
}

impl TrafficSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidArgument("duration must be positive".into()));
        }
        self.benign
            .iter()
            .chain(&self.attack)
            .try_for_each(FlowSource::validate)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let spec: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn duration_us(&self) -> u64 {
        (self.duration_s * 1e6).round() as u64
    }

    /// Copy with every attack source sending at `rate`.
    pub fn with_attack_rate(&self, rate: f64) -> Self {
        let mut s = self.clone();
        for a in &mut s.attack {
            a.rate = rate;
        }
        s
    }

    /// Sources in simulation order: benign first, then attack, each tagged
    /// with its label.
    pub fn sources(&self) -> impl Iterator<Item = (&FlowSource, u8)> {
        self.benign
            .iter()
            .map(|s| (s, BENIGN))
            .chain(self.attack.iter().map(|s| (s, MALICIOUS)))
    }
}

/// Address index of a traffic endpoint: hosts in topology order, then switches.
pub fn endpoint_index(g: &NetworkGraph, name: &str) -> Result<usize> {
    let hosts = g.hosts();
    match hosts.iter().position(|(h, _)| h == name) {
        Some(i) => Ok(i),
        None => Ok(hosts.len() + g.switch(name)?),
    }
}

/// `10.0.x.y` for the `index`-th endpoint.
pub fn host_ip(index: usize) -> Ipv4Addr {
    let i = index as u32 + 1;
    Ipv4Addr::new(10, 0, (i >> 8) as u8, i as u8)
}

/// Stream id of a source. Benign and attack sources use disjoint stream
/// ranges so benign packets do not depend on the attack configuration.
fn stream_of(label: u8, index: usize) -> u64 {
    (u64::from(label) << 32) | index as u64
}

/// Lazily generates the packets of one source.
pub struct SourceGen<'a> {
    source: &'a FlowSource,
    process: &'a dyn ArrivalProcess,
    rng: ChaCha8Rng,
    label: u8,
    index: usize,
    src_ip: Ipv4Addr,
    dst_ip: Ipv4Addr,
    now_us: u64,
    end_us: u64,
    sent: u64,
}

impl<'a> SourceGen<'a> {
    /// `index` counts sources of the same label.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source: &'a FlowSource,
        label: u8,
        index: usize,
        src_ip: Ipv4Addr,
        dst_ip: Ipv4Addr,
        duration_us: u64,
        seed: u64,
        processes: &'a ArrivalRegistry,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_of(label, index));
        let mut g = Self {
            source,
            process: processes.get(&source.process)?,
            rng,
            label,
            index,
            src_ip,
            dst_ip,
            now_us: 0,
            end_us: duration_us,
            sent: 0,
        };
        // start part-way through the first connection so sources are not phase-locked
        if let Some(n) = source.conn_packets {
            g.sent = g.rng.random_range(0..n);
        }
        g.now_us = g.gap_us();
        Ok(g)
    }

    fn gap_us(&mut self) -> u64 {
        let gap = self.process.next_gap(self.source.rate, &mut self.rng);
        ((gap * 1e6).round() as u64).max(1)
    }

    /// Send time of the next packet, if it falls inside the run.
    pub fn peek_time(&self) -> Option<u64> {
        (self.now_us < self.end_us).then_some(self.now_us)
    }

    /// Index of the connection the next packet belongs to.
    pub fn connection(&self) -> u64 {
        self.source.conn_packets.map_or(0, |n| self.sent / n)
    }

    fn key(&self, conn: u64) -> FlowKey {
        let port = 1024 + ((self.index as u64 * 4096 + conn) % 64_000) as u16;
        FlowKey {
            src_ip: self.src_ip,
            dst_ip: self.dst_ip,
            src_port: port,
            dst_port: HTTP_PORT,
            protocol: PROTO_TCP,
        }
    }

    /// Emits the pending packet and draws the next send time.
    pub fn next_packet(&mut self) -> Option<PacketRecord> {
        let t = self.peek_time()?;
        let [lo, hi] = self.source.size;
        let pkt = PacketRecord {
            timestamp: t as f64 * 1e-6,
            key: self.key(self.connection()),
            size: self.rng.random_range(lo..=hi),
            label: self.label,
        };
        self.sent += 1;
        self.now_us = t.saturating_add(self.gap_us());
        Some(pkt)
    }
}

/// All packets of `spec`, merged by send time (ties by source order).
/// `host_index` maps a host name to its topology index.
pub fn generate_traffic(
    spec: &TrafficSpec,
    seed: u64,
    host_index: impl Fn(&str) -> Result<usize>,
) -> Result<Vec<PacketRecord>> {
    spec.validate()?;
    let processes = ArrivalRegistry::with_defaults();
    let duration = spec.duration_us();
    let mut gens = Vec::new();
    let (mut nb, mut na) = (0, 0);
    for (s, label) in spec.sources() {
        let idx = if label == BENIGN { &mut nb } else { &mut na };
        gens.push(SourceGen::new(
            s,
            label,
            *idx,
            host_ip(host_index(&s.src)?),
            host_ip(host_index(&s.dst)?),
            duration,
            seed,
            &processes,
        )?);
        *idx += 1;
    }
    let mut tagged: Vec<(u64, usize, PacketRecord)> = Vec::new();
    for (i, g) in gens.iter_mut().enumerate() {
        while let Some(t) = g.peek_time() {
            let p = g.next_packet().expect("peeked");
            tagged.push((t, i, p));
        }
    }
    tagged.sort_by_key(|&(t, i, _)| (t, i));
    Ok(tagged.into_iter().map(|(_, _, p)| p).collect())
}
