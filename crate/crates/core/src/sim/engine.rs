//! Event loop of one scenario.
//!
//! Every switch is a single FIFO server. A packet arriving at time `t` is
//! suppressed for free if its flow is in the switch's block table, dropped if
//! the queued work exceeds the bound (its receive cost is still charged),
//! and otherwise served after everything queued before it. Packets carrying
//! a chain header are never dropped for queue overflow.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::chain::ChainHeader;
use crate::deploy::{stretch_overhead, DeploymentPlan, Mode, NetworkGraph};
use crate::ensemble::{Confusion, StrongLearner, MALICIOUS};
use crate::error::{Error, Result};
use crate::flow::{FeatureRegistry, FlowKey, FlowState, PacketRecord, TriggerSignal};
use crate::sim::cost::CostModel;
use crate::sim::metrics::{MetricsReport, SwitchUsage, TtiStats};
use crate::sim::traffic::{endpoint_index, host_ip, ArrivalRegistry, SourceGen, TrafficSpec};

const SECOND_US: u64 = 1_000_000;
const SWEEP_EVERY_US: u64 = 10 * SECOND_US;

/// One audit line: `time_us,event,switch,flow,cycles`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub time_us: u64,
    pub event: &'static str,
    pub switch: Option<usize>,
    pub flow: u32,
    pub cycles: u64,
}

pub fn event_log_csv(g: &NetworkGraph, log: &[LogEntry]) -> String {
    let mut out = String::from("time_us,event,switch,flow,cycles\n");
    for e in log {
        let sw = e.switch.map_or("", |s| g.name(s));
        out.push_str(&format!("{},{},{},{},{}\n", e.time_us, e.event, sw, e.flow, e.cycles));
    }
    out
}

/// Per-flow outcome, indexed by flow id.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutcome {
    pub key: FlowKey,
    pub label: u8,
    /// Arrival of the trigger packet at the first evaluator.
    pub trigger_us: Option<u64>,
    pub finalized_us: Option<u64>,
    pub verdict: Option<u8>,
    /// When the block reached the flow's ingress switch.
    pub ingress_blocked_us: Option<u64>,
    /// Time each packet of the flow entered its ingress switch, and whether
    /// it was delivered.
    pub packets: Vec<(u64, bool)>,
}

pub struct SimOutput {
    pub report: MetricsReport,
    pub log: Vec<LogEntry>,
    pub flows: Vec<FlowOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Inject(u32),
    Arrive { pkt: u32, hop: u16 },
    Finalize { pkt: u32, hop: u16, verdict: u8 },
    Notify { flow: u32, route: u32, hop: u16 },
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Event {
    t: u64,
    seq: u64,
    kind: Kind,
}

impl Ord for Event {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (t, seq)
        (o.t, o.seq).cmp(&(self.t, self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Route id per `(src, dst)` endpoint pair.
type RouteIndex<'a> = HashMap<(&'a str, &'a str), u32>;

struct SimRoute {
    walk: Vec<usize>,
    /// `(walk position, colour mask)` in walk order.
    evaluators: Vec<(usize, u32)>,
}

impl SimRoute {
    fn evaluator_at(&self, hop: usize) -> Option<(usize, u32)> {
        self.evaluators
            .iter()
            .position(|&(p, _)| p == hop)
            .map(|i| (i, self.evaluators[i].1))
    }
}

struct EvalState {
    flow: FlowState,
    parked: Option<ChainHeader>,
    done: bool,
    last_seen_us: u64,
}

#[derive(Default)]
struct Switch {
    busy_until: u64,
    blocked: HashSet<FlowKey>,
    evals: HashMap<u32, EvalState>,
    cycles: u64,
    inference_cycles: u64,
    accepted: u64,
    dropped: u64,
    busy_in_window: u64,
    /// Busy microseconds per one-second bin.
    bins: Vec<u64>,
}

impl Switch {
    /// Queues `cycles` of work arriving at `t`; returns its completion time.
    fn serve(&mut self, t: u64, cycles: u64, cost: &CostModel, window_end: u64) -> u64 {
        let start = self.busy_until.max(t);
        let end = start + cost.service_us(cycles);
        self.busy_until = end;
        self.cycles += cycles;
        self.busy_in_window += end.min(window_end).saturating_sub(start.min(window_end));
        let mut s = start;
        while s < end {
            let bin = (s / SECOND_US) as usize;
            let bin_end = (bin as u64 + 1) * SECOND_US;
            let upto = end.min(bin_end);
            if self.bins.len() <= bin {
                self.bins.resize(bin + 1, 0);
            }
            self.bins[bin] += upto - s;
            s = upto;
        }
        end
    }
}

struct Packet {
    rec: PacketRecord,
    flow: u32,
    route: u32,
    header: Option<ChainHeader>,
    ingress_us: u64,
}

struct Source<'a> {
    gen: SourceGen<'a>,
    route: u32,
    label: u8,
    conn: Option<u64>,
    flow: u32,
}

/// Inputs of one run.
pub struct Simulation<'a> {
    pub graph: &'a NetworkGraph,
    pub plan: &'a DeploymentPlan,
    pub model: &'a StrongLearner,
    pub traffic: &'a TrafficSpec,
    pub cost: &'a CostModel,
    pub seed: u64,
    pub registry: FeatureRegistry,
    pub event_log: bool,
    pub track_packets: bool,
}

pub fn run_scenario(
    graph: &NetworkGraph,
    plan: &DeploymentPlan,
    model: &StrongLearner,
    traffic: &TrafficSpec,
    cost: &CostModel,
    seed: u64,
) -> Result<MetricsReport> {
    Ok(Simulation::new(graph, plan, model, traffic, cost, seed).run()?.report)
}

impl<'a> Simulation<'a> {
    pub fn new(
        graph: &'a NetworkGraph,
        plan: &'a DeploymentPlan,
        model: &'a StrongLearner,
        traffic: &'a TrafficSpec,
        cost: &'a CostModel,
        seed: u64,
    ) -> Self {
        Self {
            graph,
            plan,
            model,
            traffic,
            cost,
            seed,
            registry: FeatureRegistry::default(),
            event_log: false,
            track_packets: false,
        }
    }

    pub fn with_event_log(mut self) -> Self {
        self.event_log = true;
        self
    }

    pub fn with_packet_tracking(mut self) -> Self {
        self.track_packets = true;
        self
    }

    fn routes(&self) -> Result<(Vec<SimRoute>, RouteIndex<'a>)> {
        let p = &self.plan.placement;
        p.validate(self.graph.switch_count())?;
        // a plan hosting nothing only forwards
        let n_colors = if p.hosting_switches().next().is_none() {
            0
        } else {
            p.n_colors
        };
        let mut routes = Vec::new();
        let mut index = HashMap::new();
        for (s, _) in self.traffic.sources() {
            if index.contains_key(&(s.src.as_str(), s.dst.as_str())) {
                continue;
            }
            let walk = self
                .plan
                .route(&s.src, &s.dst)
                .and_then(|r| r.walk.clone())
                .ok_or_else(|| Error::Infeasible(format!("plan has no walk for {} -> {}", s.src, s.dst)))?;
            let mut evaluators: Vec<(usize, u32)> = Vec::new();
            for c in 0..n_colors {
                let pos = walk
                    .iter()
                    .position(|&v| p.colors[v] & (1 << c) != 0)
                    .ok_or_else(|| Error::Infeasible(format!("walk {} -> {} misses colour {c}", s.src, s.dst)))?;
                match evaluators.iter_mut().find(|(q, _)| *q == pos) {
                    Some((_, m)) => *m |= 1 << c,
                    None => evaluators.push((pos, 1 << c)),
                }
            }
            evaluators.sort_unstable();
            index.insert((s.src.as_str(), s.dst.as_str()), routes.len() as u32);
            routes.push(SimRoute { walk, evaluators });
        }
        Ok((routes, index))
    }

    fn check_model(&self) -> Result<()> {
        self.model.validate()?;
        if self.model.feature_count != self.registry.feature_count() {
            return Err(Error::InvalidArgument(format!(
                "model expects {} features, extractor yields {}",
                self.model.feature_count,
                self.registry.feature_count()
            )));
        }
        let p = &self.plan.placement;
        match p.mode {
            Mode::Sl if p.n_colors != 1 => Err(Error::InvalidArgument("SL plan must have one colour".into())),
            Mode::Wl if p.n_colors != self.model.n_learners() => Err(Error::InvalidArgument(format!(
                "plan places {} learners, model has {}",
                p.n_colors,
                self.model.n_learners()
            ))),
            Mode::Wl => (0..p.n_colors as u16)
                .all(|id| self.model.learner(id).is_some())
                .then_some(())
                .ok_or_else(|| Error::InvalidArgument("learner ids must be 0..N".into())),
            Mode::Sl => Ok(()),
        }
    }

    pub fn run(&self) -> Result<SimOutput> {
        self.traffic.validate()?;
        self.cost.validate()?;
        self.check_model()?;
        let (routes, route_index) = self.routes()?;
        let processes = ArrivalRegistry::with_defaults();
        let window = self.traffic.duration_us();

        let mut sources = Vec::new();
        let (mut nb, mut na) = (0usize, 0usize);
        for (s, label) in self.traffic.sources() {
            let idx = if label == MALICIOUS { &mut na } else { &mut nb };
            let gen = SourceGen::new(
                s,
                label,
                *idx,
                host_ip(endpoint_index(self.graph, &s.src)?),
                host_ip(endpoint_index(self.graph, &s.dst)?),
                window,
                self.seed,
                &processes,
            )?;
            *idx += 1;
            sources.push(Source {
                gen,
                route: route_index[&(s.src.as_str(), s.dst.as_str())],
                label,
                conn: None,
                flow: 0,
            });
        }

        let mut st = State {
            sim: self,
            routes,
            switches: (0..self.graph.switch_count()).map(|_| Switch::default()).collect(),
            heap: BinaryHeap::new(),
            seq: 0,
            packets: Vec::new(),
            free: Vec::new(),
            flows: Vec::new(),
            log: Vec::new(),
            window,
            injected: 0,
            delivered: 0,
            dropped: 0,
            suppressed: 0,
            benign_bytes: 0,
            total_bytes: 0,
            inferences: 0,
            blocked_flows: 0,
            confusion: Confusion::default(),
            tti_ms: Vec::new(),
        };
        for (i, s) in sources.iter().enumerate() {
            if let Some(t) = s.gen.peek_time() {
                st.push(t, Kind::Inject(i as u32));
            }
        }
        st.push(SWEEP_EVERY_US, Kind::Sweep);

        while let Some(ev) = st.heap.pop() {
            match ev.kind {
                Kind::Inject(i) => {
                    let src = &mut sources[i as usize];
                    let conn = src.gen.connection();
                    let pkt = src.gen.next_packet().expect("scheduled source has a packet");
                    if src.conn != Some(conn) {
                        src.conn = Some(conn);
                        src.flow = st.flows.len() as u32;
                        st.flows.push(FlowOutcome {
                            key: pkt.key,
                            label: src.label,
                            trigger_us: None,
                            finalized_us: None,
                            verdict: None,
                            ingress_blocked_us: None,
                            packets: Vec::new(),
                        });
                    }
                    let (flow, route) = (src.flow, src.route);
                    if let Some(t) = src.gen.peek_time() {
                        st.push(t, Kind::Inject(i));
                    }
                    st.injected += 1;
                    let slot = st.alloc(Packet {
                        rec: pkt,
                        flow,
                        route,
                        header: None,
                        ingress_us: ev.t,
                    });
                    st.log(ev.t, "inject", None, flow, 0);
                    st.arrive(ev.t, slot, 0)?;
                }
                Kind::Arrive { pkt, hop } => st.arrive(ev.t, pkt, hop as usize)?,
                Kind::Finalize { pkt, hop, verdict } => st.finalize(ev.t, pkt, hop as usize, verdict),
                Kind::Notify { flow, route, hop } => st.notify(ev.t, flow, route, hop as usize),
                Kind::Sweep => {
                    let horizon = ev.t.saturating_sub((self.cost.idle_timeout_s * 1e6).round() as u64);
                    for sw in &mut st.switches {
                        sw.evals.retain(|_, e| e.last_seen_us >= horizon);
                    }
                    if ev.t + SWEEP_EVERY_US <= window {
                        st.push(ev.t + SWEEP_EVERY_US, Kind::Sweep);
                    }
                }
            }
        }
        st.finish()
    }
}

struct State<'s, 'a> {
    sim: &'s Simulation<'a>,
    routes: Vec<SimRoute>,
    switches: Vec<Switch>,
    heap: BinaryHeap<Event>,
    seq: u64,
    packets: Vec<Option<Packet>>,
    free: Vec<u32>,
    flows: Vec<FlowOutcome>,
    log: Vec<LogEntry>,
    window: u64,
    injected: u64,
    delivered: u64,
    dropped: u64,
    suppressed: u64,
    benign_bytes: u64,
    total_bytes: u64,
    inferences: u64,
    blocked_flows: u64,
    confusion: Confusion,
    tti_ms: Vec<f64>,
}

impl State<'_, '_> {
    fn push(&mut self, t: u64, kind: Kind) {
        self.seq += 1;
        self.heap.push(Event { t, seq: self.seq, kind });
    }

    fn log(&mut self, t: u64, event: &'static str, switch: Option<usize>, flow: u32, cycles: u64) {
        if self.sim.event_log {
            self.log.push(LogEntry {
                time_us: t,
                event,
                switch,
                flow,
                cycles,
            });
        }
    }

    fn alloc(&mut self, p: Packet) -> u32 {
        match self.free.pop() {
            Some(i) => {
                self.packets[i as usize] = Some(p);
                i
            }
            None => {
                self.packets.push(Some(p));
                (self.packets.len() - 1) as u32
            }
        }
    }

    fn release(&mut self, slot: u32, delivered: bool) {
        let p = self.packets[slot as usize].take().expect("live packet");
        if self.sim.track_packets {
            self.flows[p.flow as usize].packets.push((p.ingress_us, delivered));
        }
        self.free.push(slot);
    }

    fn arrive(&mut self, t: u64, slot: u32, hop: usize) -> Result<()> {
        let cost = *self.sim.cost;
        let (key, flow, route, has_header) = {
            let p = self.packets[slot as usize].as_ref().expect("live packet");
            (p.rec.key, p.flow, p.route as usize, p.header.is_some())
        };
        let sw_id = self.routes[route].walk[hop];
        let sw = &mut self.switches[sw_id];

        if sw.blocked.contains(&key) {
            self.suppressed += 1;
            self.log(t, "suppress", Some(sw_id), flow, 0);
            self.release(slot, false);
            return Ok(());
        }
        if sw.busy_until.saturating_sub(t) >= cost.queue_bound_us() && !has_header {
            sw.serve(t, cost.c_fwd, &cost, self.window);
            sw.dropped += 1;
            self.dropped += 1;
            self.log(t, "drop", Some(sw_id), flow, cost.c_fwd);
            self.release(slot, false);
            return Ok(());
        }
        sw.accepted += 1;

        let mut work = cost.c_fwd;
        let mut verdict = None;
        if let Some((idx, mask)) = self.routes[route].evaluator_at(hop) {
            let (extra, v) = self.evaluate(t, slot, sw_id, route, idx, mask)?;
            work += extra;
            verdict = v;
            if extra > 0 {
                self.switches[sw_id].inference_cycles += extra;
                self.inferences += 1;
                self.log(t, "trigger", Some(sw_id), flow, extra);
            }
        }
        let end = self.switches[sw_id].serve(t, work, &cost, self.window);
        self.log(t, "serve", Some(sw_id), flow, cost.c_fwd);

        if let Some(v) = verdict {
            self.push(
                end,
                Kind::Finalize {
                    pkt: slot,
                    hop: hop as u16,
                    verdict: v,
                },
            );
        }
        let walk_len = self.routes[route].walk.len();
        if hop + 1 < walk_len {
            if verdict.is_none() {
                self.push(
                    end + cost.link_latency_us,
                    Kind::Arrive {
                        pkt: slot,
                        hop: hop as u16 + 1,
                    },
                );
            }
        } else if verdict.is_none() {
            self.deliver(end, slot);
        }
        Ok(())
    }

    fn deliver(&mut self, t: u64, slot: u32) {
        let p = self.packets[slot as usize].as_ref().expect("live packet");
        let (flow, size, label) = (p.flow, u64::from(p.rec.size), p.rec.label);
        self.delivered += 1;
        self.total_bytes += size;
        if label != MALICIOUS {
            self.benign_bytes += size;
        }
        self.log(t, "deliver", None, flow, 0);
        self.release(slot, true);
    }

    /// Runs the evaluator logic for the packet in `slot`. Returns the extra
    /// cycles charged and, at the last evaluator, the verdict.
    fn evaluate(
        &mut self,
        t: u64,
        slot: u32,
        sw_id: usize,
        route: usize,
        idx: usize,
        mask: u32,
    ) -> Result<(u64, Option<u8>)> {
        let sim = self.sim;
        let cost = sim.cost;
        let n_eval = self.routes[route].evaluators.len();
        let p = self.packets[slot as usize].as_mut().expect("live packet");
        let flow = p.flow;
        let e = self.switches[sw_id].evals.entry(flow).or_insert_with(|| EvalState {
            flow: FlowState::new(p.rec.key, sim.registry.trigger_count()),
            parked: None,
            done: false,
            last_seen_us: t,
        });
        e.last_seen_us = t;
        if e.done {
            return Ok((0, None));
        }
        if p.header.is_some() {
            e.parked = p.header.take();
        }
        let features = match e.flow.observe_packet(&p.rec, &sim.registry)? {
            TriggerSignal::NotYet => return Ok((0, None)),
            TriggerSignal::Triggered(f) => f,
        };
        e.done = true;
        if idx == 0 {
            self.flows[flow as usize].trigger_us = Some(t);
        }
        let buffered = sim.registry.trigger_count() as u64;

        if sim.plan.placement.mode == Mode::Sl {
            let mut nodes = 0;
            let mut malicious = 0;
            for l in &sim.model.learners {
                let (v, visited) = l.vote_traced(&features)?;
                nodes += visited;
                malicious += usize::from(v == MALICIOUS);
            }
            let verdict = sim.model.vote_rule.decide(malicious, sim.model.n_learners());
            let work = features.len() as u64 * cost.c_feat * buffered + nodes as u64 * cost.c_node;
            return Ok((work, Some(verdict)));
        }

        let mut header = if idx == 0 {
            ChainHeader::empty(sim.model.n_learners())?
        } else {
            match e.parked.take() {
                Some(h) => h,
                // the upstream evaluator's header never arrived, so the chain cannot complete
                None => return Ok((0, None)),
            }
        };
        let mut used: Vec<usize> = Vec::new();
        let mut nodes = 0;
        let mut ops = 0u64;
        for c in (0..sim.plan.placement.n_colors).filter(|c| mask & (1 << c) != 0) {
            let learner = sim.model.learner(c as u16).expect("checked at start");
            let (v, visited) = learner.vote_traced(&features)?;
            header = header.append_result(c as u16, v)?;
            used.extend_from_slice(&learner.feature_subset);
            nodes += visited;
            ops += 1;
        }
        used.sort_unstable();
        used.dedup();
        let mut verdict = None;
        if idx + 1 == n_eval {
            ops += 1;
            verdict = Some(header.finalize()?.class);
        } else {
            p.header = Some(header);
        }
        let work = used.len() as u64 * cost.c_feat * buffered + nodes as u64 * cost.c_node + ops * cost.c_hdr;
        Ok((work, verdict))
    }

    fn finalize(&mut self, t: u64, slot: u32, hop: usize, verdict: u8) {
        let (flow, route, key) = {
            let p = self.packets[slot as usize].as_ref().expect("live packet");
            (p.flow, p.route, p.rec.key)
        };
        let sw_id = self.routes[route as usize].walk[hop];
        let f = &mut self.flows[flow as usize];
        f.finalized_us = Some(t);
        f.verdict = Some(verdict);
        let label = f.label;
        if let Some(start) = f.trigger_us {
            self.tti_ms.push((t - start) as f64 / 1e3);
        }
        self.confusion.record(verdict, label);
        let event = if verdict == MALICIOUS {
            "verdict_malicious"
        } else {
            "verdict_benign"
        };
        self.log(t, event, Some(sw_id), flow, 0);
        if verdict == MALICIOUS {
            self.blocked_flows += 1;
            self.block(t, flow, route, hop, key);
        }

        // the trigger packet itself continues
        let lat = self.sim.cost.link_latency_us;
        if hop + 1 < self.routes[route as usize].walk.len() {
            self.push(
                t + lat,
                Kind::Arrive {
                    pkt: slot,
                    hop: hop as u16 + 1,
                },
            );
        } else {
            self.deliver(t, slot);
        }
    }

    fn block(&mut self, t: u64, flow: u32, route: u32, hop: usize, key: FlowKey) {
        let sw_id = self.routes[route as usize].walk[hop];
        self.switches[sw_id].blocked.insert(key);
        self.log(t, "block", Some(sw_id), flow, 0);
        if hop == 0 {
            self.flows[flow as usize].ingress_blocked_us = Some(t);
        } else {
            self.push(
                t + self.sim.cost.link_latency_us,
                Kind::Notify {
                    flow,
                    route,
                    hop: hop as u16 - 1,
                },
            );
        }
    }

    fn notify(&mut self, t: u64, flow: u32, route: u32, hop: usize) {
        let key = self.flows[flow as usize].key;
        self.block(t, flow, route, hop, key);
    }

    fn finish(self) -> Result<SimOutput> {
        let sim = self.sim;
        if self.packets.iter().any(Option::is_some) {
            return Err(Error::Invariant("packets left in flight after drain".into()));
        }
        if self.injected != self.delivered + self.dropped + self.suppressed {
            return Err(Error::Invariant(format!(
                "injected {} != delivered {} + dropped {} + suppressed {}",
                self.injected, self.delivered, self.dropped, self.suppressed
            )));
        }
        let secs = self.window as f64 / 1e6;
        let full_bins = (self.window / SECOND_US) as usize;
        let placement = &sim.plan.placement;
        let mut switches = Vec::new();
        for (i, sw) in self.switches.iter().enumerate() {
            let expected = sim.cost.c_fwd * (sw.accepted + sw.dropped) + sw.inference_cycles;
            if sw.cycles != expected {
                return Err(Error::Invariant(format!(
                    "work accounting mismatch at {}",
                    sim.graph.name(i)
                )));
            }
            let mut peak = sw
                .bins
                .iter()
                .take(full_bins)
                .map(|&b| b as f64 / 1e6)
                .fold(0.0, f64::max);
            let rest = self.window % SECOND_US;
            if rest > 0 {
                let b = sw.bins.get(full_bins).copied().unwrap_or(0).min(rest);
                peak = peak.max(b as f64 / rest as f64);
            }
            let hosted = match (placement.mode, placement.colors[i]) {
                (_, 0) => "-".to_string(),
                (Mode::Sl, _) => "sl".to_string(),
                (Mode::Wl, m) => (0..placement.n_colors)
                    .filter(|c| m & (1 << c) != 0)
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join("+"),
            };
            switches.push(SwitchUsage {
                name: sim.graph.name(i).to_string(),
                hosted,
                mean_util: sw.busy_in_window as f64 / self.window as f64,
                peak_util: peak,
                cycles: sw.cycles,
                inference_cycles: sw.inference_cycles,
                accepted: sw.accepted,
                dropped: sw.dropped,
            });
        }
        let mean = |xs: &mut dyn Iterator<Item = f64>| {
            let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
            if n == 0 {
                0.0
            } else {
                s / n as f64
            }
        };
        let mean_util = mean(&mut placement.hosting_switches().map(|i| switches[i].mean_util));
        let mean_util_all = mean(&mut switches.iter().map(|s| s.mean_util));
        let peak_util = switches.iter().map(|s| s.peak_util).fold(0.0, f64::max);
        let censored = self
            .flows
            .iter()
            .filter(|f| f.trigger_us.is_some() && f.finalized_us.is_none())
            .count() as u64;
        let attack_rate = sim.traffic.attack.iter().map(|a| a.rate).fold(0.0, f64::max);

        let report = MetricsReport {
            mode: placement.mode.to_string(),
            attack_rate,
            duration_s: secs,
            injected: self.injected,
            delivered: self.delivered,
            dropped: self.dropped,
            suppressed: self.suppressed,
            throughput_bps: self.benign_bytes as f64 * 8.0 / secs,
            total_throughput_bps: self.total_bytes as f64 * 8.0 / secs,
            mean_util,
            mean_util_all,
            peak_util,
            switches,
            tti: TtiStats::from_samples(self.tti_ms, censored),
            inferences: self.inferences,
            confusion: self.confusion,
            blocked_flows: self.blocked_flows,
            stretch_pct: stretch_overhead(sim.plan)?,
        };
        Ok(SimOutput {
            report,
            log: self.log,
            flows: self.flows,
        })
    }
}
