//! Labelled flow windows synthesised from the same traffic model the
//! simulator replays, for training a bundle that matches simulated flows.

use std::net::Ipv4Addr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::ensemble::{LabeledDataset, BENIGN, MALICIOUS};
use crate::error::{Error, Result};
use crate::flow::{extract_features, FeatureRegistry, FlowKey, PacketRecord};
use crate::sim::traffic::{HTTP_PORT, PROTO_TCP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowDatasetSpec {
    pub flows_per_class: usize,
    pub benign_rates: Vec<f64>,
    pub attack_rates: Vec<f64>,
    pub benign_size: [u32; 2],
    pub attack_size: [u32; 2],
    pub seed: u64,
}

impl Default for FlowDatasetSpec {
    fn default() -> Self {
        Self {
            flows_per_class: 1000,
            benign_rates: vec![10.0, 100.0, 1000.0],
            attack_rates: (1..=10).map(|k| f64::from(k) * 100.0).collect(),
            benign_size: [68, 1500],
            attack_size: [68, 15_000],
            seed: 0,
        }
    }
}

fn synth_flow(rng: &mut ChaCha8Rng, rate: f64, size: [u32; 2], label: u8, n: usize) -> Vec<PacketRecord> {
    let key = FlowKey {
        src_ip: Ipv4Addr::new(10, 0, 0, 1),
        dst_ip: Ipv4Addr::new(10, 0, 0, 2),
        src_port: 1024,
        dst_port: HTTP_PORT,
        protocol: PROTO_TCP,
    };
    let gaps = Exp::new(rate).expect("positive rate");
    let mut t_us = 0u64;
    (0..n)
        .map(|_| {
            t_us += ((gaps.sample(rng) * 1e6).round() as u64).max(1);
            PacketRecord {
                timestamp: t_us as f64 * 1e-6,
                key,
                size: rng.random_range(size[0]..=size[1]),
                label,
            }
        })
        .collect()
}

/// `flows_per_class` flows of each label; each flow's rate is drawn from
/// the label's rate list and its first `trigger_count` packets become one row.
pub fn flow_dataset(spec: &FlowDatasetSpec, registry: &FeatureRegistry) -> Result<LabeledDataset> {
    if spec.benign_rates.is_empty() || spec.attack_rates.is_empty() {
        return Err(Error::InvalidArgument("rate lists must not be empty".into()));
    }
    if spec
        .benign_rates
        .iter()
        .chain(&spec.attack_rates)
        .any(|r| r.is_nan() || *r <= 0.0)
    {
        return Err(Error::InvalidArgument("rates must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = LabeledDataset::new(registry.feature_count());
    for i in 0..spec.flows_per_class * 2 {
        let (label, rates, size) = if i % 2 == 0 {
            (BENIGN, &spec.benign_rates, spec.benign_size)
        } else {
            (MALICIOUS, &spec.attack_rates, spec.attack_size)
        };
        let rate = rates[rng.random_range(0..rates.len())];
        let pkts = synth_flow(&mut rng, rate, size, label, registry.trigger_count());
        data.push(extract_features(&pkts, registry)?, label)?;
    }
    Ok(data)
}
