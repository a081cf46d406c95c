//! Prints the WL/SL comparison for a manifest.
//!
//! cargo run --release --example sweep -- configs/experiment.json [duration_s] [cost-model.json]

use std::path::Path;

use innet::deploy::stretch_overhead;
use innet::sim::{metrics_csv, CostModel, Experiment, ExperimentManifest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let manifest = args.first().map(String::as_str).unwrap_or("configs/experiment.json");
    let (m, base) = ExperimentManifest::load(Path::new(manifest))?;
    let mut exp = Experiment::prepare(&m, &base)?;
    if let Some(d) = args.get(1) {
        exp.traffic.duration_s = d.parse()?;
    }
    if let Some(c) = args.get(2) {
        exp.cost = CostModel::load(Path::new(c))?;
    }
    for plan in [&exp.wl_plan, &exp.sl_plan] {
        eprintln!("{}", plan.to_json(&exp.graph)?);
        eprintln!("stretch {:.3}%", stretch_overhead(plan)?);
    }
    let rates = exp.attack_rates.clone().unwrap_or_else(|| vec![100.0]);
    let rows = exp.sweep(&rates)?;
    print!("{}", metrics_csv(&rows));
    Ok(())
}
