use rayon::prelude::*;

use crate::deploy::{DeploymentPlan, Mode, NetworkGraph};
use crate::ensemble::StrongLearner;
use crate::error::{Error, Result};
use crate::sim::cost::CostModel;
use crate::sim::engine::run_scenario;
use crate::sim::metrics::MetricsReport;
use crate::sim::traffic::TrafficSpec;

/// `start, start+step, ..., end` as used by `--sweep-attack start:end:step`.
pub fn rate_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && step > 0.0 && end >= start) {
        return Err(Error::InvalidArgument(format!("bad rate range {start}:{end}:{step}")));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + step * k as f64).collect())
}

pub fn parse_rate_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad rate range {text:?}")))
        })
        .collect::<Result<_>>()?;
    match parts[..] {
        [a, b, c] => rate_range(a, b, c),
        [a] => rate_range(a, a, 1.0),
        _ => Err(Error::Parse(format!("rate range must be start:end:step, got {text:?}"))),
    }
}

/// Runs every attack rate under both plans with the same seed. Rows come out
/// ordered by rate, WL before SL.
#[allow(clippy::too_many_arguments)]
pub fn compare_deployments(
    graph: &NetworkGraph,
    wl_plan: &DeploymentPlan,
    sl_plan: &DeploymentPlan,
    model: &StrongLearner,
    attack_rates: &[f64],
    base_traffic: &TrafficSpec,
    cost: &CostModel,
    seed: u64,
) -> Result<Vec<MetricsReport>> {
    if wl_plan.placement.mode != Mode::Wl || sl_plan.placement.mode != Mode::Sl {
        return Err(Error::InvalidArgument("expected one WL plan and one SL plan".into()));
    }
    for plan in [wl_plan, sl_plan] {
        if !plan.is_feasible() {
            return Err(Error::Infeasible(plan.diagnose(graph).join("; ")));
        }
    }
    let jobs: Vec<(f64, &DeploymentPlan)> = attack_rates
        .iter()
        .flat_map(|&r| [(r, wl_plan), (r, sl_plan)])
        .collect();
    jobs.par_iter()
        .map(|&(rate, plan)| run_scenario(graph, plan, model, &base_traffic.with_attack_rate(rate), cost, seed))
        .collect()
}
