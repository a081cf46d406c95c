//! Experiment manifests: every input of a run, by path, plus the knobs used
//! to derive whatever is not given.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::deploy::{
    BrkgaParams, CommoditySpec, DeploymentPlan, Mode, NetworkGraph, PlacementProblem, PlacementRule, SolverRegistry,
    TopologyFile,
};
use crate::ensemble::{build_decomposed_ensemble, bundle, EnsembleParams, StrongLearner};
use crate::error::{Error, Result};
use crate::flow::FeatureRegistry;
use crate::sim::cost::CostModel;
use crate::sim::dataset::{flow_dataset, FlowDatasetSpec};
use crate::sim::engine::run_scenario;
use crate::sim::metrics::MetricsReport;
use crate::sim::sweep::compare_deployments;
use crate::sim::traffic::TrafficSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub train: u64,
    pub placement: u64,
    pub sim: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            train: 1,
            placement: 1,
            sim: 1,
        }
    }
}

fn three() -> usize {
    3
}

fn one() -> usize {
    1
}

fn brkga_name() -> String {
    "brkga".into()
}

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub topology: PathBuf,
    pub traffic: PathBuf,
    #[serde(default)]
    pub cost_model: Option<PathBuf>,
    /// Trained from the flow dataset when absent.
    #[serde(default)]
    pub bundle: Option<PathBuf>,
    /// WL plan; optimized when absent.
    #[serde(default)]
    pub plan: Option<PathBuf>,
    /// SL plan for sweeps; optimized when absent.
    #[serde(default)]
    pub sl_plan: Option<PathBuf>,
    #[serde(default = "three")]
    pub n_learners: usize,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default = "one")]
    pub sl_replicas: usize,
    #[serde(default)]
    pub placement_rule: PlacementRule,
    #[serde(default = "brkga_name")]
    pub solver: String,
    #[serde(default)]
    pub brkga: BrkgaParams,
    #[serde(default)]
    pub ensemble: EnsembleParams,
    #[serde(default)]
    pub training: FlowDatasetSpec,
    #[serde(default)]
    pub seeds: Seeds,
    /// Attack rates for a sweep; a single run uses the traffic file as is.
    #[serde(default)]
    pub attack_rates: Option<Vec<f64>>,
    #[serde(default = "out_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentManifest {
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let m: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, base))
    }
}

/// Everything a run needs, loaded or derived.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub graph: NetworkGraph,
    pub wl_plan: DeploymentPlan,
    pub sl_plan: DeploymentPlan,
    pub model: StrongLearner,
    pub traffic: TrafficSpec,
    pub cost: CostModel,
    pub seed: u64,
    pub attack_rates: Option<Vec<f64>>,
    pub output_dir: PathBuf,
}

/// Topology commodities followed by every traffic endpoint pair not yet listed.
pub fn traffic_commodities(topo: &TopologyFile, traffic: &TrafficSpec) -> Vec<CommoditySpec> {
    let mut specs = topo.commodities.clone();
    for (s, _) in traffic.sources() {
        if !specs.iter().any(|c| c.src == s.src && c.dst == s.dst) {
            specs.push(CommoditySpec {
                src: s.src.clone(),
                dst: s.dst.clone(),
                demand: 1.0,
            });
        }
    }
    specs
}

pub fn train_flow_bundle(spec: &FlowDatasetSpec, params: &EnsembleParams) -> Result<StrongLearner> {
    let data = flow_dataset(spec, &FeatureRegistry::default())?;
    build_decomposed_ensemble(&data, params)
}

impl Experiment {
    pub fn prepare(m: &ExperimentManifest, base: &Path) -> Result<Self> {
        let at = |p: &Path| base.join(p);
        let topo = TopologyFile::load(&at(&m.topology))?;
        let graph = NetworkGraph::from_file(&topo)?;
        let traffic = TrafficSpec::load(&at(&m.traffic))?;
        let cost = match &m.cost_model {
            Some(p) => CostModel::load(&at(p))?,
            None => CostModel::default(),
        };
        let model = match &m.bundle {
            Some(p) => bundle::load(&at(p))?,
            None => train_flow_bundle(
                &FlowDatasetSpec {
                    seed: m.seeds.train,
                    ..m.training.clone()
                },
                &EnsembleParams {
                    n_learners: m.n_learners,
                    seed: m.seeds.train,
                    ..m.ensemble
                },
            )?,
        };
        if model.n_learners() != m.n_learners {
            return Err(Error::InvalidArgument(format!(
                "bundle has {} learners, manifest asks for {}",
                model.n_learners(),
                m.n_learners
            )));
        }

        let commodities = graph.commodities(&traffic_commodities(&topo, &traffic))?;
        let solvers = SolverRegistry::with_defaults(BrkgaParams {
            seed: m.seeds.placement,
            ..m.brkga
        });
        let solver = solvers.get(&m.solver)?;
        let plan_for = |path: &Option<PathBuf>, mode: Mode| -> Result<DeploymentPlan> {
            let plan = match path {
                Some(p) => DeploymentPlan::load(&at(p), &graph)?,
                None => {
                    let (n_colors, replicas) = match mode {
                        Mode::Wl => (m.n_learners, m.replicas),
                        Mode::Sl => (1, m.sl_replicas),
                    };
                    solver.solve(&PlacementProblem {
                        graph: &graph,
                        commodities: &commodities,
                        n_colors,
                        replicas,
                        mode,
                        rule: m.placement_rule,
                    })?
                }
            };
            if plan.placement.mode != mode {
                return Err(Error::InvalidArgument(format!("expected a {mode} plan")));
            }
            if !plan.is_feasible() {
                return Err(Error::Infeasible(plan.diagnose(&graph).join("; ")));
            }
            Ok(plan)
        };
        let wl_plan = plan_for(&m.plan, Mode::Wl)?;
        let sl_plan = plan_for(&m.sl_plan, Mode::Sl)?;
        Ok(Self {
            graph,
            wl_plan,
            sl_plan,
            model,
            traffic,
            cost,
            seed: m.seeds.sim,
            attack_rates: m.attack_rates.clone(),
            output_dir: base.join(&m.output_dir),
        })
    }

    pub fn run(&self, mode: Mode) -> Result<MetricsReport> {
        let plan = match mode {
            Mode::Wl => &self.wl_plan,
            Mode::Sl => &self.sl_plan,
        };
        run_scenario(&self.graph, plan, &self.model, &self.traffic, &self.cost, self.seed)
    }

    pub fn sweep(&self, rates: &[f64]) -> Result<Vec<MetricsReport>> {
        compare_deployments(
            &self.graph,
            &self.wl_plan,
            &self.sl_plan,
            &self.model,
            rates,
            &self.traffic,
            &self.cost,
            self.seed,
        )
    }
}
