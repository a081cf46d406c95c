use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use innet::deploy::{
    stretch_overhead, BrkgaParams, CommoditySpec, Mode, NetworkGraph, PlacementProblem, PlacementRule, SolverRegistry,
    TopologyFile,
};
use innet::ensemble::{
    build_decomposed_ensemble, bundle, evaluate, synthetic::gaussian_dataset, synthetic::GaussianSpec,
    synthetic::Separation, EnsembleParams, LabeledDataset,
};
use innet::flow::{write_trace, FeatureRegistry};
use innet::sim::{
    endpoint_index, event_log_csv, flow_dataset, generate_traffic, metrics_csv, parse_rate_range, traffic_commodities,
    write_atomic, Experiment, ExperimentManifest, FlowDatasetSpec, Simulation, TrafficSpec,
};
use innet::Error;

use crate::{DataSource, GenDatasetArgs, OptimizeArgs, PredictArgs, SimulateArgs, TraceArgs, TrainArgs};

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

fn load_data(src: &DataSource, seed: u64) -> Result<LabeledDataset> {
    if let Some(path) = &src.dataset {
        return LabeledDataset::read_csv(path).with_context(|| format!("reading {}", path.display()));
    }
    if src.flows {
        let spec = FlowDatasetSpec {
            flows_per_class: src.rows.unwrap_or(1000),
            seed,
            ..Default::default()
        };
        return Ok(flow_dataset(&spec, &FeatureRegistry::default())?);
    }
    if src.synthetic {
        let separation: Separation = src.separation.parse()?;
        let defaults = GaussianSpec::default();
        let spec = GaussianSpec {
            rows: src.rows.unwrap_or(defaults.rows),
            separation,
            seed,
            ..defaults
        };
        return Ok(gaussian_dataset(&spec)?);
    }
    Err(invalid("give --dataset PATH, --synthetic or --flows"))
}

pub fn train(a: &TrainArgs) -> Result<()> {
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    if !(a.holdout > 0.0 && a.holdout < 1.0) {
        return Err(invalid("--holdout must lie in (0, 1)"));
    }
    let data = load_data(&a.data, a.seed)?;
    let (train, test) = data.split(1.0 - a.holdout, a.seed)?;
    let params = EnsembleParams {
        n_learners: a.n,
        subsample_ratio: a.ratio,
        max_depth: a.depth,
        seed: a.seed,
    };
    let sl = build_decomposed_ensemble(&train, &params)?;
    println!(
        "decomposed ensemble: {} learners, depth <= {}, {} train / {} held-out rows",
        a.n,
        a.depth,
        train.len(),
        test.len()
    );
    println!("{}", evaluate(&sl, &test)?);
    if a.monolithic {
        let mono = build_decomposed_ensemble(
            &train,
            &EnsembleParams {
                n_learners: 1,
                subsample_ratio: 1.0,
                ..params
            },
        )?;
        println!("monolithic tree over all {} features:", train.feature_count());
        println!("{}", evaluate(&mono, &test)?);
    }
    bundle::save(&sl, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

pub fn gen_dataset(a: &GenDatasetArgs) -> Result<()> {
    let data = load_data(&a.data, a.seed)?;
    let tmp = a.output.with_extension("partial");
    data.write_csv(&tmp)?;
    fs::rename(&tmp, &a.output)?;
    println!(
        "{} rows x {} features -> {}",
        data.len(),
        data.feature_count(),
        a.output.display()
    );
    Ok(())
}

pub fn predict(a: &PredictArgs) -> Result<()> {
    let sl = bundle::load(&a.bundle).with_context(|| format!("loading {}", a.bundle.display()))?;
    let data = LabeledDataset::read_csv(&a.dataset).with_context(|| format!("reading {}", a.dataset.display()))?;
    let mut out = String::from("row,prediction\n");
    for (i, (row, _)) in data.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", sl.predict_majority(row)?));
    }
    write_atomic(&a.output, &out)?;
    println!("{}", evaluate(&sl, &data)?);
    Ok(())
}

fn load_graph(path: &Path) -> Result<(TopologyFile, NetworkGraph)> {
    let topo = TopologyFile::load(path).with_context(|| format!("loading {}", path.display()))?;
    let graph = NetworkGraph::from_file(&topo)?;
    Ok((topo, graph))
}

pub fn optimize(a: &OptimizeArgs) -> Result<()> {
    let (topo, graph) = load_graph(&a.topology)?;
    let mut specs: Vec<CommoditySpec> = match &a.commodities {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .map_err(Error::from)?,
        None => topo.commodities.clone(),
    };
    if let Some(p) = &a.traffic {
        let traffic = TrafficSpec::load(p).with_context(|| format!("loading {}", p.display()))?;
        specs = traffic_commodities(
            &TopologyFile {
                commodities: specs,
                ..topo.clone()
            },
            &traffic,
        );
    }
    if specs.is_empty() {
        return Err(invalid(
            "no commodities: add them to the topology or pass --commodities",
        ));
    }
    let commodities = graph.commodities(&specs)?;
    let mode: Mode = a.mode.parse()?;
    let n_colors = match mode {
        Mode::Wl => a.n,
        Mode::Sl => 1,
    };
    if n_colors == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let solvers = SolverRegistry::with_defaults(BrkgaParams {
        population: a.population,
        elite_fraction: a.elite,
        mutant_fraction: a.mutants,
        inherit_prob_rho: a.rho,
        generations: a.generations,
        seed: a.seed,
        replicas_per_color: a.replicas,
    });
    let solver = solvers.get(if a.exact { "exact" } else { &a.solver })?;
    let plan = solver.solve(&PlacementProblem {
        graph: &graph,
        commodities: &commodities,
        n_colors,
        replicas: a.replicas,
        mode,
        rule: if a.exclusive {
            PlacementRule::Exclusive
        } else {
            PlacementRule::Shared
        },
    })?;
    if !plan.is_feasible() {
        for line in plan.diagnose(&graph) {
            eprintln!("{line}");
        }
        return Err(Error::Infeasible(format!(
            "coverage {:.3}: not every commodity can reach all {n_colors} colours",
            plan.coverage
        ))
        .into());
    }
    plan.save(&graph, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    println!(
        "{} plan via {}: objective {}, coverage {}, stretch {:.3}%",
        mode,
        solver.name(),
        plan.objective,
        plan.coverage,
        stretch_overhead(&plan)?
    );
    Ok(())
}

/// Removes already written outputs when a later step fails.
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn write(&mut self, path: &Path, text: &str) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        write_atomic(path, text).with_context(|| format!("writing {}", path.display()))?;
        self.0.push(path.to_path_buf());
        Ok(())
    }

    fn rollback(&self) {
        for p in &self.0 {
            let _ = fs::remove_file(p);
        }
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let (m, base) =
        ExperimentManifest::load(&a.manifest).with_context(|| format!("loading {}", a.manifest.display()))?;
    let exp = Experiment::prepare(&m, &base)?;
    let metrics_path = a.output.clone().unwrap_or_else(|| exp.output_dir.join("metrics.csv"));
    let log_path = metrics_path.with_extension("log.json");

    let rates = match (&a.sweep_attack, &a.mode) {
        (Some(_), Some(_)) => return Err(invalid("--mode and --sweep-attack are exclusive")),
        (Some(r), None) => Some(parse_rate_range(r)?),
        (None, Some(_)) => None,
        (None, None) => exp.attack_rates.clone(),
    };
    if a.event_log.is_some() && rates.is_some() {
        return Err(invalid("--event-log needs a single run (--mode)"));
    }

    let mut events = None;
    let reports = match rates {
        Some(rates) => exp.sweep(&rates)?,
        None => {
            let mode: Mode = a.mode.as_deref().unwrap_or("wl").parse()?;
            let plan = match mode {
                Mode::Wl => &exp.wl_plan,
                Mode::Sl => &exp.sl_plan,
            };
            let mut sim = Simulation::new(&exp.graph, plan, &exp.model, &exp.traffic, &exp.cost, exp.seed);
            sim.event_log = a.event_log.is_some();
            let out = sim.run()?;
            events = Some(event_log_csv(&exp.graph, &out.log));
            vec![out.report]
        }
    };

    let mut outputs = Outputs(Vec::new());
    let result = (|| -> Result<()> {
        outputs.write(&metrics_path, &metrics_csv(&reports))?;
        outputs.write(&log_path, &(serde_json::to_string_pretty(&reports)? + "\n"))?;
        if let (Some(p), Some(text)) = (&a.event_log, &events) {
            outputs.write(p, text)?;
        }
        Ok(())
    })();
    if result.is_err() {
        outputs.rollback();
    }
    result?;
    print!("{}", metrics_csv(&reports));
    Ok(())
}

pub fn trace(a: &TraceArgs) -> Result<()> {
    let (_, graph) = load_graph(&a.topology)?;
    let mut traffic = TrafficSpec::load(&a.traffic).with_context(|| format!("loading {}", a.traffic.display()))?;
    if let Some(r) = a.attack_rate {
        traffic = traffic.with_attack_rate(r);
    }
    let packets = generate_traffic(&traffic, a.seed, |name| endpoint_index(&graph, name))?;
    let tmp = a.output.with_extension("partial");
    write_trace(&tmp, &packets)?;
    fs::rename(&tmp, &a.output)?;
    println!("{} packets -> {}", packets.len(), a.output.display());
    Ok(())
}
