use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deploy::graph::{Commodity, NetworkGraph};
use crate::deploy::paths::{colored_shortest_path, shortest_path, unreachable_colors};
use crate::error::{Error, Result};

/// Whether the hosted functions are weak learners (one colour each) or
/// whole strong learners (a single pseudo-colour).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Wl,
    Sl,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wl" => Ok(Mode::Wl),
            "sl" => Ok(Mode::Sl),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?} (wl or sl)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Wl => "wl",
            Mode::Sl => "sl",
        })
    }
}

/// How many functions one switch may host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementRule {
    /// Any number of colours per switch.
    #[default]
    Shared,
    /// At most one colour per switch.
    Exclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    pub mode: Mode,
    pub n_colors: usize,
    /// Bitmask of hosted colours, per switch index.
    pub colors: Vec<u32>,
}

impl Placement {
    pub fn empty(mode: Mode, n_colors: usize, switches: usize) -> Self {
        Self {
            mode,
            n_colors,
            colors: vec![0; switches],
        }
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.n_colors) - 1
    }

    pub fn validate(&self, switches: usize) -> Result<()> {
        if self.colors.len() != switches {
            return Err(Error::InvalidArgument(format!(
                "placement covers {} switches, graph has {switches}",
                self.colors.len()
            )));
        }
        if self.n_colors == 0 || self.n_colors > 16 {
            return Err(Error::InvalidArgument(format!("{} colours unsupported", self.n_colors)));
        }
        if self.mode == Mode::Sl && self.n_colors != 1 {
            return Err(Error::InvalidArgument(
                "SL placements use a single pseudo-colour".into(),
            ));
        }
        if self.colors.iter().any(|&m| m & !self.full_mask() != 0) {
            return Err(Error::InvalidArgument("colour outside 0..N".into()));
        }
        Ok(())
    }

    /// Colours present on no switch.
    pub fn unplaced(&self) -> Vec<usize> {
        let have = self.colors.iter().fold(0, |a, &m| a | m);
        (0..self.n_colors).filter(|c| have & (1 << c) == 0).collect()
    }

    pub fn hosting_switches(&self) -> impl Iterator<Item = usize> + '_ {
        self.colors.iter().enumerate().filter(|(_, &m)| m != 0).map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommodityRoute {
    pub src: String,
    pub dst: String,
    pub walk: Option<Vec<usize>>,
    /// Colored walk cost; `None` when infeasible.
    pub cost: Option<f64>,
    pub shortest_cost: Option<f64>,
    pub demand: f64,
}

impl CommodityRoute {
    pub fn feasible(&self) -> bool {
        self.walk.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub coverage: f64,
    pub routes: Vec<CommodityRoute>,
}

/// Demand-weighted sum of colored walk costs, plus the graph penalty for
/// every infeasible commodity. Coverage is the feasible share of commodities
/// (1.0 for an empty set).
pub fn evaluate_placement(g: &NetworkGraph, placement: &Placement, commodities: &[Commodity]) -> Evaluation {
    let mut objective = 0.0;
    let mut feasible = 0usize;
    let mut routes = Vec::with_capacity(commodities.len());
    for c in commodities {
        let colored = colored_shortest_path(g, &placement.colors, placement.n_colors, c.src, c.dst);
        let plain = shortest_path(g, c.src, c.dst);
        match &colored {
            Some(r) => {
                objective += c.demand * r.cost;
                feasible += 1;
            }
            None => objective += g.penalty(),
        }
        routes.push(CommodityRoute {
            src: c.src_host.clone(),
            dst: c.dst_host.clone(),
            cost: colored.as_ref().map(|r| r.cost),
            walk: colored.map(|r| r.walk),
            shortest_cost: plain.map(|r| r.cost),
            demand: c.demand,
        });
    }
    let coverage = if commodities.is_empty() {
        1.0
    } else {
        feasible as f64 / commodities.len() as f64
    };
    Evaluation {
        objective,
        coverage,
        routes,
    }
}

/// Objective only; the hot path of the solvers.
pub fn placement_objective(g: &NetworkGraph, placement: &Placement, commodities: &[Commodity]) -> f64 {
    commodities
        .iter()
        .map(
            |c| match colored_shortest_path(g, &placement.colors, placement.n_colors, c.src, c.dst) {
                Some(r) => c.demand * r.cost,
                None => g.penalty(),
            },
        )
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentPlan {
    pub placement: Placement,
    pub routes: Vec<CommodityRoute>,
    pub objective: f64,
    pub coverage: f64,
}

impl DeploymentPlan {
    pub fn build(g: &NetworkGraph, placement: Placement, commodities: &[Commodity]) -> Self {
        let eval = evaluate_placement(g, &placement, commodities);
        Self {
            placement,
            routes: eval.routes,
            objective: eval.objective,
            coverage: eval.coverage,
        }
    }

    /// Baseline with nothing hosted: every commodity takes its plain
    /// shortest path.
    pub fn forwarding_only(g: &NetworkGraph, commodities: &[Commodity]) -> Self {
        let mut objective = 0.0;
        let routes: Vec<CommodityRoute> = commodities
            .iter()
            .map(|c| {
                let plain = shortest_path(g, c.src, c.dst);
                objective += plain.as_ref().map_or(g.penalty(), |r| c.demand * r.cost);
                CommodityRoute {
                    src: c.src_host.clone(),
                    dst: c.dst_host.clone(),
                    cost: plain.as_ref().map(|r| r.cost),
                    shortest_cost: plain.as_ref().map(|r| r.cost),
                    walk: plain.map(|r| r.walk),
                    demand: c.demand,
                }
            })
            .collect();
        let coverage = if routes.is_empty() {
            1.0
        } else {
            routes.iter().filter(|r| r.feasible()).count() as f64 / routes.len() as f64
        };
        Self {
            placement: Placement::empty(Mode::Sl, 1, g.switch_count()),
            routes,
            objective,
            coverage,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.routes.iter().all(CommodityRoute::feasible)
    }

    /// Human-readable reasons for every infeasible commodity.
    pub fn diagnose(&self, g: &NetworkGraph) -> Vec<String> {
        let mut out = Vec::new();
        let unplaced = self.placement.unplaced();
        if !unplaced.is_empty() {
            out.push(format!("colours never placed: {unplaced:?}"));
        }
        for r in self.routes.iter().filter(|r| !r.feasible()) {
            let src = g.attachment(&r.src).ok();
            let missing = src
                .map(|s| unreachable_colors(g, &self.placement.colors, self.placement.n_colors, s))
                .unwrap_or_default();
            out.push(format!(
                "{} -> {}: no colored walk (unreachable colours {missing:?})",
                r.src, r.dst
            ));
        }
        out
    }

    pub fn route(&self, src: &str, dst: &str) -> Option<&CommodityRoute> {
        self.routes.iter().find(|r| r.src == src && r.dst == dst)
    }
}

/// Mean percentage by which colored walks exceed plain shortest paths.
/// Commodities whose endpoints coincide (zero shortest cost) are skipped.
pub fn stretch_overhead(plan: &DeploymentPlan) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in &plan.routes {
        let (Some(colored), Some(shortest)) = (r.cost, r.shortest_cost) else {
            return Err(Error::Infeasible(format!("{} -> {} has no colored walk", r.src, r.dst)));
        };
        if shortest > 0.0 {
            sum += (colored - shortest) / shortest * 100.0;
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

#[derive(Debug, Serialize, Deserialize)]
struct PlanFile {
    mode: Mode,
    n_colors: usize,
    color_map: BTreeMap<String, Vec<usize>>,
    paths: Vec<PathFile>,
    objective: f64,
    coverage: f64,
    stretch_pct: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PathFile {
    src: String,
    dst: String,
    walk: Option<Vec<String>>,
    cost: Option<f64>,
    shortest_cost: Option<f64>,
    #[serde(default = "one")]
    demand: f64,
}

fn one() -> f64 {
    1.0
}

impl DeploymentPlan {
    pub fn to_json(&self, g: &NetworkGraph) -> Result<String> {
        let color_map = self
            .placement
            .colors
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .map(|(i, &m)| {
                let cs = (0..self.placement.n_colors).filter(|c| m & (1 << c) != 0).collect();
                (g.name(i).to_string(), cs)
            })
            .collect();
        let paths = self
            .routes
            .iter()
            .map(|r| PathFile {
                src: r.src.clone(),
                dst: r.dst.clone(),
                walk: r
                    .walk
                    .as_ref()
                    .map(|w| w.iter().map(|&i| g.name(i).to_string()).collect()),
                cost: r.cost,
                shortest_cost: r.shortest_cost,
                demand: r.demand,
            })
            .collect();
        let file = PlanFile {
            mode: self.placement.mode,
            n_colors: self.placement.n_colors,
            color_map,
            paths,
            objective: self.objective,
            coverage: self.coverage,
            stretch_pct: stretch_overhead(self).ok(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Loads a plan and checks every stored walk against the graph: each hop
    /// must be a link, costs must match, and feasible walks must collect all
    /// colours.
    pub fn from_json(text: &str, g: &NetworkGraph) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text)?;
        let mut placement = Placement::empty(file.mode, file.n_colors, g.switch_count());
        for (name, cs) in &file.color_map {
            let s = g.switch(name)?;
            for &c in cs {
                if c >= file.n_colors {
                    return Err(Error::InvalidArgument(format!("colour {c} on {name} exceeds N")));
                }
                placement.colors[s] |= 1 << c;
            }
        }
        placement.validate(g.switch_count())?;
        let mut routes = Vec::with_capacity(file.paths.len());
        for p in file.paths {
            let walk = match &p.walk {
                Some(names) => {
                    let walk = names.iter().map(|n| g.switch(n)).collect::<Result<Vec<_>>>()?;
                    check_walk(g, &placement, &walk, &p)?;
                    Some(walk)
                }
                None => None,
            };
            routes.push(CommodityRoute {
                src: p.src,
                dst: p.dst,
                walk,
                cost: p.cost,
                shortest_cost: p.shortest_cost,
                demand: p.demand,
            });
        }
        Ok(Self {
            placement,
            routes,
            objective: file.objective,
            coverage: file.coverage,
        })
    }

    /// Written through a sibling `.partial` file, renamed on success.
    pub fn save(&self, g: &NetworkGraph, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.partial");
        fs::write(&tmp, self.to_json(g)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path, g: &NetworkGraph) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?, g)
    }
}

fn check_walk(g: &NetworkGraph, placement: &Placement, walk: &[usize], p: &PathFile) -> Result<()> {
    let bad = |why: String| Error::InvalidArgument(format!("path {} -> {}: {why}", p.src, p.dst));
    if walk.is_empty() {
        return Err(bad("empty walk".into()));
    }
    if walk[0] != g.attachment(&p.src)? || walk[walk.len() - 1] != g.attachment(&p.dst)? {
        return Err(bad("walk does not join the endpoints".into()));
    }
    let mut cost = 0.0;
    let mut mask = 0;
    for w in walk.windows(2) {
        cost += g
            .link_cost(w[0], w[1])
            .ok_or_else(|| bad(format!("no link {}-{}", g.name(w[0]), g.name(w[1]))))?;
    }
    for &v in walk {
        mask |= placement.colors[v];
    }
    if mask != placement.full_mask() {
        return Err(bad("walk misses a colour".into()));
    }
    if let Some(c) = p.cost {
        if (c - cost).abs() > 1e-9 * cost.max(1.0) {
            return Err(bad(format!("stated cost {c} but links sum to {cost}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deploy::graph::CommoditySpec;

    fn line4() -> NetworkGraph {
        NetworkGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    fn comm(g: &NetworkGraph, a: &str, b: &str) -> Commodity {
        g.commodity(&CommoditySpec {
            src: a.into(),
            dst: b.into(),
            demand: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn coverage_and_penalty() {
        let g = line4();
        let mut p = Placement::empty(Mode::Wl, 1, 4);
        p.colors[1] = 1;
        // s3 is a dead end: colour 1 is only at s1, so every commodity is feasible.
        let cs = vec![comm(&g, "s0", "s3"), comm(&g, "s3", "s2")];
        let e = evaluate_placement(&g, &p, &cs);
        assert_eq!(e.coverage, 1.0);
        assert_eq!(e.objective, 3.0 + 3.0);

        let g2 = NetworkGraph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        let mut p2 = Placement::empty(Mode::Wl, 1, 5);
        p2.colors[1] = 1;
        let cs = vec![
            comm(&g2, "s0", "s2"),
            comm(&g2, "s0", "s1"),
            comm(&g2, "s1", "s2"),
            comm(&g2, "s3", "s4"),
        ];
        let e = evaluate_placement(&g2, &p2, &cs);
        assert_eq!(e.coverage, 0.75);
        assert_eq!(e.objective, 2.0 + 1.0 + 1.0 + g2.penalty());
    }

    #[test]
    fn empty_commodities() {
        let g = line4();
        let e = evaluate_placement(&g, &Placement::empty(Mode::Wl, 2, 4), &[]);
        assert_eq!((e.objective, e.coverage), (0.0, 1.0));
    }

    #[test]
    fn stretch_arithmetic() {
        let route = |cost, shortest| CommodityRoute {
            src: "a".into(),
            dst: "b".into(),
            walk: Some(vec![0]),
            cost: Some(cost),
            shortest_cost: Some(shortest),
            demand: 1.0,
        };
        let plan = DeploymentPlan {
            placement: Placement::empty(Mode::Wl, 1, 1),
            routes: vec![route(6.0, 5.0), route(5.0, 5.0), route(0.0, 0.0)],
            objective: 0.0,
            coverage: 1.0,
        };
        assert!((stretch_overhead(&plan).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn plan_json_roundtrip_and_checks() {
        let g = line4();
        let mut p = Placement::empty(Mode::Wl, 2, 4);
        p.colors[1] = 0b01;
        p.colors[2] = 0b10;
        let plan = DeploymentPlan::build(&g, p, &[comm(&g, "s0", "s3")]);
        let text = plan.to_json(&g).unwrap();
        let back = DeploymentPlan::from_json(&text, &g).unwrap();
        assert_eq!(back, plan);

        let tampered = text.replace("\"s1\",\n        \"s2\"", "\"s1\",\n        \"s1\"");
        assert!(DeploymentPlan::from_json(&tampered, &g).is_err());
    }
}
