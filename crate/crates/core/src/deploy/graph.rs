use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk topology: `{switches, hosts, links}` plus optional commodities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub switches: Vec<String>,
    pub hosts: Vec<HostSpec>,
    pub links: Vec<LinkSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub commodities: Vec<CommoditySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostSpec {
    pub id: String,
    pub attach: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub a: String,
    pub b: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommoditySpec {
    pub src: String,
    pub dst: String,
    #[serde(default = "unit")]
    pub demand: f64,
}

fn unit() -> f64 {
    1.0
}

impl TopologyFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidTopology(format!("{}: {e}", path.display())))
    }
}

/// Switch-level graph. Hosts are not vertices; they resolve to the switch
/// they attach to. Switch indices follow the order of the topology file, and
/// that order is the "lexicographic" order used for tie-breaking.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    hosts: Vec<(String, usize)>,
    adj: Vec<Vec<(usize, f64)>>,
    max_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commodity {
    pub src_host: String,
    pub dst_host: String,
    pub src: usize,
    pub dst: usize,
    pub demand: f64,
}

impl NetworkGraph {
    pub fn from_file(file: &TopologyFile) -> Result<Self> {
        if file.switches.is_empty() {
            return Err(Error::InvalidTopology("no switches".into()));
        }
        let mut index = HashMap::new();
        for (i, s) in file.switches.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate switch {s}")));
            }
        }
        let mut g = Self {
            names: file.switches.clone(),
            index,
            hosts: Vec::new(),
            adj: vec![Vec::new(); file.switches.len()],
            max_cost: 0.0,
        };
        for h in &file.hosts {
            if g.index.contains_key(&h.id) || g.hosts.iter().any(|(n, _)| n == &h.id) {
                return Err(Error::InvalidTopology(format!("duplicate node id {}", h.id)));
            }
            let at = g.switch(&h.attach)?;
            g.hosts.push((h.id.clone(), at));
        }
        for l in &file.links {
            g.add_link(&l.a, &l.b, l.cost)?;
        }
        for nbrs in &mut g.adj {
            nbrs.sort_by_key(|&(v, _)| v);
        }
        Ok(g)
    }

    /// Switch-only graph from index pairs, for generated instances.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let file = TopologyFile {
            switches: (0..n).map(|i| format!("s{i}")).collect(),
            hosts: Vec::new(),
            links: edges
                .iter()
                .map(|&(a, b, cost)| LinkSpec {
                    a: format!("s{a}"),
                    b: format!("s{b}"),
                    cost,
                })
                .collect(),
            commodities: Vec::new(),
        };
        Self::from_file(&file)
    }

    fn add_link(&mut self, a: &str, b: &str, cost: f64) -> Result<()> {
        let (ia, ib) = (self.switch(a)?, self.switch(b)?);
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::InvalidTopology(format!(
                "link {a}-{b} has non-positive cost {cost}"
            )));
        }
        if ia == ib {
            return Err(Error::InvalidTopology(format!("self-loop on {a}")));
        }
        if self.adj[ia].iter().any(|&(v, _)| v == ib) {
            return Err(Error::InvalidTopology(format!("duplicate link {a}-{b}")));
        }
        self.adj[ia].push((ib, cost));
        self.adj[ib].push((ia, cost));
        self.max_cost = self.max_cost.max(cost);
        Ok(())
    }

    pub fn switch(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Resolves a host to its attachment switch; switch names resolve to
    /// themselves.
    pub fn attachment(&self, node: &str) -> Result<usize> {
        if let Some((_, s)) = self.hosts.iter().find(|(h, _)| h == node) {
            return Ok(*s);
        }
        self.switch(node)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn hosts(&self) -> &[(String, usize)] {
        &self.hosts
    }

    pub fn switch_count(&self) -> usize {
        self.names.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[v]
    }

    pub fn link_cost(&self, a: usize, b: usize) -> Option<f64> {
        self.adj[a].iter().find(|&&(v, _)| v == b).map(|&(_, c)| c)
    }

    pub fn max_link_cost(&self) -> f64 {
        self.max_cost
    }

    /// Infeasibility penalty: dominates any feasible walk cost.
    pub fn penalty(&self) -> f64 {
        1e6 * self.max_cost.max(1.0) * self.switch_count() as f64
    }

    pub fn commodity(&self, spec: &CommoditySpec) -> Result<Commodity> {
        if !(spec.demand >= 0.0 && spec.demand.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "commodity {}->{} has invalid demand {}",
                spec.src, spec.dst, spec.demand
            )));
        }
        Ok(Commodity {
            src_host: spec.src.clone(),
            dst_host: spec.dst.clone(),
            src: self.attachment(&spec.src)?,
            dst: self.attachment(&spec.dst)?,
            demand: spec.demand,
        })
    }

    pub fn commodities(&self, specs: &[CommoditySpec]) -> Result<Vec<Commodity>> {
        specs.iter().map(|s| self.commodity(s)).collect()
    }
}
