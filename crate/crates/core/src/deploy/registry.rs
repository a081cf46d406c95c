//! Placement solvers behind one trait, looked up by name.

use std::collections::BTreeMap;

use crate::deploy::brkga::{brkga_solve, BrkgaParams};
use crate::deploy::exact::{brute_force_placement, DEFAULT_GUARD};
use crate::deploy::graph::{Commodity, NetworkGraph};
use crate::deploy::placement::{DeploymentPlan, Mode, PlacementRule};
use crate::error::{Error, Result};

/// Everything a solver needs besides its own tuning knobs.
#[derive(Debug, Clone, Copy)]
pub struct PlacementProblem<'a> {
    pub graph: &'a NetworkGraph,
    pub commodities: &'a [Commodity],
    pub n_colors: usize,
    pub replicas: usize,
    pub mode: Mode,
    pub rule: PlacementRule,
}

pub trait PlacementSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &PlacementProblem<'_>) -> Result<DeploymentPlan>;
}

#[derive(Debug, Clone)]
pub struct BrkgaSolver {
    pub params: BrkgaParams,
}

impl PlacementSolver for BrkgaSolver {
    fn name(&self) -> &'static str {
        "brkga"
    }

    fn solve(&self, p: &PlacementProblem<'_>) -> Result<DeploymentPlan> {
        let params = BrkgaParams {
            replicas_per_color: p.replicas,
            ..self.params
        };
        Ok(brkga_solve(p.graph, p.commodities, p.n_colors, p.mode, p.rule, &params)?.plan)
    }
}

#[derive(Debug, Clone)]
pub struct ExactSolver {
    pub guard: u128,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self { guard: DEFAULT_GUARD }
    }
}

impl PlacementSolver for ExactSolver {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn solve(&self, p: &PlacementProblem<'_>) -> Result<DeploymentPlan> {
        brute_force_placement(
            p.graph,
            p.commodities,
            p.n_colors,
            p.replicas,
            p.mode,
            p.rule,
            self.guard,
        )
    }
}

#[derive(Default)]
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn PlacementSolver>>,
}

impl SolverRegistry {
    /// Registry holding `brkga` (with the given parameters) and `exact`.
    pub fn with_defaults(brkga: BrkgaParams) -> Self {
        let mut r = Self::default();
        r.register(Box::new(BrkgaSolver { params: brkga }));
        r.register(Box::new(ExactSolver::default()));
        r
    }

    /// Replaces any solver already registered under the same name.
    pub fn register(&mut self, solver: Box<dyn PlacementSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn PlacementSolver> {
        self.solvers
            .get(name)
            .map(Box::as_ref)
            .ok_or_else(|| Error::UnknownStrategy(name.to_string(), self.names().join(", ")))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let r = SolverRegistry::with_defaults(BrkgaParams::default());
        assert_eq!(r.names(), vec!["brkga", "exact"]);
        assert_eq!(r.get("exact").unwrap().name(), "exact");
        let err = r.get("milp").err().unwrap().to_string();
        assert!(err.contains("brkga, exact"), "{err}");
    }
}
