//! Weak-learner placement on switches and colour-constrained routing.

pub mod brkga;
pub mod exact;
pub mod graph;
pub mod paths;
pub mod placement;
pub mod registry;

pub use brkga::{brkga_solve, BrkgaOutcome, BrkgaParams};
pub use exact::brute_force_placement;
pub use graph::{Commodity, CommoditySpec, HostSpec, LinkSpec, NetworkGraph, TopologyFile};
pub use paths::{colored_shortest_path, shortest_path, Route};
pub use placement::{
    evaluate_placement, stretch_overhead, CommodityRoute, DeploymentPlan, Evaluation, Mode, Placement, PlacementRule,
};
pub use registry::{PlacementProblem, PlacementSolver, SolverRegistry};
