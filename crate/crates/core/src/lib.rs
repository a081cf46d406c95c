//! In-network intrusion prevention built from a decomposed tree ensemble.
//!
//! A strong learner (a small random forest) is split into weak learners,
//! each placed on a switch. Flows are scored cooperatively: every hosting
//! switch appends its vote to an in-band [`chain::ChainHeader`] and the last
//! one takes the majority. Placement is a colour-constrained shortest-walk
//! problem solved exactly or with a BRKGA, and [`sim`] replays the whole
//! data plane as a deterministic discrete-event simulation.

pub mod chain;
pub mod deploy;
pub mod ensemble;
pub mod error;
pub mod flow;
pub mod sim;

pub use error::{Error, Result};
