//! Deterministic discrete-event replay of the data plane: traffic sources,
//! FIFO switches with a cycle-cost model, chained inference, blocking and
//! the metrics behind the throughput, utilization and time-to-inference
//! comparisons.

pub mod cost;
pub mod dataset;
pub mod engine;
pub mod metrics;
pub mod scenario;
pub mod sweep;
pub mod traffic;

pub use cost::CostModel;
pub use dataset::{flow_dataset, FlowDatasetSpec};
pub use engine::{event_log_csv, run_scenario, FlowOutcome, LogEntry, SimOutput, Simulation};
pub use metrics::{metrics_csv, write_atomic, MetricsReport, SwitchUsage, TtiStats, CSV_HEADER};
pub use scenario::{traffic_commodities, train_flow_bundle, Experiment, ExperimentManifest, Seeds};
pub use sweep::{compare_deployments, parse_rate_range, rate_range};
pub use traffic::{
    endpoint_index, generate_traffic, host_ip, ArrivalProcess, ArrivalRegistry, FlowSource, TrafficSpec,
};
