//! Instance generators, experiment drivers, matrix IO and JSON reports for
//! the `als-core` algorithms. The `als` binary exposes each experiment as a
//! subcommand.

pub mod experiments;
pub mod instances;
pub mod io;
pub mod report;

pub use experiments::{run_experiment, ExperimentSpec, Pipeline};
pub use instances::{gen_instance, Instance, InstanceKind};
pub use report::{ExperimentReport, TrialRecord};
