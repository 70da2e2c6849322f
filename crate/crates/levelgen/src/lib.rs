//! Host-side companion to `levelgen-core`: level and event file formats,
//! the experiment harness (agent validation, group generation, content
//! analysis, behaviour tests), report writers and the `levelgen` command.

pub mod error;
pub mod harness;
pub mod io;
pub mod report;

pub use error::{Error, Result};
pub use harness::{
    behaviour_test, content_analysis, evolve_group, run_experiment, validate_agents, BehaviourTable, ContentTable,
    ExperimentConfig, ExperimentResults, GroupResult, ValidationTable, WallClock,
};
pub use report::emit_reports;
