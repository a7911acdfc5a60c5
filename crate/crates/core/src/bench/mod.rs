//! Branch and cut with a root cut pool, experiment sweeps and the metrics
//! reported from them.

pub mod bnc;
pub mod experiment;
pub mod profile;

pub use bnc::{gap_closed, run_branch_and_cut, BncResult, GapClosed, Method, RunConfig, RunStatus};
pub use experiment::{
    read_records, run_experiment, summarize, write_outputs, BaseBundle, ExperimentConfig,
    ExperimentGrid, ExperimentOutput, RunOutput, RunRecord,
};
pub use profile::{default_time_threshold, performance_profile, Profile};
