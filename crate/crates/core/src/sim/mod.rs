//! Episode runner, experiment orchestration and performance measures.

pub mod env;
pub mod episode;
pub mod experiment;
pub mod metrics;
pub mod trace;

pub use env::{Env, EpisodeChannels};
pub use episode::{is_converged, run_episode, run_episode_on, Controller, EpisodeResult, StepRecord, Targets};
pub use experiment::{
    aggregate_zeta, coverage_samples, run_experiment, run_matrix, run_single, summarize, Aggregate, RunContext,
    RunOutput, RunSummary,
};
pub use metrics::{
    best_reward_episode, ccdf, ccdf_auto, convergence_episode, median, percentile, sum_rate_summary,
    throughput_and_frame_loss, uniform_grid,
};
