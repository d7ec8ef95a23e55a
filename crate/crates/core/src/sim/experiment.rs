//! Runs of the (engine, antennas, seed) matrix and their summaries.

use rayon::prelude::*;

use crate::agents::{Agent, DqnAgent, TabularAgent};
use crate::config::{Engine, NetworkConfig};
use crate::error::{Error, Result};
use crate::oracle::SearchSpace;
use crate::radio::BS_B;

use super::env::Env;
use super::env::EpisodeChannels;
use super::episode::{run_episode_on, Controller, EpisodeResult, Targets};
use super::metrics::{
    best_reward_episode, convergence_episode, median, percentile, sum_rate_summary, throughput_and_frame_loss,
};

/// Everything needed to summarize a run besides its episodes. Written into
/// trace headers so summaries can be recomputed from traces alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RunContext {
    pub config_hash: String,
    pub engine: Engine,
    pub q: u8,
    pub antennas: usize,
    pub seed: u64,
    pub frame_steps: usize,
    pub step_seconds: f64,
    pub target_db: f64,
    pub min_db: f64,
    pub payload_bits: f64,
    pub voice_activity: f64,
    pub n_bs: usize,
    pub backhaul_measurements_per_step: usize,
}

impl RunContext {
    pub fn new(config: &NetworkConfig, engine: Engine, antennas: usize, seed: u64) -> Self {
        RunContext {
            config_hash: config.hash(),
            engine,
            q: config.q(),
            antennas,
            seed,
            frame_steps: config.frame_steps,
            step_seconds: config.step_seconds,
            target_db: config.sinr_target_db(antennas),
            min_db: config.sinr_min_db,
            payload_bits: config.payload_bits,
            voice_activity: config.voice_activity,
            n_bs: config.n_bs,
            backhaul_measurements_per_step: config.backhaul_measurements_per_step,
        }
    }

    pub fn targets(&self) -> Targets {
        Targets {
            target_db: self.target_db,
            min_db: self.min_db,
        }
    }

    /// Base name shared by the trace and sample files of this run.
    pub fn stem(&self) -> String {
        format!("{}_M{}_s{}", self.engine, self.antennas, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub engine: Engine,
    pub antennas: usize,
    pub seed: u64,
    pub config_hash: String,
    pub episodes: usize,
    /// First converged episode, one-based.
    pub zeta: Option<usize>,
    pub max_sum_rate: Option<f64>,
    /// Decision and training time over all episodes.
    pub wall_time_s: f64,
    pub step_time_us: f64,
    pub throughput_bps: Option<f64>,
    pub lost_frames: Option<u64>,
    /// UE measurement reports carried to the central agent.
    pub backhaul_msgs: u64,
    /// Median effective SINR over all UEs and steps of episode `ζ`.
    pub converged_sinr_median_db: Option<f64>,
    /// Tenth percentile of the coverage samples.
    pub sinr_p10_db: Option<f64>,
}

/// Coverage samples of a run: the effective SINR in its highest-reward
/// episode, for the UE served by BS b on voice bearers and for every UE on
/// data bearers.
pub fn coverage_samples(results: &[EpisodeResult], q: u8) -> Vec<f64> {
    let Some(best) = best_reward_episode(results) else {
        return Vec::new();
    };
    best.steps
        .iter()
        .flat_map(|s| {
            if q == 0 {
                vec![s.sinr_eff_db[BS_B]]
            } else {
                s.sinr_eff_db.clone()
            }
        })
        .collect()
}

pub fn summarize(ctx: &RunContext, results: &[EpisodeResult]) -> RunSummary {
    let zeta = convergence_episode(results);
    let total_ns: u64 = results
        .iter()
        .flat_map(|r| &r.steps)
        .map(|s| s.wall_ns)
        .sum();
    let n_steps: usize = results.iter().map(|r| r.steps.len()).sum();
    let frame_seconds = ctx.frame_steps as f64 * ctx.step_seconds;
    let (throughput_bps, lost_frames) = match zeta {
        Some(z) => {
            let (tp, lost) = throughput_and_frame_loss(z, frame_seconds, ctx.payload_bits, ctx.voice_activity);
            (Some(tp), Some(lost))
        }
        None => (None, None),
    };
    let converged_sinr_median_db = zeta.and_then(|z| {
        let samples: Vec<f64> = results[z - 1]
            .steps
            .iter()
            .flat_map(|s| s.sinr_eff_db.iter().copied())
            .collect();
        median(&samples)
    });
    let n_ues = results
        .iter()
        .flat_map(|r| r.steps.first())
        .map(|s| s.sinr_eff_db.len())
        .next()
        .unwrap_or(0);
    RunSummary {
        engine: ctx.engine,
        antennas: ctx.antennas,
        seed: ctx.seed,
        config_hash: ctx.config_hash.clone(),
        episodes: results.len(),
        zeta,
        max_sum_rate: sum_rate_summary(results, ctx.frame_steps),
        wall_time_s: total_ns as f64 / 1e9,
        step_time_us: if n_steps == 0 {
            0.0
        } else {
            total_ns as f64 / 1e3 / n_steps as f64
        },
        throughput_bps,
        lost_frames,
        backhaul_msgs: (ctx.backhaul_measurements_per_step * n_ues * n_steps) as u64,
        converged_sinr_median_db,
        sinr_p10_db: percentile(&coverage_samples(results, ctx.q), 10.0),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub context: RunContext,
    pub episodes: Vec<EpisodeResult>,
    pub summary: RunSummary,
    /// Channels of every episode, kept only when `dump_channels` is set.
    pub channels: Vec<EpisodeChannels>,
}

/// Runs one engine on one network until it converges (when configured to
/// stop there) or reaches the episode cap. Learners keep their weights and
/// ε across episodes.
pub fn run_single(config: &NetworkConfig, engine: Engine, antennas: usize, seed: u64) -> Result<RunOutput> {
    let context = RunContext::new(config, engine, antennas, seed);
    let mut env = Env::new(config, antennas, seed)?;
    let targets = context.targets();

    let mut dqn;
    let mut tabular;
    let space;
    let (mut ctrl, cap) = match engine {
        Engine::Fpa => (Controller::Fpa, config.episodes),
        Engine::Dqn => {
            dqn = DqnAgent::new(config, seed)?;
            (Controller::Learner(&mut dqn as &mut dyn Agent), config.episodes)
        }
        Engine::Tabular => {
            tabular = TabularAgent::new(config, seed)?;
            (Controller::Learner(&mut tabular as &mut dyn Agent), config.episodes)
        }
        Engine::BruteForce => {
            space = SearchSpace::new(
                config.oracle_power_grid_dbm.clone(),
                env.codebook.clone(),
                config.n_bs,
                config.max_power_dbm,
            )?;
            (Controller::BruteForce(&space), config.oracle_episodes.min(config.episodes))
        }
    };

    let mut episodes = Vec::new();
    let mut dumped = Vec::new();
    for _ in 0..cap {
        if config.reset_epsilon_per_episode {
            if let Controller::Learner(agent) = &mut ctrl {
                agent.reset_epsilon();
            }
        }
        let channels = env.next_channels()?;
        let result = run_episode_on(&mut env, &channels, &mut ctrl, targets)?;
        if config.dump_channels {
            dumped.push(channels);
        }
        let done = result.converged && config.stop_on_convergence;
        episodes.push(result);
        if done {
            break;
        }
    }
    let summary = summarize(&context, &episodes);
    Ok(RunOutput {
        context,
        episodes,
        summary,
        channels: dumped,
    })
}

/// Every `(engine, M, seed)` combination of the config, in that nesting
/// order.
pub fn run_matrix(config: &NetworkConfig) -> Vec<(Engine, usize, u64)> {
    let mut jobs = Vec::new();
    for &engine in &config.engines {
        for &m in &config.antennas {
            for &seed in &config.seeds {
                jobs.push((engine, m, seed));
            }
        }
    }
    jobs
}

/// Runs the whole matrix on `config.workers` threads (0: one per core).
/// Results come back in [`run_matrix`] order whatever the scheduling.
pub fn run_experiment(config: &NetworkConfig) -> Result<Vec<Result<RunOutput>>> {
    config.validate()?;
    let jobs = run_matrix(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start workers: {e}")))?;
    Ok(pool.install(|| {
        jobs.par_iter()
            .map(|&(engine, m, seed)| run_single(config, engine, m, seed))
            .collect()
    }))
}

/// Seed-aggregated convergence of one (engine, M) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub engine: Engine,
    pub antennas: usize,
    pub seeds: usize,
    pub converged: usize,
    /// Percentile of ζ over seeds; a run that never converged counts as the
    /// number of episodes it ran, i.e. its cap.
    pub zeta_percentile: f64,
}

pub fn aggregate_zeta(summaries: &[RunSummary], pct: f64) -> Vec<Aggregate> {
    let mut cells: Vec<(Engine, usize)> = summaries.iter().map(|s| (s.engine, s.antennas)).collect();
    cells.sort();
    cells.dedup();
    cells
        .into_iter()
        .map(|(engine, antennas)| {
            let runs: Vec<&RunSummary> = summaries
                .iter()
                .filter(|s| s.engine == engine && s.antennas == antennas)
                .collect();
            let zetas: Vec<f64> = runs.iter().map(|s| s.zeta.unwrap_or(s.episodes) as f64).collect();
            Aggregate {
                engine,
                antennas,
                seeds: runs.len(),
                converged: runs.iter().filter(|s| s.zeta.is_some()).count(),
                zeta_percentile: percentile(&zetas, pct).unwrap_or(f64::NAN),
            }
        })
        .collect()
}
