//! One episode of agent–network interaction.

use std::time::{Duration, Instant};

use crate::agents::{Agent, Experience, State};
use crate::error::{Error, Result};
use crate::oracle::{brute_force, SearchSpace};
use crate::radio::{decode_action, effective_sinr, reward, ActionRegister, BS_B, BS_L};

use super::env::{Env, EpisodeChannels};

/// Who decides the powers and beams.
pub enum Controller<'a> {
    /// Fixed power allocation: powers and beams never change.
    Fpa,
    Learner(&'a mut dyn Agent),
    /// Per-step exhaustive search.
    BruteForce(&'a SearchSpace),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Targets {
    pub target_db: f64,
    pub min_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub state: State,
    /// `None` for engines without an action register.
    pub action: Option<ActionRegister>,
    pub reward: f64,
    pub loss: Option<f64>,
    pub powers_dbm: Vec<f64>,
    pub beams: Vec<usize>,
    /// Per UE, UE `j` served by BS `j`.
    pub sinr_db: Vec<f64>,
    pub sinr_eff_db: Vec<f64>,
    /// Decision (and training) time of this step.
    pub wall_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub episode: usize,
    pub steps: Vec<StepRecord>,
    pub converged: bool,
    pub aborted: bool,
    pub wall_time: Duration,
}

impl EpisodeResult {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn sinr_eff_series(&self) -> Vec<Vec<f64>> {
        self.steps.iter().map(|s| s.sinr_eff_db.clone()).collect()
    }
}

/// Converged: all `T` steps ran and every UE met the target at each.
pub fn is_converged(steps: &[StepRecord], frame_steps: usize, target_db: f64) -> bool {
    frame_steps > 0
        && steps.len() == frame_steps
        && steps
            .iter()
            .all(|s| s.sinr_eff_db.iter().all(|&g| g >= target_db))
}

/// Runs one episode on the next channels of `env`.
///
/// Each step observes the state, lets the controller act, evaluates every
/// UE's SINR on the frozen channel of that step and computes the reward. An
/// effective SINR below `targets.min_db` at any UE replaces the reward with
/// `r_min` and ends the episode. A learner stores the transition and trains
/// on it before the next step. When the episode ends with every UE at or
/// above target, `r_max` is added to the final reward, including the copy
/// already stored for training.
pub fn run_episode(env: &mut Env, ctrl: &mut Controller<'_>, targets: Targets) -> Result<EpisodeResult> {
    let channels = env.next_channels()?;
    run_episode_on(env, &channels, ctrl, targets)
}

pub fn run_episode_on(
    env: &mut Env,
    channels: &EpisodeChannels,
    ctrl: &mut Controller<'_>,
    targets: Targets,
) -> Result<EpisodeResult> {
    let q = env.config.q();
    let code_map = env.config.code_rate_map();
    let steps_total = channels.steps();
    let mut steps = Vec::with_capacity(steps_total);
    let mut aborted = false;
    let mut wall = Duration::ZERO;

    for t in 0..steps_total {
        let s = env.observe(&channels.positions[t]);
        let mut elapsed = Duration::ZERO;

        let action = match ctrl {
            Controller::Fpa => None,
            Controller::Learner(agent) => {
                let start = Instant::now();
                let a = ActionRegister::from_index(agent.act(&s)?);
                elapsed += start.elapsed();
                env.apply(&decode_action(a, q))?;
                Some(a)
            }
            Controller::BruteForce(space) => {
                let start = Instant::now();
                let best = brute_force(&env.radio_state(&channels.channels[t]), space, &code_map, targets.target_db)?;
                elapsed += start.elapsed();
                env.powers_dbm = best.powers_dbm;
                env.beams = best.beams;
                None
            }
        };

        let radio = env.radio_state(&channels.channels[t]);
        let sinr_db = radio.sinrs_db(&env.codebook);
        let sinr_eff_db: Vec<f64> = sinr_db.iter().map(|&g| effective_sinr(g, q, &code_map)).collect();

        let mut r = match action {
            Some(a) => reward(a, sinr_db[BS_B], sinr_db[BS_L], q),
            None => (sinr_db[BS_B] + sinr_db[BS_L]) * q as f64,
        };
        if sinr_eff_db.iter().any(|&g| g < targets.min_db) {
            r = env.config.reward_min;
            aborted = true;
        }
        let terminal = aborted || t + 1 == steps_total;

        let mut loss = None;
        if let (Controller::Learner(agent), Some(a)) = (&mut *ctrl, action) {
            let s_next = env.observe(&channels.positions[t + 1]);
            let start = Instant::now();
            loss = agent.learn(Experience {
                s,
                a: a.index(),
                r,
                s_next,
                terminal,
            })?;
            elapsed += start.elapsed();
            if loss.is_some_and(|l| !l.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    episode: channels.episode,
                    step: t,
                });
            }
        }
        wall += elapsed;

        steps.push(StepRecord {
            t,
            state: s,
            action,
            reward: r,
            loss,
            powers_dbm: env.powers_dbm.clone(),
            beams: env.beams.clone(),
            sinr_db,
            sinr_eff_db,
            wall_ns: elapsed.as_nanos() as u64,
        });
        if aborted {
            break;
        }
    }

    if let Some(last) = steps.last_mut() {
        if !aborted && last.sinr_eff_db.iter().all(|&g| g >= targets.target_db) {
            last.reward += env.config.reward_max;
            if let Controller::Learner(agent) = ctrl {
                agent.reward_bonus(env.config.reward_max);
            }
        }
    }

    env.end_episode(aborted);
    Ok(EpisodeResult {
        episode: channels.episode,
        converged: is_converged(&steps, steps_total, targets.target_db),
        aborted,
        steps,
        wall_time: wall,
    })
}
