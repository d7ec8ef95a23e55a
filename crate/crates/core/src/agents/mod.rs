//! Learning agents: the deep-Q network with experience replay and the
//! tabular Q-learning baseline. Both act ε-greedily over the 16 joint
//! actions of the action register.

pub mod policy;
pub mod qnet;
pub mod replay;
pub mod tabular;

pub use policy::{argmax, epsilon_greedy, select_action, PolicyState};
pub use qnet::{bellman_target, CheckpointKey, QNetwork};
pub use replay::ReplayBuffer;
pub use tabular::QTable;

use crate::config::{NetworkConfig, N_STATES};
use crate::error::Result;
use crate::rng::{stream, Purpose, SimRng};

/// Normalized observation; see [`crate::sim::Env::observe`].
pub type State = [f64; N_STATES];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experience {
    pub s: State,
    pub a: usize,
    pub r: f64,
    pub s_next: State,
    pub terminal: bool,
}

/// What the episode runner needs from a learner.
pub trait Agent {
    /// Decays ε, then picks an action for `s`.
    fn act(&mut self, s: &State) -> Result<usize>;
    /// Stores and learns from one transition. Returns the training loss when
    /// a gradient step was taken.
    fn learn(&mut self, e: Experience) -> Result<Option<f64>>;
    /// Adds `bonus` to the reward of the most recent transition.
    fn reward_bonus(&mut self, bonus: f64);
    fn epsilon(&self) -> f64;
    fn reset_epsilon(&mut self);
}

fn policy_from(config: &NetworkConfig) -> PolicyState {
    PolicyState {
        epsilon: config.epsilon_initial,
        decay: config.epsilon_decay,
        epsilon_min: config.epsilon_min,
        discount: config.discount,
    }
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub net: QNetwork,
    pub replay: ReplayBuffer,
    pub policy: PolicyState,
    minibatch: usize,
    learning_rate: f64,
    epsilon_initial: f64,
    explore: SimRng,
    sampler: SimRng,
}

impl DqnAgent {
    pub fn new(config: &NetworkConfig, seed: u64) -> Result<Self> {
        let mut widths = vec![config.n_states];
        widths.extend(std::iter::repeat_n(config.hidden_width, config.hidden_depth));
        widths.push(config.n_actions);
        Ok(DqnAgent {
            net: QNetwork::xavier(&widths, &mut stream(seed, Purpose::AgentInit, 0))?,
            replay: ReplayBuffer::new(config.replay_capacity)?,
            policy: policy_from(config),
            minibatch: config.minibatch,
            learning_rate: config.learning_rate,
            epsilon_initial: config.epsilon_initial,
            explore: stream(seed, Purpose::Exploration, 0),
            sampler: stream(seed, Purpose::Replay, 0),
        })
    }
}

impl Agent for DqnAgent {
    fn act(&mut self, s: &State) -> Result<usize> {
        self.policy.decay_epsilon();
        select_action(&self.net, s, &self.policy, &mut self.explore)
    }

    fn learn(&mut self, e: Experience) -> Result<Option<f64>> {
        self.replay.push(e);
        if self.replay.len() < self.minibatch {
            return Ok(None);
        }
        let batch = self.replay.sample(self.minibatch, &mut self.sampler)?;
        let loss = self
            .net
            .sgd_step(&batch, self.policy.discount, self.learning_rate)?;
        Ok(Some(loss))
    }

    fn reward_bonus(&mut self, bonus: f64) {
        if let Some(e) = self.replay.last_mut() {
            e.r += bonus;
        }
    }

    fn epsilon(&self) -> f64 {
        self.policy.epsilon
    }

    fn reset_epsilon(&mut self) {
        self.policy.epsilon = self.epsilon_initial;
    }
}

#[derive(Debug, Clone)]
pub struct TabularAgent {
    pub table: QTable,
    pub policy: PolicyState,
    alpha: f64,
    epsilon_initial: f64,
    explore: SimRng,
    last: Option<(usize, usize)>,
}

impl TabularAgent {
    pub fn new(config: &NetworkConfig, seed: u64) -> Result<Self> {
        Ok(TabularAgent {
            table: QTable::new(config.n_states, config.tabular_bins, config.n_actions)?,
            policy: policy_from(config),
            alpha: config.tabular_alpha,
            epsilon_initial: config.epsilon_initial,
            explore: stream(seed, Purpose::Exploration, 0),
            last: None,
        })
    }
}

impl Agent for TabularAgent {
    fn act(&mut self, s: &State) -> Result<usize> {
        self.policy.decay_epsilon();
        let row = self.table.row(s)?;
        Ok(epsilon_greedy(
            self.table.values(row),
            self.policy.epsilon,
            &mut self.explore,
        ))
    }

    fn learn(&mut self, e: Experience) -> Result<Option<f64>> {
        let row = self.table.row(&e.s)?;
        let next = if e.terminal {
            None
        } else {
            Some(self.table.row(&e.s_next)?)
        };
        self.table
            .update(row, e.a, e.r, next, self.alpha, self.policy.discount);
        self.last = Some((row, e.a));
        Ok(None)
    }

    fn reward_bonus(&mut self, bonus: f64) {
        // the update target is affine in r
        if let Some((row, a)) = self.last {
            let v = self.table.get(row, a) + self.alpha * bonus;
            self.table.set(row, a, v);
        }
    }

    fn epsilon(&self) -> f64 {
        self.policy.epsilon
    }

    fn reset_epsilon(&mut self) {
        self.policy.epsilon = self.epsilon_initial;
    }
}
