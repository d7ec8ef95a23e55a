//! Experiment configuration.
//!
//! A config file is flat TOML. Every key is optional; omitted keys take the
//! default for the chosen `bearer`. Unknown keys are rejected by name.
//!
//! ```toml
//! bearer = "data"
//! antennas = [4, 8]
//! seeds = [1, 2, 3]
//! engines = ["dqn", "brute_force"]
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{noise_power_dbm, BeamGrid, LinkParams, PathLossModel};
use crate::error::{Error, Result};
use crate::geometry::{Band, LayoutSpec};
use crate::radio::{fpa_power, CodeRateMap, N_ACTIONS};

/// Antenna counts accepted in experiment configs.
pub const CONFIG_ANTENNAS: [usize; 6] = [1, 4, 8, 16, 32, 64];

/// Length of the state vector.
pub const N_STATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Fpa,
    Tabular,
    Dqn,
    BruteForce,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Fpa, Engine::Tabular, Engine::Dqn, Engine::BruteForce];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Fpa => "fpa",
            Engine::Tabular => "tabular",
            Engine::Dqn => "dqn",
            Engine::BruteForce => "brute_force",
        }
    }

    pub fn parse(s: &str) -> Option<Engine> {
        Engine::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bearer {
    /// Sub-6 GHz voice, `q = 0`.
    Voice,
    /// mmWave data, `q = 1`.
    Data,
}

impl Bearer {
    pub fn q(self) -> u8 {
        match self {
            Bearer::Voice => 0,
            Bearer::Data => 1,
        }
    }

    pub fn band(self) -> Band {
        match self {
            Bearer::Voice => Band::Sub6,
            Bearer::Data => Band::Mmwave,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub bearer: Bearer,
    pub engines: Vec<Engine>,
    pub antennas: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Episode cap per run.
    pub episodes: usize,
    /// Episode cap for the exhaustive-search engine.
    pub oracle_episodes: usize,
    pub stop_on_convergence: bool,
    pub workers: usize,

    pub discount: f64,
    pub epsilon_initial: f64,
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub reset_epsilon_per_episode: bool,
    pub n_states: usize,
    pub n_actions: usize,
    pub hidden_width: usize,
    pub hidden_depth: usize,
    pub minibatch: usize,
    pub learning_rate: f64,
    pub replay_capacity: usize,
    pub tabular_alpha: f64,
    pub tabular_bins: usize,
    pub reward_min: f64,
    pub reward_max: f64,

    pub n_bs: usize,
    pub max_power_dbm: f64,
    pub carrier_mhz: f64,
    pub cell_radius_m: f64,
    pub tx_antenna_gain_dbi: f64,
    pub ue_antenna_gain_dbi: f64,
    pub max_ues_per_bs: usize,
    pub ues_per_bs: usize,
    pub n_paths: usize,
    pub p_los: f64,
    pub ue_speed_kmh: f64,
    pub frame_steps: usize,
    pub step_seconds: f64,
    pub d_over_lambda: f64,
    pub beam_grid: BeamGrid,

    pub shadowing: bool,
    pub pl_exponent_los: f64,
    pub pl_exponent_nlos: f64,
    pub shadow_sigma_los_db: f64,
    pub shadow_sigma_nlos_db: f64,
    pub cost231_bs_height_m: f64,
    pub cost231_ue_height_m: f64,
    pub cost231_area_correction_db: f64,

    pub thermal_noise_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,

    pub code_rate_thresholds_db: Vec<f64>,
    pub code_rates: Vec<f64>,
    pub voice_codec_kbps: f64,
    pub voice_activity: f64,
    pub payload_bits: f64,
    pub backhaul_measurements_per_step: usize,

    pub n_prb_total: usize,
    pub n_prb_ue: usize,
    pub power_floor_enabled: bool,
    pub power_floor_dbm: f64,
    pub oracle_power_grid_dbm: Vec<f64>,

    pub sinr_target_voice_db: f64,
    pub sinr_min_db: f64,
    pub sinr0_data_db: f64,

    /// Write every step's channel vectors next to the trace.
    pub dump_channels: bool,
}

impl NetworkConfig {
    pub fn defaults(bearer: Bearer) -> Self {
        let voice = bearer == Bearer::Voice;
        let pick = |v: f64, d: f64| if voice { v } else { d };
        NetworkConfig {
            bearer,
            engines: if voice {
                vec![Engine::Fpa, Engine::Tabular, Engine::Dqn]
            } else {
                vec![Engine::Dqn, Engine::BruteForce]
            },
            antennas: if voice { vec![1] } else { vec![4, 8, 16, 32, 64] },
            seeds: vec![0],
            episodes: 2000,
            oracle_episodes: 1,
            stop_on_convergence: true,
            workers: 0,

            discount: 0.995,
            epsilon_initial: 1.0,
            epsilon_decay: 0.9995,
            epsilon_min: pick(0.15, 0.10),
            reset_epsilon_per_episode: false,
            n_states: N_STATES,
            n_actions: N_ACTIONS,
            hidden_width: 24,
            hidden_depth: 2,
            minibatch: 32,
            learning_rate: 0.01,
            replay_capacity: 10_000,
            tabular_alpha: 0.1,
            tabular_bins: 4,
            reward_min: -10.0,
            reward_max: 10.0,

            n_bs: 2,
            max_power_dbm: 46.0,
            carrier_mhz: pick(2100.0, 28_000.0),
            cell_radius_m: pick(350.0, 150.0),
            tx_antenna_gain_dbi: pick(11.0, 3.0),
            ue_antenna_gain_dbi: 0.0,
            max_ues_per_bs: 10,
            ues_per_bs: 1,
            n_paths: if voice { 15 } else { 4 },
            p_los: pick(0.9, 0.8),
            ue_speed_kmh: pick(5.0, 2.0),
            frame_steps: if voice { 20 } else { 10 },
            step_seconds: 1e-3,
            d_over_lambda: 0.5,
            beam_grid: BeamGrid::Centered,

            shadowing: true,
            pl_exponent_los: 2.0,
            pl_exponent_nlos: 3.0,
            shadow_sigma_los_db: pick(8.0, 4.0),
            shadow_sigma_nlos_db: 8.0,
            cost231_bs_height_m: 30.0,
            cost231_ue_height_m: 1.5,
            cost231_area_correction_db: 3.0,

            thermal_noise_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            bandwidth_hz: pick(180e3, 100e6),

            code_rate_thresholds_db: CodeRateMap::default().thresholds_db,
            code_rates: CodeRateMap::default().rates,
            voice_codec_kbps: 23.85,
            voice_activity: 0.8,
            payload_bits: pick(23.85 * 20.0, 1e6),
            backhaul_measurements_per_step: 1,

            n_prb_total: 100,
            n_prb_ue: 100,
            power_floor_enabled: true,
            power_floor_dbm: 0.0,
            oracle_power_grid_dbm: vec![40.0, 42.0, 44.0, 46.0],

            sinr_target_voice_db: 3.0,
            sinr_min_db: -3.0,
            sinr0_data_db: 5.0,

            dump_channels: false,
        }
    }

    /// Parses TOML text, filling omitted keys from the bearer defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        let bearer = match user.get("bearer") {
            None => Bearer::Data,
            Some(v) => v
                .clone()
                .try_into()
                .map_err(|_| Error::Config(format!("invalid value for `bearer`: {v}")))?,
        };
        let defaults = NetworkConfig::defaults(bearer);
        let mut merged = toml::Table::try_from(&defaults)
            .map_err(|e| Error::Config(format!("cannot serialize defaults: {e}")))?;
        for (key, value) in user {
            if !merged.contains_key(&key) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
            let mut probe = merged.clone();
            probe.insert(key.clone(), value.clone());
            if let Err(e) = NetworkConfig::deserialize(probe) {
                return Err(Error::Config(format!("invalid value for `{key}`: {}", e.message())));
            }
            merged.insert(key, value);
        }
        let config = NetworkConfig::deserialize(merged)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, why: String| Err(Error::Config(format!("invalid value for `{key}`: {why}")));

        if self.n_states != N_STATES {
            return fail("n_states", format!("the state vector has {N_STATES} entries"));
        }
        if self.n_actions != N_ACTIONS {
            return fail("n_actions", format!("the action register has {N_ACTIONS} values"));
        }
        if self.hidden_depth != 2 {
            return fail("hidden_depth", "the Q-network has two hidden layers".into());
        }
        let width_sq = (self.n_actions + 2) * self.minibatch;
        if self.hidden_width * self.hidden_width != width_sq {
            return fail(
                "hidden_width",
                format!(
                    "H = sqrt((|A| + 2) * minibatch) = sqrt({width_sq}) does not equal {}",
                    self.hidden_width
                ),
            );
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return fail("discount", format!("must lie in (0, 1), got {}", self.discount));
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return fail("epsilon_decay", format!("must lie in (0, 1], got {}", self.epsilon_decay));
        }
        if !(self.epsilon_min > 0.0 && self.epsilon_min <= self.epsilon_initial && self.epsilon_initial <= 1.0) {
            return fail("epsilon_min", "need 0 < epsilon_min <= epsilon_initial <= 1".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate", format!("must be finite and non-negative, got {}", self.learning_rate));
        }
        if self.replay_capacity < self.minibatch {
            return fail("replay_capacity", "must hold at least one minibatch".into());
        }
        if !(self.tabular_alpha > 0.0 && self.tabular_alpha <= 1.0) {
            return fail("tabular_alpha", format!("must lie in (0, 1], got {}", self.tabular_alpha));
        }
        if self.tabular_bins < 1 {
            return fail("tabular_bins", "must be at least 1".into());
        }
        if self.n_bs != 2 {
            return fail("n_bs", "experiments run with two base stations".into());
        }
        if !(self.cell_radius_m > 0.0) {
            return fail("cell_radius_m", format!("must be positive, got {}", self.cell_radius_m));
        }
        if self.ues_per_bs == 0 || self.ues_per_bs > self.max_ues_per_bs {
            return fail("ues_per_bs", format!("must be in 1..={}", self.max_ues_per_bs));
        }
        if !(0.0..=1.0).contains(&self.p_los) {
            return fail("p_los", format!("must be a probability, got {}", self.p_los));
        }
        if self.n_paths == 0 {
            return fail("n_paths", "must be at least 1".into());
        }
        if self.antennas.is_empty() {
            return fail("antennas", "at least one antenna count is required".into());
        }
        for &m in &self.antennas {
            if !CONFIG_ANTENNAS.contains(&m) {
                return fail("antennas", format!("{m} is not one of {CONFIG_ANTENNAS:?}"));
            }
            if self.bearer == Bearer::Voice && m != 1 {
                return fail("antennas", "voice bearers use a single antenna".into());
            }
        }
        if self.oracle_episodes == 0 {
            return fail("oracle_episodes", "must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds", "at least one seed is required".into());
        }
        if self.engines.is_empty() {
            return fail("engines", "at least one engine is required".into());
        }
        if self.oracle_power_grid_dbm.is_empty() {
            return fail("oracle_power_grid_dbm", "the grid is empty".into());
        }
        if self.oracle_power_grid_dbm.iter().any(|&p| p > self.max_power_dbm) {
            return fail("oracle_power_grid_dbm", "levels may not exceed max_power_dbm".into());
        }
        if let Err(e) = fpa_power(self.max_power_dbm, self.n_prb_total, self.n_prb_ue) {
            return fail("n_prb_ue", e.to_string());
        }
        if let Err(Error::Config(why)) = self.code_rate_map().validate() {
            return fail("code_rates", why);
        }
        if !(0.0..=1.0).contains(&self.voice_activity) {
            return fail("voice_activity", "must lie in [0, 1]".into());
        }
        if !(self.d_over_lambda > 0.0) {
            return fail("d_over_lambda", "must be positive".into());
        }
        Ok(())
    }

    pub fn q(&self) -> u8 {
        self.bearer.q()
    }

    pub fn code_rate_map(&self) -> CodeRateMap {
        CodeRateMap {
            thresholds_db: self.code_rate_thresholds_db.clone(),
            rates: self.code_rates.clone(),
        }
    }

    /// Target effective SINR: fixed for voice, `γ₀ + 10·log10 M` for data.
    pub fn sinr_target_db(&self, antennas: usize) -> f64 {
        match self.bearer {
            Bearer::Voice => self.sinr_target_voice_db,
            Bearer::Data => self.sinr0_data_db + 10.0 * (antennas as f64).log10(),
        }
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.thermal_noise_dbm_hz, self.bandwidth_hz, self.noise_figure_db)
    }

    pub fn initial_power_dbm(&self) -> f64 {
        fpa_power(self.max_power_dbm, self.n_prb_total, self.n_prb_ue).expect("validated")
    }

    pub fn power_floor(&self) -> Option<f64> {
        self.power_floor_enabled.then_some(self.power_floor_dbm)
    }

    pub fn path_loss_model(&self) -> PathLossModel {
        match self.bearer {
            Bearer::Voice => PathLossModel::Cost231 {
                carrier_mhz: self.carrier_mhz,
                bs_height_m: self.cost231_bs_height_m,
                ue_height_m: self.cost231_ue_height_m,
                area_correction_db: self.cost231_area_correction_db,
                shadow_sigma_db: self.shadow_sigma_los_db,
            },
            Bearer::Data => PathLossModel::CloseIn {
                carrier_mhz: self.carrier_mhz,
                exponent_los: self.pl_exponent_los,
                exponent_nlos: self.pl_exponent_nlos,
                shadow_sigma_los_db: self.shadow_sigma_los_db,
                shadow_sigma_nlos_db: self.shadow_sigma_nlos_db,
            },
        }
    }

    pub fn link_params(&self) -> LinkParams {
        LinkParams {
            model: self.path_loss_model(),
            p_los: self.p_los,
            nlos_paths: self.n_paths,
            d_over_lambda: self.d_over_lambda,
            antenna_gain_db: self.tx_antenna_gain_dbi + self.ue_antenna_gain_dbi,
            shadowing: self.shadowing,
        }
    }

    pub fn layout_spec(&self, antennas: usize) -> LayoutSpec {
        LayoutSpec {
            n_sites: self.n_bs,
            cell_radius: self.cell_radius_m,
            band: self.bearer.band(),
            antennas,
            max_power_dbm: self.max_power_dbm,
        }
    }

    /// First 16 hex digits of the SHA-256 of the resolved config. The run
    /// matrix (engines, antennas, seeds) and the worker count are left out:
    /// every output row names its own engine, M and seed, and filtering the
    /// matrix on the command line must not change the hash of a run.
    pub fn hash(&self) -> String {
        let mut key = self.clone();
        key.engines.clear();
        key.antennas.clear();
        key.seeds.clear();
        key.workers = 0;
        let digest = Sha256::digest(key.to_toml_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<NetworkConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    NetworkConfig::from_toml_str(&text)
}
