//! Link-level quantities: received power, SINR, effective SINR, fixed power
//! allocation, power and beam commands, and sum-rate.

pub mod action;

pub use action::{
    decode_action, encode_action, pcode, reward, ActionRegister, JointCommand, N_ACTIONS,
};

use serde::{Deserialize, Serialize};

use crate::channel::{BeamCodebook, ChannelRealization, SteeringVector};
use crate::error::{Error, Result};

/// Index of BS ℓ in two-site experiments.
pub const BS_L: usize = 0;
/// Index of BS b in two-site experiments.
pub const BS_B: usize = 1;

/// Allowed agent power offsets, dB.
pub const POWER_STEPS_DB: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `P_tx · |h*f|²` in mW.
pub fn rx_power(p_tx_dbm: f64, h: &ChannelRealization, f: &SteeringVector) -> Result<f64> {
    Ok(db_to_linear(p_tx_dbm) * h.response(f)?.norm_sqr())
}

/// Powers, beams and channels of every link at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioState {
    pub powers_dbm: Vec<f64>,
    pub beams: Vec<usize>,
    /// `channels[ue][bs]`
    pub channels: Vec<Vec<ChannelRealization>>,
    /// Serving BS of each UE.
    pub serving: Vec<usize>,
    pub noise_mw: f64,
    pub bearer: u8,
}

impl RadioState {
    pub fn n_ues(&self) -> usize {
        self.channels.len()
    }

    pub fn sinr_db(&self, ue: usize, codebook: &BeamCodebook) -> f64 {
        link_sinr_db(
            self.serving[ue],
            &self.powers_dbm,
            &self.beams,
            &self.channels[ue],
            codebook,
            self.noise_mw,
        )
    }

    pub fn sinrs_db(&self, codebook: &BeamCodebook) -> Vec<f64> {
        (0..self.n_ues()).map(|u| self.sinr_db(u, codebook)).collect()
    }
}

/// SINR of `ue` served by `serving`, with every other BS interfering.
/// `links[bs]` is the channel from `bs` to this UE.
pub fn link_sinr_db(
    serving: usize,
    powers_dbm: &[f64],
    beams: &[usize],
    links: &[ChannelRealization],
    codebook: &BeamCodebook,
    noise_mw: f64,
) -> f64 {
    let mut signal = 0.0;
    let mut denom = noise_mw;
    for (bs, link) in links.iter().enumerate() {
        let f = codebook.beam(beams[bs] as i64);
        let p = db_to_linear(powers_dbm[bs]) * link.gain_unchecked(f).norm_sqr();
        if bs == serving {
            signal = p;
        } else {
            denom += p;
        }
    }
    linear_to_db(signal / denom)
}

/// SINR-dependent code rate for voice bearers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeRateMap {
    /// Ascending SINR lower bounds (dB) of the second and later levels.
    pub thresholds_db: Vec<f64>,
    /// One code rate per level, `thresholds_db.len() + 1` entries.
    pub rates: Vec<f64>,
}

impl Default for CodeRateMap {
    fn default() -> Self {
        CodeRateMap {
            thresholds_db: vec![0.0, 5.0],
            rates: vec![1.0 / 3.0, 0.5, 1.0],
        }
    }
}

impl CodeRateMap {
    pub fn validate(&self) -> Result<()> {
        if self.rates.len() != self.thresholds_db.len() + 1 {
            return Err(Error::Config(
                "code_rates must have one more entry than code_rate_thresholds_db".into(),
            ));
        }
        if self.thresholds_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("code_rate_thresholds_db must be ascending".into()));
        }
        if self.rates.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("code_rates must be non-decreasing".into()));
        }
        if self
            .rates
            .iter()
            .any(|&b| !(1.0 / 3.0 - 1e-12..=1.0).contains(&b))
        {
            return Err(Error::Config("code_rates must lie in [1/3, 1]".into()));
        }
        Ok(())
    }

    pub fn rate(&self, sinr_db: f64) -> f64 {
        let level = self.thresholds_db.iter().filter(|&&t| sinr_db >= t).count();
        self.rates[level]
    }
}

/// Voice (`q = 0`) adds the coding gain `10·log10(1/β)`; data bearers use
/// unity code gain.
pub fn effective_sinr(sinr_db: f64, q: u8, code_map: &CodeRateMap) -> f64 {
    if q == 1 {
        sinr_db
    } else {
        sinr_db - 10.0 * code_map.rate(sinr_db).log10()
    }
}

/// Fixed power allocation: total power split evenly over the PRBs.
pub fn fpa_power(max_power_dbm: f64, n_prb_total: usize, n_prb_ue: usize) -> Result<f64> {
    if n_prb_ue == 0 || n_prb_ue > n_prb_total {
        return Err(Error::invalid(
            "n_prb_ue",
            format!("must be in 1..={n_prb_total}, got {n_prb_ue}"),
        ));
    }
    Ok(max_power_dbm - 10.0 * (n_prb_total as f64).log10() + 10.0 * (n_prb_ue as f64).log10())
}

/// `min(P_max, P_prev + Δ)` with `Δ ∈ {±1, ±3}` dB.
pub fn apply_power_cmd(p_prev_dbm: f64, delta_db: f64, max_power_dbm: f64) -> Result<f64> {
    if !POWER_STEPS_DB.contains(&delta_db) {
        return Err(Error::invalid(
            "delta",
            format!("power offsets are ±1 or ±3 dB, got {delta_db}"),
        ));
    }
    Ok(max_power_dbm.min(p_prev_dbm + delta_db))
}

/// Circular codebook step.
pub fn step_beam(n: usize, direction: i8, antennas: usize) -> usize {
    (n as i64 + direction as i64).rem_euclid(antennas as i64) as usize
}

/// Average sum-rate capacity in bit/s/Hz over a per-step series of
/// effective SINRs (dB, one entry per UE).
pub fn sum_rate<S: AsRef<[f64]>>(series: &[S]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::invalid("series", "sum-rate needs at least one step"));
    }
    let total: f64 = series
        .iter()
        .map(|step| {
            step.as_ref()
                .iter()
                .map(|&g| (1.0 + db_to_linear(g)).log2())
                .sum::<f64>()
        })
        .sum();
    Ok(total / series.len() as f64)
}
