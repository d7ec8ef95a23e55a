//! The two-cell network an agent interacts with.
//!
//! Everything random about the network is fixed by the seed: the UE drop,
//! the initial beams, and per episode the mobility and the channel draw
//! (LOS state, shadowing, multipath) of every link. None of it depends on
//! the actions taken, so any two engines run with the same seed see the same
//! channels step for step.

use crate::agents::State;
use crate::channel::{build_codebook, draw_link, realize, BeamCodebook, ChannelRealization, LinkDraw, LinkParams};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::geometry::{build_layout, drop_ues, step_mobility, Layout, Point, Ue};
use crate::radio::{apply_power_cmd, db_to_linear, step_beam, JointCommand, RadioState, BS_B, BS_L};
use crate::rng::{stream, Purpose};

use rand::Rng;

/// Drop attempts before giving up on finding one UE per cell.
const MAX_DROP_ATTEMPTS: u64 = 10_000;

/// Positions and frozen channels of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeChannels {
    pub episode: usize,
    /// `T + 1` snapshots: the position at the start of every step and after
    /// the last one.
    pub positions: Vec<Vec<Point>>,
    /// `draws[ue][bs]`, held for the whole episode.
    pub draws: Vec<Vec<LinkDraw>>,
    /// `channels[t][ue][bs]`
    pub channels: Vec<Vec<Vec<ChannelRealization>>>,
}

impl EpisodeChannels {
    pub fn steps(&self) -> usize {
        self.channels.len()
    }
}

#[derive(Debug, Clone)]
pub struct Env {
    pub config: NetworkConfig,
    pub antennas: usize,
    pub seed: u64,
    pub layout: Layout,
    pub codebook: BeamCodebook,
    pub link_params: LinkParams,
    pub noise_mw: f64,
    pub initial_powers_dbm: Vec<f64>,
    pub initial_beams: Vec<usize>,
    pub powers_dbm: Vec<f64>,
    pub beams: Vec<usize>,
    ues: Vec<Ue>,
    next_episode: usize,
}

impl Env {
    pub fn new(config: &NetworkConfig, antennas: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = build_layout(&config.layout_spec(antennas))?;
        let codebook = build_codebook(antennas, config.d_over_lambda, config.beam_grid)?;
        let link_params = config.link_params();
        if config.ues_per_bs != 1 {
            return Err(Error::Config(
                "episodes serve one UE per base station".into(),
            ));
        }

        let ues = (0..MAX_DROP_ATTEMPTS)
            .map(|attempt| {
                drop_ues(
                    &layout,
                    config.ues_per_bs,
                    config.max_ues_per_bs,
                    config.ue_speed_kmh,
                    config.q(),
                    &mut stream(seed, Purpose::Drop, attempt),
                )
            })
            .find(|drop| match drop {
                Ok(ues) => ues
                    .iter()
                    .enumerate()
                    .all(|(i, ue)| ue.serving_bs == i / config.ues_per_bs),
                Err(_) => true,
            })
            .ok_or_else(|| Error::Config("no drop with one UE per cell was found".into()))??;

        let mut rng = stream(seed, Purpose::InitialBeams, 0);
        let initial_beams: Vec<usize> = (0..layout.sites.len())
            .map(|_| rng.random_range(0..antennas))
            .collect();
        let initial_powers_dbm = vec![config.initial_power_dbm(); layout.sites.len()];

        Ok(Env {
            config: config.clone(),
            antennas,
            seed,
            noise_mw: db_to_linear(config.noise_dbm()),
            codebook,
            link_params,
            powers_dbm: initial_powers_dbm.clone(),
            beams: initial_beams.clone(),
            initial_powers_dbm,
            initial_beams,
            layout,
            ues,
            next_episode: 0,
        })
    }

    pub fn ues(&self) -> &[Ue] {
        &self.ues
    }

    pub fn n_ues(&self) -> usize {
        self.ues.len()
    }

    pub fn serving(&self) -> Vec<usize> {
        self.ues.iter().map(|u| u.serving_bs).collect()
    }

    /// Index of the episode [`Env::next_channels`] produces next.
    pub fn next_episode(&self) -> usize {
        self.next_episode
    }

    /// Link draws of `episode`.
    pub fn draw_links(&self, episode: usize) -> Vec<Vec<LinkDraw>> {
        let mut rng = stream(self.seed, Purpose::Channel, episode as u64);
        self.ues
            .iter()
            .map(|_| {
                (0..self.layout.sites.len())
                    .map(|_| draw_link(&self.link_params, &mut rng))
                    .collect()
            })
            .collect()
    }

    pub fn frozen_channels(&self, draws: &[Vec<LinkDraw>], positions: &[Point]) -> Result<Vec<Vec<ChannelRealization>>> {
        positions
            .iter()
            .zip(draws)
            .map(|(pos, draws)| {
                self.layout
                    .sites
                    .iter()
                    .zip(draws)
                    .map(|(site, draw)| realize(draw, site, pos, &self.link_params))
                    .collect()
            })
            .collect()
    }

    /// Moves the UEs through the next episode and realizes the channel at
    /// the start of each of its `T` steps.
    pub fn next_channels(&mut self) -> Result<EpisodeChannels> {
        let episode = self.next_episode;
        let steps = self.config.frame_steps;
        let draws = self.draw_links(episode);
        let mut rng = stream(self.seed, Purpose::Mobility, episode as u64);
        let mut positions = Vec::with_capacity(steps + 1);
        let mut channels = Vec::with_capacity(steps);
        for t in 0..=steps {
            let now: Vec<Point> = self.ues.iter().map(|u| u.position).collect();
            if t < steps {
                channels.push(self.frozen_channels(&draws, &now)?);
                for ue in &mut self.ues {
                    *ue = step_mobility(ue, &self.layout, self.config.step_seconds, &mut rng);
                }
            }
            positions.push(now);
        }
        self.next_episode += 1;
        Ok(EpisodeChannels {
            episode,
            positions,
            draws,
            channels,
        })
    }

    /// Advances mobility until `episode` is the next one to be produced.
    pub fn skip_to(&mut self, episode: usize) -> Result<()> {
        while self.next_episode < episode {
            self.next_channels()?;
        }
        Ok(())
    }

    /// Normalized state: per UE its offset from the serving site over `r`,
    /// then `(P − P_max)/40` per BS, then `2(n + ½)/M − 1` per BS. Layout
    /// `(x_ℓ, y_ℓ, x_b, y_b, P_ℓ, P_b, n_ℓ, n_b)`.
    pub fn observe(&self, positions: &[Point]) -> State {
        let r = self.layout.cell_radius;
        let m = self.antennas as f64;
        let mut s = [0.0; 8];
        for (k, bs) in [BS_L, BS_B].into_iter().enumerate() {
            let site = self.layout.sites[bs].position;
            let ue = self.ues.iter().position(|u| u.serving_bs == bs).unwrap();
            s[2 * k] = (positions[ue].x - site.x) / r;
            s[2 * k + 1] = (positions[ue].y - site.y) / r;
            s[4 + k] = (self.powers_dbm[bs] - self.config.max_power_dbm) / 40.0;
            s[6 + k] = 2.0 * (self.beams[bs] as f64 + 0.5) / m - 1.0;
        }
        s
    }

    fn set_power(&mut self, bs: usize, delta_db: f64) -> Result<()> {
        let mut p = apply_power_cmd(self.powers_dbm[bs], delta_db, self.config.max_power_dbm)?;
        if let Some(floor) = self.config.power_floor() {
            p = p.max(floor);
        }
        self.powers_dbm[bs] = p;
        Ok(())
    }

    /// Applies a decoded action to both base stations.
    pub fn apply(&mut self, cmd: &JointCommand) -> Result<()> {
        self.set_power(BS_B, cmd.power_delta_b)?;
        self.set_power(BS_L, cmd.power_delta_l)?;
        if cmd.beam_step_l != 0 {
            self.beams[BS_L] = step_beam(self.beams[BS_L], cmd.beam_step_l, self.antennas);
        }
        if cmd.beam_step_b != 0 {
            self.beams[BS_B] = step_beam(self.beams[BS_B], cmd.beam_step_b, self.antennas);
        }
        Ok(())
    }

    pub fn radio_state(&self, channels: &[Vec<ChannelRealization>]) -> RadioState {
        RadioState {
            powers_dbm: self.powers_dbm.clone(),
            beams: self.beams.clone(),
            channels: channels.to_vec(),
            serving: self.serving(),
            noise_mw: self.noise_mw,
            bearer: self.config.q(),
        }
    }

    /// A dropped session is re-admitted at the initial power allocation;
    /// beams stay where they are.
    pub fn end_episode(&mut self, aborted: bool) {
        if aborted {
            self.powers_dbm = self.initial_powers_dbm.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Bearer, NetworkConfig};

    #[test]
    fn one_ue_per_cell_and_reproducible() {
        let c = NetworkConfig::defaults(Bearer::Data);
        let mut a = Env::new(&c, 8, 4).unwrap();
        let mut b = Env::new(&c, 8, 4).unwrap();
        assert_eq!(a.serving(), vec![0, 1]);
        assert_eq!(a.next_channels().unwrap(), b.next_channels().unwrap());
        assert_eq!(a.initial_beams, b.initial_beams);
    }

    #[test]
    fn drop_and_draws_do_not_depend_on_antennas() {
        let c = NetworkConfig::defaults(Bearer::Data);
        let mut a = Env::new(&c, 4, 9).unwrap();
        let mut b = Env::new(&c, 32, 9).unwrap();
        assert_eq!(a.ues(), b.ues());
        assert_eq!(a.next_channels().unwrap().draws, b.next_channels().unwrap().draws);
        assert_ne!(a.draw_links(0), a.draw_links(1));
    }

    #[test]
    fn observation_is_normalized() {
        let c = NetworkConfig::defaults(Bearer::Data);
        let mut env = Env::new(&c, 16, 2).unwrap();
        let ch = env.next_channels().unwrap();
        let s = env.observe(&ch.positions[0]);
        assert!(s.iter().all(|x| (-1.0..=1.0).contains(x)), "{s:?}");
        assert_eq!(s[4], 0.0);
        assert_eq!(s[5], 0.0);
    }

    #[test]
    fn skipping_matches_stepping() {
        let c = NetworkConfig::defaults(Bearer::Voice);
        let mut a = Env::new(&c, 1, 1).unwrap();
        let mut b = Env::new(&c, 1, 1).unwrap();
        for _ in 0..3 {
            a.next_channels().unwrap();
        }
        b.skip_to(3).unwrap();
        assert_eq!(a.next_channels().unwrap(), b.next_channels().unwrap());
    }
}
