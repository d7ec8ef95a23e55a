//! Exhaustive search over every joint (power, beam) assignment of all base
//! stations. This is the performance ceiling the agents are measured
//! against and the reference for run-time comparisons.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::channel::BeamCodebook;
use crate::error::{Error, Result};
use crate::radio::{effective_sinr, link_sinr_db, CodeRateMap, RadioState};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Absolute transmit power levels, dBm.
    pub power_grid_dbm: Vec<f64>,
    pub codebook: BeamCodebook,
    pub n_bs: usize,
}

impl SearchSpace {
    pub fn new(power_grid_dbm: Vec<f64>, codebook: BeamCodebook, n_bs: usize, max_power_dbm: f64) -> Result<Self> {
        if power_grid_dbm.is_empty() {
            return Err(Error::invalid("power_grid_dbm", "the power grid is empty"));
        }
        if let Some(p) = power_grid_dbm.iter().find(|&&p| !(p <= max_power_dbm)) {
            return Err(Error::invalid(
                "power_grid_dbm",
                format!("level {p} dBm exceeds the {max_power_dbm} dBm limit"),
            ));
        }
        if n_bs == 0 {
            return Err(Error::invalid("n_bs", "need at least one base station"));
        }
        Ok(SearchSpace {
            power_grid_dbm,
            codebook,
            n_bs,
        })
    }

    /// Choices per base station, `|P|·M`.
    pub fn per_bs(&self) -> usize {
        self.power_grid_dbm.len() * self.codebook.size()
    }

    /// `(|P|·M)^L`
    pub fn size(&self) -> u64 {
        (self.per_bs() as u64).pow(self.n_bs as u32)
    }

    /// Assignment number `k` in lexicographic order of
    /// `(p_0, n_0, p_1, n_1, …)` (grid and codebook indices).
    pub fn decode(&self, mut k: u64, powers: &mut [f64], beams: &mut [usize]) {
        let per = self.per_bs() as u64;
        let m = self.codebook.size();
        for bs in (0..self.n_bs).rev() {
            let digit = (k % per) as usize;
            k /= per;
            powers[bs] = self.power_grid_dbm[digit / m];
            beams[bs] = digit % m;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub powers_dbm: Vec<f64>,
    pub beams: Vec<usize>,
    /// `Σ_j γ_eff^j` in dB at the maximizer.
    pub objective: f64,
    pub sinr_db: Vec<f64>,
    pub sinr_eff_db: Vec<f64>,
    /// Every UE meets the target at the maximizer.
    pub feasible: bool,
    pub candidates: u64,
    /// Lexicographic rank of the maximizer.
    pub rank: u64,
}

fn check_dims(state: &RadioState, space: &SearchSpace) -> Result<()> {
    for links in &state.channels {
        if links.len() != space.n_bs {
            return Err(Error::Dimension {
                expected: space.n_bs,
                got: links.len(),
            });
        }
        for h in links {
            if h.h.len() != space.codebook.antennas() {
                return Err(Error::Dimension {
                    expected: space.codebook.antennas(),
                    got: h.h.len(),
                });
            }
        }
    }
    Ok(())
}

fn objective(state: &RadioState, powers: &[f64], beams: &[usize], codebook: &BeamCodebook, code_map: &CodeRateMap) -> f64 {
    state
        .channels
        .iter()
        .zip(&state.serving)
        .map(|(links, &serving)| {
            let g = link_sinr_db(serving, powers, beams, links, codebook, state.noise_mw);
            effective_sinr(g, state.bearer, code_map)
        })
        .sum()
}

/// Best `(objective, rank)` over ranks `range`; ties keep the lower rank.
fn sweep(state: &RadioState, space: &SearchSpace, code_map: &CodeRateMap, range: std::ops::Range<u64>) -> (f64, u64) {
    let mut powers = vec![0.0; space.n_bs];
    let mut beams = vec![0; space.n_bs];
    let mut best = (f64::NEG_INFINITY, range.start);
    for k in range {
        space.decode(k, &mut powers, &mut beams);
        let v = objective(state, &powers, &beams, &space.codebook, code_map);
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

fn finish(state: &RadioState, space: &SearchSpace, code_map: &CodeRateMap, target_db: f64, rank: u64) -> OracleResult {
    let mut powers = vec![0.0; space.n_bs];
    let mut beams = vec![0; space.n_bs];
    space.decode(rank, &mut powers, &mut beams);
    let mut probe = state.clone();
    probe.powers_dbm = powers.clone();
    probe.beams = beams.clone();
    let sinr_db = probe.sinrs_db(&space.codebook);
    let sinr_eff_db: Vec<f64> = sinr_db
        .iter()
        .map(|&g| effective_sinr(g, state.bearer, code_map))
        .collect();
    OracleResult {
        objective: objective(state, &powers, &beams, &space.codebook, code_map),
        feasible: sinr_eff_db.iter().all(|&g| g >= target_db),
        powers_dbm: powers,
        beams,
        sinr_db,
        sinr_eff_db,
        candidates: space.size(),
        rank,
    }
}

/// Maximizes `Σ_j γ_eff^j` over every joint assignment for the frozen
/// channels in `state` (its powers and beams are ignored). Ties go to the
/// lexicographically smallest assignment.
pub fn brute_force(state: &RadioState, space: &SearchSpace, code_map: &CodeRateMap, target_db: f64) -> Result<OracleResult> {
    check_dims(state, space)?;
    let (_, rank) = sweep(state, space, code_map, 0..space.size());
    Ok(finish(state, space, code_map, target_db, rank))
}

/// [`brute_force`] with the candidate range split over `chunks` rayon
/// tasks. The reduction keeps the lowest rank among equal objectives, so the
/// result does not depend on the split.
pub fn brute_force_parallel(
    state: &RadioState,
    space: &SearchSpace,
    code_map: &CodeRateMap,
    target_db: f64,
    chunks: usize,
) -> Result<OracleResult> {
    check_dims(state, space)?;
    let n = space.size();
    let chunks = (chunks.max(1) as u64).min(n);
    let step = n.div_ceil(chunks);
    let (_, rank) = (0..chunks)
        .into_par_iter()
        .map(|c| sweep(state, space, code_map, c * step..((c + 1) * step).min(n)))
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(finish(state, space, code_map, target_db, rank.min(n - 1)))
}

#[derive(Debug, Clone)]
pub struct PerStepOracle {
    pub results: Vec<OracleResult>,
    /// Compute time of the sweeps only.
    pub wall_time: Duration,
}

/// Runs [`brute_force`] on every step's frozen channels.
pub fn brute_force_per_step(
    steps: &[RadioState],
    space: &SearchSpace,
    code_map: &CodeRateMap,
    target_db: f64,
) -> Result<PerStepOracle> {
    let start = Instant::now();
    let results = steps
        .iter()
        .map(|s| brute_force(s, space, code_map, target_db))
        .collect::<Result<Vec<_>>>()?;
    Ok(PerStepOracle {
        results,
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_codebook, BeamGrid, ChannelRealization, Path};
    use num_complex::Complex64;

    fn link(aod: f64, m: usize, rho: f64) -> ChannelRealization {
        ChannelRealization::from_paths(
            vec![Path {
                gain: Complex64::new(1.0, 0.0),
                aod,
            }],
            rho,
            true,
            m,
            0.5,
        )
        .unwrap()
    }

    fn two_ue_state(m: usize, aods: [[f64; 2]; 2], rhos: [[f64; 2]; 2]) -> RadioState {
        RadioState {
            powers_dbm: vec![0.0; 2],
            beams: vec![0; 2],
            channels: (0..2)
                .map(|u| (0..2).map(|b| link(aods[u][b], m, rhos[u][b])).collect())
                .collect(),
            serving: vec![0, 1],
            noise_mw: 1e-9,
            bearer: 1,
        }
    }

    #[test]
    fn singleton_space() {
        let cb = build_codebook(1, 0.5, BeamGrid::Centered).unwrap();
        let space = SearchSpace::new(vec![46.0], cb, 2, 46.0).unwrap();
        let state = two_ue_state(1, [[1.0, 2.0], [0.5, 1.5]], [[1e5, 1e6], [1e6, 1e5]]);
        let r = brute_force(&state, &space, &CodeRateMap::default(), 0.0).unwrap();
        assert_eq!(r.candidates, 1);
        assert_eq!(r.powers_dbm, vec![46.0, 46.0]);
        assert_eq!(r.beams, vec![0, 0]);
    }

    #[test]
    fn empty_or_excessive_grid_rejected() {
        let cb = build_codebook(4, 0.5, BeamGrid::Centered).unwrap();
        assert!(SearchSpace::new(vec![], cb.clone(), 2, 46.0).is_err());
        assert!(SearchSpace::new(vec![47.0], cb, 2, 46.0).is_err());
    }

    #[test]
    fn candidate_count() {
        let cb = build_codebook(8, 0.5, BeamGrid::Centered).unwrap();
        let space = SearchSpace::new(vec![40.0, 42.0, 44.0, 46.0], cb, 2, 46.0).unwrap();
        assert_eq!(space.size(), 1024);
    }

    #[test]
    fn matched_beams_without_interference() {
        let m = 4;
        let cb = build_codebook(m, 0.5, BeamGrid::Centered).unwrap();
        let space = SearchSpace::new(vec![40.0, 46.0], cb.clone(), 2, 46.0).unwrap();
        let aods = [[0.4, 2.0], [1.1, 2.7]];
        // cross links attenuated by 200 dB
        let state = two_ue_state(m, aods, [[1e4, 1e14], [1e14, 1e4]]);
        let r = brute_force(&state, &space, &CodeRateMap::default(), 0.0).unwrap();
        assert_eq!(r.beams[0], cb.nearest(aods[0][0]));
        assert_eq!(r.beams[1], cb.nearest(aods[1][1]));
        assert_eq!(r.powers_dbm, vec![46.0, 46.0]);
    }

    #[test]
    fn parallel_split_does_not_change_result() {
        let cb = build_codebook(8, 0.5, BeamGrid::Centered).unwrap();
        let space = SearchSpace::new(vec![40.0, 42.0, 44.0, 46.0], cb, 2, 46.0).unwrap();
        let state = two_ue_state(8, [[0.3, 1.9], [1.2, 2.2]], [[1e5, 3e5], [2e5, 1e5]]);
        let map = CodeRateMap::default();
        let serial = brute_force(&state, &space, &map, 0.0).unwrap();
        for chunks in [1, 3, 7, 64, 5000] {
            assert_eq!(brute_force_parallel(&state, &space, &map, 0.0, chunks).unwrap(), serial);
        }
    }

    #[test]
    fn frozen_steps_give_identical_optima() {
        let cb = build_codebook(4, 0.5, BeamGrid::Centered).unwrap();
        let space = SearchSpace::new(vec![40.0, 46.0], cb, 2, 46.0).unwrap();
        let state = two_ue_state(4, [[0.3, 1.9], [1.2, 2.2]], [[1e5, 3e5], [2e5, 1e5]]);
        let map = CodeRateMap::default();
        let single = brute_force(&state, &space, &map, 0.0).unwrap();
        let per = brute_force_per_step(&vec![state; 5], &space, &map, 0.0).unwrap();
        assert!(per.results.iter().all(|r| *r == single));
    }
}
