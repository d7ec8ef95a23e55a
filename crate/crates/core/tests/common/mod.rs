//! Reference implementations written independently of the library, used as
//! oracles by the integration tests.

#![allow(dead_code)]

pub mod properties;

use std::f64::consts::PI;

use downlink_rl::channel::ChannelRealization;
use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Half-wavelength ULA response toward `theta`, normalized.
pub fn steering(theta: f64, m: usize) -> Vec<Complex64> {
    let s = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|k| Complex64::new(0.0, PI * k as f64 * theta.cos()).exp() * s)
        .collect()
}

/// Beam `n` of a centered `m`-beam grid over `[0, π]`.
pub fn beam(n: usize, m: usize) -> Vec<Complex64> {
    steering((n as f64 + 0.5) * PI / m as f64, m)
}

pub fn gain(h: &[Complex64], f: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..h.len() {
        acc += h[k] * f[k];
    }
    acc.norm_sqr()
}

/// SINR in dB of a UE served by `serving`, straight from the definition.
/// `h[bs]` is the channel vector from `bs`.
pub fn sinr_db(h: &[Vec<Complex64>], serving: usize, powers_dbm: &[f64], beams: &[usize], noise_mw: f64) -> f64 {
    let m = h[0].len();
    let mut signal = 0.0;
    let mut interference = 0.0;
    for bs in 0..h.len() {
        let p = 10f64.powf(powers_dbm[bs] / 10.0) * gain(&h[bs], &beam(beams[bs], m));
        if bs == serving {
            signal = p;
        } else {
            interference += p;
        }
    }
    10.0 * (signal / (interference + noise_mw)).log10()
}

/// Random complex channel of `m` entries with a random overall scale, so
/// that links differ by tens of dB.
pub fn random_h<R: Rng>(rng: &mut R, m: usize) -> Vec<Complex64> {
    let scale = 10f64.powf(rng.random_range(-6.0..-3.0));
    (0..m)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
        .collect()
}

pub fn realization(h: Vec<Complex64>) -> ChannelRealization {
    ChannelRealization {
        h,
        paths: Vec::new(),
        path_loss: 1.0,
        los: false,
        n_paths: 0,
    }
}

/// Two-BS exhaustive search written as four nested loops. Returns the
/// maximizing `(p0, n0, p1, n1)` indices and the objective `Σ_j γ_j` in dB;
/// the first maximum met in loop order wins.
pub fn nested_search(h: &[Vec<Vec<Complex64>>], grid: &[f64], m: usize, noise_mw: f64) -> ([usize; 4], f64) {
    let mut best = ([0; 4], f64::NEG_INFINITY);
    for p0 in 0..grid.len() {
        for n0 in 0..m {
            for p1 in 0..grid.len() {
                for n1 in 0..m {
                    let powers = [grid[p0], grid[p1]];
                    let beams = [n0, n1];
                    let v = sinr_db(&h[0], 0, &powers, &beams, noise_mw) + sinr_db(&h[1], 1, &powers, &beams, noise_mw);
                    if v > best.1 {
                        best = ([p0, n0, p1, n1], v);
                    }
                }
            }
        }
    }
    best
}

/// Optimal action values of a deterministic finite MDP by value iteration.
/// `next[s][a]` is `None` for terminal transitions.
pub fn value_iteration(reward: &[Vec<f64>], next: &[Vec<Option<usize>>], discount: f64) -> Vec<Vec<f64>> {
    let n = reward.len();
    let mut q = vec![vec![0.0; reward[0].len()]; n];
    for _ in 0..10_000 {
        let v: Vec<f64> = q.iter().map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).collect();
        let mut delta: f64 = 0.0;
        for s in 0..n {
            for a in 0..q[s].len() {
                let new = reward[s][a] + next[s][a].map_or(0.0, |t| discount * v[t]);
                delta = delta.max((new - q[s][a]).abs());
                q[s][a] = new;
            }
        }
        if delta < 1e-13 {
            break;
        }
    }
    q
}

/// Pearson χ² statistic of `counts` against equal expected frequencies.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let expected = n as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}

/// Upper `alpha` critical value of χ² with `dof` degrees of freedom.
pub fn chi_square_critical(dof: usize, alpha: f64) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(1.0 - alpha)
}
