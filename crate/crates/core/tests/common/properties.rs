//! The numerical property suite. Each check returns `Err` with a
//! description of the first violation; randomized checks use a fixed-seed
//! runner so a failure reproduces.

use std::f64::consts::PI;

use downlink_rl::agents::{argmax, Experience, QNetwork, QTable};
use downlink_rl::channel::{build_codebook, steering_vector, BeamGrid, ChannelRealization, Path, SUPPORTED_ANTENNAS};
use downlink_rl::oracle::{brute_force, SearchSpace};
use downlink_rl::radio::{
    apply_power_cmd, decode_action, encode_action, reward, ActionRegister, CodeRateMap, RadioState, N_ACTIONS,
};
use downlink_rl::rng::{stream, Purpose};
use downlink_rl::sim::{ccdf, uniform_grid};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::Rng;

pub type Check = Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn antennas() -> impl Strategy<Value = usize> {
    prop::sample::select(SUPPORTED_ANTENNAS.to_vec())
}

pub fn steering_unit_norm() -> Check {
    runner(10_000)
        .run(&(-10.0..10.0f64, antennas(), 0.05..2.0f64), |(theta, m, d)| {
            let a = steering_vector(theta, m, d).unwrap();
            prop_assert!((a.norm() - 1.0).abs() <= 1e-12, "‖a‖ = {} at θ={theta}, M={m}", a.norm());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Normalized worst-case gain of the best centered beam: a UE at broadside
/// sits half a bin from the two nearest beams, `sin(π/2M)` apart in
/// `cos θ`, and sees the Fejér kernel at that offset.
fn worst_case_gain(m: usize) -> f64 {
    if m == 1 {
        return 1.0;
    }
    let u = PI * (PI / (2.0 * m as f64)).sin();
    let num = (m as f64 * u / 2.0).sin();
    let den = m as f64 * (u / 2.0).sin();
    (num / den).powi(2)
}

/// `|h·f|² ≤ ‖h‖²` for every beam, and for a single LOS path the best beam
/// keeps at least the worst-case fraction of `M/ρ²`.
pub fn beamforming_gain_bounds() -> Check {
    runner(2_000)
        .run(&(0.0..PI, antennas(), 0.5..100.0f64, 0.0..2.0 * PI), |(aod, m, rho, phase)| {
            let cb = build_codebook(m, 0.5, BeamGrid::Centered).unwrap();
            let h = ChannelRealization::from_paths(
                vec![Path {
                    gain: Complex64::from_polar(1.0, phase),
                    aod,
                }],
                rho,
                true,
                m,
                0.5,
            )
            .unwrap();
            let full = m as f64 / (rho * rho);
            prop_assert!((h.norm_sqr() - full).abs() <= 1e-9 * full);
            let mut best: f64 = 0.0;
            for n in 0..m {
                let g = h.response(cb.beam(n as i64)).unwrap().norm_sqr();
                prop_assert!(g <= h.norm_sqr() * (1.0 + 1e-12));
                best = best.max(g);
            }
            prop_assert!(
                best >= worst_case_gain(m) * full * (1.0 - 1e-9),
                "best beam keeps {} of M/ρ² at θ={aod}, M={m}",
                best / full
            );
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn random_state<R: Rng>(rng: &mut R, m: usize) -> RadioState {
    RadioState {
        powers_dbm: (0..2).map(|_| rng.random_range(0.0..46.0)).collect(),
        beams: (0..2).map(|_| rng.random_range(0..m)).collect(),
        channels: (0..2)
            .map(|_| (0..2).map(|_| super::realization(super::random_h(rng, m))).collect())
            .collect(),
        serving: vec![0, 1],
        noise_mw: 10f64.powf(rng.random_range(-12.0..-6.0)),
        bearer: 1,
    }
}

/// On 10³ random states, raising the serving power never lowers the SINR
/// and raising the interferer's never raises it. The library SINR also
/// agrees with the direct formula.
pub fn sinr_monotonicity() -> Check {
    let mut rng = stream(11, Purpose::Channel, 0);
    for i in 0..1_000 {
        let m = [1, 2, 4, 8, 16][i % 5];
        let cb = build_codebook(m, 0.5, BeamGrid::Centered).unwrap();
        let state = random_state(&mut rng, m);
        let base = state.sinr_db(0, &cb);

        let h: Vec<Vec<Complex64>> = state.channels[0].iter().map(|c| c.h.clone()).collect();
        let direct = super::sinr_db(&h, 0, &state.powers_dbm, &state.beams, state.noise_mw);
        if (base - direct).abs() > 1e-9 {
            return Err(format!("state {i}: SINR {base} vs direct {direct}"));
        }

        let step = rng.random_range(0.01..10.0);
        let mut up = state.clone();
        up.powers_dbm[0] += step;
        if up.sinr_db(0, &cb) < base {
            return Err(format!("state {i}: more serving power lowered the SINR"));
        }
        let mut jam = state.clone();
        jam.powers_dbm[1] += step;
        if jam.sinr_db(0, &cb) > base {
            return Err(format!("state {i}: more interference raised the SINR"));
        }
    }
    Ok(())
}

pub fn action_round_trip() -> Check {
    for q in [0u8, 1] {
        for v in 0..N_ACTIONS {
            let a = ActionRegister::from_index(v);
            let back = encode_action(&decode_action(a, q), q).map_err(|e| e.to_string())?;
            if back != a {
                return Err(format!("q={q}: {v:04b} came back as {:04b}", back.value()));
            }
        }
    }
    Ok(())
}

/// 10⁵ random command sequences from random starting powers never exceed
/// the maximum power.
pub fn power_clamp() -> Check {
    let p_max = 46.0;
    let mut rng = stream(12, Purpose::Exploration, 0);
    for i in 0..100_000 {
        let q = (i % 2) as u8;
        let mut p = [rng.random_range(0.0..=p_max), rng.random_range(0.0..=p_max)];
        for _ in 0..20 {
            let cmd = decode_action(ActionRegister::from_index(rng.random_range(0..N_ACTIONS)), q);
            p[0] = apply_power_cmd(p[0], cmd.power_delta_b, p_max).map_err(|e| e.to_string())?;
            p[1] = apply_power_cmd(p[1], cmd.power_delta_l, p_max).map_err(|e| e.to_string())?;
            if p.iter().any(|&x| x > p_max) {
                return Err(format!("sequence {i}: power {p:?} above {p_max}"));
            }
        }
    }
    Ok(())
}

pub fn ccdf_monotone() -> Check {
    runner(2_000)
        .run(&prop::collection::vec(-60.0..60.0f64, 1..300), |samples| {
            let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let curve = ccdf(&samples, &uniform_grid(lo - 1.0, hi + 1.0, 0.25));
            for w in curve.windows(2) {
                prop_assert!(w[1].1 <= w[0].1, "CCDF rises between {} and {}", w[0].0, w[1].0);
            }
            prop_assert!(curve.iter().all(|&(_, p)| (0.0..=1.0).contains(&p)));
            let n = samples.len() as f64;
            let at_min = ccdf(&samples, &[lo])[0].1;
            let ties = samples.iter().filter(|&&x| x == lo).count() as f64;
            prop_assert!((at_min - (1.0 - ties / n)).abs() < 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn reward_spot_values() -> Check {
    // bits written a[0] a[1] a[2] a[3]
    let r1 = reward(ActionRegister::new(0b0011).unwrap(), 0.0, 0.0, 0);
    let r2 = reward(ActionRegister::new(0b1010).unwrap(), 0.0, 0.0, 0);
    if r1 != 6.0 || r2 != 0.0 {
        return Err(format!("r(11/00) = {r1}, r(01/01) = {r2}"));
    }
    Ok(())
}

pub fn argmax_picks_first_maximum() -> Check {
    runner(5_000)
        .run(&prop::collection::vec(-3i32..3, 1..20), |v| {
            let q: Vec<f64> = v.iter().map(|&x| x as f64).collect();
            let i = argmax(&q);
            let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(q[i], max);
            prop_assert!(q[..i].iter().all(|&x| x < max));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Central finite differences of the minibatch loss against the analytic
/// gradient, on every parameter of randomly initialized networks.
pub fn backprop_matches_finite_differences() -> Check {
    let h = 1e-6;
    for seed in 0..5u64 {
        let mut rng = stream(seed, Purpose::AgentInit, 99);
        let mut net = QNetwork::xavier(&[8, 24, 24, 16], &mut rng).unwrap();
        for p in net.params_mut() {
            *p += rng.random_range(-0.5..0.5);
        }
        let batch: Vec<Experience> = (0..4)
            .map(|_| Experience {
                s: std::array::from_fn(|_| rng.random_range(-1.0..1.0)),
                a: rng.random_range(0..16),
                r: 0.0,
                s_next: [0.0; 8],
                terminal: true,
            })
            .collect();
        let refs: Vec<&Experience> = batch.iter().collect();
        let targets: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, grad) = net.loss_and_grad(&refs, &targets).unwrap();
        for i in 0..grad.len() {
            let orig = net.params()[i];
            net.params_mut()[i] = orig + h;
            let plus = net.loss_and_grad(&refs, &targets).unwrap().0;
            net.params_mut()[i] = orig - h;
            let minus = net.loss_and_grad(&refs, &targets).unwrap().0;
            net.params_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let scale = grad[i].abs().max(numeric.abs()).max(1e-6);
            if (grad[i] - numeric).abs() > 1e-4 * scale {
                return Err(format!("seed {seed}, parameter {i}: analytic {} vs numeric {numeric}", grad[i]));
            }
        }
    }
    Ok(())
}

/// Tabular Q-learning on a small deterministic MDP settles on the value
/// iteration fixed point.
pub fn tabular_fixed_point() -> Check {
    // Chain of four states; action 1 moves right, action 0 stays. Moving
    // out of state 3 ends the episode with reward 10.
    let reward = vec![vec![-1.0, 0.0], vec![0.5, -0.5], vec![0.0, 1.0], vec![-2.0, 10.0]];
    let next = vec![
        vec![Some(0), Some(1)],
        vec![Some(1), Some(2)],
        vec![Some(2), Some(3)],
        vec![Some(3), None],
    ];
    let discount = 0.9;
    let expected = super::value_iteration(&reward, &next, discount);

    let mut table = QTable::with_rows(4, 2);
    let mut rng = stream(13, Purpose::Exploration, 0);
    for _ in 0..200_000 {
        let s = rng.random_range(0..4);
        let a = rng.random_range(0..2);
        table.update(s, a, reward[s][a], next[s][a], 0.1, discount);
    }
    for s in 0..4 {
        for a in 0..2 {
            let got = table.get(s, a);
            if (got - expected[s][a]).abs() > 1e-3 {
                return Err(format!("Q({s},{a}) = {got}, value iteration gives {}", expected[s][a]));
            }
        }
    }
    Ok(())
}

/// The exhaustive search against the nested-loop enumerator on `draws`
/// random frozen channels per antenna count, with a two-level power grid.
pub fn oracle_matches_enumerator(draws: usize) -> Check {
    let grid = vec![40.0, 46.0];
    let code_map = CodeRateMap::default();
    let mut rng = stream(14, Purpose::Channel, 0);
    for m in [2usize, 4] {
        let cb = build_codebook(m, 0.5, BeamGrid::Centered).unwrap();
        let space = SearchSpace::new(grid.clone(), cb, 2, 46.0).map_err(|e| e.to_string())?;
        for d in 0..draws {
            let noise = 10f64.powf(rng.random_range(-12.0..-6.0));
            let h: Vec<Vec<Vec<Complex64>>> = (0..2)
                .map(|_| (0..2).map(|_| super::random_h(&mut rng, m)).collect())
                .collect();
            let state = RadioState {
                powers_dbm: vec![0.0; 2],
                beams: vec![0; 2],
                channels: h
                    .iter()
                    .map(|links| links.iter().map(|l| super::realization(l.clone())).collect())
                    .collect(),
                serving: vec![0, 1],
                noise_mw: noise,
                bearer: 1,
            };
            let got = brute_force(&state, &space, &code_map, 0.0).map_err(|e| e.to_string())?;
            let (idx, objective) = super::nested_search(&h, &grid, m, noise);
            let want_powers = vec![grid[idx[0]], grid[idx[2]]];
            let want_beams = vec![idx[1], idx[3]];
            if got.powers_dbm != want_powers || got.beams != want_beams {
                return Err(format!(
                    "M={m}, draw {d}: search chose {:?}/{:?}, enumerator {want_powers:?}/{want_beams:?}",
                    got.powers_dbm, got.beams
                ));
            }
            if (got.objective - objective).abs() > 1e-9 {
                return Err(format!("M={m}, draw {d}: objective {} vs {objective}", got.objective));
            }
        }
    }
    Ok(())
}

/// Every check of the suite by name.
pub fn all() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("steering vectors have unit norm", steering_unit_norm),
        ("beamforming gain bounds", beamforming_gain_bounds),
        ("backprop matches finite differences", backprop_matches_finite_differences),
        ("tabular fixed point matches value iteration", tabular_fixed_point),
        ("SINR is monotone in serving and interfering power", sinr_monotonicity),
        ("action register round trip", action_round_trip),
        ("power clamp holds", power_clamp),
        ("CCDF is monotone", ccdf_monotone),
        ("reward spot values", reward_spot_values),
        ("argmax picks the first maximum", argmax_picks_first_maximum),
    ]
}
