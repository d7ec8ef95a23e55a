//! Exhaustive joint power and beam search on one frozen snapshot.
//!
//! `cargo run --release --example brute_force -- [M] [seed]`

use downlink_rl::config::{Bearer, NetworkConfig};
use downlink_rl::oracle::{brute_force, brute_force_parallel, SearchSpace};
use downlink_rl::sim::Env;

fn main() -> downlink_rl::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let c = NetworkConfig::defaults(Bearer::Data);
    let mut env = Env::new(&c, m, seed)?;
    let channels = env.next_channels()?;
    let state = env.radio_state(&channels.channels[0]);
    let space = SearchSpace::new(c.oracle_power_grid_dbm.clone(), env.codebook.clone(), c.n_bs, c.max_power_dbm)?;
    let target = c.sinr_target_db(m);

    let start = std::time::Instant::now();
    let best = brute_force(&state, &space, &c.code_rate_map(), target)?;
    let serial = start.elapsed();
    let par = brute_force_parallel(&state, &space, &c.code_rate_map(), target, 8)?;
    assert_eq!(best.rank, par.rank);

    println!("M={m}, {} candidates searched in {serial:?}", best.candidates);
    println!("powers {:?} dBm, beams {:?}", best.powers_dbm, best.beams);
    println!("SINR {:?} dB, target {target:.2} dB, feasible {}", best.sinr_eff_db, best.feasible);
    println!("starting point SINR {:?} dB", state.sinrs_db(&env.codebook));
    Ok(())
}
