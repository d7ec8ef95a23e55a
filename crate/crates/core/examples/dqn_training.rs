//! Trains the deep Q-learning agent on the mmWave data bearer.
//!
//! `cargo run --release --example dqn_training -- [M] [seed]`

use downlink_rl::config::{Bearer, Engine, NetworkConfig};
use downlink_rl::sim::run_single;

fn main() -> downlink_rl::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(8);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let c = NetworkConfig::defaults(Bearer::Data);
    let out = run_single(&c, Engine::Dqn, m, seed)?;
    let s = &out.summary;
    let aborted = out.episodes.iter().filter(|e| e.aborted).count();
    println!("M={m} seed={seed}: {} episodes, {aborted} aborted", s.episodes);
    match s.zeta {
        Some(z) => println!("converged at episode {z}, median SINR {:.2} dB", s.converged_sinr_median_db.unwrap()),
        None => println!("did not converge within {} episodes", c.episodes),
    }
    println!("mean step {:.1} us, max sum-rate {:?}", s.step_time_us, s.max_sum_rate);
    Ok(())
}
