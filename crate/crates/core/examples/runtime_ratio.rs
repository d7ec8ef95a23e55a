//! Per-step cost of the trained agent against the exhaustive search.
//!
//! `cargo run --release --example runtime_ratio`

use downlink_rl::cli::runtime_ratio_csv;
use downlink_rl::config::{Bearer, Engine, NetworkConfig};
use downlink_rl::sim::run_experiment;

fn main() -> downlink_rl::Result<()> {
    let mut c = NetworkConfig::defaults(Bearer::Data);
    c.engines = vec![Engine::Dqn, Engine::BruteForce];
    c.antennas = vec![4, 8, 16];
    c.seeds = vec![0];
    c.episodes = 200;
    c.stop_on_convergence = false;
    let summaries = run_experiment(&c)?
        .into_iter()
        .map(|r| r.map(|o| o.summary))
        .collect::<downlink_rl::Result<Vec<_>>>()?;
    print!("{}", runtime_ratio_csv(&summaries).unwrap_or_default());
    Ok(())
}
