//! Power control on the voice bearer: fixed allocation against the two
//! learners, compared by the 10th percentile of the cell-edge UE's SINR.
//!
//! `cargo run --release --example voice_pcic -- [seeds]`

use downlink_rl::config::{Bearer, Engine, NetworkConfig};
use downlink_rl::sim::{coverage_samples, percentile, run_experiment};

fn main() -> downlink_rl::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let mut c = NetworkConfig::defaults(Bearer::Voice);
    c.engines = vec![Engine::Fpa, Engine::Tabular, Engine::Dqn];
    c.seeds = (0..seeds).collect();
    c.stop_on_convergence = false;

    let runs = run_experiment(&c)?.into_iter().collect::<downlink_rl::Result<Vec<_>>>()?;
    for engine in &c.engines {
        let pooled: Vec<f64> = runs
            .iter()
            .filter(|r| r.context.engine == *engine)
            .flat_map(|r| coverage_samples(&r.episodes, r.context.q))
            .collect();
        println!("{:>8}: p10 {:.2} dB over {} samples", engine.name(), percentile(&pooled, 10.0).unwrap(), pooled.len());
    }
    Ok(())
}
