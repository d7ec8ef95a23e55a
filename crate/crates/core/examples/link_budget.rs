//! Median path loss and the resulting cell-edge SNR for both bearers.
//!
//! `cargo run --example link_budget`

use downlink_rl::config::{Bearer, NetworkConfig};

fn main() {
    for bearer in [Bearer::Voice, Bearer::Data] {
        let c = NetworkConfig::defaults(bearer);
        let model = c.path_loss_model();
        let noise = c.noise_dbm();
        let p = c.initial_power_dbm();
        println!("{bearer:?}: noise {noise:.1} dBm, start power {p:.1} dBm, shadow σ LOS {:.1} dB",
            model.shadow_sigma_db(true));
        for d in [10.0, 50.0, 100.0, 250.0, 500.0] {
            let los = model.median_db(d, true);
            let nlos = model.median_db(d, false);
            println!(
                "  {d:>5} m  PL LOS {los:6.1} dB  NLOS {nlos:6.1} dB  SNR LOS {:6.1} dB",
                p - los + c.link_params().antenna_gain_db - noise
            );
        }
    }
}
