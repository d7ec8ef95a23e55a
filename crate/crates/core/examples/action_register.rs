//! The 4-bit action register and what it commands on each bearer.
//!
//! `cargo run --example action_register`

use downlink_rl::radio::{decode_action, encode_action, reward, ActionRegister, N_ACTIONS};

fn main() -> downlink_rl::Result<()> {
    println!("reg   voice ΔP_b ΔP_l   data ΔP_b ΔP_l beam_l beam_b   voice reward");
    for i in 0..N_ACTIONS {
        let a = ActionRegister::from_index(i);
        let v = decode_action(a, 0);
        let d = decode_action(a, 1);
        assert_eq!(encode_action(&v, 0)?, a);
        assert_eq!(encode_action(&d, 1)?, a);
        println!(
            "{:04b}  {:>9} {:>4}   {:>8} {:>4} {:>6} {:>6}   {:>6}",
            a.value(),
            v.power_delta_b,
            v.power_delta_l,
            d.power_delta_b,
            d.power_delta_l,
            d.beam_step_l,
            d.beam_step_b,
            reward(a, 0.0, 0.0, 0)
        );
    }
    Ok(())
}
