//! Best-beam gain of the DFT codebook against pure line-of-sight channels.
//!
//! `cargo run --example codebook_gain`

use std::f64::consts::PI;

use downlink_rl::channel::{build_codebook, steering_vector, BeamGrid};

fn main() -> downlink_rl::Result<()> {
    println!("{:>3} {:>10} {:>10} {:>10}", "M", "worst", "mean", "best");
    for m in [2, 4, 8, 16, 32, 64] {
        let codebook = build_codebook(m, 0.5, BeamGrid::Centered)?;
        let mut gains = Vec::new();
        for k in 0..=720 {
            let theta = PI * k as f64 / 720.0;
            // a unit LOS path scaled so that a matched beam gives gain M
            let a = steering_vector(theta, m, 0.5)?;
            let best = codebook
                .beams
                .iter()
                .map(|f| {
                    let inner: num_complex::Complex64 = a.entries.iter().zip(&f.entries).map(|(h, f)| h.conj() * f).sum();
                    inner.norm_sqr() * m as f64
                })
                .fold(0.0, f64::max);
            gains.push(best);
        }
        let worst = gains.iter().cloned().fold(f64::INFINITY, f64::min);
        let best = gains.iter().cloned().fold(0.0, f64::max);
        let mean = gains.iter().sum::<f64>() / gains.len() as f64;
        println!("{m:>3} {worst:>10.3} {mean:>10.3} {best:>10.3}");
    }
    Ok(())
}
