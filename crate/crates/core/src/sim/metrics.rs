//! Performance measures computed from episode results.

use crate::radio::sum_rate;

use super::episode::EpisodeResult;

/// One-based index of the first converged episode.
pub fn convergence_episode(results: &[EpisodeResult]) -> Option<usize> {
    results.iter().position(|r| r.converged).map(|i| i + 1)
}

/// One-based index of the first `true`.
pub fn first_true(flags: &[bool]) -> Option<usize> {
    flags.iter().position(|&f| f).map(|i| i + 1)
}

/// `lo, lo + step, …` up to and including the first point `≥ hi`.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "grid step must be positive");
    let n = ((hi - lo) / step).ceil().max(0.0) as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Empirical `P(X > x)` at every grid point.
pub fn ccdf(samples: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&x| {
            let at_or_below = sorted.partition_point(|&v| v <= x);
            let p = if sorted.is_empty() {
                0.0
            } else {
                (sorted.len() - at_or_below) as f64 / n
            };
            (x, p)
        })
        .collect()
}

/// CCDF over a 0.5 dB grid spanning the samples.
pub fn ccdf_auto(samples: &[f64]) -> Vec<(f64, f64)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ccdf(samples, &uniform_grid((lo * 2.0).floor() / 2.0, hi, 0.5))
}

/// Nearest-rank percentile, `p` in `[0, 100]`.
pub fn percentile(samples: &[f64], p: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Median with the two middle values averaged.
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// `(b / (T·ζ), ⌈ν·ζ⌉)`: payload throughput when the first `ζ` frames are
/// spent converging, and voice frames lost meanwhile.
pub fn throughput_and_frame_loss(zeta: usize, frame_seconds: f64, payload_bits: f64, activity: f64) -> (f64, u64) {
    let z = zeta as f64;
    let lost = (activity * z - 1e-9).ceil().max(0.0) as u64;
    (payload_bits / (frame_seconds * z), lost)
}

/// Largest per-episode sum-rate over the episodes that ran all steps
/// without aborting.
pub fn sum_rate_summary(results: &[EpisodeResult], frame_steps: usize) -> Option<f64> {
    results
        .iter()
        .filter(|r| !r.aborted && r.steps.len() == frame_steps && frame_steps > 0)
        .filter_map(|r| sum_rate(&r.sinr_eff_series()).ok())
        .fold(None, |best, v| Some(best.map_or(v, |b: f64| b.max(v))))
}

/// Episode with the largest total reward; ties go to the earliest.
pub fn best_reward_episode(results: &[EpisodeResult]) -> Option<&EpisodeResult> {
    let mut best: Option<&EpisodeResult> = None;
    for r in results {
        if best.is_none_or(|b| r.total_reward() > b.total_reward()) {
            best = Some(r);
        }
    }
    best
}
