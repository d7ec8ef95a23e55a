//! Plain-text CSV artifacts: per-step traces, run summaries and CCDFs.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a trace back yields bit-identical values and a summary recomputed from
//! traces matches the one written at run time exactly.

use std::fmt::Write as _;
use std::time::Duration;

use crate::config::Engine;
use crate::error::{Error, Result};
use crate::radio::ActionRegister;

use super::episode::{is_converged, EpisodeResult, StepRecord};
use super::env::EpisodeChannels;
use super::experiment::{RunContext, RunSummary};

pub const TRACE_COLUMNS: &str = "t,engine,q,M,seed,episode,action_hex,p_l_dbm,p_b_dbm,n_l,n_b,\
sinr_l_db,sinr_b_db,sinr_eff_l_db,sinr_eff_b_db,reward,loss,wall_ns";

/// Index of the wall-clock column, which is the only non-reproducible one.
pub const TRACE_WALL_COLUMN: usize = 17;

pub const SUMMARY_COLUMNS: &str = "engine,M,seed,config_hash,episodes,zeta,max_sum_rate,wall_time_s,\
step_time_us,throughput_bps,lost_frames,backhaul_msgs,converged_sinr_median_db,sinr_p10_db,samples_file";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn bad(why: impl Into<String>) -> Error {
    Error::Trace(why.into())
}

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| bad(format!("bad {what}: `{field}`")))
}

fn parse_opt<T: std::str::FromStr>(field: &str, what: &str) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse(field, what).map(Some)
    }
}

pub fn write_trace(ctx: &RunContext, episodes: &[EpisodeResult]) -> String {
    let mut out = String::new();
    writeln!(out, "# downlink-rl trace").unwrap();
    for (k, v) in header_fields(ctx) {
        writeln!(out, "# {k}={v}").unwrap();
    }
    writeln!(out, "{TRACE_COLUMNS}").unwrap();
    for ep in episodes {
        for s in &ep.steps {
            let action = s.action.map(|a| format!("{a:x}")).unwrap_or_else(|| "-".into());
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.t,
                ctx.engine,
                ctx.q,
                ctx.antennas,
                ctx.seed,
                ep.episode + 1,
                action,
                s.powers_dbm[0],
                s.powers_dbm[1],
                s.beams[0],
                s.beams[1],
                s.sinr_db[0],
                s.sinr_db[1],
                s.sinr_eff_db[0],
                s.sinr_eff_db[1],
                s.reward,
                opt(s.loss),
                s.wall_ns
            )
            .unwrap();
        }
    }
    out
}

fn header_fields(ctx: &RunContext) -> Vec<(&'static str, String)> {
    vec![
        ("config_hash", ctx.config_hash.clone()),
        ("engine", ctx.engine.to_string()),
        ("q", ctx.q.to_string()),
        ("M", ctx.antennas.to_string()),
        ("seed", ctx.seed.to_string()),
        ("frame_steps", ctx.frame_steps.to_string()),
        ("step_seconds", ctx.step_seconds.to_string()),
        ("target_db", ctx.target_db.to_string()),
        ("min_db", ctx.min_db.to_string()),
        ("payload_bits", ctx.payload_bits.to_string()),
        ("voice_activity", ctx.voice_activity.to_string()),
        ("n_bs", ctx.n_bs.to_string()),
        ("backhaul_measurements_per_step", ctx.backhaul_measurements_per_step.to_string()),
        ("episode_numbering", "one-based".into()),
    ]
}

/// Parses a trace written by [`write_trace`]. Step states are not part of
/// the trace and come back zeroed.
pub fn read_trace(text: &str) -> Result<(RunContext, Vec<EpisodeResult>)> {
    let mut kv = std::collections::HashMap::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.peek() {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.trim().split_once('=') {
            kv.insert(k.to_string(), v.to_string());
        }
        lines.next();
    }
    let get = |k: &str| kv.get(k).map(String::as_str).ok_or_else(|| bad(format!("missing header `{k}`")));
    let ctx = RunContext {
        config_hash: get("config_hash")?.to_string(),
        engine: Engine::parse(get("engine")?).ok_or_else(|| bad("unknown engine"))?,
        q: parse(get("q")?, "q")?,
        antennas: parse(get("M")?, "M")?,
        seed: parse(get("seed")?, "seed")?,
        frame_steps: parse(get("frame_steps")?, "frame_steps")?,
        step_seconds: parse(get("step_seconds")?, "step_seconds")?,
        target_db: parse(get("target_db")?, "target_db")?,
        min_db: parse(get("min_db")?, "min_db")?,
        payload_bits: parse(get("payload_bits")?, "payload_bits")?,
        voice_activity: parse(get("voice_activity")?, "voice_activity")?,
        n_bs: parse(get("n_bs")?, "n_bs")?,
        backhaul_measurements_per_step: parse(get("backhaul_measurements_per_step")?, "backhaul")?,
    };
    if lines.next() != Some(TRACE_COLUMNS) {
        return Err(bad("missing or unexpected column header"));
    }

    let mut episodes: Vec<EpisodeResult> = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 18 {
            return Err(bad(format!("expected 18 fields, got {}", f.len())));
        }
        let episode: usize = parse(f[5], "episode")?;
        let episode = episode.checked_sub(1).ok_or_else(|| bad("episode 0"))?;
        let action = match f[6] {
            "-" => None,
            h => Some(
                u8::from_str_radix(h, 16)
                    .ok()
                    .and_then(|v| ActionRegister::new(v).ok())
                    .ok_or_else(|| bad(format!("bad action `{h}`")))?,
            ),
        };
        let step = StepRecord {
            t: parse(f[0], "t")?,
            state: [0.0; 8],
            action,
            powers_dbm: vec![parse(f[7], "power")?, parse(f[8], "power")?],
            beams: vec![parse(f[9], "beam")?, parse(f[10], "beam")?],
            sinr_db: vec![parse(f[11], "sinr")?, parse(f[12], "sinr")?],
            sinr_eff_db: vec![parse(f[13], "sinr")?, parse(f[14], "sinr")?],
            reward: parse(f[15], "reward")?,
            loss: parse_opt(f[16], "loss")?,
            wall_ns: parse(f[17], "wall_ns")?,
        };
        match episodes.last_mut() {
            Some(ep) if ep.episode == episode => ep.steps.push(step),
            _ => episodes.push(EpisodeResult {
                episode,
                steps: vec![step],
                converged: false,
                aborted: false,
                wall_time: Duration::ZERO,
            }),
        }
    }
    for ep in &mut episodes {
        ep.aborted = ep
            .steps
            .last()
            .is_some_and(|s| s.sinr_eff_db.iter().any(|&g| g < ctx.min_db));
        ep.converged = is_converged(&ep.steps, ctx.frame_steps, ctx.target_db);
        ep.wall_time = Duration::from_nanos(ep.steps.iter().map(|s| s.wall_ns).sum());
    }
    Ok((ctx, episodes))
}

/// Trace text with the wall-clock column blanked, for reproducibility
/// comparisons.
pub fn strip_wall_times(trace: &str) -> String {
    trace
        .lines()
        .map(|line| {
            if line.starts_with('#') || line == TRACE_COLUMNS {
                return line.to_string();
            }
            let mut f: Vec<&str> = line.split(',').collect();
            if f.len() > TRACE_WALL_COLUMN {
                f[TRACE_WALL_COLUMN] = "";
            }
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn summary_row(s: &RunSummary, samples_file: &str) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.engine,
        s.antennas,
        s.seed,
        s.config_hash,
        s.episodes,
        opt(s.zeta),
        opt(s.max_sum_rate),
        s.wall_time_s,
        s.step_time_us,
        opt(s.throughput_bps),
        opt(s.lost_frames),
        s.backhaul_msgs,
        opt(s.converged_sinr_median_db),
        opt(s.sinr_p10_db),
        samples_file
    )
}

/// Parses one summary row into the summary and its samples-file reference.
pub fn parse_summary_row(line: &str) -> Result<(RunSummary, String)> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 15 {
        return Err(bad(format!("summary row has {} fields, expected 15", f.len())));
    }
    Ok((
        RunSummary {
            engine: Engine::parse(f[0]).ok_or_else(|| bad("unknown engine"))?,
            antennas: parse(f[1], "M")?,
            seed: parse(f[2], "seed")?,
            config_hash: f[3].to_string(),
            episodes: parse(f[4], "episodes")?,
            zeta: parse_opt(f[5], "zeta")?,
            max_sum_rate: parse_opt(f[6], "max_sum_rate")?,
            wall_time_s: parse(f[7], "wall_time_s")?,
            step_time_us: parse(f[8], "step_time_us")?,
            throughput_bps: parse_opt(f[9], "throughput")?,
            lost_frames: parse_opt(f[10], "lost_frames")?,
            backhaul_msgs: parse(f[11], "backhaul_msgs")?,
            converged_sinr_median_db: parse_opt(f[12], "median")?,
            sinr_p10_db: parse_opt(f[13], "p10")?,
        },
        f[14].to_string(),
    ))
}

pub fn write_summary(rows: &[(RunSummary, String)]) -> String {
    let mut out = format!("{SUMMARY_COLUMNS}\n");
    for (s, file) in rows {
        out.push_str(&summary_row(s, file));
        out.push('\n');
    }
    out
}

pub fn read_summary(text: &str) -> Result<Vec<(RunSummary, String)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    if lines.next() != Some(SUMMARY_COLUMNS) {
        return Err(bad("missing or unexpected summary header"));
    }
    lines.filter(|l| !l.is_empty()).map(parse_summary_row).collect()
}

pub fn write_samples(config_hash: &str, samples: &[f64]) -> String {
    let mut out = format!("# config_hash={config_hash}\nsinr_eff_db\n");
    for s in samples {
        writeln!(out, "{s}").unwrap();
    }
    out
}

pub fn write_ccdf(config_hash: &str, curve: &[(f64, f64)]) -> String {
    let mut out = format!("# config_hash={config_hash}\nthreshold_db,probability\n");
    for (x, p) in curve {
        writeln!(out, "{x},{p}").unwrap();
    }
    out
}

/// One row per (step, UE, BS) with the complex channel entries.
pub fn write_channel_dump(ctx: &RunContext, channels: &[EpisodeChannels]) -> String {
    let mut out = format!("# config_hash={}\nepisode,t,ue,bs,los,m,re,im\n", ctx.config_hash);
    for ep in channels {
        for (t, step) in ep.channels.iter().enumerate() {
            for (ue, links) in step.iter().enumerate() {
                for (bs, h) in links.iter().enumerate() {
                    for (m, c) in h.h.iter().enumerate() {
                        writeln!(out, "{},{t},{ue},{bs},{},{m},{},{}", ep.episode + 1, h.los as u8, c.re, c.im).unwrap();
                    }
                }
            }
        }
    }
    out
}
