//! The `downlink-rl` command line.
//!
//! Every subcommand works on one output directory (`--out`, else
//! `$DOWNLINK_RL_OUT`, else `./out`) laid out as
//!
//! ```text
//! summary.csv            one row per (engine, M, seed), merged across invocations
//! aggregate.csv          median ζ per (engine, M)
//! runtime_ratio.csv      DQN vs exhaustive-search step time, when both ran
//! configs/<hash>.toml    resolved config of every hash in the summary
//! traces/<stem>.csv      per-step trace of one run
//! samples/<stem>.csv     coverage samples of one run
//! ccdf/<stem>.csv        CCDF of those samples
//! channels/<stem>.csv    channel vectors, with `dump_channels = true`
//! ```
//!
//! Exit codes: 0 success, 1 config error, 2 run failure, 3 verification
//! failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, Bearer, Engine, NetworkConfig};
use crate::error::{Error, Result};
use crate::sim::trace::{
    read_summary, read_trace, strip_wall_times, write_ccdf, write_channel_dump, write_samples, write_summary,
    write_trace,
};
use crate::sim::{aggregate_zeta, ccdf_auto, coverage_samples, percentile, run_experiment, run_single, summarize, RunOutput, RunSummary};

pub const OUT_ENV: &str = "DOWNLINK_RL_OUT";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_RUN: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "downlink-rl", version, about = "Two-cell downlink beamforming and power control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment matrix and write traces and summaries.
    Run(RunArgs),
    /// Run only the exhaustive-search engine.
    Oracle(RunArgs),
    /// Re-run the golden traces and check they come out identical.
    Verify(VerifyArgs),
    /// Recompute coverage CCDFs from traces.
    Ccdf(OutArgs),
    /// Recompute the summary from traces and compare it with summary.csv.
    Report(OutArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config; data-bearer defaults without one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seeds, e.g. `1,2,3` or `0-9`.
    #[arg(long)]
    seeds: Option<String>,
    /// Engines, e.g. `dqn,brute_force`.
    #[arg(long)]
    engines: Option<String>,
    /// Antenna counts, e.g. `4,16`.
    #[arg(long = "M")]
    antennas: Option<String>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Directory of golden cases, each a folder with `config.toml` and
    /// `traces/`.
    #[arg(long)]
    golden: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn main<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a, false),
        Command::Oracle(a) => cmd_run(a, true),
        Command::Verify(a) => cmd_verify(a),
        Command::Ccdf(a) => cmd_ccdf(&out_dir(a.out)),
        Command::Report(a) => cmd_report(&out_dir(a.out)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument { .. } => EXIT_CONFIG,
                _ => EXIT_RUN,
            }
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// `1,2,5-7` → `[1, 2, 5, 6, 7]`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("invalid value for `--seeds`: `{text}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

pub fn parse_engines(text: &str) -> Result<Vec<Engine>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| Engine::parse(p).ok_or_else(|| Error::Config(format!("unknown engine `{p}`"))))
        .collect()
}

pub fn parse_antennas(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| Error::Config(format!("invalid value for `--M`: `{p}`"))))
        .collect()
}

fn resolve_config(a: &RunArgs, oracle_only: bool) -> Result<NetworkConfig> {
    let mut config = match &a.config {
        Some(path) => load_config(path)?,
        None => NetworkConfig::defaults(Bearer::Data),
    };
    if let Some(s) = &a.seeds {
        config.seeds = parse_seeds(s)?;
    }
    if let Some(e) = &a.engines {
        config.engines = parse_engines(e)?;
    }
    if let Some(m) = &a.antennas {
        config.antennas = parse_antennas(m)?;
    }
    if let Some(w) = a.workers {
        config.workers = w;
    }
    if oracle_only {
        config.engines = vec![Engine::BruteForce];
    }
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn samples_file(stem: &str) -> String {
    format!("samples/{stem}.csv")
}

/// Writes the per-run files and returns the summary row.
fn write_run(out: &Path, run: &RunOutput) -> Result<(RunSummary, String)> {
    let ctx = &run.context;
    let stem = ctx.stem();
    write(&out.join("traces").join(format!("{stem}.csv")), &write_trace(ctx, &run.episodes))?;
    let samples = coverage_samples(&run.episodes, ctx.q);
    write(&out.join(samples_file(&stem)), &write_samples(&ctx.config_hash, &samples))?;
    write(&out.join("ccdf").join(format!("{stem}.csv")), &write_ccdf(&ctx.config_hash, &ccdf_auto(&samples)))?;
    if !run.channels.is_empty() {
        write(&out.join("channels").join(format!("{stem}.csv")), &write_channel_dump(ctx, &run.channels))?;
    }
    Ok((run.summary.clone(), samples_file(&stem)))
}

type RowKey = (Engine, usize, u64);

fn key(s: &RunSummary) -> RowKey {
    (s.engine, s.antennas, s.seed)
}

fn read_rows(path: &Path) -> Result<BTreeMap<RowKey, (RunSummary, String)>> {
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    Ok(read_summary(&fs::read_to_string(path)?)?
        .into_iter()
        .map(|row| (key(&row.0), row))
        .collect())
}

fn summary_text(rows: &BTreeMap<RowKey, (RunSummary, String)>) -> String {
    let rows: Vec<_> = rows.values().cloned().collect();
    format!("# downlink-rl summary\n{}", write_summary(&rows))
}

/// DQN step time over exhaustive-search step time for every (M, seed) that
/// has both under the same config hash.
pub fn runtime_ratio_csv(summaries: &[RunSummary]) -> Option<String> {
    let mut out = String::from("M,seed,config_hash,dqn_step_us,brute_force_step_us,ratio\n");
    let mut any = false;
    for d in summaries.iter().filter(|s| s.engine == Engine::Dqn) {
        let oracle = summaries.iter().find(|o| {
            o.engine == Engine::BruteForce && o.antennas == d.antennas && o.seed == d.seed && o.config_hash == d.config_hash
        });
        if let Some(o) = oracle {
            any = true;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                d.antennas,
                d.seed,
                d.config_hash,
                d.step_time_us,
                o.step_time_us,
                d.step_time_us / o.step_time_us
            ));
        }
    }
    any.then_some(out)
}

fn aggregate_csv(summaries: &[RunSummary]) -> String {
    let mut out = String::from("engine,M,seeds,converged,zeta_median\n");
    for a in aggregate_zeta(summaries, 50.0) {
        out.push_str(&format!("{},{},{},{},{}\n", a.engine, a.antennas, a.seeds, a.converged, a.zeta_percentile));
    }
    out
}

fn cmd_run(a: RunArgs, oracle_only: bool) -> Result<u8> {
    let config = resolve_config(&a, oracle_only)?;
    let out = out_dir(a.out);
    let results = run_experiment(&config)?;

    write(&out.join("configs").join(format!("{}.toml", config.hash())), &config.to_toml_string())?;
    let summary_path = out.join("summary.csv");
    let mut rows = read_rows(&summary_path)?;
    let mut failed = 0;
    for result in &results {
        let row = result.as_ref().map_err(|e| e.to_string()).and_then(|run| {
            write_run(&out, run).map_err(|e| format!("{}: {e}", run.context.stem()))
        });
        match row {
            Ok(row) => {
                let s = &row.0;
                println!(
                    "{} M={} seed={}: episodes={} zeta={} step_us={:.1}",
                    s.engine,
                    s.antennas,
                    s.seed,
                    s.episodes,
                    s.zeta.map_or("-".into(), |z| z.to_string()),
                    s.step_time_us
                );
                rows.insert(key(s), row);
            }
            Err(e) => {
                eprintln!("run failed: {e}");
                failed += 1;
            }
        }
    }

    write(&summary_path, &summary_text(&rows))?;
    let summaries: Vec<RunSummary> = rows.values().map(|r| r.0.clone()).collect();
    write(&out.join("aggregate.csv"), &aggregate_csv(&summaries))?;
    if let Some(csv) = runtime_ratio_csv(&summaries) {
        write(&out.join("runtime_ratio.csv"), &csv)?;
    }
    if failed > 0 {
        eprintln!("{failed} of {} runs failed", results.len());
        return Ok(EXIT_RUN);
    }
    Ok(EXIT_OK)
}

fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let dir = dir.join("traces");
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Summary rows recomputed from every trace under `dir`.
pub fn recompute_summary(dir: &Path) -> Result<Vec<(RunSummary, String)>> {
    trace_files(dir)?
        .iter()
        .map(|path| {
            let (ctx, episodes) = read_trace(&fs::read_to_string(path)?)?;
            Ok((summarize(&ctx, &episodes), samples_file(&ctx.stem())))
        })
        .collect()
}

fn cmd_report(out: &Path) -> Result<u8> {
    let rows: BTreeMap<RowKey, (RunSummary, String)> =
        recompute_summary(out)?.into_iter().map(|r| (key(&r.0), r)).collect();
    write(&out.join("report.csv"), &summary_text(&rows))?;
    println!("recomputed {} summary rows into {}", rows.len(), out.join("report.csv").display());

    let emitted = read_rows(&out.join("summary.csv"))?;
    let mut mismatches = 0;
    for (k, (s, _)) in &rows {
        match emitted.get(k) {
            Some((e, _)) if e == s => {}
            Some(_) => {
                eprintln!("mismatch: {} M={} seed={}", k.0, k.1, k.2);
                mismatches += 1;
            }
            None => eprintln!("no summary row for {} M={} seed={}", k.0, k.1, k.2),
        }
    }
    if mismatches > 0 {
        return Ok(EXIT_VERIFY);
    }
    Ok(EXIT_OK)
}

fn cmd_ccdf(out: &Path) -> Result<u8> {
    let mut pooled: BTreeMap<(Engine, usize), (Vec<f64>, usize)> = BTreeMap::new();
    for path in trace_files(out)? {
        let (ctx, episodes) = read_trace(&fs::read_to_string(&path)?)?;
        let samples = coverage_samples(&episodes, ctx.q);
        let stem = ctx.stem();
        write(&out.join(samples_file(&stem)), &write_samples(&ctx.config_hash, &samples))?;
        write(&out.join("ccdf").join(format!("{stem}.csv")), &write_ccdf(&ctx.config_hash, &ccdf_auto(&samples)))?;
        let cell = pooled.entry((ctx.engine, ctx.antennas)).or_default();
        cell.0.extend(samples);
        cell.1 += 1;
    }
    let mut table = String::from("engine,M,seeds,samples,p10_db\n");
    for ((engine, m), (samples, seeds)) in &pooled {
        let curve = ccdf_auto(samples);
        write(
            &out.join("ccdf").join(format!("pooled_{engine}_M{m}.csv")),
            &write_ccdf("pooled", &curve),
        )?;
        let p10 = percentile(samples, 10.0).map_or(String::new(), |p| p.to_string());
        table.push_str(&format!("{engine},{m},{seeds},{},{p10}\n", samples.len()));
    }
    write(&out.join("ccdf_pooled.csv"), &table)?;
    print!("{table}");
    Ok(EXIT_OK)
}

/// Golden cases shipped with the crate.
pub fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

/// Re-runs every trace of one golden case and compares it with the stored
/// one, wall times aside. Returns the names of the traces that differ.
pub fn verify_case(case: &Path) -> Result<Vec<String>> {
    let config = load_config(case.join("config.toml"))?;
    let mut failures = Vec::new();
    for path in trace_files(case)? {
        let stored = fs::read_to_string(&path)?;
        let (ctx, _) = read_trace(&stored)?;
        let run = run_single(&config, ctx.engine, ctx.antennas, ctx.seed)?;
        let fresh = write_trace(&run.context, &run.episodes);
        if strip_wall_times(&fresh) != strip_wall_times(&stored) {
            failures.push(path.display().to_string());
        }
    }
    Ok(failures)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let root = a.golden.unwrap_or_else(default_golden_dir);
    let mut cases: Vec<PathBuf> = fs::read_dir(&root)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", root.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("config.toml").is_file())
        .collect();
    cases.sort();
    if cases.is_empty() {
        return Err(Error::Config(format!("no golden cases under {}", root.display())));
    }
    let mut ok = true;
    for case in &cases {
        let failures = verify_case(case)?;
        let n = trace_files(case)?.len();
        println!("{}: {}/{} traces reproduced", case.display(), n - failures.len(), n);
        for f in &failures {
            println!("  differs: {f}");
        }
        ok &= failures.is_empty();
    }
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}
