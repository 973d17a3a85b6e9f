//! `tilestream`: synthetic assets, popularity traces, prediction-error
//! sweeps, cache evaluations and full streaming experiments.

mod fail;
mod report;
mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use tilestream_core::cachesim::{replay_popularity, warm};
use tilestream_core::geometry::{ViewportSampler, DEFAULT_SAMPLES_PER_AXIS};
use tilestream_core::manifest::{file_count, synthesize};
use tilestream_core::playback::{run_experiment, ExperimentConfig, SessionParams};
use tilestream_core::popularity::{average_quality_map, build_heat, quantize};
use tilestream_core::prediction::error_experiment;
use tilestream_core::stats::{mean, std_dev, MeanStd};
use tilestream_core::traces::{
    hotspot_trace, linear_trace, load_trace_dir, piecewise_network_trace, save_viewing_trace, sinusoid_trace,
    HotspotSpec,
};
use tilestream_core::{
    CacheConfig, EdgeCache, EvictionPolicy, FovSpec, NetworkTrace, Orientation, PolicyKind, SynthSpec,
    TimedOrientation, VideoManifest,
};

use fail::{usage, Classify, CliResult};
use spec::{ExperimentSpec, SpecFile};

#[derive(Parser)]
#[command(
    name = "tilestream",
    version,
    about = "Trace-driven tiled 360-degree video streaming simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic tiled video manifest.
    Synth(SynthArgs),
    /// Write synthetic viewing traces.
    SynthViews(SynthViewsArgs),
    /// Write a piecewise-constant packet trace in Mahimahi format.
    SynthNet(SynthNetArgs),
    /// Build a popularity trace from viewing traces and embed it in the manifest.
    Popularity(PopularityArgs),
    /// Measure viewport prediction errors over interval/timeframe grids.
    PredictError(PredictErrorArgs),
    /// Warm caches with viewing traces and measure popularity-trace hit rates.
    CacheEval(CacheEvalArgs),
    /// Run a streaming experiment and write its reports.
    Run(RunArgs),
    /// Recompute report summaries from segments.csv and compare with the files.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthArgs {
    /// Video length in seconds.
    #[arg(long, default_value_t = 40.0)]
    duration: f64,
    /// Segment length in seconds.
    #[arg(long, default_value_t = 1.5)]
    segment: f64,
    /// Tile grid as COLSxROWS.
    #[arg(long, default_value = "4x4", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value_t = 3)]
    qualities: usize,
    /// Bits per second of one tile stream at the highest quality.
    #[arg(long, default_value_t = 1.6e6)]
    base_bitrate: f64,
    /// Comma-separated bitrate factors, lowest quality first [default: 4^-(q-1-l)].
    #[arg(long, value_delimiter = ',')]
    factors: Option<Vec<f64>>,
    /// Per-(segment, tile) size spread in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    variability: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "synthetic")]
    name: String,
    /// Output manifest path.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ViewKind {
    Hotspot,
    Sinusoid,
    Linear,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthViewsArgs {
    #[arg(long, value_enum, default_value_t = ViewKind::Hotspot)]
    kind: ViewKind,
    /// Number of traces.
    #[arg(long, default_value_t = 30)]
    count: usize,
    #[arg(long, default_value_t = 40.0)]
    duration: f64,
    /// Samples per second.
    #[arg(long, default_value_t = 30.0)]
    rate: f64,
    /// Hot-spot yaw, or sinusoid center yaw, in degrees.
    #[arg(long, default_value_t = 0.0)]
    center_yaw: f64,
    #[arg(long, default_value_t = 0.0)]
    center_pitch: f64,
    /// Hot-spot yaw standard deviation in degrees.
    #[arg(long, default_value_t = 30.0)]
    yaw_spread: f64,
    /// Hot-spot pitch standard deviation in degrees.
    #[arg(long, default_value_t = 10.0)]
    pitch_spread: f64,
    /// Sinusoid amplitude in degrees.
    #[arg(long, default_value_t = 60.0)]
    amplitude: f64,
    /// Sinusoid period in seconds.
    #[arg(long, default_value_t = 8.0)]
    period: f64,
    /// Linear yaw speed in degrees per second.
    #[arg(long, default_value_t = 20.0)]
    speed: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; files are named view_000.csv, view_001.csv, ...
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthNetArgs {
    /// Phase as SECONDS:BITS_PER_SECOND; repeat for consecutive phases.
    #[arg(long = "phase", required = true, value_parser = parse_phase)]
    phases: Vec<(f64, f64)>,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ViewportArgs {
    /// Field of view as HxV degrees.
    #[arg(long, default_value = "100x100", value_parser = parse_fov)]
    fov: FovSpec,
    /// Viewport samples per axis.
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_AXIS)]
    samples: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PopularityArgs {
    /// Manifest to update in place.
    #[arg(long)]
    manifest: PathBuf,
    /// Directory of viewing-trace CSV files.
    #[arg(long)]
    traces: PathBuf,
    /// Budget in bits per second.
    #[arg(long, conflicts_with = "top_tiles")]
    budget: Option<f64>,
    /// Budget as the bitrate of N top-quality tiles plus the rest at the lowest [default: a quarter of the tiles].
    #[arg(long)]
    top_tiles: Option<usize>,
    #[command(flatten)]
    viewport: ViewportArgs,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PredictErrorArgs {
    /// Directory of viewing-trace CSV files.
    #[arg(long)]
    traces: PathBuf,
    /// Prediction intervals in seconds.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2")]
    interval: Vec<f64>,
    /// Regression timeframes in seconds.
    #[arg(long, value_delimiter = ',', default_value = "0.1,1")]
    timeframe: Vec<f64>,
    /// Seconds between predictions.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Output CSV.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CacheEvalArgs {
    /// Manifest with an embedded popularity trace.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    traces: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "lru,lfuda,gdsf")]
    policies: Vec<EvictionPolicy>,
    /// Capacities as fractions of the total video size.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    viewport: ViewportArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// JSON experiment spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Directory of viewing-trace CSV files.
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Origin packet trace (Mahimahi format).
    #[arg(long)]
    network: Option<PathBuf>,
    /// Throughput multiplier for the origin trace [default: 1].
    #[arg(long)]
    network_scale: Option<f64>,
    /// Comma-separated policies [default: all].
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<PolicyKind>>,
    /// Cache eviction policy; enables the edge cache.
    #[arg(long)]
    cache_policy: Option<EvictionPolicy>,
    /// Cache capacity in bytes.
    #[arg(long, conflicts_with = "cache_fraction")]
    cache_capacity: Option<u64>,
    /// Cache capacity as a fraction of the total video size [default with a cache: 0.5].
    #[arg(long)]
    cache_fraction: Option<f64>,
    /// Iterations per policy [default: 30].
    #[arg(long)]
    iterations: Option<usize>,
    /// Seed of the cache warm-up permutations [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Transition hysteresis factor h >= 1 [default: 1].
    #[arg(long)]
    hysteresis: Option<f64>,
    /// Output directory [default: $TILESTREAM_OUT or ./tilestream-out].
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report directory written by `run`.
    #[arg(long)]
    dir: PathBuf,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not of the form AxB"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    Ok((num(a)?, num(b)?))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (c, r) = parse_pair(s)?;
    if c < 1.0 || r < 1.0 || c.fract() != 0.0 || r.fract() != 0.0 {
        return Err(format!("`{s}` needs positive whole tile counts"));
    }
    Ok((c as usize, r as usize))
}

fn parse_fov(s: &str) -> Result<FovSpec, String> {
    let (h, v) = parse_pair(s)?;
    FovSpec::new(h, v).map_err(|e| e.to_string())
}

fn parse_phase(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("`{s}` is not of the form SECONDS:BPS"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    let (secs, bps) = (num(a)?, num(b)?);
    if !(secs > 0.0) || !(bps >= 0.0) {
        return Err(format!("`{s}` needs a positive duration and a non-negative rate"));
    }
    Ok((secs, bps))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::SynthViews(a) => cmd_synth_views(a),
        Command::SynthNet(a) => cmd_synth_net(a),
        Command::Popularity(a) => cmd_popularity(a),
        Command::PredictError(a) => cmd_predict_error(a),
        Command::CacheEval(a) => cmd_cache_eval(a),
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).runtime_err(&dir.display().to_string())?;
    }
    fs::write(path, text).runtime_err(&path.display().to_string())
}

fn positive(flag: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{flag}: {v} must be positive")))
    }
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    positive("--duration", a.duration)?;
    positive("--segment", a.segment)?;
    positive("--base-bitrate", a.base_bitrate)?;
    if a.qualities == 0 || a.qualities > 255 {
        return Err(usage(format!("--qualities: {} not in 1..=255", a.qualities)));
    }
    if !(0.0..1.0).contains(&a.variability) {
        return Err(usage(format!("--variability: {} not in [0, 1)", a.variability)));
    }
    if let Some(f) = &a.factors {
        if f.len() != a.qualities {
            return Err(usage(format!(
                "--factors: {} values for {} qualities",
                f.len(),
                a.qualities
            )));
        }
    }
    let (cols, rows) = a.grid;
    let m = synthesize(&SynthSpec {
        name: a.name,
        duration: a.duration,
        segment_length: a.segment,
        cols,
        rows,
        qualities: a.qualities,
        base_bitrate: a.base_bitrate,
        variability: a.variability,
        seed: a.seed,
        factors: a.factors,
    })
    .usage_err("synth")?;
    write_file(&a.out, &m.to_json())?;
    println!(
        "wrote {} ({} segments, {} tiles, {} qualities, {} bytes)",
        a.out.display(),
        m.segment_count(),
        m.tile_count(),
        m.quality_count(),
        m.total_bytes()
    );
    println!(
        "equivalent file count: {}",
        file_count(cols, rows, a.qualities, a.duration, a.segment)
    );
    Ok(())
}

fn cmd_synth_views(a: SynthViewsArgs) -> CliResult<()> {
    positive("--duration", a.duration)?;
    positive("--rate", a.rate)?;
    positive("--period", a.period)?;
    if a.count == 0 {
        return Err(usage("--count: must be at least 1"));
    }
    fs::create_dir_all(&a.out).runtime_err(&a.out.display().to_string())?;
    for i in 0..a.count {
        let seed = a.seed.wrapping_add(i as u64);
        let trace: Vec<TimedOrientation> = match a.kind {
            ViewKind::Hotspot => hotspot_trace(
                &HotspotSpec {
                    duration: a.duration,
                    rate_hz: a.rate,
                    center: Orientation::yaw_pitch(a.center_yaw, a.center_pitch),
                    yaw_spread: a.yaw_spread,
                    pitch_spread: a.pitch_spread,
                },
                seed,
            ),
            ViewKind::Sinusoid => {
                // golden-ratio spacing gives each trace its own phase
                let phase = (seed as f64 * 0.618_033_988_749_895).fract() * std::f64::consts::TAU;
                sinusoid_trace(a.duration, a.rate, a.amplitude, a.period, phase, a.center_yaw)
            }
            ViewKind::Linear => linear_trace(a.duration, a.rate, a.center_yaw, a.speed, a.center_pitch),
        };
        let path = a.out.join(format!("view_{i:03}.csv"));
        save_viewing_trace(&path, &trace).runtime_err("synth-views")?;
    }
    println!("wrote {} traces to {}", a.count, a.out.display());
    Ok(())
}

fn cmd_synth_net(a: SynthNetArgs) -> CliResult<()> {
    let trace = piecewise_network_trace(&a.phases).usage_err("--phase")?;
    write_file(&a.out, &trace.to_mahimahi())?;
    println!(
        "wrote {} ({} packets over {} ms, average {:.0} bit/s)",
        a.out.display(),
        trace.packet_count(),
        trace.duration_ms(),
        trace.average_bps()
    );
    Ok(())
}

fn load_manifest(path: &Path) -> CliResult<VideoManifest> {
    VideoManifest::load(path).usage_err("--manifest")
}

fn load_traces(dir: &Path) -> CliResult<Vec<(PathBuf, Vec<TimedOrientation>)>> {
    load_trace_dir(dir).usage_err("--traces")
}

fn sampler(v: &ViewportArgs) -> CliResult<ViewportSampler> {
    ViewportSampler::new(v.fov, v.samples).usage_err("--samples")
}

fn cmd_popularity(a: PopularityArgs) -> CliResult<()> {
    let mut m = load_manifest(&a.manifest)?;
    let traces: Vec<Vec<TimedOrientation>> = load_traces(&a.traces)?.into_iter().map(|(_, t)| t).collect();
    sampler(&a.viewport)?;
    let budget = match (a.budget, a.top_tiles) {
        (Some(b), _) => {
            positive("--budget", b)?;
            b
        }
        (None, Some(n)) => m.nominal_bitrate(n),
        (None, None) => tilestream_core::popularity::default_budget(&m),
    };
    let heat = build_heat(
        &traces,
        &m.grid(),
        a.viewport.fov,
        m.segment_length(),
        m.duration(),
        a.viewport.samples,
    )
    .usage_err("popularity")?;
    let p = quantize(&heat, budget, &m).usage_err("popularity")?;
    let avg = average_quality_map(&p).runtime_err("popularity")?;
    m.set_popularity(p).runtime_err("popularity")?;
    m.save(&a.manifest).runtime_err("popularity")?;
    println!(
        "embedded popularity from {} traces at {:.0} bit/s into {}",
        traces.len(),
        budget,
        a.manifest.display()
    );
    println!("average quality per tile (rows top to bottom):");
    let g = m.grid();
    for r in 0..g.rows {
        let line: Vec<String> = (0..g.cols).map(|c| format!("{:.2}", avg[g.index(c, r)])).collect();
        println!("  {}", line.join(" "));
    }
    Ok(())
}

#[derive(Serialize)]
struct ErrorRow {
    trace: String,
    interval: f64,
    timeframe: f64,
    steps: usize,
    mean_deg: f64,
    std_deg: f64,
    /// Per-step errors separated by `;`.
    errors: String,
}

fn file_label(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_predict_error(a: PredictErrorArgs) -> CliResult<()> {
    for &i in &a.interval {
        positive("--interval", i)?;
    }
    for &t in &a.timeframe {
        positive("--timeframe", t)?;
    }
    positive("--step", a.step)?;
    let traces = load_traces(&a.traces)?;
    let mut rows = Vec::new();
    for (path, trace) in &traces {
        for &interval in &a.interval {
            for &timeframe in &a.timeframe {
                let errors =
                    error_experiment(trace, interval, timeframe, a.step).usage_err(&path.display().to_string())?;
                rows.push(ErrorRow {
                    trace: file_label(path),
                    interval,
                    timeframe,
                    steps: errors.len(),
                    mean_deg: mean(&errors),
                    std_deg: std_dev(&errors),
                    errors: errors.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
                });
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).runtime_err("csv")?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| fail::Failure::Runtime(format!("csv: {e}")))?;
    write_file(&a.out, &String::from_utf8(bytes).runtime_err("csv")?)?;
    println!("interval  timeframe  mean error (deg) over {} traces", traces.len());
    for &interval in &a.interval {
        for &timeframe in &a.timeframe {
            let means: Vec<f64> = rows
                .iter()
                .filter(|r| r.interval == interval && r.timeframe == timeframe)
                .map(|r| r.mean_deg)
                .collect();
            let m = MeanStd::of(&means);
            println!("{interval:>8}  {timeframe:>9}  {:.2} ± {:.2}", m.mean, m.std);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CacheRow {
    policy: EvictionPolicy,
    capacity_fraction: f64,
    capacity_bytes: u64,
    iteration: usize,
    chr: f64,
    bhr: f64,
}

fn cmd_cache_eval(a: CacheEvalArgs) -> CliResult<()> {
    let m = load_manifest(&a.manifest)?;
    if !m.has_popularity() {
        return Err(usage(
            "--manifest: no popularity trace; run the popularity command first",
        ));
    }
    let traces: Vec<Vec<TimedOrientation>> = load_traces(&a.traces)?.into_iter().map(|(_, t)| t).collect();
    for &f in &a.fractions {
        positive("--fractions", f)?;
    }
    if a.iterations == 0 {
        return Err(usage("--iterations: must be at least 1"));
    }
    let s = sampler(&a.viewport)?;
    let mut rows = Vec::new();
    for &policy in &a.policies {
        for &fraction in &a.fractions {
            let capacity = ((m.total_bytes() as f64 * fraction).round() as u64).max(1);
            for iteration in 0..a.iterations {
                let mut cache = EdgeCache::new(CacheConfig::new(capacity, policy).usage_err("cache")?);
                warm(&mut cache, &m, &traces, &s, a.seed.wrapping_add(iteration as u64)).runtime_err("warm")?;
                let st = replay_popularity(&mut cache, &m).runtime_err("replay")?;
                rows.push(CacheRow {
                    policy,
                    capacity_fraction: fraction,
                    capacity_bytes: capacity,
                    iteration,
                    chr: st.chr(),
                    bhr: st.bhr(),
                });
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).runtime_err("csv")?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| fail::Failure::Runtime(format!("csv: {e}")))?;
    write_file(&a.out, &String::from_utf8(bytes).runtime_err("csv")?)?;
    println!("policy  fraction  CHR mean  BHR mean");
    for &policy in &a.policies {
        for &fraction in &a.fractions {
            let sel: Vec<&CacheRow> = rows
                .iter()
                .filter(|r| r.policy == policy && r.capacity_fraction == fraction)
                .collect();
            let chr = mean(&sel.iter().map(|r| r.chr).collect::<Vec<_>>());
            let bhr = mean(&sel.iter().map(|r| r.bhr).collect::<Vec<_>>());
            println!("{:<6}  {fraction:>8}  {chr:>8.3}  {bhr:>8.3}", policy.as_str());
        }
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> CliResult<()> {
    let config = match &a.config {
        Some(p) => SpecFile::load(p)?,
        None => SpecFile::default(),
    };
    let mut flags = SpecFile {
        manifest: a.manifest,
        traces: a.traces,
        network: a.network,
        network_scale: a.network_scale,
        policies: a.policies,
        cache_policy: a.cache_policy,
        cache_capacity: a.cache_capacity,
        cache_fraction: a.cache_fraction,
        iterations: a.iterations,
        seed: a.seed,
        out: a.out,
        params: None,
    };
    if let Some(h) = a.hysteresis {
        if !(h >= 1.0) {
            return Err(usage(format!("--hysteresis: {h} must be at least 1")));
        }
        flags.params = Some(SessionParams {
            hysteresis: h,
            ..config.params.unwrap_or_default()
        });
    }
    let spec = ExperimentSpec::resolve(flags.over(config))?;

    let manifest = load_manifest(&spec.manifest)?;
    if spec.policies.iter().any(PolicyKind::needs_popularity) && !manifest.has_popularity() {
        return Err(usage(format!(
            "--manifest: {} has no popularity trace; run the popularity command first",
            spec.manifest.display()
        )));
    }
    let traces: Vec<Vec<TimedOrientation>> = load_traces(&spec.traces)?.into_iter().map(|(_, t)| t).collect();
    let network = NetworkTrace::load(&spec.network)
        .usage_err("--network")?
        .scale(spec.network_scale)
        .usage_err("--network-scale")?;
    let cache = match (spec.cache_policy, spec.capacity(manifest.total_bytes())) {
        (Some(policy), Some(capacity)) => Some(CacheConfig::new(capacity, policy).usage_err("--cache-capacity")?),
        _ => None,
    };
    let report = run_experiment(&ExperimentConfig {
        manifest: &manifest,
        network: &network,
        traces: &traces,
        policies: &spec.policies,
        iterations: spec.iterations,
        cache,
        params: spec.params,
        seed: spec.seed,
    })
    .runtime_err("simulation")?;
    let summary = report::write(&spec, network.average_bps(), &report.rows())?;

    println!(
        "{} iterations, origin average {:.2} Mbit/s, cache {}",
        spec.iterations,
        network.average_bps() / 1e6,
        match cache {
            Some(c) => format!("{} {} bytes", c.policy, c.capacity),
            None => "off".into(),
        }
    );
    println!(
        "{:<14} {:>13} {:>15} {:>10} {:>10}",
        "policy", "avg quality", "stall (s)", "savings", "from cache"
    );
    for p in &summary.policies {
        println!(
            "{:<14} {:>6.3} ± {:<5.3} {:>7.2} ± {:<5.2} {:>9.1}% {:>9.1}%",
            p.policy.as_str(),
            p.avg_quality.mean,
            p.avg_quality.std,
            p.total_stall.mean,
            p.total_stall.std,
            p.savings.mean * 100.0,
            p.bytes_from_cache_fraction * 100.0
        );
    }
    match summary.quality_gain_percent {
        Some(g) => println!("quality gain of transition over prediction-ba: {g:.2}%"),
        None => println!("quality gain of transition over prediction-ba: n/a"),
    }
    println!("reports written to {}", spec.out.display());
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let mismatches = report::verify(&a.dir)?;
    if mismatches.is_empty() {
        println!("verified: all summaries match {}", report::SEGMENTS);
        Ok(())
    } else {
        Err(fail::Failure::Runtime(format!(
            "summaries differ from {}: {}",
            report::SEGMENTS,
            mismatches.join(", ")
        )))
    }
}
