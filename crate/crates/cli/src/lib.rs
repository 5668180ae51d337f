//! `randomizer` command-line front end. [`run`] parses argv, executes one
//! subcommand inside a sized worker pool and returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use randomizer_core::bounds::{summarize, BoundConstants};
use randomizer_core::certify::{paper_delta, verdict, BSource, Discretization, OptimizerParams};
use randomizer_core::channel::{build_random_channel, build_weyl_channel};
use randomizer_core::experiments::io::{
    certificate_to_json, concentration_csv, load_channel, load_net, parse_json, save_channel, save_net, sweep_csv,
};
use randomizer_core::experiments::{item_stream, run_concentration_trial, run_randomizing_sweep, CellOutcome, SweepConfig};
use randomizer_core::netcover::{audit_covering, build_delta_net, check_net_feasible};
use randomizer_core::{Channel, PureState, RngStream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "randomizer", version, about = "Build random unitary channels and certify ε-randomization")]
struct Cli {
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true, env = "RANDOMIZER_THREADS", value_parser = positive_usize)]
    threads: Option<usize>,
    /// Print stage timings to standard error
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a channel of Haar unitaries (or the Weyl channel) and save it as JSON
    SampleChannel(SampleChannelArgs),
    /// Certify or refute that a saved channel is ε-randomizing
    Verify(VerifyArgs),
    /// Build a δ-net of pure states by greedy packing and save it as JSON
    Net(NetArgs),
    /// Estimate the covering radius of a saved net by random probing
    AuditNet(AuditNetArgs),
    /// Monte Carlo tail of the pair statistic against its concentration bound
    Concentration(ConcentrationArgs),
    /// Certification rates over a (d, ε, N) grid
    Sweep(SweepArgs),
    /// Sample-size bounds for a dimension and ε
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Haar,
    Weyl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pair {
    /// φ = ψ = |0⟩
    Zero,
    /// one uniformly random pair drawn from the seed
    Random,
}

#[derive(Debug, Args)]
struct SampleChannelArgs {
    /// Hilbert-space dimension d
    #[arg(long, value_parser = positive_usize)]
    dim: usize,
    /// Number of unitaries N (required for haar; must be d² if given for weyl)
    #[arg(long, value_parser = positive_usize)]
    count: Option<usize>,
    /// Channel family
    #[arg(long, value_enum, default_value = "haar")]
    kind: Kind,
    /// RNG seed (generated and reported when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Output channel JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OptimizerArgs {
    /// Random restarts of the alternating maximization
    #[arg(long, value_parser = positive_usize)]
    restarts: Option<usize>,
    /// Stop an ascent when the improvement falls below this
    #[arg(long, value_parser = positive_f64)]
    tol: Option<f64>,
    /// Iteration cap per ascent
    #[arg(long, value_parser = positive_usize)]
    max_iters: Option<usize>,
}

impl OptimizerArgs {
    fn apply(&self, mut p: OptimizerParams) -> OptimizerParams {
        if let Some(r) = self.restarts {
            p.restarts = r;
        }
        if let Some(t) = self.tol {
            p.tol = t;
        }
        if let Some(m) = self.max_iters {
            p.max_iters = m;
        }
        p
    }
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Channel JSON to verify
    #[arg(long)]
    channel: PathBuf,
    /// Target ε in (0, 1)
    #[arg(long, value_parser = open_unit)]
    epsilon: f64,
    /// Net resolution in (0, 1/2) (default ε/(3+2ε))
    #[arg(long, value_parser = net_delta)]
    delta: Option<f64>,
    /// Use a saved net instead of building one
    #[arg(long, conflicts_with = "implicit_net")]
    net: Option<PathBuf>,
    /// Bound the net supremum by the superoperator norm instead of listing a net
    #[arg(long)]
    implicit_net: bool,
    /// Fixed consecutive-rejection stop when building the net
    #[arg(long, value_parser = positive_usize)]
    stop_k: Option<usize>,
    /// Output certificate JSON
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include wall-clock timings in the certificate (breaks byte-identical reruns)
    #[arg(long)]
    timings: bool,
    /// RNG seed for the net and the optimizer (generated and reported when omitted)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
struct NetArgs {
    /// Hilbert-space dimension d
    #[arg(long, value_parser = positive_usize)]
    dim: usize,
    /// Covering radius δ in (0, 2]; states are kept δ/2 apart
    #[arg(long, value_parser = packing_delta)]
    delta: f64,
    /// Fixed consecutive-rejection stop (default max(1000, 20·|net|))
    #[arg(long, value_parser = positive_usize)]
    stop_k: Option<usize>,
    /// RNG seed (generated and reported when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Output net JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AuditNetArgs {
    /// Net JSON to audit
    #[arg(long)]
    net: PathBuf,
    /// Number of uniformly random probe states
    #[arg(long, default_value = "100000", value_parser = positive_usize)]
    trials: usize,
    /// RNG seed (generated and reported when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Output audit report JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConcentrationArgs {
    /// Hilbert-space dimension d
    #[arg(long, value_parser = positive_usize)]
    dim: usize,
    /// Comma-separated channel sizes N
    #[arg(long = "count", value_delimiter = ',', required = true, value_parser = positive_usize)]
    counts: Vec<usize>,
    /// Comma-separated deviations δ in (0, 1)
    #[arg(long = "delta", value_delimiter = ',', required = true, value_parser = open_unit)]
    deltas: Vec<f64>,
    /// Channels drawn per cell
    #[arg(long, default_value = "10000", value_parser = positive_usize)]
    trials: usize,
    /// Test pair (φ, ψ)
    #[arg(long, value_enum, default_value = "zero")]
    pair: Pair,
    /// RNG seed (generated and reported when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Grid JSON {dims, epsilons, counts, channels_per_cell, optimizer, stop_k, implicit_when_infeasible, seed}
    #[arg(long, conflicts_with_all = ["dims", "epsilons", "counts"])]
    grid: Option<PathBuf>,
    /// Comma-separated dimensions
    #[arg(long, value_delimiter = ',', value_parser = positive_usize)]
    dims: Vec<usize>,
    /// Comma-separated ε values in (0, 1)
    #[arg(long, value_delimiter = ',', value_parser = open_unit)]
    epsilons: Vec<f64>,
    /// Comma-separated channel sizes N
    #[arg(long, value_delimiter = ',', value_parser = positive_usize)]
    counts: Vec<usize>,
    /// Channels per cell (default 20)
    #[arg(long, value_parser = positive_usize)]
    channels: Option<usize>,
    /// Fixed consecutive-rejection stop when building nets
    #[arg(long, value_parser = positive_usize)]
    stop_k: Option<usize>,
    /// Use the superoperator bound for cells whose net is too large instead of skipping them
    #[arg(long)]
    implicit_when_infeasible: bool,
    /// RNG seed; overrides the grid file (generated and reported when neither gives one)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
    /// Output CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output full report JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Hilbert-space dimension d
    #[arg(long, value_parser = positive_usize)]
    dim: usize,
    /// Target ε in (0, 1)
    #[arg(long, value_parser = open_unit)]
    epsilon: f64,
    /// Concentration constant c (default 1/(6 ln 2))
    #[arg(long = "c", value_parser = positive_f64)]
    c: Option<f64>,
    /// Sample-size constant C (default 150)
    #[arg(long = "C", value_parser = positive_f64)]
    big_c: Option<f64>,
    /// Also write the JSON to this path
    #[arg(long)]
    out: Option<PathBuf>,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be positive".into())
    }
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("must lie in (0, 1)".into())
    }
}

fn net_delta(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 0.5 {
        Ok(v)
    } else {
        Err("must lie in (0, 1/2)".into())
    }
}

fn packing_delta(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 2.0 {
        Ok(v)
    } else {
        Err("must lie in (0, 2]".into())
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<randomizer_core::Error> for Failure {
    fn from(e: randomizer_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

struct Seed {
    value: u64,
    generated: bool,
}

impl Seed {
    fn resolve(given: Option<u64>) -> Self {
        match given {
            Some(value) => Seed { value, generated: false },
            None => Seed { value: rand::random(), generated: true },
        }
    }
}

impl std::fmt::Display for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.generated {
            write!(f, "seed={} (generated)", self.value)
        } else {
            write!(f, "seed={}", self.value)
        }
    }
}

fn at_path(path: &Path) -> impl FnOnce(randomizer_core::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 on a usage error, 2 when the operation fails.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };
    let verbose = cli.verbose;
    match pool.install(|| dispatch(cli.command, verbose)) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, verbose: bool) -> Outcome {
    match command {
        Command::SampleChannel(a) => sample_channel(a),
        Command::Verify(a) => verify(a, verbose),
        Command::Net(a) => net(a, verbose),
        Command::AuditNet(a) => audit_net(a),
        Command::Concentration(a) => concentration(a),
        Command::Sweep(a) => sweep(a, verbose),
        Command::Bounds(a) => bounds(a),
    }
}

fn sample_channel(a: SampleChannelArgs) -> Outcome {
    let (ch, seed): (Channel, Option<Seed>) = match a.kind {
        Kind::Haar => {
            let count = a.count.ok_or_else(|| Failure::Usage("--count is required for --kind haar".into()))?;
            let seed = Seed::resolve(a.seed);
            (build_random_channel(a.dim, count, &mut RngStream::new(seed.value, 0))?, Some(seed))
        }
        Kind::Weyl => {
            if let Some(n) = a.count.filter(|&n| n != a.dim * a.dim) {
                return Err(Failure::Usage(format!("the Weyl channel has d² = {} unitaries, not {n}", a.dim * a.dim)));
            }
            (build_weyl_channel(a.dim)?, None)
        }
    };
    save_channel(&a.out, &ch).map_err(at_path(&a.out))?;
    let seed = seed.map(|s| format!(", {s}")).unwrap_or_default();
    Ok(format!(
        "sample-channel: wrote {} {:?} unitaries of dimension {}{seed} to {}",
        ch.count(),
        a.kind,
        ch.dim(),
        a.out.display()
    ))
}

fn verify(a: VerifyArgs, verbose: bool) -> Outcome {
    let ch = load_channel(&a.channel).map_err(at_path(&a.channel))?;
    let params = a.optimizer.apply(OptimizerParams::default());
    let seed = Seed::resolve(a.seed);
    let delta = match a.delta {
        Some(d) => d,
        None => paper_delta(a.epsilon)?,
    };

    let started = Instant::now();
    let loaded;
    let built;
    let disc = if let Some(path) = &a.net {
        loaded = load_net(path).map_err(at_path(path))?;
        if loaded.dim != ch.dim() {
            return Err(Failure::Runtime(format!("net dimension {} does not match channel dimension {}", loaded.dim, ch.dim())));
        }
        if let Some(d) = a.delta.filter(|&d| d != loaded.delta) {
            return Err(Failure::Usage(format!("--delta {d} disagrees with the net's delta {}", loaded.delta)));
        }
        Discretization::Net(&loaded)
    } else if a.implicit_net || check_net_feasible(ch.dim(), delta).is_err() {
        Discretization::Implicit { delta }
    } else {
        built = build_delta_net(ch.dim(), delta, &mut RngStream::new(seed.value, 0), a.stop_k)?;
        Discretization::Net(&built)
    };
    if verbose {
        eprintln!("net ready in {:.3}s", started.elapsed().as_secs_f64());
    }

    let cert = verdict(&ch, a.epsilon, disc, &params, &RngStream::new(seed.value, 1))?;
    if verbose {
        eprintln!("B in {:.1} ms, lower bound in {:.1} ms", cert.timings.b_ms, cert.timings.lower_ms);
    }
    if let Some(path) = &a.report {
        write_file(path, &certificate_to_json(&cert, a.timings))?;
    }
    let source = match cert.b_source {
        BSource::NetScan { net_size, .. } => format!("net of {net_size} states"),
        BSource::SuperoperatorBound => "superoperator bound".to_string(),
    };
    Ok(format!(
        "verify: {:?} (d={}, N={}, epsilon={}, delta={}, A_upper={:.6e}, A_lower={:.6e}, threshold={:.6e}, B via {source}, {seed})",
        cert.verdict,
        cert.dim,
        cert.count,
        cert.epsilon,
        cert.delta,
        cert.a_upper,
        cert.a_lower,
        cert.threshold()
    ))
}

fn net(a: NetArgs, verbose: bool) -> Outcome {
    let seed = Seed::resolve(a.seed);
    let started = Instant::now();
    let net = build_delta_net::<f64>(a.dim, a.delta, &mut RngStream::new(seed.value, 0), a.stop_k)?;
    if verbose {
        eprintln!("built in {:.3}s", started.elapsed().as_secs_f64());
    }
    save_net(&a.out, &net).map_err(at_path(&a.out))?;
    Ok(format!(
        "net: {} states (d={}, delta={}, stop_k={}, {} rejections, {seed}) written to {}",
        net.len(),
        net.dim,
        net.delta,
        net.stop_k,
        net.rejections,
        a.out.display()
    ))
}

fn audit_net(a: AuditNetArgs) -> Outcome {
    let net = load_net(&a.net).map_err(at_path(&a.net))?;
    let seed = Seed::resolve(a.seed);
    let report = audit_covering(&net, a.trials, &RngStream::new(seed.value, 0))?;
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_file(path, &text)?;
    }
    Ok(format!(
        "audit-net: {} failures in {} trials (net of {} states, delta={}, max gap {:.6}, {seed})",
        report.failures, report.trials, report.net_size, report.delta, report.max_gap
    ))
}

fn concentration(a: ConcentrationArgs) -> Outcome {
    let seed = Seed::resolve(a.seed);
    let consts = BoundConstants::default();
    let (phi, psi) = match a.pair {
        Pair::Zero => (PureState::basis(a.dim, 0)?, PureState::basis(a.dim, 0)?),
        Pair::Random => {
            let mut rng = RngStream::new(seed.value, 0);
            (PureState::random(a.dim, &mut rng)?, PureState::random(a.dim, &mut rng)?)
        }
    };
    let mut reports = Vec::new();
    for &n in &a.counts {
        for &delta in &a.deltas {
            let cell = reports.len() as u64;
            let rng = RngStream::new(seed.value, item_stream(cell, 0));
            reports.push(run_concentration_trial(a.dim, n, delta, a.trials, &phi, &psi, &rng, &consts)?);
        }
    }
    if let Some(path) = &a.out {
        write_file(path, &concentration_csv(&reports))?;
    }
    let vacuous = reports.iter().filter(|r| r.vacuous).count();
    let above = reports.iter().filter(|r| !r.vacuous && r.empirical_tail > r.bound).count();
    Ok(format!(
        "concentration: {} cells (d={}, {} trials each), {vacuous} vacuous, {above} with empirical tail above the bound, {seed}",
        reports.len(),
        a.dim,
        a.trials
    ))
}

fn sweep(a: SweepArgs, verbose: bool) -> Outcome {
    let (mut config, file_seed) = match &a.grid {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            let value = parse_json(&text)?;
            let file_seed = value.get("seed").and_then(|s| s.as_u64());
            let config: SweepConfig =
                serde_json::from_value(value).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
            (config, file_seed)
        }
        None => {
            if a.dims.is_empty() || a.epsilons.is_empty() || a.counts.is_empty() {
                return Err(Failure::Usage("give --grid or all of --dims, --epsilons and --counts".into()));
            }
            let config = SweepConfig {
                dims: a.dims.clone(),
                epsilons: a.epsilons.clone(),
                counts: a.counts.clone(),
                channels_per_cell: 20,
                optimizer: OptimizerParams::default(),
                stop_k: None,
                implicit_when_infeasible: false,
                seed: 0,
            };
            (config, None)
        }
    };
    let seed = Seed::resolve(a.seed.or(file_seed));
    config.seed = seed.value;
    if let Some(c) = a.channels {
        config.channels_per_cell = c;
    }
    if a.stop_k.is_some() {
        config.stop_k = a.stop_k;
    }
    config.implicit_when_infeasible |= a.implicit_when_infeasible;
    config.optimizer = a.optimizer.apply(config.optimizer);

    let started = Instant::now();
    let report = run_randomizing_sweep(&config)?;
    if verbose {
        eprintln!("sweep finished in {:.3}s", started.elapsed().as_secs_f64());
    }
    if let Some(path) = &a.out {
        write_file(path, &sweep_csv(&report))?;
    }
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_file(path, &text)?;
    }
    let skipped = report.cells.iter().filter(|c| matches!(c.outcome, CellOutcome::Skipped { .. })).count();
    Ok(format!(
        "sweep: {} cells ({skipped} skipped), {} channels per cell, {seed}",
        report.cells.len(),
        config.channels_per_cell
    ))
}

fn bounds(a: BoundsArgs) -> Outcome {
    let defaults = BoundConstants::default();
    let consts = BoundConstants::new(a.c.unwrap_or(defaults.c), a.big_c.unwrap_or(defaults.big_c))?;
    let summary = summarize(a.dim, a.epsilon, &consts)?;
    let text = serde_json::to_string(&summary).map_err(|e| Failure::Runtime(e.to_string()))?;
    if let Some(path) = &a.out {
        let pretty = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Runtime(e.to_string()))?;
        write_file(path, &pretty)?;
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn value_parsers() {
        assert!(positive_usize("0").is_err());
        assert_eq!(positive_usize("3"), Ok(3));
        assert!(open_unit("1").is_err());
        assert!(open_unit("nan").is_err());
        assert_eq!(open_unit("0.5"), Ok(0.5));
        assert!(net_delta("0.5").is_err());
        assert_eq!(packing_delta("2"), Ok(2.0));
        assert!(positive_f64("-1").is_err());
    }

    #[test]
    fn seed_display() {
        assert_eq!(Seed { value: 7, generated: false }.to_string(), "seed=7");
        assert_eq!(Seed { value: 7, generated: true }.to_string(), "seed=7 (generated)");
    }
}
