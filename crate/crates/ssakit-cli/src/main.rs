//! `ssakit` command-line driver: time the schedulers on the benchmark
//! models, check them against the statistical oracle, and calibrate the
//! bucket-parameter advisor on the machine at hand.

mod advisor;
mod bench;
mod config;
mod validate;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{ModelKind, RunConfig};
use ssakit::Method;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Relative `--out` paths are resolved against this environment variable
/// when it is set.
const OUT_DIR_ENV: &str = "SSAKIT_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "ssakit",
    version,
    about = "Benchmark, validate, and tune exact jump-process schedulers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time one model under one scheduler and emit a CSV row.
    Run(RunArgs),
    /// Cross a list of sizes with a list of methods, one CSV row per cell.
    Sweep(SweepArgs),
    /// Statistical exactness, cross-method agreement, and self-audits.
    Validate(ValidateArgs),
    /// Measure cost-model constants and suggest bucket parameters.
    Calibrate(CalibrateArgs),
    /// Write a Gray-Scott U-count grid at a chosen time as CSV.
    Snapshot(SnapshotArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model: kmp | crn | gray-scott | oregonator.
    #[arg(long)]
    model: ModelKind,
    /// Sites (kmp) or reactions (crn).
    #[arg(long, alias = "M")]
    m: Option<u32>,
    /// Grid side for gray-scott; the model has 6*K*K clocks.
    #[arg(long, alias = "K")]
    k: Option<u32>,
}

impl ModelArgs {
    /// One size field per model family; mixing them up is an error rather
    /// than a guess.
    fn size(&self) -> Result<u32> {
        match self.model {
            ModelKind::GrayScott => {
                if self.m.is_some() {
                    bail!("gray-scott is sized with --k, not --m");
                }
                Ok(self.k.unwrap_or(30))
            }
            ModelKind::Oregonator => {
                if self.m.is_some() || self.k.is_some() {
                    bail!("oregonator has a fixed five clocks; drop --m/--k");
                }
                Ok(0)
            }
            _ => {
                if self.k.is_some() {
                    bail!("--k only sizes gray-scott; use --m");
                }
                Ok(self.m.unwrap_or(1000))
            }
        }
    }
}

#[derive(Args)]
struct TuningArgs {
    /// Bucket window length; default is the model's operating point.
    #[arg(long)]
    tau: Option<f64>,
    /// Bucket count; default scales with the model size.
    #[arg(long)]
    q: Option<u32>,
    /// Rate-group capacity hint for the crm method.
    #[arg(long)]
    groups: Option<u32>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Scheduler: dm | frm | nrm | crm | hlm.
    #[arg(long, default_value = "hlm")]
    method: Method,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Model time horizon; 0 is a legal empty run.
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    replicas: u32,
    /// Emit per-event operation counts in the CSV row.
    #[arg(long)]
    counters: bool,
    /// Stop each replica after this many events even if t-end is not
    /// reached.
    #[arg(long)]
    max_events: Option<u64>,
    /// Worker threads for the replicas. More than one suppresses the
    /// wall-clock columns, since contended timings mislead.
    #[arg(long, default_value_t = 1)]
    parallel: u32,
    /// Starting Y1,Y2,Y3 copy numbers for the oregonator.
    #[arg(long, value_delimiter = ',')]
    oregonator_init: Option<Vec<u64>>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Model: kmp | crn | gray-scott | oregonator.
    #[arg(long)]
    model: ModelKind,
    /// Sizes to visit (sites, reactions, or grid sides).
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<u32>,
    /// Methods to cross with the sizes.
    #[arg(long, value_delimiter = ',', default_value = "dm,frm,nrm,crm,hlm")]
    methods: Vec<Method>,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    replicas: u32,
    /// Emit per-event operation counts in the CSV rows.
    #[arg(long)]
    counters: bool,
    /// Stop each replica after this many events.
    #[arg(long)]
    max_events: Option<u64>,
    /// Visit sizes above the built-in cap of one million.
    #[arg(long)]
    allow_large: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Models for the cross-method and audit checks. The oregonator runs
    /// about a minute of simulation per thousand replicas.
    #[arg(long = "model", value_delimiter = ',', default_value = "kmp")]
    models: Vec<ModelKind>,
    /// Replicas per method ensemble; below 1000 the KS comparisons flag
    /// themselves as low power.
    #[arg(long, default_value_t = 1000)]
    replicas: u32,
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the report as CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Model: kmp | crn | gray-scott | oregonator.
    #[arg(long, default_value = "kmp")]
    model: ModelKind,
    #[arg(long, alias = "M")]
    m: Option<u32>,
    #[arg(long, alias = "K")]
    k: Option<u32>,
    /// Window length to price; default is the model's operating point.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SnapshotArgs {
    /// Grid side.
    #[arg(long, alias = "K", default_value_t = 30)]
    k: u32,
    /// Scheduler driving the run.
    #[arg(long, default_value = "hlm")]
    method: Method,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Model time to photograph; 0 is the initial grid.
    #[arg(long)]
    t_snapshot: f64,
    /// Horizon of the run; a snapshot time past it clips to the final
    /// state with a warning.
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the grid here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(args) => cmd_run(args).map(|()| true),
        Command::Sweep(args) => cmd_sweep(args).map(|()| true),
        Command::Validate(args) => cmd_validate(args),
        Command::Calibrate(args) => cmd_calibrate(args).map(|()| true),
        Command::Snapshot(args) => cmd_snapshot(args).map(|()| true),
    }
}

/// Resolve against the output-directory variable and emit, stdout when no
/// path was given.
fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let resolved = match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                _ => path.to_path_buf(),
            };
            if let Some(parent) = resolved.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)
                        .with_context(|| format!("creating {}", parent.display()))?;
                }
            }
            fs::write(&resolved, content)
                .with_context(|| format!("writing {}", resolved.display()))?;
            eprintln!("wrote {}", resolved.display());
            Ok(())
        }
    }
}

fn oregonator_init(flag: Option<Vec<u64>>) -> Result<[u64; 3]> {
    match flag {
        None => Ok([500, 1000, 2000]),
        Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
        Some(v) => bail!("--oregonator-init takes exactly three counts, got {}", v.len()),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = RunConfig::new(args.model.model, args.model.size()?);
    cfg.method = args.method;
    cfg.t_end = args.t_end;
    cfg.tau = args.tuning.tau;
    cfg.q = args.tuning.q;
    cfg.groups = args.tuning.groups;
    cfg.seed = args.seed;
    cfg.replicas = args.replicas;
    cfg.counters = args.counters;
    cfg.max_events = args.max_events.unwrap_or(u64::MAX);
    cfg.oregonator_init = oregonator_init(args.oregonator_init)?;
    cfg.validate()?;
    if args.parallel > 1 {
        eprintln!("parallel replicas: wall-clock columns suppressed");
    }
    let results = bench::run_replicas(&cfg, args.parallel);
    let agg = bench::aggregate(&results, args.parallel <= 1);
    let content = format!("{}\n{}\n", bench::CSV_HEADER, bench::csv_row(&cfg, &agg, "ok"));
    emit(args.out.as_deref(), &content)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut base = RunConfig::new(args.model, 1);
    base.t_end = args.t_end;
    base.tau = args.tuning.tau;
    base.q = args.tuning.q;
    base.groups = args.tuning.groups;
    base.seed = args.seed;
    base.replicas = args.replicas;
    base.counters = args.counters;
    base.max_events = args.max_events.unwrap_or(u64::MAX);
    let rows = bench::sweep(&base, &args.sizes, &args.methods, args.allow_large);
    let mut content = String::from(bench::CSV_HEADER);
    content.push('\n');
    for row in &rows {
        if let Some(status) = row.rsplit(',').next() {
            if status.starts_with("error") {
                eprintln!("sweep cell failed: {status}");
            }
        }
        content.push_str(row);
        content.push('\n');
    }
    emit(args.out.as_deref(), &content)
}

fn cmd_validate(args: ValidateArgs) -> Result<bool> {
    let opts = validate::ValidationOptions {
        models: args.models,
        replicas: args.replicas,
        t_end: args.t_end,
        seed: args.seed,
    };
    let report = validate::run_validation(&opts);
    for r in &report.stats {
        println!("{r}");
    }
    for a in &report.audits {
        match &a.error {
            None => println!("{}: events={} ok", a.name, a.events),
            Some(e) => println!("{}: events={} FAIL ({e})", a.name, a.events),
        }
    }
    if let Some(out) = args.out.as_deref() {
        emit(Some(out), &report.to_csv())?;
    }
    let passed = report.all_passed();
    println!(
        "{} checks, {}",
        report.stats.len() + report.audits.len(),
        if passed { "all passed" } else { "FAILURES above" }
    );
    Ok(passed)
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let model = ModelArgs { model: args.model, m: args.m, k: args.k };
    let mut cfg = RunConfig::new(args.model, model.size()?);
    cfg.seed = args.seed;
    cfg.validate()?;
    let c = advisor::calibrate(&cfg)?;
    let tau = args.tau.unwrap_or_else(|| cfg.default_tau());
    if !(tau > 0.0) || !tau.is_finite() {
        bail!("tau must be finite and positive, got {tau}");
    }
    let clocks = cfg.num_clocks();
    println!("model {} size {} ({} clocks)", cfg.model, cfg.size, clocks);
    println!("c_s        {:>12.3e} s  per scanned record", c.c_s);
    println!("c_u_stay   {:>12.3e} s  per in-place update", c.c_u_stay);
    println!("c_u_relink {:>12.3e} s  extra per cross-bucket relink", c.c_u_relink);
    println!("c_i        {:>12.3e} s  per empty bucket skipped", c.c_i);
    println!("c_r        {:>12.3e} s  per record swept on window advance", c.c_r);
    println!("alpha      {:>12.4}    events per clock per unit time", c.alpha);
    println!(
        "suggested: tau {} -> Q {} (predicted {:.3e} s/event)",
        tau,
        c.suggested_q(clocks, tau),
        c.predicted_cost(tau)
    );
    Ok(())
}

fn cmd_snapshot(args: SnapshotArgs) -> Result<()> {
    let mut cfg = RunConfig::new(ModelKind::GrayScott, args.k);
    cfg.method = args.method;
    cfg.t_end = args.t_end;
    cfg.tau = args.tuning.tau;
    cfg.q = args.tuning.q;
    cfg.groups = args.tuning.groups;
    cfg.seed = args.seed;
    cfg.validate()?;
    if !(args.t_snapshot >= 0.0) {
        bail!("t-snapshot must be non-negative, got {}", args.t_snapshot);
    }
    let (u, clipped) = bench::grid_snapshot(&cfg, args.t_snapshot);
    if clipped {
        eprintln!(
            "warning: t-snapshot {} is past t-end {}; emitting the final state",
            args.t_snapshot, cfg.t_end
        );
    }
    emit(args.out.as_deref(), &bench::grid_csv(&u, args.k))
}
