//! Experiment harness CLI: validate configs, run single simulations, and
//! run baseline-vs-adaptive comparison sweeps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gridcheck::model::{LengthSpec, Policy, SimConfig};
use gridcheck::sweep::{emit, render_csv, run_sweep, EmitFormat, SweepKind, SweepSpec};
use gridcheck::Simulation;

/// Worker-count override for sweeps; 0 forces sequential execution.
const WORKERS_ENV: &str = "GRIDCHECK_WORKERS";

#[derive(Parser)]
#[command(name = "gridcheck", version, about = "Grid checkpointing simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Gridlets,
    Resources,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Baseline,
    Adaptive,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to a JSON config, or the literal `defaults` for the embedded
    /// default configuration.
    #[arg(long, default_value = "defaults")]
    config: String,
    /// Override every gridlet's length with a fixed value in MI.
    #[arg(long, value_name = "MI")]
    fixed_length: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config against all field invariants.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run one simulation and report its metrics.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Write the kernel's tab-separated event trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a baseline-vs-adaptive sweep and emit the comparison table.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Comma-separated seed list, e.g. `1,2,3` (default 1..=10).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Count of the non-swept dimension (defaults: 100 resources for
        /// `gridlets`, 3000 gridlets for `resources`).
        #[arg(long)]
        fixed: Option<u32>,
        #[arg(long)]
        sweep_start: Option<u32>,
        #[arg(long)]
        sweep_end: Option<u32>,
        #[arg(long)]
        sweep_step: Option<u32>,
    },
}

fn load_config(args: &ConfigArgs) -> Result<SimConfig> {
    let mut cfg = if args.config == "defaults" {
        SimConfig::paper_defaults()
    } else {
        let text = std::fs::read_to_string(&args.config)
            .with_context(|| format!("reading config {}", args.config))?;
        SimConfig::from_json_str(&text).with_context(|| format!("parsing config {}", args.config))?
    };
    if let Some(mi) = args.fixed_length {
        cfg.gridlets.length = LengthSpec::Fixed(mi);
    }
    Ok(cfg)
}

fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => {
            let n: usize =
                v.parse().with_context(|| format!("{WORKERS_ENV} must be an integer, got `{v}`"))?;
            Ok(Some(n))
        }
    }
}

fn out_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn cmd_validate(config: &ConfigArgs) -> Result<()> {
    let cfg = load_config(config)?;
    let validated = cfg.validate()?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    println!("config ok: {} resources, {} gridlets, policy {}",
        validated.config.resources.count, validated.config.gridlets.count, validated.config.policy);
    Ok(())
}

fn cmd_run(
    config: &ConfigArgs,
    seed: Option<u64>,
    policy: Option<PolicyArg>,
    out: Option<&Path>,
    format: FormatArg,
    trace: Option<&Path>,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(p) = policy {
        cfg.policy = match p {
            PolicyArg::Baseline => Policy::Baseline,
            PolicyArg::Adaptive => Policy::Adaptive,
        };
    }
    let validated = cfg.validate()?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    let run_policy = validated.config.policy;
    let run_seed = validated.config.seed;
    let mut sim = Simulation::new(validated)?;
    if let Some(p) = trace {
        let f = File::create(p).with_context(|| format!("creating trace {}", p.display()))?;
        sim.set_trace(Box::new(BufWriter::new(f)));
    }
    let report = sim.run()?;
    let mut w = out_writer(out)?;
    match format {
        FormatArg::Json => {
            let doc = serde_json::json!({
                "policy": run_policy,
                "seed": run_seed,
                "report": report,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        FormatArg::Csv => {
            writeln!(w, "policy,seed,n_jobs,makespan,throughput,atat,failures_injected,checkpoints_taken,bytes_replicated,purges_executed")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                run_policy,
                run_seed,
                report.n_jobs,
                report.makespan,
                report.throughput,
                report.atat,
                report.failures_injected,
                report.checkpoint.checkpoints_taken,
                report.checkpoint.bytes_replicated,
                report.checkpoint.purges_executed
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: &ConfigArgs,
    kind: KindArg,
    seeds: Option<Vec<u64>>,
    out: &Path,
    format: FormatArg,
    fixed: Option<u32>,
    sweep_start: Option<u32>,
    sweep_end: Option<u32>,
    sweep_step: Option<u32>,
) -> Result<()> {
    let cfg = load_config(config)?;
    // Validate the base once so clamp warnings surface before the fan-out.
    let validated = cfg.validate()?;
    for w in &validated.warnings {
        eprintln!("warning: {w}");
    }
    let kind = match kind {
        KindArg::Gridlets => SweepKind::VaryGridlets,
        KindArg::Resources => SweepKind::VaryResources,
    };
    let mut spec = SweepSpec::canonical(kind, validated.config);
    if let Some(s) = seeds {
        spec.seeds = s;
    }
    if let Some(f) = fixed {
        spec.fixed_count = f;
    }
    if let Some(v) = sweep_start {
        spec.sweep_start = v;
    }
    if let Some(v) = sweep_end {
        spec.sweep_end = v;
    }
    if let Some(v) = sweep_step {
        spec.sweep_step = v;
    }
    let workers = workers_from_env()?;
    let report = run_sweep(&spec, workers)?;
    let format = match format {
        FormatArg::Csv => EmitFormat::Csv,
        FormatArg::Json => EmitFormat::Json,
    };
    emit(&report, format, out)?;
    if format == EmitFormat::Csv {
        // Echo the table for interactive use; files stay authoritative.
        print!("{}", render_csv(&report));
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { config } => cmd_validate(config),
        Command::Run { config, seed, policy, out, format, trace } => {
            cmd_run(config, *seed, *policy, out.as_deref(), *format, trace.as_deref())
        }
        Command::Sweep { config, kind, seeds, out, format, fixed, sweep_start, sweep_end, sweep_step } => {
            cmd_sweep(
                config,
                *kind,
                seeds.clone(),
                out,
                *format,
                *fixed,
                *sweep_start,
                *sweep_end,
                *sweep_step,
            )
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
