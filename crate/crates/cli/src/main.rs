//! `hetbench`: run the benchmark suite, verify kernels against their
//! oracles, or replay the bundled reference timing tables.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hetbench::exec::ExecPlan;
use hetbench::harness::{run_suite, BenchConfig, Size, Workload};
use hetbench::oracles::run_all_checks;
use hetbench::report::{render, render_replay, replay_reference_tables, Format};

const SIZES_HELP: &str = "Comma-separated sizes; defaults to the reference grid per workload:\n\
  matmul:  50,100,200,500,1000            (square dimension)\n\
  fft:     1024x32,1024x128,1024x512,1024x1024,2048x2048  (NxM columns)\n\
  qsort:   500,1000,5000,10000,100000,1000000             (array length)\n\
  hamming: 10000,15000,20000,50000,100000                 (info words)";

#[derive(Parser)]
#[command(
    name = "hetbench",
    version,
    about = "Sequential vs data-parallel kernel benchmarks with transfer-cost accounting",
    after_help = "The HETBENCH_WORKERS environment variable overrides the default worker count."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a workload over a size grid and backend sweep, and render a report
    Run(RunArgs),
    /// Check every kernel against its independent oracle
    Verify(VerifyArgs),
    /// Recompute the bundled reference tables' speedup ratios
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WorkloadArg {
    Matmul,
    Fft,
    Qsort,
    Hamming,
}

impl From<WorkloadArg> for Workload {
    fn from(w: WorkloadArg) -> Workload {
        match w {
            WorkloadArg::Matmul => Workload::Matmul,
            WorkloadArg::Fft => Workload::Fft,
            WorkloadArg::Qsort => Workload::Qsort,
            WorkloadArg::Hamming => Workload::Hamming,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    /// Sequential baseline
    Seq,
    /// Worker pool
    Par,
    /// Worker pool behind a timed staging copy boundary
    Staged,
}

impl From<BackendArg> for ExecPlan {
    fn from(b: BackendArg) -> ExecPlan {
        match b {
            BackendArg::Seq => ExecPlan::sequential(),
            BackendArg::Par => ExecPlan::parallel(),
            BackendArg::Staged => ExecPlan::staged(ExecPlan::parallel()),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    workload: WorkloadArg,

    #[arg(long, value_delimiter = ',', long_help = SIZES_HELP)]
    sizes: Option<Vec<String>>,

    /// Backends to sweep
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [BackendArg::Seq, BackendArg::Par, BackendArg::Staged])]
    backends: Vec<BackendArg>,

    /// Timed repetitions per cell
    #[arg(long, default_value_t = 30)]
    reps: usize,

    /// Untimed warmup repetitions per cell
    #[arg(long, default_value_t = 10)]
    warmup: usize,

    /// Seed for all input generation and channel noise
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// BSC crossover probability (hamming workload only)
    #[arg(long = "bsc-p", default_value_t = 0.01)]
    bsc_p: f64,

    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Only run the checks of one workload
    #[arg(long, value_enum)]
    workload: Option<WorkloadArg>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Table to replay: 1, 2, 3, 4, or all
    #[arg(long, default_value = "all")]
    table: String,
}

const USAGE: u8 = 2;
const FAILURE: u8 = 1;

fn build_config(args: &RunArgs) -> hetbench::Result<BenchConfig> {
    let workload: Workload = args.workload.into();
    let mut cfg = BenchConfig::new(workload);
    if let Some(tokens) = &args.sizes {
        cfg.sizes = tokens
            .iter()
            .map(|t| Size::parse(workload, t))
            .collect::<hetbench::Result<Vec<_>>>()?;
    }
    cfg.backends = args.backends.iter().map(|&b| b.into()).collect();
    cfg.reps = args.reps;
    cfg.warmup = args.warmup;
    cfg.seed = args.seed;
    cfg.bsc_p = args.bsc_p;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> ExitCode {
    // Flags validate before any work starts; config problems are usage errors.
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let report = match run_suite(&cfg) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILURE);
        }
    };
    let text = match render(&report, args.format.into()) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILURE);
        }
    };
    match args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(FAILURE);
            }
            eprintln!("report written to {}", path.display());
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let checks = run_all_checks(args.workload.map(Into::into));
    let mut failed = 0;
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<32} {}", check.name, check.detail);
        if !check.passed {
            failed += 1;
        }
    }
    println!("{}/{} checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE)
    }
}

fn cmd_replay(args: ReplayArgs) -> ExitCode {
    let which = match args.table.as_str() {
        "all" => None,
        t => match t.parse::<u8>() {
            Ok(t) if (1..=4).contains(&t) => Some(t),
            _ => {
                eprintln!("error: invalid table '{t}' (expected 1, 2, 3, 4, or all)");
                return ExitCode::from(USAGE);
            }
        },
    };
    let text = match render_replay(which) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILURE);
        }
    };
    print!("{text}");
    let discrepancies = match replay_reference_tables(which) {
        Ok(ds) => ds,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILURE);
        }
    };
    let known = discrepancies.iter().filter(|d| d.known).count();
    println!("{} discrepancies ({} known)", discrepancies.len(), known);
    // The catalogued transcription defect stays visible but does not fail CI.
    if discrepancies.iter().any(|d| !d.known) {
        ExitCode::from(FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Replay(args) => cmd_replay(args),
    }
}
