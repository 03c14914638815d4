use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use memrelax::experiment::{run_experiment, ExperimentConfig, ExperimentKind, RawConfig};

/// Relaxation dynamics with memory: kernel and transform checks,
/// thin-interface solves, the limit memory equation, facet networks, and
/// the convergence studies. Every subcommand writes deterministic CSV
/// output plus a manifest of the resolved configuration, and exits nonzero
/// if one of its internal assertions fails.
#[derive(Parser)]
#[command(name = "memrelax", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Memory-kernel sanity suite: positivity, decay, moments, transform
    KernelCheck(RunArgs),
    /// Transform identities and contour inversion against closed forms
    LaplaceCheck(RunArgs),
    /// Solve the thin-interface problem; compare its trace to the limit
    PdeSolve(RunArgs),
    /// Solve the limit memory equation; compare to its closed form
    LimitSolve(RunArgs),
    /// Terminal-error table over the (epsilon, c) sweep
    ErrorTable(RunArgs),
    /// Graph-distance collapse study along the epsilon sweep
    GraphDistance(RunArgs),
    /// Evolve a facet network with junction memory
    Grains(RunArgs),
    /// Check the canonical weight profiles for stationary admissibility
    StationaryTv(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Self::KernelCheck(_) => ExperimentKind::KernelCheck,
            Self::LaplaceCheck(_) => ExperimentKind::LaplaceCheck,
            Self::PdeSolve(_) => ExperimentKind::PdeSolve,
            Self::LimitSolve(_) => ExperimentKind::LimitSolve,
            Self::ErrorTable(_) => ExperimentKind::ErrorTable,
            Self::GraphDistance(_) => ExperimentKind::GraphDistance,
            Self::Grains(_) => ExperimentKind::Grains,
            Self::StationaryTv(_) => ExperimentKind::StationaryTv,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Self::KernelCheck(a)
            | Self::LaplaceCheck(a)
            | Self::PdeSolve(a)
            | Self::LimitSolve(a)
            | Self::ErrorTable(a)
            | Self::GraphDistance(a)
            | Self::Grains(a)
            | Self::StationaryTv(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; explicit flags override its fields
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Adsorption rate a >= 0
    #[arg(long)]
    a: Option<f64>,
    /// Desorption rate b > 0
    #[arg(long)]
    b: Option<f64>,
    /// Initial-dip amplitude c
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Initial-dip decay rate mu >= 0 (defaults to a: well-prepared data)
    #[arg(long)]
    mu: Option<f64>,
    /// Interface thickness epsilon > 0
    #[arg(long)]
    epsilon: Option<f64>,
    /// Bulk relaxation time tau1 > 0
    #[arg(long)]
    tau1: Option<f64>,
    /// Half-domain length L > 0
    #[arg(long = "L")]
    l: Option<f64>,
    /// Number of spatial cells N >= 2
    #[arg(long = "N")]
    n: Option<usize>,
    /// Time step (default (L/N)^2, or 1e-3 for limit-solve/grains)
    #[arg(long)]
    dt: Option<f64>,
    /// Final time
    #[arg(long)]
    t_end: Option<f64>,
    /// Time-stepping weight in [1/2, 1] (1 = backward Euler)
    #[arg(long)]
    theta: Option<f64>,
    /// Output directory (default runs/<subcommand>)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the randomly drawn grain network
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn overrides(&self) -> RawConfig {
        RawConfig {
            a: self.a,
            b: self.b,
            c: self.c,
            mu: self.mu,
            epsilon: self.epsilon,
            tau1: self.tau1,
            l: self.l,
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            theta: self.theta,
            seed: self.seed,
            ..RawConfig::default()
        }
    }
}

fn run(cli: &Cli) -> memrelax::Result<bool> {
    let kind = cli.command.kind();
    let args = cli.command.args();
    let base = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    let raw = base.overridden_by(&args.overrides());
    let cfg = ExperimentConfig::resolve(kind, &raw)?;
    let out_dir =
        args.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(kind.as_str()));
    let report = run_experiment(&cfg, &out_dir)?;
    for line in &report.lines {
        println!("{line}");
    }
    println!("wrote {} file(s) under {}", report.outputs.len(), out_dir.display());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("memrelax: experiment assertion failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("memrelax: error: {e}");
            ExitCode::FAILURE
        }
    }
}
