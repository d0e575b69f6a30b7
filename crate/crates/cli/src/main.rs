//! Command-line entry point.
//!
//! `bspsort sort` generates input, runs one sorting algorithm with timing
//! and verification, and prints a result table; `bspsort model` prints the
//! cost-model estimate for an algorithm at a given problem size.
//!
//! Exit codes: 0 success, 1 verification/run failure, 2 usage or
//! configuration error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bspsort::model::{self, Algo};
use bspsort_cli::gen::Distribution;
use bspsort_cli::runner::{detect_machine, run_experiment, ExperimentConfig, RunnerError};
use bspsort_cli::table::{emit_table, parse_n, TableFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    #[value(name = "sr4")]
    Sr4,
    #[value(name = "pr4")]
    Pr4,
    #[value(name = "pr2")]
    Pr2,
    #[value(name = "btn")]
    Btn,
    #[value(name = "oet")]
    Oet,
    #[value(name = "gsd")]
    Gsd,
    #[value(name = "gvr")]
    Gvr,
    #[value(name = "ger")]
    Ger,
}

impl AlgoArg {
    fn name(self) -> &'static str {
        match self {
            AlgoArg::Sr4 => "sr4",
            AlgoArg::Pr4 => "pr4",
            AlgoArg::Pr2 => "pr2",
            AlgoArg::Btn => "btn",
            AlgoArg::Oet => "oet",
            AlgoArg::Gsd => "gsd",
            AlgoArg::Gvr => "gvr",
            AlgoArg::Ger => "ger",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bspsort",
    about = "Multicore integer sorting benchmarks over a superstep runtime",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sorting algorithm with timing, verification and table output.
    Sort(SortArgs),
    /// Print the cost-model estimate and predicted speedup for an algorithm.
    Model(ModelArgs),
}

#[derive(Args)]
struct SortArgs {
    /// Algorithm to run.
    #[arg(long)]
    algo: AlgoArg,
    /// Key count; accepts raw counts or the aliases 8M, 32M, 128M
    /// (nM = n·1024·10³ keys).
    #[arg(long, value_parser = parse_n)]
    n: usize,
    /// Worker count.
    #[arg(long)]
    p: usize,
    /// PRNG seed; repetition r uses seed + r.
    #[arg(long)]
    seed: u64,
    /// Recorded repetitions per experiment.
    #[arg(long, default_value_t = 4)]
    reps: usize,
    /// Input distribution.
    #[arg(long, value_enum, default_value_t = Distribution::Uniform32)]
    dist: Distribution,
    /// Output format.
    #[arg(long, value_enum, default_value_t = TableFormat::Paper)]
    format: TableFormat,
    /// Oversampling regularity ω; defaults to max(1, ⌈lg lg n⌉).
    #[arg(long)]
    omega: Option<f64>,
    /// Bucket-slack parameter ε for the statistical balance bound.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Failure-probability exponent ρ for the statistical balance bound.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Discarded warm-up repetitions before the recorded ones.
    #[arg(long, default_value_t = 0)]
    warmup: usize,
}

#[derive(Args)]
struct ModelArgs {
    /// Algorithm to estimate.
    #[arg(long)]
    algo: AlgoArg,
    /// Key count; accepts raw counts or the aliases 8M, 32M, 128M.
    #[arg(long, value_parser = parse_n)]
    n: usize,
    /// Worker count.
    #[arg(long)]
    p: usize,
    /// Slow-memory to fast-memory cost ratio g/G.
    #[arg(long = "g-over-G", default_value_t = 5.0)]
    g_over_big_g: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sort(args) => run_sort(args),
        Command::Model(args) => run_model(args),
    }
}

fn run_sort(args: SortArgs) -> ExitCode {
    let cfg = ExperimentConfig {
        algo: args.algo.name().to_string(),
        n: args.n,
        p: args.p,
        seed: args.seed,
        reps: args.reps,
        warmup: args.warmup,
        dist: args.dist,
        omega: args.omega,
        epsilon: args.epsilon,
        rho: args.rho,
    };
    let machine = detect_machine();
    eprintln!(
        "run: algo={} n={} p={} seed={} reps={} warmup={} dist={} cores={} threads={}",
        cfg.algo,
        cfg.n,
        cfg.p,
        cfg.seed,
        cfg.reps,
        cfg.warmup,
        cfg.dist.name(),
        machine.physical_cores,
        machine.logical_cpus,
    );
    let records = match run_experiment(&cfg) {
        Ok(records) => records,
        Err(e @ RunnerError::Config(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if records.is_empty() {
        eprintln!("warning: no records to tabulate");
        return ExitCode::SUCCESS;
    }
    let mean_speedup = records.iter().map(|r| r.speedup).sum::<f64>() / records.len() as f64;
    eprintln!("mean speedup over sr4: {mean_speedup:.2}");
    print!("{}", emit_table(&records, args.format));
    ExitCode::SUCCESS
}

fn run_model(args: ModelArgs) -> ExitCode {
    let algo = Algo::parse(args.algo.name()).expect("arg enum covers all algorithms");
    let machine = model::MbspParams::with_ratio(args.p, 1.0, args.g_over_big_g);
    let estimate = match model::cost_of_with_ratio(
        algo,
        args.n as f64,
        args.p,
        machine.fast_cost,
        args.g_over_big_g,
    ) {
        Ok(estimate) => estimate,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    println!(
        "algo={} n={} (p={} l={} g={} m={} L={} G={} M={})",
        args.algo.name(),
        args.n,
        machine.workers,
        machine.latency,
        machine.ram_cost,
        machine.memory_units,
        machine.unit_latency,
        machine.fast_cost,
        machine
            .fast_capacity
            .map_or("unbounded".to_string(), |m| m.to_string()),
    );
    for (name, value) in &estimate.terms {
        println!("  {name:<18} {value:.1}");
    }
    println!("  {:<18} {:.1}", "total", estimate.total);
    if let Some(n_max) = estimate.n_max {
        println!("  {:<18} {n_max:.1}", "n_max");
    }
    let predicted = if (args.g_over_big_g - 5.0).abs() < 1e-12 {
        model::predicted_speedup(algo, args.n as f64, args.p, 1.0)
    } else {
        model::speedup_with_ratio(algo, args.n as f64, args.p, 1.0, args.g_over_big_g)
    };
    match predicted {
        Ok(s) => println!("  {:<18} {s:.4}", "speedup-vs-sr4"),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::SUCCESS
}
