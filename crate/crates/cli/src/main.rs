use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flexhull_cli::bench::{run_benchmark, run_robustness, write_outputs, write_robustness};
use flexhull_cli::config::BenchConfig;
use flexhull_cli::data::{
    read_json, write_demand_csv, write_json, write_prices_csv, write_schedule_csv, FleetFile,
    VertexFile, WeightsFile,
};
use flexhull_cli::scenario::generate_scenario;
use flexhull_core::{aggregate_with, disaggregate, sample_sign_vectors, AggregateOptions};

#[derive(Parser)]
#[command(
    name = "flexhull",
    version,
    about = "Battery fleet flexibility aggregation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark matrices.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Build the vertex matrix of a fleet (JSON in, JSON out).
    Aggregate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split hull weights (or an aggregate point) into per-device schedules.
    Disaggregate {
        #[arg(long)]
        vertices: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Run the (n, d) matrix and write results, summary and timings.
    Run(ConfigArg),
    /// Redraw the sign vectors per tuple and report the UPR spread.
    Robustness(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `out_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Write fleet.json, demand.csv and prices.csv into a directory.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(arg: &ConfigArg) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::from_path(&arg.config)?;
    cfg.apply_env()?;
    if let Some(out) = &arg.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn bench_run(arg: &ConfigArg) -> Result<()> {
    let cfg = load_config(arg)?;
    let out = run_benchmark(&cfg);
    write_outputs(&cfg.out_dir, &out)?;
    let failed = out.rows.iter().filter(|r| r.z_approx.is_none()).count();
    eprintln!(
        "{} rows written to {} ({failed} without a hull value)",
        out.rows.len(),
        cfg.out_dir.display()
    );
    Ok(())
}

fn bench_robustness(arg: &ConfigArg) -> Result<()> {
    let cfg = load_config(arg)?;
    let rows = run_robustness(&cfg);
    write_robustness(&cfg.out_dir, &rows)?;
    eprintln!("{} rows written to {}", rows.len(), cfg.out_dir.display());
    Ok(())
}

fn aggregate_cmd(spec: &Path, out: &Path) -> Result<()> {
    let fleet: FleetFile = read_json(spec)?;
    let Some(first) = fleet.devices.first() else {
        bail!("{}: fleet has no devices", spec.display());
    };
    let d = first.d;
    let g = fleet.g.unwrap_or(d * d);
    let vm = aggregate_with(
        &fleet.devices,
        sample_sign_vectors(d, g, fleet.seed),
        AggregateOptions {
            retain_per_device: true,
            zero_column: fleet.zero_column,
        },
    )
    .with_context(|| format!("aggregating {}", spec.display()))?;
    write_json(out, &VertexFile::from(&vm))?;
    Ok(())
}

fn disaggregate_cmd(vertices: &Path, weights: &Path, out: &Path) -> Result<()> {
    let vm = read_json::<VertexFile>(vertices)?.into_matrix()?;
    let w: WeightsFile = read_json(weights)?;
    let hw = w.resolve(&vm)?;
    let result = disaggregate(&hw, &vm)?;
    write_schedule_csv(out, &result)?;
    Ok(())
}

fn scenario_gen(n: usize, d: usize, seed: u64, out: &Path) -> Result<()> {
    if n == 0 || d == 0 {
        bail!("--n and --d must be at least 1");
    }
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let s = generate_scenario(n, d, seed);
    let fleet = FleetFile {
        devices: s.specs,
        g: Some(d * d),
        seed,
        zero_column: true,
    };
    write_json(&out.join("fleet.json"), &fleet)?;
    write_demand_csv(&out.join("demand.csv"), &s.demand)?;
    write_prices_csv(&out.join("prices.csv"), &s.prices)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench(BenchCommand::Run(arg)) => bench_run(&arg),
        Command::Bench(BenchCommand::Robustness(arg)) => bench_robustness(&arg),
        Command::Aggregate { spec, out } => aggregate_cmd(&spec, &out),
        Command::Disaggregate {
            vertices,
            weights,
            out,
        } => disaggregate_cmd(&vertices, &weights, &out),
        Command::Scenario(ScenarioCommand::Gen { n, d, seed, out }) => {
            scenario_gen(n, d, seed, &out)
        }
    }
}
