use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ura_esprit::bench::{complexity_table, emit, run_experiment, ExperimentConfig, RunOptions};
use ura_esprit::rng::trial_seed;
use ura_esprit::sim::{dump_snapshots, generate};

#[derive(Parser)]
#[command(name = "bench", about = "Monte Carlo benchmarks for URA angular-spread estimation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a sweep and write CSV tables and plots.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print operation counts for one configuration.
    Complexity {
        #[arg(long)]
        m: u128,
        #[arg(long)]
        t: u128,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 11)]
        grid_doa: u128,
        #[arg(long, default_value_t = 10)]
        grid_spread: u128,
    },
    /// Write the first trial's snapshots of every sweep point.
    DumpSnapshots {
        config: PathBuf,
        #[arg(long, default_value = "snapshots")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> ura_esprit::Result<()> {
    match cli.cmd {
        Cmd::Run { config, out, threads, seed } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
            let res = run_experiment(&cfg, &RunOptions { threads, seed })?;
            for d in &res.diagnostics {
                if !d.failures.is_empty() {
                    log::warn!("{} failed trials at {} = {}", d.failures.len(), res.axis.name(), d.sweep_value);
                }
            }
            let files = emit(&res, &dir)?;
            log::info!("wrote {}", files.rmse.display());
            println!("{}", dir.display());
        }
        Cmd::Complexity { m, t, k, grid_doa, grid_spread } => {
            println!("method,d,complexity");
            for r in complexity_table(m, t, k, grid_doa, grid_spread) {
                println!("{},{},{}", r.method.name(), r.d, r.count);
            }
        }
        Cmd::DumpSnapshots { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            std::fs::create_dir_all(&out).map_err(|e| ura_esprit::Error::Config(format!("{}: {e}", out.display())))?;
            for p in cfg.points()? {
                let x = generate(&p.geometry, &p.sources, cfg.snapshots, cfg.noise_var, trial_seed(cfg.seed, p.index as u64, 0))?;
                let path = out.join(format!("point{:03}.bin", p.index));
                dump_snapshots(&x, &path)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}
