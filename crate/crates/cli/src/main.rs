use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stokeslab::report::Status;
use stokeslab::{run_experiment, ExperimentConfig, ExperimentId};

#[derive(Parser)]
#[command(
    name = "stokeslab",
    version,
    about = "Numerical checks of half-space Stokes boundary-layer estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, or `all` of them.
    Run {
        experiment: String,
        /// TOML file overriding the built-in parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; each experiment writes into `<out>/<id>/`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the inner sweeps.
        #[arg(long)]
        threads: Option<usize>,
        /// Coarse grids and looser tolerances for a fast pass.
        #[arg(long)]
        quick: bool,
    },
    /// List the experiments and the claims they test.
    List,
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for id in ExperimentId::ALL {
                println!("{:<18} {}", id.name(), id.claim());
            }
            println!("{:<18} every experiment above", "all");
            ExitCode::SUCCESS
        }
        Command::Run {
            experiment,
            config,
            out,
            threads,
            quick,
        } => run(&experiment, config, out, threads, quick),
    }
}

fn run(
    experiment: &str,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    quick: bool,
) -> ExitCode {
    let (selection, cfg) =
        match ExperimentConfig::load(experiment, config.as_deref(), out.as_deref(), quick) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(CONFIG_ERROR);
            }
        };
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(CONFIG_ERROR);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    }
    let mut failed = false;
    for id in selection.experiments() {
        let output = run_experiment(id, &cfg);
        let dir = cfg.out_dir.join(id.name());
        if let Err(e) = output.write(&dir) {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
        let r = &output.report;
        println!(
            "{} ({:.1} s) -> {}",
            r.experiment,
            r.timings.total_seconds,
            dir.display()
        );
        for c in &r.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
                Status::Skipped => "skip",
            };
            let kind = if c.hard { "" } else { " (soft)" };
            println!("  {status:<5} {}{kind}", c.name);
            if matches!(c.status, Status::Error) {
                if let Some(note) = &c.note {
                    println!("        {note}");
                }
            }
        }
        failed |= !r.passed;
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
