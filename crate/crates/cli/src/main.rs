use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hypmass_cli::commands::{run, Command};
use hypmass_cli::{exit, load_config};

#[derive(Parser)]
#[command(name = "hypmass", version, about = "Energy-momentum of asymptotically hyperbolic initial data")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON config file; defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Extrapolated energy-momentum of a metric or a mass aspect.
    Mass,
    /// Residual checks: static potentials, Killing fields, boosts, graph constraints.
    Verify,
    /// Scan the gluing parameter and locate the causal threshold.
    Glue,
    /// Evaluate the constraint operator and dominant energy condition on a sample.
    Constraints,
    /// Map cap boundaries through the opening boost.
    BoostDemo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("HYPMASS_THREADS") {
        match threads.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: HYPMASS_THREADS must be a positive integer");
                return ExitCode::from(exit::CONFIG);
            }
        }
    }
    let cmd = match cli.command {
        Cmd::Mass => Command::Mass,
        Cmd::Verify => Command::Verify,
        Cmd::Glue => Command::Glue,
        Cmd::Constraints => Command::Constraints,
        Cmd::BoostDemo => Command::BoostDemo,
    };
    let start = Instant::now();
    let result = load_config(cli.config.as_deref(), cli.dim, cli.seed, cli.tol)
        .and_then(|cfg| run(cmd, &cfg))
        .and_then(|out| out.write_to(&cli.out).map(|_| out));
    eprintln!("{} finished in {:.2}s", cmd.name(), start.elapsed().as_secs_f64());
    match result {
        Ok(out) => {
            print!("{}", out.report);
            ExitCode::from(out.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
