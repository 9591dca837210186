//! `disperlim`: command-line front end for the dispersive-limit laboratory.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::{Common, Outcome};
use disperlim_core::limit::LimitEquation;

#[derive(Parser, Debug)]
#[command(name = "disperlim", version, about = "Euler-Poisson dispersive limits: EP, KP-II and ZK solvers")]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default results/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the epsilon sweep.
    #[arg(long, global = true, env = "DISPERLIM_THREADS")]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the Euler-Poisson system from well-prepared data.
    Ep,
    /// Solve KP-II.
    Kp,
    /// Solve ZK.
    Zk,
    /// Solve KP-II, then the linearized KP equation for n2.
    LinKp,
    /// Solve ZK, then the linearized ZK equation for n2.
    LinZk,
    /// Build and save a profile hierarchy.
    Profiles,
    /// Check the order-by-order systems of a hierarchy.
    Residuals {
        /// Stored hierarchy directory; otherwise one is built from --config.
        #[arg(long)]
        hierarchy: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Run an epsilon sweep and fit the convergence order.
    Converge,
    /// Transport a KdV line soliton across the domain.
    SolitonTest,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }

    let common = Common {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Ep => commands::ep(&common),
        Command::Kp => commands::limit(&common, LimitEquation::Kp2),
        Command::Zk => commands::limit(&common, LimitEquation::Zk),
        Command::LinKp => commands::linearized(&common, LimitEquation::LinKp),
        Command::LinZk => commands::linearized(&common, LimitEquation::LinZk),
        Command::Profiles => commands::profiles(&common),
        Command::Residuals { hierarchy, epsilon } => commands::residuals(&common, hierarchy.as_deref(), *epsilon),
        Command::Converge => commands::converge(&common),
        Command::SolitonTest => commands::soliton_test(&common),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
