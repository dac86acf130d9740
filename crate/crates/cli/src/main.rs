use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use portgen_cli::converge::converge;
use portgen_cli::run::{ensure_dir, run, write_json};
use portgen_cli::verify::verify;
use portgen_cli::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "portgen", version, about = "Structure-preserving 1D heat-conducting gas simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural properties of the discrete operators.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Also write dense J.txt and R.txt for the first sampled state.
        #[arg(long)]
        dump_operators: bool,
    },
    /// Integrate the configured problem and write balance.csv and snapshots.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Measure spatial, oracle and integrator convergence orders.
    Converge {
        #[command(flatten)]
        common: Common,
    },
}

impl Common {
    fn load(&self) -> CliResult<(RunConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        let out = self.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
        Ok((cfg, out))
    }
}

/// Returns whether every check passed.
fn execute(cmd: Command) -> CliResult<bool> {
    match cmd {
        Command::Verify {
            common,
            dump_operators,
        } => {
            let (cfg, out) = common.load()?;
            let outcome = verify(&cfg, dump_operators)?;
            ensure_dir(&out)?;
            write_json(&out.join("verify_report.json"), &outcome.report)?;
            if let Some((j, r)) = &outcome.operators {
                for (name, text) in [("J.txt", j), ("R.txt", r)] {
                    let path = out.join(name);
                    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                }
            }
            for c in &outcome.report.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                println!("{mark} {:<28} worst {:.3e} (tol {:.1e})", c.name, c.worst, c.tolerance);
            }
            Ok(outcome.report.passed)
        }
        Command::Run { common } => {
            let (cfg, out) = common.load()?;
            let art = run(&cfg, &out)?;
            let last = art.output.reports.last().expect("at least one row");
            println!(
                "{} steps, dt {:.3e}; H {:.12e} S {:.12e} E {:.12e} at t = {}",
                art.output.steps.len() - 1,
                art.output.dt,
                last.h,
                last.s,
                last.e,
                last.t
            );
            println!("wrote {} and {} snapshots", art.balance.display(), art.snapshots.len());
            Ok(true)
        }
        Command::Converge { common } => {
            let (cfg, out) = common.load()?;
            let report = converge(&cfg)?;
            ensure_dir(&out)?;
            write_json(&out.join("converge_report.json"), &report)?;
            for s in &report.studies {
                let mark = if s.passed { "ok  " } else { "FAIL" };
                println!("{mark} {:<18} order {:.3} (expected {})", s.name, s.order, s.expected);
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
