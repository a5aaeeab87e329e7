// Licensed under the Apache License, Version 2.0 <LICENSE-APACHE or
// https://www.apache.org/licenses/LICENSE-2.0> or the MIT license
// <LICENSE-MIT or https://opensource.org/licenses/MIT>, at your
// option. This file may not be copied, modified, or distributed
// except according to those terms.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ndshift_cli::config::{self, Overrides};
use ndshift_cli::output::jsonl;
use ndshift_cli::verify::{self, Suite, VerifyReport};
use ndshift_cli::{commands, CliError, Outputs};

/// Neighbour-dependent shifts on renewal processes and random mass exchange.
#[derive(Debug, Parser)]
#[command(name = "ndshift", version, about)]
struct Cli {
    /// JSON experiment config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; takes precedence over the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `out`); a config `out` takes precedence.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo replicas; a config `replicas` takes precedence.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Do not echo the JSON summary to standard output.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample an iid renewal gap sequence.
    SimulateRenewal,
    /// One division shift or exchange step.
    Shift,
    /// Repeated division shifts or exchange steps with a W1/KS trace.
    Iterate,
    /// Random mass exchange on a torus.
    Exchange,
    /// Walker-pair return probabilities against column sums of squares.
    Rwre,
    /// Binomially weighted Euler sums across replicas.
    Euler,
    /// Run the acceptance criteria; exits 1 if any fails.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
    },
}

fn need_config(cli: &Cli) -> Result<&PathBuf, CliError> {
    cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required for this command".into()))
}

fn finish(cli: &Cli, out_dir: PathBuf, out: Outputs) -> Result<(), CliError> {
    out.write_to(&out_dir)?;
    if !cli.quiet {
        print!("{}", out.stdout);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = cli.threads;

    let ov = Overrides { seed: cli.seed, out: cli.out.clone(), replicas: cli.replicas };
    match &cli.command {
        Command::SimulateRenewal => {
            let cfg: config::SimulateConfig = config::load(need_config(cli)?)?;
            let seed = config::resolve_seed(ov.seed, cfg.seed)?;
            let out = commands::simulate(&cfg, seed)?;
            finish(cli, config::resolve_out(&ov.out, &cfg.out), out)
        }
        Command::Shift | Command::Iterate => {
            let single = matches!(cli.command, Command::Shift);
            let cfg: config::LineConfig = config::load(need_config(cli)?)?;
            let seed = config::resolve_seed(ov.seed, cfg.seed)?;
            let out = commands::line(&cfg, seed, single)?;
            finish(cli, config::resolve_out(&ov.out, &cfg.out), out)
        }
        Command::Exchange => {
            let cfg: config::ExchangeConfig = config::load(need_config(cli)?)?;
            let seed = config::resolve_seed(ov.seed, cfg.seed)?;
            let out = commands::exchange(&cfg, seed)?;
            finish(cli, config::resolve_out(&ov.out, &cfg.out), out)
        }
        Command::Rwre => {
            let cfg: config::RwreConfig = config::load(need_config(cli)?)?;
            let seed = config::resolve_seed(ov.seed, cfg.seed)?;
            let replicas = config::resolve_replicas(ov.replicas, cfg.replicas);
            let out = commands::rwre(&cfg, seed, replicas)?;
            finish(cli, config::resolve_out(&ov.out, &cfg.out), out)
        }
        Command::Euler => {
            let cfg: config::EulerConfig = config::load(need_config(cli)?)?;
            let seed = config::resolve_seed(ov.seed, cfg.seed)?;
            let replicas = config::resolve_replicas(ov.replicas, cfg.replicas);
            let out = commands::euler(&cfg, seed, replicas)?;
            finish(cli, config::resolve_out(&ov.out, &cfg.out), out)
        }
        Command::Verify { suite } => {
            let seed = ov.seed.unwrap_or(verify::DEFAULT_SEED);
            let outcomes = verify::run_suite(*suite, seed)?;
            let passed = outcomes.iter().all(|c| c.passed);
            let name = format!("{suite:?}").to_lowercase();
            let report = VerifyReport { suite: name, seed, passed, criteria: &outcomes };
            let mut out = Outputs::default();
            let mut full = serde_json::to_string_pretty(&report).expect("report serialises");
            full.push('\n');
            out.file("verify.json", full);
            let all: Vec<_> = outcomes
                .iter()
                .flat_map(|c| {
                    c.reports.iter().map(move |r| r.clone().with_details(format!("criterion={} {}", c.id, r.details)))
                })
                .collect();
            out.file("reports.jsonl", jsonl(&all));
            for c in &outcomes {
                let line = serde_json::json!({ "criterion": c.id, "name": c.name, "passed": c.passed, "seed": c.seed });
                out.stdout.push_str(&format!("{line}\n"));
            }
            finish(cli, ov.out.clone().unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUT)), out)?;
            if passed {
                Ok(())
            } else {
                let failed: Vec<String> =
                    outcomes.iter().filter(|c| !c.passed).map(|c| format!("{} ({})", c.id, c.name)).collect();
                Err(CliError::VerifyFailed(format!("criteria {}", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ndshift: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
