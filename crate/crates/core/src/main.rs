use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gobsim::beamsel::Policy;
use gobsim::harness::config::FULL_SCALE_ITERATIONS;
use gobsim::harness::{self, output, Format, ScenarioConfig};
use gobsim::{Error, Result};

#[derive(Parser)]
#[command(name = "gobsim", version, about = "Grid-of-beams beam selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo campaign.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; results go to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: Format,
        /// Comma-separated subset of P1,P2,P3,P4.
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<Policy>>,
        /// Use the full 10000-drop count.
        #[arg(long = "paper-scale")]
        full_scale: bool,
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare hierarchical selection with the brute-force optimum.
    Oracle {
        /// Run the small-instance suite.
        #[arg(long)]
        small: bool,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out, format, policies, full_scale, iterations, workers } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(p) = policies {
                cfg.policies = p;
            }
            if full_scale {
                cfg.iterations = FULL_SCALE_ITERATIONS;
            }
            if let Some(n) = iterations {
                cfg.iterations = n;
            }
            if workers == Some(0) {
                return Err(Error::invalid("--workers must be at least 1"));
            }
            let result = harness::run_campaign(&cfg, workers)?;
            match out {
                Some(path) => output::emit_results(&result, format, &path)?,
                None => {
                    let stdout = std::io::stdout().lock();
                    match format {
                        Format::Csv => output::write_csv(&result.cells, stdout)?,
                        Format::Json => output::write_json(&result, stdout)?,
                    }
                }
            }
            Ok(())
        }
        Command::Oracle { small, instances, seed } => {
            if !small {
                return Err(Error::invalid("only the --small suite is available"));
            }
            println!("policy,instances,mean_ratio,min_ratio,max_excess");
            for g in harness::oracle::gap_suite(instances, seed)? {
                println!("{},{},{:.6},{:.6},{:.3e}", g.policy, g.instances, g.mean_ratio, g.min_ratio, g.max_excess);
            }
            Ok(())
        }
        Command::Selftest { instances } => {
            let checks = harness::selftest::run(instances, 7);
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Error::numerical(format!("{failed} self-test checks failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
