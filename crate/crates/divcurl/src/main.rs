use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use divcurl::{run, write_outputs, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "divcurl", version, about = "Anisotropic div-curl solver and estimate sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for independent instances.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write its reports.
    Run,
    /// Check a configuration without running it.
    Validate,
    /// Print the default configuration of an experiment.
    Defaults {
        #[arg(default_value = "solve")]
        experiment: String,
    },
    /// List the analytic manufactured cases.
    CaseList,
}

const CONFIG_ERROR: u8 = 1;
const INVARIANT_FAILURE: u8 = 3;

fn load(cli: &Cli) -> Result<ExperimentConfig, ExitCode> {
    let Some(path) = &cli.config else {
        eprintln!("error: --config PATH is required");
        return Err(ExitCode::from(CONFIG_ERROR));
    };
    let mut cfg = ExperimentConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(CONFIG_ERROR)
    })?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Defaults { experiment } => {
            let Some(e) = Experiment::parse(experiment) else {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                eprintln!("error: unknown experiment `{experiment}` (one of {})", names.join(", "));
                return ExitCode::from(CONFIG_ERROR);
            };
            print!("{}", ExperimentConfig::defaults(e).to_toml());
            ExitCode::SUCCESS
        }
        Command::CaseList => {
            for (id, what) in divcurl_core::mms::CATALOG {
                println!("{id:<12} {what}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate => {
            let cfg = match load(&cli) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let violations = cfg.validate();
            for v in &violations {
                println!("{v}");
            }
            if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(CONFIG_ERROR)
            }
        }
        Command::Run => {
            let cfg = match load(&cli) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let outcome = match run(&cfg, cli.workers) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code());
                }
            };
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            if let Err(e) = write_outputs(&outcome, &dir) {
                eprintln!("error: cannot write results to {}: {e}", dir.display());
                return ExitCode::from(2);
            }
            let r = &outcome.report;
            println!(
                "{}: {} rows, C = {:.6e}, drift = {:.2}%",
                r.experiment,
                r.rows,
                r.constant,
                100.0 * r.drift
            );
            for g in &r.per_grid {
                println!("  n = {:>3}: C = {:.6e}", g.n, g.constant);
            }
            for o in &r.orders {
                println!("  observed order {o:.3}");
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                for v in &r.violations {
                    eprintln!("invariant failed: {v}");
                }
                ExitCode::from(INVARIANT_FAILURE)
            }
        }
    }
}
