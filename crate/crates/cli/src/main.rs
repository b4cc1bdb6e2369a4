use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zakai_mimc::commands::{cmd_complexity, cmd_estimate, cmd_profit, cmd_rates, cmd_theta};
use zakai_mimc::config::{Epsilons, FunctionalName, MethodName, SchemeName};
use zakai_mimc::{CliError, CliResult, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "zakai-mimc", version, about = "Multi-index Monte Carlo experiments for a filtering SPDE")]
struct Cli {
    /// TOML experiment file; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for the CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    scheme: Option<SchemeName>,
    #[arg(long, global = true, value_enum)]
    functional: Option<FunctionalName>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodName>,
    /// One accuracy or a comma-separated sweep.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean and variance tables of the mixed differences, with fitted slopes.
    Rates,
    /// High-wave decay constant over a grid of correlations.
    Theta,
    /// Runs the estimator once per configured accuracy.
    Estimate,
    /// Work against accuracy over the epsilon sweep.
    Complexity,
    /// Measured and modeled profit on the pilot levels.
    Profit,
}

fn load(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.global_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    if let Some(s) = cli.scheme {
        cfg.scheme = s;
    }
    if let Some(f) = cli.functional {
        cfg.functional = f;
    }
    if let Some(m) = cli.method {
        cfg.method = m;
    }
    if let Some(e) = &cli.epsilon {
        cfg.epsilon = match e.as_slice() {
            [one] => Epsilons::One(*one),
            many => Epsilons::Sweep(many.to_vec()),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = load(cli)?;
    let written = match cli.command {
        Command::Rates => cmd_rates(&cfg)?,
        Command::Theta => cmd_theta(&cfg)?,
        Command::Estimate => {
            let (written, reports) = cmd_estimate(&cfg)?;
            for r in &reports {
                println!(
                    "eps {:.3e}: value {:.6e}  sd {:.3e}  bias {:.3e}  work {:.3e} (+ pilot {:.3e})",
                    r.plan.epsilon,
                    r.value,
                    r.est_variance.sqrt(),
                    r.est_bias,
                    r.work_units,
                    r.pilot_work_units
                );
            }
            written
        }
        Command::Complexity => {
            let (written, points) = cmd_complexity(&cfg)?;
            let mut over = None;
            for p in &points {
                match &p.outcome {
                    Ok(w) => println!(
                        "eps {:.3e}: work {:.3e}  eps^2 work {:.3e}  {:.2}s",
                        p.epsilon,
                        w,
                        p.epsilon * p.epsilon * w,
                        p.wall_seconds
                    ),
                    Err(e) => {
                        println!("eps {:.3e}: {e}", p.epsilon);
                        over.get_or_insert(e.clone());
                    }
                }
            }
            for path in &written {
                println!("wrote {}", path.display());
            }
            return over.map_or(Ok(()), |e| Err(e.into()));
        }
        Command::Profit => cmd_profit(&cfg)?,
    };
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_status(&e))
        }
    }
}

fn exit_status(e: &CliError) -> u8 {
    e.exit_code().clamp(1, 255) as u8
}
