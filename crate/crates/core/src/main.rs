use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use malaria_focp::plot::emit_plot;
use malaria_focp::scenario::{parse_config, parse_config_str, run_matrix, ScenarioConfig};

#[derive(Parser)]
#[command(name = "malaria-focp", version, about = "Fractional optimal control scenarios for malaria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the strategy × alpha matrix described by a config file.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Concurrent cells (overrides `[matrix] workers`; 0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render CSV columns as an SVG line chart.
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated column names, e.g. `I_H,I_V`.
        #[arg(long, value_delimiter = ',')]
        channels: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(config: Option<&PathBuf>) -> malaria_focp::Result<ScenarioConfig> {
    match config {
        Some(p) => parse_config(p),
        None => parse_config_str(""),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, workers } => {
            let mut cfg = match load(config.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let records = match run_matrix(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            println!(
                "{:<18} {:>5} {:>9} {:>5} {:>14} {:>12} {:>12}",
                "strategy", "alpha", "converged", "iter", "J", "final I_H", "final I_V"
            );
            for r in &records {
                println!(
                    "{:<18} {:>5} {:>9} {:>5} {:>14.2} {:>12.4} {:>12.4}",
                    r.strategy, r.alpha.to_string(), r.converged, r.iterations, r.objective,
                    r.final_i_h, r.final_i_v
                );
                if let Some(e) = &r.error {
                    eprintln!("  {}_alpha{}: {e}", r.strategy, r.alpha);
                }
            }
            println!("wrote {} cells to {}", records.len(), cfg.output_dir.display());
            if records.iter().all(|r| r.succeeded()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::Plot { input, channels, out } => match emit_plot(&input, &channels, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Validate { config } => match parse_config(&config) {
            Ok(cfg) => {
                println!(
                    "ok: {} cells, horizon {} days, {} steps",
                    cfg.cells().len(),
                    cfg.horizon,
                    cfg.n_steps
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
