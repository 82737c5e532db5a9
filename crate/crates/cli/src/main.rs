use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use cornsim_cli::config::{load_config, Overrides};
use cornsim_cli::pipeline::run_simulate;
use cornsim_cli::report::run_report;

/// Monte-Carlo corn farm income forecasts under climate warming scenarios.
#[derive(Parser)]
#[command(name = "cornsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline from a TOML config and write all report CSVs.
    Simulate {
        /// Path to the run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of paths per realization.
        #[arg(long)]
        paths: Option<usize>,
        /// Override the warming scenarios (repeatable).
        #[arg(long = "scenario")]
        scenarios: Vec<u8>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consolidate simulate outputs into stability and income-variation
    /// tables.
    Report {
        /// Directory holding the simulate outputs.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version exit 0; anything else is a usage error.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Simulate {
            config,
            seed,
            paths,
            scenarios,
            out,
        } => {
            let overrides = Overrides {
                master_seed: seed,
                n_paths: paths,
                scenarios: if scenarios.is_empty() {
                    None
                } else {
                    Some(scenarios)
                },
                output_dir: out,
            };
            load_config(&config, &overrides)
                .map_err(cornsim_cli::CliError::from)
                .and_then(|cfg| {
                    let summary = run_simulate(&cfg)?;
                    println!(
                        "simulated {} cities x {} scenarios: {} paths, {} GEV fits, \
                         {} files (P = {} CAD/t, {} clamped projections) in {:.3}s",
                        summary.cities,
                        summary.scenarios,
                        summary.paths_generated,
                        summary.gev_fits,
                        summary.files_written,
                        summary.reference_price_cad,
                        summary.clamped_projections,
                        summary.wall.as_secs_f64()
                    );
                    Ok(())
                })
        }
        Command::Report { out } => run_report(&out).map(|summary| {
            println!(
                "report: {} stability files, {} income-variation rows",
                summary.stability_files, summary.income_variations
            );
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
