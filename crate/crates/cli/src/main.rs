//! Command-line driver for Monte Carlo tracking experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lmb_fusion::experiment::{compare, run_experiment, FusionKind, ScenarioConfig};
use lmb_fusion::Error;

#[derive(Parser)]
#[command(name = "lmb-fusion", version, about = "Multi-sensor LMB tracking experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fusion {
    Adaptive,
    Fixed,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write records.csv, summary.csv and config.toml.
    Run {
        /// Scenario file; the bundled ten-target scenario when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, value_enum)]
        fusion: Option<Fusion>,
        /// Field-of-view half-width applied to every sensor, degrees.
        #[arg(long = "fov-width", value_name = "DEG")]
        fov_width: Option<f64>,
        /// Clutter rate applied to every sensor.
        #[arg(long)]
        clutter_rate: Option<f64>,
        /// Record per-step wall-clock time in the ms column.
        #[arg(long)]
        timing: bool,
        #[arg(long, default_value = "results")]
        output_dir: PathBuf,
    },
    /// Paired per-step differences of each directory against the first.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
        #[arg(long, default_value = "comparison.csv")]
        output: PathBuf,
    },
    /// Print the bundled scenario.
    DefaultConfig,
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            seed,
            runs,
            fusion,
            fov_width,
            clutter_rate,
            timing,
            output_dir,
        } => {
            let mut cfg = match config {
                Some(path) => ScenarioConfig::load(&path)?,
                None => ScenarioConfig::default_scenario(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(f) = fusion {
                cfg.set_fusion(match f {
                    Fusion::Adaptive => FusionKind::Adaptive,
                    Fusion::Fixed => FusionKind::Fixed,
                });
            }
            if let Some(w) = fov_width {
                cfg.set_fov_half_width_deg(w);
            }
            if let Some(c) = clutter_rate {
                cfg.set_clutter_rate(c);
            }
            cfg.output.timing |= timing;
            cfg.validate()?;
            let dir = run_experiment(&cfg, &output_dir)?;
            println!("{}", dir.display());
        }
        Command::Compare { dirs, output } => {
            let dirs: Vec<&std::path::Path> = dirs.iter().map(PathBuf::as_path).collect();
            compare(&dirs, &output)?;
            println!("{}", output.display());
        }
        Command::DefaultConfig => print!("{}", ScenarioConfig::default_scenario_text()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            if let Error::ConfigInvalid { field, .. } = &e {
                line["field"] = field.clone().into();
            }
            if let Error::RunFailed { run, step, source } = &e {
                line["run"] = (*run).into();
                line["step"] = (*step).into();
                line["cause"] = source.kind().into();
            }
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
