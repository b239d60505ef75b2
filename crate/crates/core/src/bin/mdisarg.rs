use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mdi_sarg04::optics::Protocol;
use mdi_sarg04::scenario::{
    bound_offsets_csv, mu_table_csv, phase_bound_csv, rate_curve_csv, rate_point, run_sweep, write_text, DistanceGrid, Engine,
    Scenario, ScenarioConfig,
};
use mdi_sarg04::verify::{verify_suite_with, VerifyOptions};
use mdi_sarg04::Error;

/// MDI-SARG04 security-bound verification and key-rate simulation.
#[derive(Parser)]
#[command(name = "mdisarg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the POVM, bound and attack checks.
    Verify {
        /// Offset added to the filter angle pi/8 (debugging aid).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        angle_offset: f64,
    },
    /// Tabulate f(s), g(s) or the minimised phase-error bounds.
    Bounds {
        #[arg(long, value_enum, default_value_t = BoundTable::Offsets)]
        table: BoundTable,
        /// Upper end of the grid (s for offsets, e_bit for phase).
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Dump the relay's per-(n,m) yields and bit errors at one distance.
    MuTable {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_parser = parse_protocol, default_value = "sarg04")]
        protocol: Protocol,
        #[arg(long, default_value_t = 2)]
        n_max: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Optimised key rate over the configured distance grid, as CSV.
    RateCurve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Overrides the config's output path; stdout when neither is set.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Optimal mean photon number at one distance.
    OptimizeMu {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundTable {
    Offsets,
    Phase,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON scenario config; defaults apply to omitted fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<Scenario>,
    /// Evaluate a single distance in km.
    #[arg(long)]
    distance: Option<f64>,
    /// Fix the mean photon number instead of optimising it.
    #[arg(long)]
    mu: Option<f64>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_protocol(s: &str) -> Result<Protocol, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl ConfigArgs {
    fn load(&self) -> Result<ScenarioConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_path(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        if let Some(d) = self.distance {
            cfg.distance = DistanceGrid::single(d);
        }
        if let Some(mu) = self.mu {
            cfg.mu.fixed = Some(mu);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Verify { angle_offset } => {
            let report = verify_suite_with(VerifyOptions { filter_angle_offset: angle_offset });
            println!("{report}");
            Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Bounds { table, max, step, output } => {
            let text = match table {
                BoundTable::Offsets => bound_offsets_csv(max.unwrap_or(5.0), step.unwrap_or(0.25))?,
                BoundTable::Phase => phase_bound_csv(max.unwrap_or(0.5), step.unwrap_or(0.01))?,
            };
            emit(&text, output.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::MuTable { cfg, protocol, n_max, output } => {
            let config = cfg.load()?;
            let text = mu_table_csv(&config, config.distance.start_km, protocol, n_max)?;
            emit(&text, output.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::RateCurve { cfg, output } => {
            let config = cfg.load()?;
            let points = run_sweep(&config)?;
            let text = rate_curve_csv(&points, config.compare_bb84);
            emit(&text, output.as_ref().or(config.output.as_ref()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::OptimizeMu { cfg } => {
            let config = cfg.load()?;
            let distance = config.distance.start_km;
            let engine = Engine::new(config)?;
            let point = rate_point(&engine, distance)?;
            print!("{}", rate_curve_csv(&[point], engine.config().compare_bb84));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mdisarg: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
