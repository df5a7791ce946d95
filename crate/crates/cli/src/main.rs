//! Command-line front end: placement planning, path-loss calibration,
//! simulation runs and table replicas.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sentinel_core::config::{ConfigError, ScenarioFile, DEFAULT_SEED};
use sentinel_core::engine::{self, log_to_csv, Severity};
use sentinel_core::geometry::{
    plan_grid_placement, plan_perimeter_placement, sensor_count_cost, Placement,
};
use sentinel_core::radio::{fit_pathloss, parse_measurements_csv, LatencyTable, ThroughputSteps};
use sentinel_core::report;

const EXIT_DOMAIN: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "sentinel",
    about = "Wireless-sensor-network crop protection simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Grid,
    Perimeter,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a sensor placement for the configured field
    Plan {
        /// Scenario/field configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Placement strategy (overrides the config file)
        #[arg(long, value_enum)]
        strategy: Option<Strategy>,
        /// Output placement CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the path-loss model from RSSI measurements
    Calibrate {
        /// Measurement CSV `distance_m,bytes,hops,rssi_dbm`
        /// (defaults to the bundled calibration corpus)
        #[arg(long)]
        measurements: Option<PathBuf>,
        /// Write the fitted model (TOML) here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario and export its logs and metrics
    Simulate {
        /// Scenario configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Random seed (overrides the config file)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit one of the calibrated model tables as CSV
    Tables {
        /// Which table to emit
        #[arg(long, value_parser = ["2", "3", "4"])]
        which: String,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        match err {
            ConfigError::Io { .. } | ConfigError::Toml(_) | ConfigError::Invalid(_) => {
                Failure::config(err.to_string())
            }
            _ => Failure::domain(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SENTINEL_LOG")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Plan {
            config,
            strategy,
            out,
        } => cmd_plan(&config, strategy, &out),
        Command::Calibrate { measurements, out } => cmd_calibrate(measurements.as_deref(), out.as_deref()),
        Command::Simulate { config, seed, out } => cmd_simulate(&config, seed, &out),
        Command::Tables { which, out } => cmd_tables(&which, out.as_deref()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Failure::domain(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| Failure::domain(format!("cannot write {}: {e}", path.display())))
}

fn cmd_plan(config: &Path, strategy: Option<Strategy>, out: &Path) -> Result<(), Failure> {
    let file = ScenarioFile::load(config)?;
    let field = file.field()?;
    let radius = file.placement.sensor_radius_m;
    log::debug!("planning over {}x{} m field, r={radius}", field.width_m, field.height_m);
    let placement: Placement = match strategy {
        Some(Strategy::Grid) => plan_grid_placement(&field, radius).map_err(ConfigError::from)?,
        Some(Strategy::Perimeter) => {
            plan_perimeter_placement(&field, radius).map_err(ConfigError::from)?
        }
        None => file.placement()?.0,
    };
    write_file(out, &placement.to_csv())?;
    println!("sensors: {}", placement.len());
    match file.placement.unit_cost {
        Some(unit) => println!("estimated cost: {}", sensor_count_cost(&placement, unit)),
        None => println!("estimated cost: n/a (set placement.unit_cost)"),
    }
    println!("placement written to {}", out.display());
    Ok(())
}

fn cmd_calibrate(measurements: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let points = match measurements {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            parse_measurements_csv(&text).map_err(|e| Failure::config(e.to_string()))?
        }
        None => report::bundled_measurements(),
    };
    let model = fit_pathloss(&points).map_err(|e| Failure::domain(e.to_string()))?;
    let max_residual = report::max_fit_residual(&model, &points)
        .map_err(|e| Failure::domain(e.to_string()))?;
    println!("exponent n: {:.4}", model.exponent_n);
    println!("ref rssi at 10 m: {:.2} dBm", model.ref_rssi_dbm);
    println!("max residual vs per-distance means: {:.3} dB", max_residual);
    if let Some(path) = out {
        write_file(path, &sentinel_core::config::model_to_toml(&model))?;
        println!("model written to {}", path.display());
    }
    Ok(())
}

fn cmd_simulate(config: &Path, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let file = ScenarioFile::load(config)?;
    let scenario = file.to_scenario(seed)?;
    println!(
        "seed: {} ({})",
        scenario.seed,
        if seed.is_some() {
            "from --seed"
        } else if file.sim.seed.is_some() {
            "from config"
        } else {
            "default"
        }
    );
    if seed.is_none() && file.sim.seed.is_none() {
        log::info!("no seed given; using the default {DEFAULT_SEED}");
    }

    let findings = engine::validate(&scenario);
    for finding in &findings {
        eprintln!("{finding}");
    }
    if findings.iter().any(|f| f.severity == Severity::Error) {
        return Err(Failure::domain("scenario validation failed"));
    }

    let result = engine::run(&scenario).map_err(|e| Failure::domain(e.to_string()))?;

    std::fs::create_dir_all(out)
        .map_err(|e| Failure::domain(format!("cannot create {}: {e}", out.display())))?;
    write_file(&out.join("events.csv"), &log_to_csv(&result.log))?;
    write_file(&out.join("metrics.json"), &report::summary_json(&result.metrics))?;
    write_file(
        &out.join("sms.csv"),
        &sentinel_core::rns::sms_log_to_csv(&result.sms_log),
    )?;
    write_file(
        &out.join("energy.csv"),
        &engine::energy_to_csv(&result.metrics.energy),
    )?;
    write_file(&out.join("tree.json"), &result.tree.to_json())?;

    print!("{}", report::summary_text(&result));
    println!("outputs written to {}", out.display());
    Ok(())
}

fn cmd_tables(which: &str, out: Option<&Path>) -> Result<(), Failure> {
    let csv = match which {
        "2" => report::latency_table_csv(&LatencyTable::default())
            .map_err(|e| Failure::domain(e.to_string()))?,
        "3" => {
            let model = report::calibrated_pathloss();
            report::rssi_comparison_csv(&model, &report::bundled_measurements())
                .map_err(|e| Failure::domain(e.to_string()))?
        }
        "4" => report::throughput_table_csv(&ThroughputSteps::default()),
        other => return Err(Failure::config(format!("unknown table id {other}"))),
    };
    match out {
        Some(path) => {
            write_file(path, &csv)?;
            println!("table {which} written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
