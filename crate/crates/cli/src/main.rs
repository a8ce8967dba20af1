//! Binary front end: parse a scenario config, run it (or sweep it), and
//! report results.  Exit codes: 0 success, 2 invalid config or usage,
//! 3 runtime failure, 4 partial sweep failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use macroqubit_cli::config::{ScenarioConfig, ScenarioTag};
use macroqubit_cli::output::{sha256_hex, OutputDir, RunRecord};
use macroqubit_cli::scenarios::{run_scenario, RunError, ScenarioMetrics};
use macroqubit_cli::sweep::run_sweep;

/// Spin-system tomography simulator: evolve large spins, read them out
/// through restricted binary detectors, and test how far a qubit picture
/// stretches.
#[derive(Parser)]
#[command(name = "macroqubit", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario a config file describes (sweeps included).
    Simulate(RunArgs),
    /// Run a Cartesian parameter sweep (requires a sweep config).
    Sweep(SweepArgs),
    /// Synthesize a control pulse (requires a gate-calibration config).
    SynthesizeGate(RunArgs),
    /// Run restricted tomography (requires a tomography-run config).
    Tomography(RunArgs),
    /// Verify a finished run directory against its run record.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON scenario config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: runs/<scenario>-seed<seed>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace shot sampling with exact outcome probabilities.
    #[arg(long)]
    exact_probabilities: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Parallel worker threads (default: the config's, else 1).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory containing run_record.json.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match &e {
            RunError::Config(_) => 2,
            RunError::Runtime { .. } => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => {
            let config = load_config(&args)?;
            if config.scenario == ScenarioTag::Sweep {
                run_sweep_command(&config, &args, None)
            } else {
                run_single(&config, &args)
            }
        }
        Command::Sweep(args) => {
            let config = load_config(&args.run)?;
            require_scenario(&config, ScenarioTag::Sweep, "sweep")?;
            run_sweep_command(&config, &args.run, args.workers)
        }
        Command::SynthesizeGate(args) => {
            let config = load_config(&args)?;
            require_scenario(&config, ScenarioTag::GateCalibration, "synthesize-gate")?;
            run_single(&config, &args)
        }
        Command::Tomography(args) => {
            let config = load_config(&args)?;
            require_scenario(&config, ScenarioTag::TomographyRun, "tomography")?;
            run_single(&config, &args)
        }
        Command::Report(args) => report(&args),
    }
}

/// Read, parse, apply flag overrides, validate.  All failures here are the
/// user's input, so they map to exit 2.
fn load_config(args: &RunArgs) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(&args.config).map_err(|e| Failure {
        code: 2,
        message: format!("config {}: {e}", args.config.display()),
    })?;
    let mut config = ScenarioConfig::from_json(&text).map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.exact_probabilities {
        let mut measurement = config.measurement.take().unwrap_or_default();
        measurement.exact_probabilities = true;
        config.measurement = Some(measurement);
    }
    config.validate().map_err(|e| Failure {
        code: 2,
        message: e.to_string(),
    })?;
    Ok(config)
}

fn require_scenario(
    config: &ScenarioConfig,
    want: ScenarioTag,
    command: &str,
) -> Result<(), Failure> {
    if config.scenario == want {
        Ok(())
    } else {
        Err(Failure {
            code: 2,
            message: format!(
                "scenario: '{command}' requires a {} config (got '{}')",
                want.name(),
                config.scenario.name()
            ),
        })
    }
}

fn run_single(config: &ScenarioConfig, args: &RunArgs) -> Result<(), Failure> {
    let out = OutputDir::resolve(args.out.as_deref(), config).map_err(|e| Failure {
        code: 3,
        message: format!("output directory: {e}"),
    })?;
    let path = out.path().to_path_buf();
    let (_record, metrics) = run_scenario(config, out)?;
    println!("scenario = {}", config.scenario.name());
    println!("seed = {}", config.seed);
    println!("output = {}", path.display());
    print_metrics(&metrics);
    Ok(())
}

fn print_metrics(m: &ScenarioMetrics) {
    if let Some(v) = &m.verdict {
        println!("verdict = {v}");
    }
    if let Some(v) = m.max_raw_radius_squared {
        println!("max_raw_radius_squared = {v:.6e}");
    }
    if let Some(v) = m.bloch_residual_rms {
        println!("bloch_residual_rms = {v:.6e}");
    }
    if let Some(v) = m.transverse_rate {
        println!("transverse_rate = {v:.6e}");
    }
    if let Some(v) = m.longitudinal_rate {
        println!("longitudinal_rate = {v:.6e}");
    }
    if let Some(v) = m.fitted_decay_time {
        println!("fitted_decay_time = {v:.6e}");
    }
    if let Some(v) = m.classical_error {
        println!("classical_error = {v:.6e}");
    }
    if let Some(v) = m.direction_fidelity {
        println!("direction_fidelity = {v:.6e}");
    }
    if let Some(v) = m.classical_deviation {
        println!("classical_deviation = {v:.6e}");
    }
    if let Some(v) = m.model_max_diff {
        println!("model_max_diff = {v:.6e}");
    }
}

fn run_sweep_command(
    config: &ScenarioConfig,
    args: &RunArgs,
    workers: Option<usize>,
) -> Result<(), Failure> {
    let out = OutputDir::resolve(args.out.as_deref(), config).map_err(|e| Failure {
        code: 3,
        message: format!("output directory: {e}"),
    })?;
    let path = out.path().to_path_buf();
    let record = run_sweep(config, out, workers)?;
    println!("scenario = sweep");
    println!("seed = {}", config.seed);
    println!("output = {}", path.display());
    println!("cells = {}", record.cell_count);
    println!("workers = {}", record.workers);
    println!("failed = {}", record.failed_cells.len());
    if record.failed_cells.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: 4,
            message: format!(
                "{} of {} sweep cells failed (see the cells' error.json)",
                record.failed_cells.len(),
                record.cell_count
            ),
        })
    }
}

/// Verify a run directory: every manifest file present, the config snapshot
/// hash matching the record, and the embedded config still valid.
fn report(args: &ReportArgs) -> Result<(), Failure> {
    let record_path = args.out.join("run_record.json");
    let text = fs::read_to_string(&record_path).map_err(|e| Failure {
        code: 3,
        message: format!("{}: {e}", record_path.display()),
    })?;
    let record: RunRecord = serde_json::from_str(&text).map_err(|e| Failure {
        code: 3,
        message: format!("run_record.json: {e}"),
    })?;
    let mut problems = Vec::new();
    for name in &record.manifest {
        if !args.out.join(name).is_file() {
            problems.push(format!("manifest file missing: {name}"));
        }
    }
    match fs::read(args.out.join("config_snapshot.json")) {
        Ok(bytes) => {
            let hash = sha256_hex(&bytes);
            if hash != record.config_sha256 {
                problems.push(format!(
                    "config_snapshot.json hash mismatch: recorded {}, found {hash}",
                    record.config_sha256
                ));
            }
        }
        Err(e) => problems.push(format!("config_snapshot.json: {e}")),
    }
    if let Err(e) = record.config.validate() {
        problems.push(format!("embedded config invalid: {e}"));
    }
    println!("scenario = {}", record.scenario);
    println!("seed = {}", record.seed);
    println!("tool_version = {}", record.tool_version);
    println!("files = {}", record.manifest.len());
    println!("config_sha256 = {}", record.config_sha256);
    if problems.is_empty() {
        println!("status = ok");
        Ok(())
    } else {
        for problem in &problems {
            eprintln!("problem: {problem}");
        }
        Err(Failure {
            code: 3,
            message: format!("{} integrity problem(s)", problems.len()),
        })
    }
}
