//! `eprb`: run EPRB simulations, analyze event logs and query the exact
//! combinatorial oracles.

mod config;
mod error;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eprb_core::analysis::{analyze, AnalysisOptions, CoincidenceWindow};
use eprb_core::io::{load_log, save_log, sidecar_path_for};
use eprb_core::oracles;
use eprb_core::runner::run_experiment_with_workers;
use eprb_core::{validate_log, EventLog};

use config::ConfigFile;
use error::CliError;
use manifest::{Outputs, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "eprb", version, about = "EPRB experiment simulation and analysis")]
struct Cli {
    /// Seed for the run (overrides the config file)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trial generation; results do not depend on it
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Directory for run outputs
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an experiment and write the CSV log, sidecar and manifest
    Run(RunArgs),
    /// Print a JSON report of statistics for a CSV log
    Analyze(AnalyzeArgs),
    /// Run an exact oracle and print its JSON report
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML config file, or a run manifest (.json) to reproduce
    config: PathBuf,
    /// Override a config value, e.g. `trials=1000` or `model.kind=timetag`
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base name of the output files
    #[arg(long, default_value = "log")]
    name: String,
}

#[derive(Args, Debug)]
struct LogArgs {
    /// CSV event log
    log: PathBuf,
    /// JSON sidecar (defaults to the log path with a .json extension)
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    log: LogArgs,
    /// Coincidence window for time-tagged logs (`inf` keeps everything)
    #[arg(long)]
    window: Option<f64>,
    /// Include the greedy time-indexed triple scan
    #[arg(long)]
    eq3: bool,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Extremes of A_a A_b + A_a A_c − A_b A_c over all 8 assignments
    BellBound,
    /// Extremes of the same combination with six independent variables
    Eq3Bound,
    /// Count reachable pair-product sum vectors
    Count(CountArgs),
    /// Joint-distribution feasibility of three pair correlations
    #[command(allow_negative_numbers = true)]
    Feasibility { e_ab: f64, e_ac: f64, e_bc: f64 },
    /// Impossible-event mass of the setting × tick product measure
    ProbSpace(LogArgs),
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Trial counts N_ab N_ac N_bc for the independent-pairs model
    #[arg(num_args = 3, value_names = ["N_AB", "N_AC", "N_BC"], conflicts_with = "counterfactual")]
    counts: Vec<u64>,
    /// Use the product formula instead of exhaustive enumeration
    #[arg(long)]
    formula: bool,
    /// Trial count M for the counterfactual model
    #[arg(long, value_name = "M")]
    counterfactual: Option<u64>,
    /// Four setting variables per trial instead of three
    #[arg(long, requires = "counterfactual")]
    four_setting: bool,
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("serializing report: {e}")))?;
    println!("{text}");
    Ok(())
}

fn load_checked(args: &LogArgs) -> Result<EventLog, CliError> {
    let sidecar = args
        .sidecar
        .clone()
        .unwrap_or_else(|| sidecar_path_for(&args.log));
    let log = load_log(&args.log, &sidecar).map_err(|e| CliError::Data(e.to_string()))?;
    let violations = validate_log(&log);
    if let Some(first) = violations.first() {
        return Err(CliError::Data(format!(
            "{} invalid log ({} violations); first: {first}",
            args.log.display(),
            violations.len()
        )));
    }
    Ok(log)
}

fn resolve_run_config(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        manifest.verify()?;
        if !overrides.is_empty() {
            return Err(CliError::Config("overrides cannot be combined with a manifest".into()));
        }
        return manifest.resolved_config.resolve(seed);
    }
    ConfigFile::parse(&text, overrides)?.resolve(seed)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    trials: usize,
    config_digest: &'a str,
    log: &'a str,
    sidecar: &'a str,
    manifest: String,
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<(), CliError> {
    let resolved = resolve_run_config(&args.config, &args.overrides, cli.seed)?;
    let run_cfg = resolved.to_run_config()?;
    let log = run_experiment_with_workers(&run_cfg, cli.workers)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(v) = validate_log(&log).first() {
        return Err(CliError::Data(format!("generated log failed validation: {v}")));
    }

    fs::create_dir_all(&cli.output_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", cli.output_dir.display())))?;
    let csv = cli.output_dir.join(format!("{}.csv", args.name));
    let sidecar = sidecar_path_for(&csv);
    let manifest_path = cli.output_dir.join(format!("{}.manifest.json", args.name));
    save_log(&log, &csv, &sidecar).map_err(|e| CliError::Data(e.to_string()))?;

    let manifest = RunManifest::new(
        resolved,
        Outputs {
            log: csv.display().to_string(),
            sidecar: sidecar.display().to_string(),
        },
    );
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, text + "\n")
        .map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))?;

    print_json(&RunSummary {
        trials: log.len(),
        config_digest: &manifest.config_digest,
        log: &manifest.outputs.log,
        sidecar: &manifest.outputs.sidecar,
        manifest: manifest_path.display().to_string(),
    })
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let window = args
        .window
        .map(CoincidenceWindow::new)
        .transpose()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let log = load_checked(&args.log)?;
    let report = analyze(
        &log,
        &AnalysisOptions {
            window,
            eq3_scan: args.eq3,
        },
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    print_json(&report)
}

fn oracle_err(e: oracles::OracleError) -> CliError {
    match e {
        oracles::OracleError::EmptyLog => CliError::Data(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

fn cmd_oracle(cmd: &OracleCommand) -> Result<(), CliError> {
    match cmd {
        OracleCommand::BellBound => print_json(&oracles::enumerate_bell_bound()),
        OracleCommand::Eq3Bound => print_json(&oracles::enumerate_eq3_bound()),
        OracleCommand::Count(args) => match (args.counterfactual, args.counts.as_slice()) {
            (Some(m), _) => print_json(
                &oracles::count_reachable_counterfactual(m, args.four_setting).map_err(oracle_err)?,
            ),
            (None, &[a, b, c]) => print_json(
                &oracles::count_reachable_independent(a, b, c, !args.formula).map_err(oracle_err)?,
            ),
            (None, _) => Err(CliError::Config(
                "count needs either N_AB N_AC N_BC or --counterfactual M".into(),
            )),
        },
        OracleCommand::Feasibility { e_ab, e_ac, e_bc } => {
            print_json(&oracles::boole_feasibility(*e_ab, *e_ac, *e_bc).map_err(oracle_err)?)
        }
        OracleCommand::ProbSpace(args) => {
            let log = load_checked(args)?;
            print_json(&oracles::product_space_impossible_mass(&log).map_err(oracle_err)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(&cli, args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Oracle(cmd) => cmd_oracle(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eprb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
