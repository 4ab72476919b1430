//! Command-line surface: `run` executes a TOML scenario and prints its
//! JSON report, `selftest` runs the certification battery, and `emit`
//! converts a JSON report into output files.
//!
//! Exit codes: 0 on success, 1 when a diagnostic or battery criterion
//! fails, 2 on configuration or usage errors. A verdict that comes back
//! false is a reported finding, not a failure; exit code 1 from `run`
//! means a diagnostic could not produce its verdicts at all.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hardylab_cli::config::ScenarioConfig;
use hardylab_cli::emit::{emit, EmitFormat};
use hardylab_cli::report::RunReport;
use hardylab_cli::scenario;

#[derive(Parser)]
#[command(
    name = "hardylab",
    version,
    about = "Scenario runner for Hardy-space composition diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the diagnostics requested by a TOML scenario configuration
    /// and print the JSON report.
    Run {
        /// Path to the scenario configuration.
        config: PathBuf,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full certification battery, one verdict line per
    /// criterion.
    Selftest {
        /// Also write the battery report as JSON to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Convert a JSON report into files of the requested format.
    Emit {
        /// Path to a report written by `run` or `selftest`.
        report: PathBuf,
        /// Output format.
        #[arg(long, value_enum)]
        format: EmitFormat,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out } => run(&config, out.as_deref()),
        Command::Selftest { report } => selftest(report.as_deref()),
        Command::Emit {
            report,
            format,
            out,
        } => emit_files(&report, format, &out),
    }
}

fn run(config_path: &std::path::Path, out: Option<&std::path::Path>) -> ExitCode {
    let text = match fs::read_to_string(config_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", config_path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let config = match ScenarioConfig::from_toml(&text) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let context = match scenario::build(config) {
        Ok(context) => context,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = scenario::run_scenario(&context);
    let json = report.to_json();
    if let Some(path) = out {
        if let Err(e) = fs::write(path, json.as_bytes()) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    print!("{json}");
    if report.any_error() {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}

fn selftest(report_path: Option<&std::path::Path>) -> ExitCode {
    let results = hardylab::selftest::run_all();
    for result in &results {
        println!("{}", hardylab::selftest::render(result));
    }
    let total: f64 = results.iter().map(|r| r.seconds).sum();
    println!("total: {total:.1}s over {} criteria", results.len());
    if let Some(path) = report_path {
        let report = scenario::selftest_report_from(&results);
        if let Err(e) = fs::write(path, report.to_json().as_bytes()) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    if hardylab::selftest::all_passed(&results) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}

fn emit_files(report_path: &std::path::Path, format: EmitFormat, out: &std::path::Path) -> ExitCode {
    let text = match fs::read_to_string(report_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", report_path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let report = match RunReport::from_json(&text) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match emit(&report, format, out) {
        Ok(written) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
