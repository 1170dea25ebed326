//! Command-line front end: runs scenario configs for any model, emits CSV
//! curve data and JSON summaries, and runs the verification suites.
//!
//! Exit codes: 2 config parse error, 3 validation error, 4 numeric
//! failure, 1 failed verification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use layercast::{config, runner, suites};

use config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "layercast", version, about = "Layered-transmission rate, distortion and delay curves over fading channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its CSV/JSON outputs.
    Run {
        /// Path to the TOML scenario file.
        config: PathBuf,
        /// Override the CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Override the JSON output path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a verification suite; nonzero exit on failure.
    Verify {
        /// Suite name, or "all".
        suite: String,
    },
    /// List the available models and verification suites.
    ListModels,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, csv, json } => run(config, csv, json),
        Command::Verify { suite } => verify(&suite),
        Command::ListModels => {
            println!("models:");
            for m in config::MODELS {
                println!("  {m}");
            }
            println!("verification suites:");
            for s in suites::SUITES {
                println!("  {s}");
            }
            ExitCode::SUCCESS
        }
    }
}

fn run(path: PathBuf, csv_override: Option<PathBuf>, json_override: Option<PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let cfg: ScenarioConfig = match toml::from_str(&text) {
        Ok(c) => c,
        Err(e) => {
            // toml errors carry line/column context.
            eprintln!("error: config parse failed:\n{e}");
            return ExitCode::from(2);
        }
    };
    if !config::MODELS.contains(&cfg.model.as_str()) {
        eprintln!("error: unknown model `{}`", cfg.model);
        return ExitCode::from(3);
    }
    let table = match runner::run_table(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return ExitCode::from(e.exit_code as u8);
        }
    };
    let csv_path = csv_override.or_else(|| cfg.output_csv.clone().map(PathBuf::from));
    let json_path = json_override.or_else(|| cfg.output_json.clone().map(PathBuf::from));
    let csv_text = runner::to_csv(&cfg, &table);
    match &csv_path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &csv_text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(4);
            }
        }
        None => print!("{csv_text}"),
    }
    if let Some(p) = &json_path {
        if let Err(e) = std::fs::write(p, runner::to_json(&cfg, &table)) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return ExitCode::from(4);
        }
    }
    ExitCode::SUCCESS
}

fn verify(suite: &str) -> ExitCode {
    let names: Vec<&str> = if suite == "all" {
        suites::SUITES.to_vec()
    } else {
        vec![suite]
    };
    let mut all_passed = true;
    for name in names {
        let checks = match suites::run_suite(name) {
            Some(c) => c,
            None => {
                eprintln!("error: unknown suite `{name}`");
                return ExitCode::from(3);
            }
        };
        for check in checks {
            let status = if check.passed { "PASS" } else { "FAIL" };
            println!("[{status}] {}: {}", check.name, check.detail);
            all_passed &= check.passed;
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
