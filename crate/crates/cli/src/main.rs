//! Command-line front end for the surface-calculus library.
//!
//! Usage: lwsurf <validate|vary|flow|export> --config <path> [--out <dir>] [--threads N]
//!
//! Exit codes: 0 all checks pass, 1 residual failure, 2 config failure,
//! 3 flow did not converge.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use config::RunConfig;

struct Args {
    command: String,
    config_path: PathBuf,
    out_dir: PathBuf,
    threads: Option<usize>,
}

const USAGE: &str = "usage: lwsurf <validate|vary|flow|export> --config <path> [--out <dir>] [--threads N]";

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or(USAGE)?;
    if !matches!(command.as_str(), "validate" | "vary" | "flow" | "export") {
        return Err(format!("unknown subcommand `{command}`\n{USAGE}"));
    }
    let mut config_path = None;
    let mut out_dir = PathBuf::from(".");
    let mut threads = None;
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" => {
                config_path = Some(PathBuf::from(argv.next().ok_or("--config needs a path")?));
            }
            "--out" => {
                out_dir = PathBuf::from(argv.next().ok_or("--out needs a directory")?);
            }
            "--threads" => {
                let n = argv.next().ok_or("--threads needs a count")?;
                threads = Some(n.parse::<usize>().map_err(|e| format!("--threads: {e}"))?);
            }
            other => return Err(format!("unknown flag `{other}`\n{USAGE}")),
        }
    }
    Ok(Args {
        command,
        config_path: config_path.ok_or(format!("missing --config\n{USAGE}"))?,
        out_dir,
        threads,
    })
}

fn run() -> Result<i32, String> {
    let args = parse_args()?;
    if let Some(n) = args.threads {
        // ignore "already built" (e.g. repeated invocations in one process)
        let _ = lwsurf_core::configure_threads(n);
    }
    let text = std::fs::read_to_string(&args.config_path)
        .map_err(|e| format!("reading {}: {e}", args.config_path.display()))?;
    let config = RunConfig::parse(&text)
        .map_err(|e| format!("parsing {}: {e}", args.config_path.display()))?;
    let outcome = match args.command.as_str() {
        "validate" => commands::cmd_validate(&config, &args.out_dir)?,
        "vary" => commands::cmd_vary(&config, &args.out_dir)?,
        "flow" => commands::cmd_flow(&config, &args.out_dir)?,
        "export" => commands::cmd_export(&config, &args.out_dir)?,
        _ => unreachable!(),
    };
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
