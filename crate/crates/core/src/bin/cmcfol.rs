use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cmcfol::runner::{self, Command, RunOptions, EXIT_USAGE};

/// CMC foliations of asymptotically flat initial data.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// One of: solve, foliate, charges, spectrum, audit, probe.
    #[arg(value_parser = parse_command)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `out`, else ./cmcfol-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the config's `expect` block; exit 3 on mismatch.
    #[arg(long)]
    assert: bool,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse().map_err(|e: cmcfol::Error| e.to_string())
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CMCFOL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("CMCFOL_THREADS must be a positive integer (got `{v}`)"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let cfg = match runner::parse_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let report = runner::run(
        &cfg,
        &RunOptions {
            command: cli.command,
            out_dir: cli.out,
            assert: cli.assert,
        },
    );
    for a in report.assertions.iter().filter(|a| !a.passed) {
        eprintln!(
            "assertion failed: {} (expected {}, got {}, tol {})",
            a.name, a.expected, a.actual, a.tolerance
        );
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    eprintln!("{}: {} ({:.2} s)", report.command, report.status, report.wall_seconds);
    ExitCode::from(report.exit_code as u8)
}
