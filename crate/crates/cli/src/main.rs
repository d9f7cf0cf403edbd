use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gravloc_cli::commands::{run, Command};
use gravloc_cli::{exit_code_for, ScenarioConfig};

/// Ground states and dynamics of self-gravitating wave packets.
#[derive(Debug, Parser)]
#[command(name = "gravloc", version)]
struct Cli {
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Parent directory for run directories.
    #[arg(long, global = true, value_name = "DIR", default_value = "runs")]
    out: PathBuf,
    /// Concurrent sweep members.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    workers: usize,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { gravloc_cli::exit::VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = (|| {
        if cli.workers == 0 {
            return Err(gravloc_cli::CliError::Validation("--workers must be at least 1".into()));
        }
        let cfg = match &cli.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        run(cli.command, &cfg, &cli.out, cli.workers)
    })();
    match outcome {
        Ok(record) => {
            if !cli.quiet {
                for c in &record.checks {
                    println!("{} {}: {:.6e} (limit {:.3e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
                }
                println!("{}", cli.out.join(&record.run_id).display());
            }
            ExitCode::from(exit_code_for(&record) as u8)
        }
        Err(e) => {
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
