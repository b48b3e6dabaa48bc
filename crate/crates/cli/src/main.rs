mod args;
mod commands;
mod emit;
mod error;

use std::process::ExitCode;

use serde_json::Value;

use crate::args::Format;
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK};

/// Sizes the global thread pool from `QKOLAB_THREADS` when set.
fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QKOLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Config(format!(
            "QKOLAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn execute(cli: &args::Cli) -> CliResult<()> {
    init_threads()?;
    let out = commands::run(&cli.command)?;
    let config = cli.command.effective_config();
    let common = cli.command.common();
    let document = match common.format {
        Format::Json => {
            let mut report = out.report;
            report.insert("config".into(), Value::Object(config));
            emit::canonical_json(&Value::Object(report))
        }
        Format::Csv => out.table.with_config(&config).to_csv()?,
    };
    for (path, bytes) in &out.side_files {
        emit::write_atomic(path, bytes)?;
    }
    match &common.out {
        Some(path) => {
            emit::write_atomic(path, document.as_bytes())?;
            println!("{}", out.summary);
        }
        None => {
            print!("{document}");
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let code = match args::parse(&argv) {
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Ok(Ok(cli)) => match execute(&cli) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}
