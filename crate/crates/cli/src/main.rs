mod config;
mod emit;
mod run;

use std::process::ExitCode;

use clap::Parser;
use murmur_core::ErrorCategory;

use crate::config::{Cli, RunConfig};

/// Exit status for each error category.
fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 1,
        ErrorCategory::Data => 2,
        ErrorCategory::Accuracy => 3,
        ErrorCategory::Window => 4,
    }
}

fn configure_workers(flag: Option<usize>) -> Result<(), String> {
    let env = match std::env::var("MURMUR_WORKERS") {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| format!("MURMUR_WORKERS={v:?} is not a positive integer"))?,
        ),
        Err(_) => None,
    };
    let Some(n) = env.or(flag) else {
        return Ok(());
    };
    if n == 0 {
        return Err("worker count must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(msg) = configure_workers(cli.workers) {
        eprintln!("murmur: {msg}");
        return ExitCode::from(1);
    }
    let outcome = RunConfig::from_cli(&cli).and_then(|cfg| run::run(&cfg));
    match outcome {
        Ok(o) => {
            let files: Vec<String> = o.files.iter().map(|f| f.display().to_string()).collect();
            println!("{} files={}", o.summary, files.join(","));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("murmur: {e}");
            ExitCode::from(exit_code(e.category()))
        }
    }
}
