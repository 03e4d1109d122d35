use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use l0_sampler::experiments::{self, Experiment};
use l0_sampler::Error;

#[derive(Parser)]
#[command(name = "l0s", version, about = "Run kernel sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        /// Path to the config file.
        #[arg(required_unless_present = "list")]
        config: Option<PathBuf>,
        /// Output directory, overriding the config's `output`.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Master seed, overriding the config's `seed`.
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// List the available experiments and exit.
        #[arg(long)]
        list: bool,
    },
}

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;

fn main() -> ExitCode {
    let Command::Run {
        config,
        out,
        seed,
        list,
    } = match Cli::try_parse() {
        Ok(cli) => cli.command,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if list {
        for e in Experiment::ALL {
            println!("{:<20} {}", e.name(), e.description());
        }
        return ExitCode::SUCCESS;
    }

    let path = config.expect("clap requires a config without --list");
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let mut config = match experiments::validate(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(dir) = out {
        config.output = dir;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }

    match experiments::run(&config) {
        Ok(report) => {
            println!(
                "wrote {} to {}",
                std::iter::once(format!("{}.report.json", report.experiment))
                    .chain(report.outputs)
                    .collect::<Vec<_>>()
                    .join(", "),
                config.output.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        CONFIG_ERROR
    } else {
        RUNTIME_ERROR
    }
}
