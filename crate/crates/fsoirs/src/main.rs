use std::process::ExitCode;

use clap::Parser;
use fsoirs::cli::{self, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((csv, json)) => {
            println!("{}\n{}", csv.display(), json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fsoirs: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> fsoirs::Result<(std::path::PathBuf, std::path::PathBuf)> {
    if let Some(n) = cli::thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| fsoirs::Error::invalid(e.to_string()))?;
    }
    cli::execute(&cli.command)
}
