use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use curvtype::app::{run, Cli, EXIT_FAILED, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    let (text, failed) = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match output {
        Some(path) => {
            if let Err(e) = fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => {
            // A closed pipe (`curvtype ... | head`) is not an error.
            let mut out = io::stdout().lock();
            if let Err(e) = out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    eprintln!("error: cannot write output: {e}");
                    return ExitCode::from(EXIT_USAGE as u8);
                }
            }
        }
    }
    if failed {
        ExitCode::from(EXIT_FAILED as u8)
    } else {
        ExitCode::SUCCESS
    }
}
