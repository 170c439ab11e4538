mod cli;
mod commands;
mod config;
mod error;
mod manifest;

use clap::Parser;

use crate::error::code;

fn main() {
    let args = match cli::Cli::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let status = if e.use_stderr() { code::USAGE } else { code::OK };
            let _ = e.print();
            std::process::exit(status);
        }
    };
    match std::panic::catch_unwind(|| commands::run(args)) {
        Ok(Ok(())) => {}
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            std::process::exit(e.exit_code());
        }
        // The panic message is already on stderr.
        Err(_) => std::process::exit(code::INTERNAL),
    }
}
