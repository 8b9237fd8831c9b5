use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lti_laplace::cli::{run, Options, EXIT_MALFORMED};

/// Runs one JSON job (`{"command": ..., "payload": ...}`) and writes the result.
#[derive(Parser, Debug)]
#[command(name = "lti-laplace", version)]
struct Args {
    /// Job file (default: stdin).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Result file (default: stdout).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Tolerance for sampled checks.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Time unit τ in seconds; coefficient lists are rescaled by τ^(−k).
    #[arg(long = "time-scale", default_value_t = 1.0)]
    time_scale: f64,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_MALFORMED } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    for (name, v) in [("--tol", args.tol), ("--time-scale", args.time_scale)] {
        if !(v > 0.0 && v.is_finite()) {
            eprintln!("{name} must be a positive finite number, got {v}");
            return ExitCode::from(EXIT_MALFORMED as u8);
        }
    }

    let input = match &args.input {
        Some(path) => fs::read_to_string(path),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map(|_| s)
        }
    };
    let input = match input {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot read input: {e}");
            return ExitCode::from(EXIT_MALFORMED as u8);
        }
    };

    let outcome = run(&input, &Options { tol: args.tol, time_scale: args.time_scale });
    let written = match &args.output {
        Some(path) => fs::write(path, &outcome.body),
        None => io::stdout().write_all(outcome.body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::from(outcome.code as u8)
}
