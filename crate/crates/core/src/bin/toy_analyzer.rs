//! Command-line front end of the toy analyzer.

use std::path::PathBuf;
use std::process::ExitCode;

use annaforge::adapters::report::write_toy;
use annaforge::source::ProgramSet;
use annaforge::toy::{analyze, Faults, ToyError};
use clap::Parser;

#[derive(Parser)]
#[command(name = "toy-analyzer", about = "Miniature Java analyzer with seeded faults")]
struct Args {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Comma-separated: is, iag, uea.
    #[arg(long, default_value = "none")]
    faults: Faults,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let root = args.src.canonicalize().unwrap_or_else(|_| args.src.clone());
    let ps = match ProgramSet::load("src", &root) {
        Ok(ps) => ps,
        Err(e) => {
            eprintln!("ERROR: cannot read {}: {e}", root.display());
            return ExitCode::from(3);
        }
    };
    let findings = match analyze(&ps, &root.display().to_string(), args.faults) {
        Ok(f) => f,
        Err(ToyError::Parse { path, line, message }) => {
            eprintln!("ERROR: parse error at {path}:{line}: {message}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = std::fs::write(&args.report, write_toy(&findings)) {
        eprintln!("ERROR: cannot write report: {e}");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
