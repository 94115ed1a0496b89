//! Annotation-placement checker used as the default compile hook.

use std::path::PathBuf;
use std::process::ExitCode;

use annaforge::minijavac::check_program;
use annaforge::registry::{load_registry, Registry};
use annaforge::source::ProgramSet;
use clap::Parser;

#[derive(Parser)]
#[command(name = "minijavac", about = "Reject Java sources with illegal annotation placements")]
struct Args {
    /// Annotation registry; the bundled one when omitted.
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long)]
    src: PathBuf,
    /// Created if missing. Nothing is emitted into it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let reg = match &args.registry {
        Some(p) => match load_registry(p) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("minijavac: {e}");
                return ExitCode::from(2);
            }
        },
        None => Registry::curated(),
    };
    let ps = match ProgramSet::load("src", &args.src) {
        Ok(ps) => ps,
        Err(e) => {
            eprintln!("minijavac: {}: {e}", args.src.display());
            return ExitCode::from(2);
        }
    };
    if let Some(out) = &args.out {
        if let Err(e) = std::fs::create_dir_all(out) {
            eprintln!("minijavac: {}: {e}", out.display());
            return ExitCode::from(2);
        }
    }
    let diags = check_program(&reg, &ps);
    for d in &diags {
        eprintln!("{d}");
    }
    if diags.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} error{}", diags.len(), if diags.len() == 1 { "" } else { "s" });
        ExitCode::from(1)
    }
}
