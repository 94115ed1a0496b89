//! Campaign driver.
//!
//! Exit status: 0 completed, 2 completed with violations, 1 harness error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use annaforge::campaign::{self, ledger, load_config, summary::triage_text};
use annaforge::metamorph::{dedup, Violation};
use annaforge::source::sites::{all_kinds, enumerate_sites};
use annaforge::source::ProgramSet;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "annaforge", about = "Metamorphic testing of Java static analyzers with annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign end to end.
    Run {
        config: PathBuf,
        /// Reuse ledgered mutants and outcomes from an earlier run.
        #[arg(long)]
        resume: bool,
        /// Override the worker count.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Print the injection sites of one Java file.
    Sites { file: PathBuf },
    /// Generate and validity-check mutants without running analyzers.
    Mutate {
        config: PathBuf,
        /// Write the mutant ledger only; no program directories are kept.
        #[arg(long)]
        dry_run: bool,
    },
    /// Cluster a violation ledger and print a report.
    Triage { ledger: PathBuf },
    /// Re-run both sides of a ledgered violation.
    Replay {
        violation_id: String,
        /// Campaign work directory; defaults to ANNAFORGE_WORK_DIR or ./work.
        #[arg(long)]
        work_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn exit_for(violations: usize) -> ExitCode {
    if violations > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run {
            config,
            resume,
            parallelism,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.resume |= resume;
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            let summary = campaign::run_campaign(&cfg)?;
            print!("{}", summary.to_text());
            println!("work directory: {}", cfg.work_dir.display());
            Ok(exit_for(summary.violations))
        }
        Command::Sites { file } => {
            let ps = ProgramSet::load_file("sites", &file).with_context(|| format!("reading {}", file.display()))?;
            let unit = &ps.units[0];
            if let Some(d) = &unit.diagnostic {
                bail!("{}: {d}", file.display());
            }
            for s in enumerate_sites(unit, &all_kinds()) {
                println!("{}", s.dump_line());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mutate { config, dry_run } => {
            let cfg = load_config(&config)?;
            let mutants = campaign::mutate(&cfg)?;
            if dry_run {
                let dir = cfg.work_dir.join("mutants");
                if dir.exists() {
                    std::fs::remove_dir_all(&dir)?;
                }
            } else {
                let work = cfg.work_dir.canonicalize()?;
                for mut m in mutants.iter().filter(|m| m.valid).cloned() {
                    annaforge::mutagen::materialize(&mut m, &work)?;
                }
            }
            let valid = mutants.iter().filter(|m| m.valid).count();
            println!(
                "{} mutants, {} valid, {} invalid; ledger at {}",
                mutants.len(),
                valid,
                mutants.len() - valid,
                cfg.work_dir.join(ledger::MUTANTS).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Triage { ledger: path } => {
            if !path.is_file() {
                bail!("no ledger at {}", path.display());
            }
            let violations: Vec<Violation> = ledger::read(&path)?;
            print!("{}", triage_text(&dedup(&violations)));
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { violation_id, work_dir } => {
            let work = work_dir.unwrap_or_else(|| campaign::work_dir_or(Path::new("work")));
            let r = campaign::replay(&work, &violation_id)?;
            println!("violation {} ({} on {})", r.violation.violation_id, r.violation.checker, r.violation.analyzer);
            println!("  left:  {} -> {}", r.violation.left, r.verdict.left_termination.name());
            println!("  right: {} -> {}", r.violation.right, r.verdict.right_termination.name());
            for f in &r.verdict.only_in_left {
                println!("  only left:  {} {}:{}", f.rule_id, f.path, f.line.map(|l| l.to_string()).unwrap_or_default());
            }
            for f in &r.verdict.only_in_right {
                println!("  only right: {} {}:{}", f.rule_id, f.path, f.line.map(|l| l.to_string()).unwrap_or_default());
            }
            if r.reproduced {
                println!("reproduced");
                Ok(ExitCode::from(2))
            } else {
                println!("NOT reproduced (equivalent now: {})", r.verdict.equivalent);
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}
