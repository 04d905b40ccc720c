use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lgt_harness::bundle::CRITERIA;
use lgt_harness::catalog::{list_scenarios, CATALOG_VERSION};
use lgt_harness::check::{check_bundle, CriteriaFile};
use lgt_harness::config::{ExperimentConfig, Resolved};
use lgt_harness::exec::thread_cap;
use lgt_harness::Result;

#[derive(Parser)]
#[command(name = "lgt", version, about = "Z2 lattice gauge theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write a result bundle.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Evaluate the scenario's default criteria after the run.
        #[arg(long)]
        check: bool,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Bundle directory (default: config `out`, else runs/<scenario>-seed<N>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the scenario catalog.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Check a bundle against a criteria file.
    Check { bundle: PathBuf, criteria: PathBuf },
}

fn report(dir: &Path, criteria: &CriteriaFile) -> Result<bool> {
    let r = check_bundle(dir, criteria)?;
    for o in &r.outcomes {
        println!("{o}");
    }
    Ok(r.passed())
}

fn main_inner(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, check, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let resolved = Resolved::new(&cfg)?;
            let dir = out
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", cfg.scenario, cfg.seed)));
            let m = lgt_harness::run(&resolved, &dir, thread_cap()?)?;
            eprintln!(
                "wrote {} ({} jobs, {} tables, {} threads, {:.2}s)",
                dir.display(),
                m.jobs.len(),
                m.tables.len(),
                m.threads,
                m.runtime_secs
            );
            if check {
                return report(&dir, &CriteriaFile::load(&dir.join(CRITERIA))?);
            }
            Ok(true)
        }
        Command::List { json } => {
            let entries = list_scenarios();
            if json {
                let v = serde_json::json!({ "catalog_version": CATALOG_VERSION, "scenarios": entries });
                println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            } else {
                println!("lgt scenario catalog v{CATALOG_VERSION}");
                for e in entries {
                    println!("{:<24} {:<5} noise={:<8} {}", e.name, e.lattice, e.noise.as_str(), e.summary);
                }
            }
            Ok(true)
        }
        Command::Check { bundle, criteria } => report(&bundle, &CriteriaFile::load(&criteria)?),
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
