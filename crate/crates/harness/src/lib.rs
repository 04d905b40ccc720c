//! Experiment harness: JSON configs in, versioned CSV bundles out, and a
//! rule-based checker for acceptance criteria.

pub mod bundle;
pub mod catalog;
pub mod check;
pub mod config;
pub mod error;
pub mod exec;
pub mod measure;
pub mod scenarios;

use std::path::Path;
use std::time::Instant;

pub use error::{HarnessError, Result};

use bundle::Manifest;
use config::Resolved;

/// Resolve, execute and write a bundle to `out`.
pub fn run(cfg: &Resolved, out: &Path, threads: Option<usize>) -> Result<Manifest> {
    let start = Instant::now();
    let exec = exec::execute(cfg, threads)?;
    let lattice = serde_json::json!({
        "lx": cfg.lattice.lx,
        "ly": cfg.lattice.ly,
        "pinned_links": cfg.lattice.pinned_links,
    });
    bundle::write_bundle(out, cfg, &exec, lattice, start.elapsed().as_secs_f64())
}
