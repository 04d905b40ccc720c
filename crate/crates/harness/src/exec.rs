//! Job fan-out. Every grid point becomes a [`Job`]; jobs run on a pool capped
//! by `LGT_THREADS` and their rows are merged in job-key order.

use lgt_core::lattice::{build_lattice, Lattice};
use lgt_core::model::HamiltonianParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Resolved;
use crate::error::{HarnessError, Result};

pub const THREADS_ENV: &str = "LGT_THREADS";

/// One CSV line. Column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario: String,
    pub observable: String,
    pub h_e: f64,
    pub lambda: f64,
    pub dt: f64,
    pub site: String,
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    pub stage: String,
}

pub const COLUMNS: [&str; 10] = [
    "scenario", "observable", "h_e", "lambda", "dt", "site", "t", "value", "stderr", "stage",
];

/// Per-step bookkeeping reported in the manifest (retention, p_eff).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub label: String,
    pub t: f64,
    /// NaN (written as JSON `null`) when no shot survived post-selection.
    #[serde(deserialize_with = "null_as_nan")]
    pub value: f64,
}

fn null_as_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone)]
pub struct Job {
    pub index: usize,
    pub h_e: f64,
    pub lam: f64,
    /// Zero for scenarios without time evolution.
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
}

impl Job {
    pub fn key(&self) -> String {
        format!("h_e={}/lambda={}/dt={}", self.h_e, self.lam, self.dt)
    }

    pub fn params(&self, cfg: &Resolved) -> HamiltonianParams {
        HamiltonianParams {
            j_e: cfg.j_e,
            j_m: cfg.j_m,
            ..HamiltonianParams::new(self.h_e, self.lam)
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        round_time(k as f64 * self.dt)
    }

    /// Seed for an auxiliary stream of this job (calibration, echo depth, ...).
    pub fn sub_seed(&self, stream: u64) -> u64 {
        splitmix(self.seed ^ splitmix(stream.wrapping_add(1)))
    }
}

/// Rounded to 1e-9 so that `k·dt` prints the same on every platform.
pub fn round_time(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub struct Ctx {
    pub cfg: Resolved,
    pub lattice: Lattice,
}

#[derive(Debug, Clone, Default)]
pub struct JobOutput {
    pub rows: Vec<Row>,
    pub retention: Vec<StepRecord>,
    pub p_eff: Vec<StepRecord>,
}

impl JobOutput {
    pub fn push(&mut self, job: &Job, scenario: &str, observable: &str, site: impl Into<String>, t: f64, value: f64, stderr: f64, stage: &str) {
        self.rows.push(Row {
            scenario: scenario.into(),
            observable: observable.into(),
            h_e: job.h_e,
            lambda: job.lam,
            dt: job.dt,
            site: site.into(),
            t: round_time(t),
            value,
            stderr,
            stage: stage.into(),
        });
    }
}

/// Grid points in (h_E, λ, dt) lexicographic order of the config lists.
pub fn make_jobs(cfg: &Resolved) -> Vec<Job> {
    let dts = if cfg.dt.is_empty() { vec![0.0] } else { cfg.dt.clone() };
    let mut jobs = Vec::new();
    for &h_e in &cfg.h_e {
        for &lam in &cfg.lambda {
            for &dt in &dts {
                let index = jobs.len();
                jobs.push(Job {
                    index,
                    h_e,
                    lam,
                    dt,
                    n_steps: if dt > 0.0 { cfg.steps_for(dt) } else { 0 },
                    seed: splitmix(cfg.seed ^ splitmix(index as u64)),
                });
            }
        }
    }
    jobs
}

/// Thread cap from `LGT_THREADS`; `None` leaves the choice to rayon.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::Pool(format!("{THREADS_ENV}={s:?} is not a positive integer"))),
        },
    }
}

pub fn build_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

pub struct Execution {
    pub jobs: Vec<Job>,
    pub outputs: Vec<JobOutput>,
    pub rows: Vec<Row>,
    pub threads: usize,
}

/// Run every job of `cfg` on a pool of `threads` workers.
pub fn execute(cfg: &Resolved, threads: Option<usize>) -> Result<Execution> {
    let lattice = build_lattice(&cfg.lattice)?;
    let ctx = Ctx { cfg: cfg.clone(), lattice };
    let jobs = make_jobs(cfg);
    let pool = build_pool(threads)?;
    let run = cfg.scenario.run;
    let results: Vec<Result<JobOutput>> = pool.install(|| {
        jobs.par_iter()
            .map(|j| run(&ctx, j).map_err(|source| HarnessError::Job { job: j.key(), source }))
            .collect()
    });
    // `collect` on an indexed iterator keeps job order whatever the completion order.
    let outputs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<Row> = outputs.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    if let Some(f) = cfg.scenario.finalize {
        let extra = f(cfg, &rows);
        rows.extend(extra);
    }
    Ok(Execution {
        jobs,
        outputs,
        rows,
        threads: pool.current_num_threads(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn jobs_cover_the_grid_with_distinct_seeds() {
        let mut c = ExperimentConfig::new("trotter_error_scan", 5);
        c.h_e = Some(crate::config::Grid::Many(vec![0.0, 1.0]));
        let r = Resolved::new(&c).unwrap();
        let jobs = make_jobs(&r);
        assert_eq!(jobs.len(), 2 * 3);
        let mut seeds: Vec<_> = jobs.iter().map(|j| j.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 6);
        assert_eq!(jobs[1].key(), "h_e=0/lambda=0.25/dt=0.3");
        assert_eq!(jobs[1].n_steps, 10);
        assert_ne!(jobs[0].sub_seed(0), jobs[0].sub_seed(1));
    }

    #[test]
    fn times_are_rounded() {
        assert_eq!(round_time(3.0 * 0.1), 0.3);
        assert_eq!(round_time(7.0 * 0.3), 2.1);
    }
}
