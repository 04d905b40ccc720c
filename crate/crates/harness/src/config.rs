//! Experiment configuration: the JSON schema users write, and its resolution
//! against a scenario's defaults into a fully specified run.

use std::path::{Path, PathBuf};

use lgt_core::circuits::EvolutionMode;
use lgt_core::lattice::{ExtraLink, LatticeSpec};
use lgt_core::noise::{DEFAULT_EPS0, DEFAULT_EPS1, DEFAULT_P2, DEFAULT_SHOTS, DEFAULT_TRAJECTORIES};
use lgt_core::observables::{string_lattice_spec, CorrelatorMethod};
use lgt_core::prep::Prep;
use serde::{Deserialize, Serialize};

use crate::catalog::{find, NoiseSupport, Scenario};
use crate::error::{HarnessError, Result};

/// Largest lattice side accepted; beyond it the link register outgrows the simulator.
pub const MAX_SIDE: usize = 5;
pub const MAX_STEPS: usize = 1000;

/// A scalar or a list; grids accept either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    One(f64),
    Many(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::One(x) => vec![*x],
            Grid::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub lx: usize,
    pub ly: usize,
    /// Extra pinned links; when absent the scenario decides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pinned: Option<Vec<ExtraLink>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_p2")]
    pub p2: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default = "default_eps1")]
    pub eps1: f64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default = "default_shots")]
    pub shots: usize,
}

fn default_p2() -> f64 {
    DEFAULT_P2
}
fn default_eps0() -> f64 {
    DEFAULT_EPS0
}
fn default_eps1() -> f64 {
    DEFAULT_EPS1
}
fn default_trajectories() -> usize {
    DEFAULT_TRAJECTORIES
}
fn default_shots() -> usize {
    DEFAULT_SHOTS
}
fn yes() -> bool {
    true
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            p2: DEFAULT_P2,
            eps0: DEFAULT_EPS0,
            eps1: DEFAULT_EPS1,
            trajectories: DEFAULT_TRAJECTORIES,
            shots: DEFAULT_SHOTS,
        }
    }
}

/// Which mitigation stages are reported next to the raw noisy data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    #[serde(default = "yes")]
    pub postselect_ancillas: bool,
    #[serde(default = "yes")]
    pub readout_inversion: bool,
    #[serde(default = "yes")]
    pub rescale: bool,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self {
            postselect_ancillas: true,
            readout_inversion: true,
            rescale: true,
        }
    }
}

/// The on-disk schema. Only `scenario` and `seed` are required; everything
/// else falls back to the scenario's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_e: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Alternative to `n_steps`: each dt runs `round(t_max/dt)` steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<Prep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<EvolutionMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlator: Option<CorrelatorMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mitigation: Option<MitigationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: &str, seed: u64) -> Self {
        Self {
            scenario: scenario.into(),
            seed,
            lattice: None,
            j_e: None,
            j_m: None,
            h_e: None,
            lambda: None,
            dt: None,
            n_steps: None,
            t_max: None,
            prep: None,
            mode: None,
            correlator: None,
            noise: None,
            mitigation: None,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: &'static Scenario,
    pub seed: u64,
    pub lattice: LatticeSpec,
    pub j_e: f64,
    pub j_m: f64,
    pub h_e: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Empty for scenarios without time evolution.
    pub dt: Vec<f64>,
    pub n_steps: Option<usize>,
    pub t_max: Option<f64>,
    pub prep: Option<Prep>,
    pub mode: EvolutionMode,
    pub correlator: CorrelatorMethod,
    pub noise: Option<NoiseConfig>,
    pub mitigation: MitigationConfig,
}

fn check_grid(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(HarnessError::Config(format!("{name} grid is empty")));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(HarnessError::Config(format!("{name} grid has non-finite value {x}")));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(HarnessError::Config(format!("{name} grid has duplicate values")));
    }
    Ok(())
}

impl Resolved {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let scenario = find(&cfg.scenario)
            .ok_or_else(|| HarnessError::Config(format!("unknown scenario '{}' (see `lgt list`)", cfg.scenario)))?;
        let d = &scenario.defaults;
        let evolves = !d.dt.is_empty();
        if !evolves && (cfg.dt.is_some() || cfg.n_steps.is_some() || cfg.t_max.is_some() || cfg.mode.is_some()) {
            return Err(HarnessError::Config(format!("{} has no time evolution; drop dt/n_steps/t_max/mode", scenario.name)));
        }
        if cfg.prep.is_some() && !scenario.accepts_prep {
            return Err(HarnessError::Config(format!("{} fixes its own initial states", scenario.name)));
        }
        if cfg.correlator.is_some() && !scenario.correlators {
            return Err(HarnessError::Config(format!("{} measures no two-time correlators", scenario.name)));
        }
        let noise = match (scenario.noise, &cfg.noise) {
            (NoiseSupport::Never, Some(_)) => {
                return Err(HarnessError::Config(format!("{} is noiseless only", scenario.name)))
            }
            (NoiseSupport::Required, None) => Some(NoiseConfig::default()),
            (_, n) => n.clone(),
        };
        if cfg.mitigation.is_some() && noise.is_none() {
            return Err(HarnessError::Config("mitigation stages need a noise model".into()));
        }
        if let Some(n) = &noise {
            for (name, p) in [("p2", n.p2), ("eps0", n.eps0), ("eps1", n.eps1)] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(HarnessError::Config(format!("noise.{name} = {p} outside [0, 1]")));
                }
            }
            if n.trajectories == 0 || n.shots == 0 {
                return Err(HarnessError::Config("noise needs at least one trajectory and one shot".into()));
            }
        }
        let (lx, ly) = cfg.lattice.as_ref().map_or(d.lattice, |l| (l.lx, l.ly));
        if !(2..=MAX_SIDE).contains(&lx) || !(2..=MAX_SIDE).contains(&ly) {
            return Err(HarnessError::Config(format!("lattice {lx}x{ly}: sides must lie in 2..={MAX_SIDE}")));
        }
        let lattice = match cfg.lattice.as_ref().and_then(|l| l.pinned.clone()) {
            Some(pinned) => LatticeSpec { lx, ly, pinned_links: pinned },
            None if d.string_lattice => string_lattice_spec(lx, ly),
            None => LatticeSpec::new(lx, ly),
        };
        let h_e = cfg.h_e.as_ref().map_or_else(|| d.h_e.to_vec(), Grid::values);
        let lambda = cfg.lambda.as_ref().map_or_else(|| d.lambda.to_vec(), Grid::values);
        check_grid("h_e", &h_e)?;
        check_grid("lambda", &lambda)?;
        let (dt, n_steps, t_max) = if evolves {
            let dt = cfg.dt.as_ref().map_or_else(|| d.dt.to_vec(), Grid::values);
            check_grid("dt", &dt)?;
            if let Some(x) = dt.iter().find(|x| **x <= 0.0) {
                return Err(HarnessError::Config(format!("dt = {x} must be positive")));
            }
            let (n, t) = match (cfg.n_steps, cfg.t_max) {
                (Some(_), Some(_)) => return Err(HarnessError::Config("give n_steps or t_max, not both".into())),
                (Some(n), None) => (Some(n), None),
                (None, Some(t)) => (None, Some(t)),
                (None, None) => (d.t_max.is_none().then_some(d.n_steps), d.t_max),
            };
            if let Some(t) = t {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(HarnessError::Config(format!("t_max = {t} must be positive")));
                }
            }
            (dt, n, t)
        } else {
            (Vec::new(), None, None)
        };
        let j_e = cfg.j_e.unwrap_or(1.0);
        let j_m = cfg.j_m.unwrap_or(1.0);
        if !(j_e.is_finite() && j_m.is_finite()) {
            return Err(HarnessError::Config("couplings must be finite".into()));
        }
        let r = Self {
            scenario,
            seed: cfg.seed,
            lattice,
            j_e,
            j_m,
            h_e,
            lambda,
            dt,
            n_steps,
            t_max,
            prep: cfg.prep.clone().or_else(|| d.prep.clone()),
            mode: cfg.mode.unwrap_or_default(),
            correlator: cfg.correlator.unwrap_or_default(),
            mitigation: cfg.mitigation.unwrap_or_default(),
            noise,
        };
        for &dt in &r.dt {
            let n = r.steps_for(dt);
            if n == 0 || n > MAX_STEPS {
                return Err(HarnessError::Config(format!("dt = {dt} gives {n} steps; need 1..={MAX_STEPS}")));
            }
        }
        Ok(r)
    }

    /// Trotter steps run at step size `dt`.
    pub fn steps_for(&self, dt: f64) -> usize {
        match (self.n_steps, self.t_max) {
            (Some(n), _) => n,
            (None, Some(t)) => (t / dt).round() as usize,
            (None, None) => 0,
        }
    }

    /// The resolved run as a config that reproduces it exactly.
    pub fn to_config(&self) -> ExperimentConfig {
        let grid = |v: &[f64]| Some(Grid::Many(v.to_vec()));
        let evolves = !self.dt.is_empty();
        ExperimentConfig {
            scenario: self.scenario.name.into(),
            seed: self.seed,
            lattice: Some(LatticeConfig {
                lx: self.lattice.lx,
                ly: self.lattice.ly,
                pinned: Some(self.lattice.pinned_links.clone()),
            }),
            j_e: Some(self.j_e),
            j_m: Some(self.j_m),
            h_e: grid(&self.h_e),
            lambda: grid(&self.lambda),
            dt: if evolves { grid(&self.dt) } else { None },
            n_steps: self.n_steps,
            t_max: self.t_max,
            prep: if self.scenario.accepts_prep { self.prep.clone() } else { None },
            mode: evolves.then_some(self.mode),
            correlator: self.scenario.correlators.then_some(self.correlator),
            noise: self.noise.clone(),
            mitigation: self.noise.as_ref().map(|_| self.mitigation),
            out: None,
        }
    }
}
