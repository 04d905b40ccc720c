//! The scenario catalog. Entries are kept sorted by name; bump
//! [`CATALOG_VERSION`] whenever a scenario's defaults or outputs change.

use lgt_core::prep::Prep;
use serde::Serialize;

use crate::check::Criterion;
use crate::config::Resolved;
use crate::exec::{Ctx, Job, JobOutput, Row};
use crate::scenarios as sc;

pub const CATALOG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSupport {
    Never,
    Optional,
    /// Runs with the default noise model when the config gives none.
    Required,
}

impl NoiseSupport {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseSupport::Never => "never",
            NoiseSupport::Optional => "optional",
            NoiseSupport::Required => "required",
        }
    }
}

#[derive(Debug)]
pub struct Defaults {
    pub lattice: (usize, usize),
    /// Attach one pinned link on each side of the middle row.
    pub string_lattice: bool,
    pub h_e: &'static [f64],
    pub lambda: &'static [f64],
    /// Empty for scenarios without time evolution.
    pub dt: &'static [f64],
    pub n_steps: usize,
    pub t_max: Option<f64>,
    pub prep: Option<Prep>,
}

impl Defaults {
    const fn with_t_max(mut self, t: f64) -> Self {
        self.t_max = Some(t);
        self
    }
}

pub type RunFn = fn(&Ctx, &Job) -> lgt_core::Result<JobOutput>;
pub type FinalizeFn = fn(&Resolved, &[Row]) -> Vec<Row>;
pub type CriteriaFn = fn(&Resolved) -> Vec<Criterion>;

#[derive(Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub defaults: Defaults,
    pub noise: NoiseSupport,
    pub accepts_prep: bool,
    pub correlators: bool,
    pub run: RunFn,
    /// Cross-job rows computed after the deterministic merge.
    pub finalize: Option<FinalizeFn>,
    pub criteria: CriteriaFn,
}

const H_FINE: &[f64] = &[0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];
const H_CHARGES: &[f64] = &[0.0, 0.3, 0.6, 1.0, 2.0];
const H_STRINGS: &[f64] = &[0.1, 0.6, 1.4];
const H_DEPOL: &[f64] = &[0.0, 0.25, 2.25];
const H_RESONANCE: &[f64] = &[1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6, 2.8, 3.0];

const fn defaults(lattice: (usize, usize), h_e: &'static [f64], lambda: &'static [f64]) -> Defaults {
    Defaults {
        lattice,
        string_lattice: false,
        h_e,
        lambda,
        dt: &[],
        n_steps: 0,
        t_max: None,
        prep: None,
    }
}

const fn evolving(
    lattice: (usize, usize),
    string_lattice: bool,
    h_e: &'static [f64],
    lambda: &'static [f64],
    dt: &'static [f64],
    n_steps: usize,
    prep: Option<Prep>,
) -> Defaults {
    Defaults {
        lattice,
        string_lattice,
        h_e,
        lambda,
        dt,
        n_steps,
        t_max: None,
        prep,
    }
}

const PAIR: Option<Prep> = Some(Prep::WalaPair { link: None });
const STRING: Option<Prep> = Some(Prep::WalaString { path: None });
const VACUUM: Option<Prep> = Some(Prep::Wala);

pub static CATALOG: [Scenario; 16] = [
    Scenario {
        name: "edfig4_depol_models",
        summary: "separation of an adjacent pair under local trajectory noise vs a global depolarizing model",
        defaults: evolving((3, 2), false, H_DEPOL, &[0.25], &[0.3], 10, PAIR),
        noise: NoiseSupport::Required,
        accepts_prep: true,
        correlators: false,
        run: sc::edfig4_depol_models,
        finalize: None,
        criteria: sc::edfig4_criteria,
    },
    Scenario {
        name: "edfig9_aux_correlators",
        summary: "<Z(0)>, Im<Z(t)Z(0)> and <Z(t)> per link for the pinned-string state",
        defaults: evolving((4, 3), true, &[0.0, 0.1, 0.2, 0.6, 1.4], &[0.25], &[0.3], 9, STRING),
        noise: NoiseSupport::Never,
        accepts_prep: true,
        correlators: true,
        run: sc::edfig9_aux_correlators,
        finalize: None,
        criteria: sc::edfig9_criteria,
    },
    Scenario {
        name: "fig2_energy",
        summary: "energy error of the WALA, toric-code and polarized ansatzes vs the exact ground state",
        defaults: defaults((4, 3), H_FINE, &[0.25]),
        noise: NoiseSupport::Never,
        accepts_prep: false,
        correlators: false,
        run: sc::fig2_energy,
        finalize: None,
        criteria: sc::fig2_energy_criteria,
    },
    Scenario {
        name: "fig2_wala_terms",
        summary: "WALA term averages (A_v, B_p, bulk/edge Z, X) simulated and analytic",
        defaults: defaults((4, 3), H_FINE, &[0.25]),
        noise: NoiseSupport::Never,
        accepts_prep: false,
        correlators: false,
        run: sc::fig2_wala_terms,
        finalize: None,
        criteria: sc::fig2_wala_terms_criteria,
    },
    Scenario {
        name: "fig3_charges",
        summary: "separation and <A_v> map of two charges created on adjacent vertices",
        defaults: evolving((4, 3), false, H_CHARGES, &[0.25], &[0.3], 10, PAIR),
        noise: NoiseSupport::Optional,
        accepts_prep: true,
        correlators: false,
        run: sc::fig3_charges,
        finalize: None,
        criteria: sc::fig3_charges_criteria,
    },
    Scenario {
        name: "fig3_conditional",
        summary: "partner-charge distribution conditioned on an excited reference vertex",
        defaults: evolving((4, 3), false, &[0.0, 0.6, 2.0], &[0.25], &[0.3], 10, PAIR),
        noise: NoiseSupport::Optional,
        accepts_prep: true,
        correlators: false,
        run: sc::fig3_conditional,
        finalize: None,
        criteria: sc::fig3_conditional_criteria,
    },
    Scenario {
        name: "fig3_superposition",
        summary: "<A_v> maps of the constructive and destructive two-string superpositions",
        defaults: evolving((4, 3), false, &[0.0, 2.0], &[0.25], &[0.3], 10, None),
        noise: NoiseSupport::Never,
        accepts_prep: false,
        correlators: false,
        run: sc::fig3_superposition,
        finalize: None,
        criteria: sc::fig3_superposition_criteria,
    },
    Scenario {
        name: "fig4_string_szz",
        summary: "S_ZZ and <Z(t)Z(0)> per link for a string between pinned charges",
        defaults: evolving((4, 3), true, H_STRINGS, &[0.25], &[0.3], 9, STRING),
        noise: NoiseSupport::Never,
        accepts_prep: true,
        correlators: true,
        run: sc::fig4_string_szz,
        finalize: None,
        criteria: sc::fig4_criteria,
    },
    Scenario {
        name: "fig5_breaking",
        summary: "<A_v> with and without the initial string, and their difference",
        defaults: evolving((4, 3), true, &[1.4], &[0.0, 0.25, 0.5], &[0.3], 9, None),
        noise: NoiseSupport::Optional,
        accepts_prep: false,
        correlators: false,
        run: sc::fig5_breaking,
        finalize: None,
        criteria: sc::fig5_breaking_criteria,
    },
    Scenario {
        name: "fig5_resonance",
        summary: "charge probability at A1, A2 and on the vacuum across the field grid",
        defaults: evolving((4, 3), true, H_RESONANCE, &[0.0, 0.25, 0.5], &[0.2], 10, None),
        noise: NoiseSupport::Never,
        accepts_prep: false,
        correlators: false,
        run: sc::fig5_resonance,
        finalize: None,
        criteria: sc::fig5_resonance_criteria,
    },
    Scenario {
        name: "loschmidt_calibration",
        summary: "Loschmidt-echo estimate of the effective depolarization vs circuit depth",
        defaults: evolving((3, 2), false, &[0.25, 2.25], &[0.25], &[0.3], 10, VACUUM),
        noise: NoiseSupport::Required,
        accepts_prep: true,
        correlators: false,
        run: sc::loschmidt_calibration,
        finalize: None,
        criteria: sc::loschmidt_criteria,
    },
    Scenario {
        name: "s4_single_charge_quench",
        summary: "single mobile charge from a J_E sign flip on an edge vertex",
        defaults: evolving((4, 3), false, H_CHARGES, &[0.25], &[0.3], 10, VACUUM),
        noise: NoiseSupport::Optional,
        accepts_prep: true,
        correlators: false,
        run: sc::s4_single_charge_quench,
        finalize: None,
        criteria: sc::s4_criteria,
    },
    Scenario {
        name: "s5_string_correlator",
        summary: "X-string two-time correlator C(j, t) from the pinned edge link",
        defaults: evolving((4, 3), true, &[0.0, 0.3, 0.6, 0.8, 2.0], &[0.25], &[0.3], 9, VACUUM),
        noise: NoiseSupport::Never,
        accepts_prep: true,
        correlators: true,
        run: sc::s5_string_correlator,
        finalize: None,
        criteria: sc::s5_criteria,
    },
    Scenario {
        name: "s6_lambda_zero_strings",
        summary: "S_ZZ at lambda = 0 and lambda > 0, and their difference",
        defaults: evolving((4, 3), true, H_STRINGS, &[0.0, 0.25], &[0.3], 9, STRING),
        noise: NoiseSupport::Never,
        accepts_prep: true,
        correlators: true,
        run: sc::s6_lambda_zero_strings,
        finalize: Some(sc::s6_finalize),
        criteria: sc::s6_criteria,
    },
    Scenario {
        name: "trotter_error_scan",
        summary: "pair separation at several Trotter steps against exact evolution",
        defaults: evolving((3, 2), false, H_DEPOL, &[0.25], &[0.1, 0.3, 0.5], 0, PAIR).with_t_max(3.0),
        noise: NoiseSupport::Never,
        accepts_prep: true,
        correlators: false,
        run: sc::trotter_error_scan,
        finalize: None,
        criteria: sc::trotter_criteria,
    },
    Scenario {
        name: "wala_quality",
        summary: "WALA infidelity and energy error vs the exact ground state",
        defaults: defaults((4, 3), H_FINE, &[0.0, 0.25]),
        noise: NoiseSupport::Never,
        accepts_prep: false,
        correlators: false,
        run: sc::wala_quality,
        finalize: None,
        criteria: sc::wala_quality_criteria,
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    CATALOG.iter().find(|s| s.name == name)
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub lattice: String,
    pub noise: NoiseSupport,
}

pub fn list_scenarios() -> Vec<CatalogEntry> {
    CATALOG
        .iter()
        .map(|s| CatalogEntry {
            name: s.name,
            summary: s.summary,
            lattice: format!("{}x{}", s.defaults.lattice.0, s.defaults.lattice.1),
            noise: s.noise,
        })
        .collect()
}
