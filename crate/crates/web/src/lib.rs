//! JSON-in/JSON-out entry points for the static demo page in `www/`.
//!
//! Every export takes one request object and returns one response object, so
//! the page never depends on Rust types. The same functions are plain Rust
//! for native tests.

use lgt_core::circuits::{build_trotter_step, EvolutionMode, QubitLayout, TrotterSpec};
use lgt_core::lattice::{build_lattice, LatticeSpec, LinkKind};
use lgt_core::model::HamiltonianParams;
use lgt_core::observables::{mean_separation_exact, vertex_expectations, z_expectations};
use lgt_core::prep::{prep_theta, prepare_state, Prep};
use lgt_core::wala::{analytic_expectations, optimize_theta};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest register the page may ask for; 2^17 amplitudes stay interactive.
pub const MAX_LINKS: usize = 17;
const MAX_STEPS: usize = 200;
const MAX_POINTS: usize = 400;

#[derive(Debug)]
pub struct DemoError(pub String);

impl<E: std::fmt::Display> From<E> for DemoError {
    fn from(e: E) -> Self {
        DemoError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, DemoError>;

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(DemoError(msg.into()))
}

fn lattice(lx: usize, ly: usize) -> Result<lgt_core::lattice::Lattice> {
    let l = build_lattice(&LatticeSpec::new(lx, ly))?;
    if l.n_links() > MAX_LINKS {
        return fail(format!("{lx}x{ly} has {} links; the demo allows {MAX_LINKS}", l.n_links()));
    }
    Ok(l)
}

#[derive(Debug, Serialize)]
pub struct LinkInfo {
    pub id: usize,
    pub horizontal: bool,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Serialize)]
pub struct LatticeInfo {
    pub lx: usize,
    pub ly: usize,
    pub n_links: usize,
    pub links: Vec<LinkInfo>,
}

pub fn lattice_info(lx: usize, ly: usize) -> Result<LatticeInfo> {
    let l = lattice(lx, ly)?;
    Ok(LatticeInfo {
        lx,
        ly,
        n_links: l.n_links(),
        links: l
            .links()
            .iter()
            .map(|k| LinkInfo {
                id: k.id,
                horizontal: k.kind == LinkKind::Horizontal,
                row: k.row,
                col: k.col,
            })
            .collect(),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRequest {
    pub lx: usize,
    pub ly: usize,
    pub h_max: f64,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct ScanPoint {
    pub h: f64,
    pub theta: f64,
    pub energy_per_site: f64,
    pub a_v: f64,
    pub b_p: f64,
    pub z_bulk: f64,
    pub z_boundary: f64,
}

/// Optimal ansatz angle and term averages along a field sweep.
pub fn wala_scan(req: &ScanRequest) -> Result<Vec<ScanPoint>> {
    if !(2..=MAX_POINTS).contains(&req.points) || !(req.h_max.is_finite() && req.h_max > 0.0) {
        return fail(format!("need 2..={MAX_POINTS} points and a positive h_max"));
    }
    let sites = (req.lx * req.ly) as f64;
    (0..req.points)
        .map(|i| {
            let h = req.h_max * i as f64 / (req.points - 1) as f64;
            let s = optimize_theta(req.lx, req.ly, &HamiltonianParams::new(h, 0.0))?;
            let e = analytic_expectations(s.theta);
            Ok(ScanPoint {
                h,
                theta: s.theta,
                energy_per_site: s.energy / sites,
                a_v: e.a_v,
                b_p: e.b_p,
                z_bulk: e.z_bulk,
                z_boundary: e.z_boundary,
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchRequest {
    pub lx: usize,
    pub ly: usize,
    pub h: f64,
    pub lambda: f64,
    pub dt: f64,
    pub steps: usize,
}

#[derive(Debug, Serialize)]
pub struct Frame {
    pub t: f64,
    pub two_charge_probability: f64,
    pub separation: f64,
    pub a_v: Vec<f64>,
    pub z: Vec<f64>,
}

/// A charge pair on the central link of the optimized vacuum, evolved by
/// first-order Trotter steps; one frame per step.
pub fn pair_quench(req: &QuenchRequest) -> Result<Vec<Frame>> {
    if !(1..=MAX_STEPS).contains(&req.steps) || !(req.dt.is_finite() && req.dt > 0.0) {
        return fail(format!("need 1..={MAX_STEPS} steps and a positive dt"));
    }
    if !(req.h.is_finite() && req.lambda.is_finite()) {
        return fail("fields must be finite");
    }
    let l = lattice(req.lx, req.ly)?;
    let params = HamiltonianParams::new(req.h, req.lambda);
    let prep = Prep::WalaPair { link: None };
    let mut psi = prepare_state(&l, &prep, prep_theta(&prep, &l, &params, None)?)?;
    let spec = TrotterSpec::new(&l, params, req.dt, req.steps).with_mode(EvolutionMode::Direct);
    let step = build_trotter_step(&l, &spec, &QubitLayout::links_only(&l))?;
    let mut frames = Vec::with_capacity(req.steps + 1);
    for k in 0..=req.steps {
        if k > 0 {
            step.run(&mut psi)?;
        }
        let (p2, sep) = mean_separation_exact(&psi, &l).unwrap_or((0.0, f64::NAN));
        frames.push(Frame {
            t: k as f64 * req.dt,
            two_charge_probability: p2,
            separation: sep,
            a_v: vertex_expectations(&psi, &l)?,
            z: z_expectations(&psi, l.n_links())?,
        });
    }
    Ok(frames)
}

fn respond<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.0))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

fn parse<'a, T: Deserialize<'a>>(json: &'a str) -> std::result::Result<T, JsError> {
    serde_json::from_str(json).map_err(|e| JsError::new(&format!("bad request: {e}")))
}

#[wasm_bindgen(js_name = latticeInfo)]
pub fn lattice_info_js(lx: usize, ly: usize) -> std::result::Result<String, JsError> {
    respond(lattice_info(lx, ly))
}

#[wasm_bindgen(js_name = walaScan)]
pub fn wala_scan_js(request: &str) -> std::result::Result<String, JsError> {
    respond(wala_scan(&parse(request)?))
}

#[wasm_bindgen(js_name = pairQuench)]
pub fn pair_quench_js(request: &str) -> std::result::Result<String, JsError> {
    respond(pair_quench(&parse(request)?))
}
