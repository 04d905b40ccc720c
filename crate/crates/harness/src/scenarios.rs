//! Job bodies and default acceptance criteria of every catalog scenario.

use std::collections::BTreeMap;

use lgt_core::circuits::{build_trotter_step, Branch, EvolutionMode, QubitLayout, TrotterSpec, WalaMode};
use lgt_core::lattice::{mixed_state_mean_separation, Lattice, LinkKind, PathSpec, Side};
use lgt_core::mitigation::loschmidt_echo;
use lgt_core::model::{default_field_mask, hamiltonian_terms, HamiltonianParams};
use lgt_core::observables::{bumped_string, string_correlator, two_time_zz, vertex_expectations, z_expectations, excitation_probability, Propagator};
use lgt_core::pauli::{Pauli, PauliString};
use lgt_core::prep::{default_pair_link, prep_circuit, prep_theta, prepare_state, Prep};
use lgt_core::reference::{build_hamiltonian, exact_evolve, ground_state, wala_quality as quality};
use lgt_core::state::StateVector;
use lgt_core::wala::{analytic_expectations, optimize_theta};
use lgt_core::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::check::{sel, Aggregate, Column, Criterion, Rule};
use crate::config::Resolved;
use crate::exec::{round_time, Ctx, Job, JobOutput, Row, StepRecord};
use crate::measure::{estimates, evolve_exact, exact_series, lsite, noise_model, noisy_series, series, step_and_state, vsite, Diag, Samples};

fn name(ctx: &Ctx) -> &'static str {
    ctx.cfg.scenario.name
}

fn configured_prep(ctx: &Ctx) -> Result<Prep> {
    let prep = ctx.cfg.prep.clone().ok_or_else(|| Error::Unsupported("scenario needs an initial state".into()))?;
    resolve_prep(&ctx.lattice, prep)
}

/// Replace a default string with a concrete path for this lattice.
fn resolve_prep(lattice: &Lattice, prep: Prep) -> Result<Prep> {
    Ok(match prep {
        Prep::WalaString { path: None } => Prep::WalaString {
            path: Some(default_string(lattice)?.links().to_vec()),
        },
        p => p,
    })
}

fn pinned(lattice: &Lattice, side: Side) -> Option<(usize, (usize, usize))> {
    lattice
        .pinned_links()
        .find(|l| l.kind == LinkKind::Pinned(side))
        .map(|l| (l.id, (l.row, l.col)))
}

/// The bumped string where the geometry allows it, else the straight
/// string along the pinned row.
pub fn default_string(lattice: &Lattice) -> Result<PathSpec> {
    if let Ok(p) = bumped_string(lattice) {
        return Ok(p);
    }
    let (Some((left, (r, _))), Some((right, (r2, _)))) = (pinned(lattice, Side::Left), pinned(lattice, Side::Right)) else {
        return Err(Error::InvalidPath("string scenarios need left and right pinned links".into()));
    };
    if r != r2 {
        return Err(Error::InvalidPath("pinned links sit on different rows".into()));
    }
    let vertices: Vec<(usize, usize)> = (0..lattice.lx()).map(|c| (r, c)).collect();
    PathSpec::through_vertices(lattice, Some(left), &vertices, Some(right))
}

fn ansatz_state(lattice: &Lattice, params: &HamiltonianParams, prep: &Prep) -> Result<StateVector> {
    let theta = prep_theta(prep, lattice, params, None)?;
    prepare_state(lattice, prep, theta)
}

// ---- ground-state scenarios -------------------------------------------------

pub fn fig2_energy(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let h = build_hamiltonian(l, &p, &default_field_mask(l))?;
    let e0 = ground_state(&h)?.energy;
    out.push(job, name(ctx), "energy", "ground", 0.0, e0, 0.0, "oracle");
    for prep in [Prep::Wala, Prep::Toric, Prep::Polarized] {
        let e = h.energy(&ansatz_state(l, &p, &prep)?)?;
        out.push(job, name(ctx), "energy", prep.name(), 0.0, e, 0.0, "simulated");
        out.push(job, name(ctx), "energy_error", prep.name(), 0.0, e - e0, 0.0, "simulated");
        out.push(job, name(ctx), "relative_energy_error", prep.name(), 0.0, (e - e0) / e0.abs(), 0.0, "simulated");
    }
    Ok(out)
}

fn mean(v: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = v.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn fig2_wala_terms(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let theta = optimize_theta(l.lx(), l.ly(), &p)?.theta;
    let psi = prepare_state(l, &Prep::Wala, theta)?;
    let z = z_expectations(&psi, l.n_links())?;
    let x = (0..l.n_links())
        .filter(|&i| !l.links()[i].is_pinned())
        .map(|i| psi.expectation(&PauliString::single(i, Pauli::X)))
        .collect::<Result<Vec<_>>>()?;
    let b = (0..l.n_plaquettes())
        .map(|q| psi.expectation(&PauliString::x_on(l.plaquette_support(q))?))
        .collect::<Result<Vec<_>>>()?;
    let a = analytic_expectations(theta);
    let terms = [
        ("A_v", mean(vertex_expectations(&psi, l)?), a.a_v),
        ("B_p", mean(b), a.b_p),
        ("Z_bulk", mean((0..l.n_links()).filter(|&i| l.is_bulk_link(i)).map(|i| z[i])), a.z_bulk),
        ("Z_edge", mean((0..l.n_links()).filter(|&i| l.is_boundary_link(i)).map(|i| z[i])), a.z_boundary),
        ("X", mean(x), a.x_link),
    ];
    out.push(job, name(ctx), "theta", "wala", 0.0, theta, 0.0, "simulated");
    for (site, sim, analytic) in terms {
        if let Some(s) = sim {
            out.push(job, name(ctx), "term_average", site, 0.0, s, 0.0, "simulated");
            out.push(job, name(ctx), "term_average", site, 0.0, analytic, 0.0, "analytic");
        }
    }
    Ok(out)
}

pub fn wala_quality(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let q = quality(&ctx.lattice, &job.params(&ctx.cfg))?;
    for (obs, v, stage) in [
        ("infidelity", q.infidelity, "simulated"),
        ("relative_energy_error", q.relative_energy_error, "simulated"),
        ("energy", q.e_wala, "simulated"),
        ("energy", q.e_exact, "oracle"),
        ("theta", q.theta, "simulated"),
    ] {
        out.push(job, name(ctx), obs, "wala", 0.0, v, 0.0, stage);
    }
    Ok(out)
}

// ---- charge dynamics ---------------------------------------------------------

pub fn fig3_charges(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let prep = configured_prep(ctx)?;
    series(ctx, job, &mut out, &job.params(&ctx.cfg), &prep, &[Diag::Separation, Diag::Charges], "")?;
    Ok(out)
}

pub fn fig3_superposition(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let p = job.params(&ctx.cfg);
    for (branch, tag) in [(Branch::Plus, "plus"), (Branch::Minus, "minus")] {
        let prep = Prep::WalaSuperposition { branch, s1: None, s2: None };
        exact_series(ctx, job, &mut out, &p, &prep, &[Diag::Charges], tag)?;
    }
    Ok(out)
}

pub fn fig3_conditional(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let prep = configured_prep(ctx)?;
    let Prep::WalaPair { link } = prep else {
        return Err(Error::Unsupported("conditional maps need a pair preparation".into()));
    };
    let reference = ctx.lattice.link_vertices(link.unwrap_or_else(|| default_pair_link(&ctx.lattice)))[0];
    series(ctx, job, &mut out, &job.params(&ctx.cfg), &prep, &[Diag::Conditional(reference), Diag::Separation], "")?;
    Ok(out)
}

pub fn s4_single_charge_quench(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let edge = l.vertex_id(l.ly() / 2, 0);
    let p = job.params(&ctx.cfg).with_override(edge, -1);
    let prep = configured_prep(ctx)?;
    series(ctx, job, &mut out, &p, &prep, &[Diag::Quench(edge), Diag::Links], "")?;
    Ok(out)
}

fn entangling_counts(ctx: &Ctx, job: &Job, p: &HamiltonianParams, prep: &Prep) -> Result<(usize, usize)> {
    let l = &ctx.lattice;
    let layout = QubitLayout::auto(l)?;
    let c = prep_circuit(l, prep, prep_theta(prep, l, p, None)?, WalaMode::Ancilla, &layout)?;
    let spec = TrotterSpec::new(l, p.clone(), job.dt, job.n_steps).with_mode(EvolutionMode::GateLevel);
    Ok((c.entangling_count(), build_trotter_step(l, &spec, &layout)?.entangling_count()))
}

/// Noiseless, trajectory and global-depolarization separations. The global
/// model mixes in the fully mixed value with the probability that at least
/// one two-qubit error has occurred.
pub fn edfig4_depol_models(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let prep = configured_prep(ctx)?;
    exact_series(ctx, job, &mut out, &p, &prep, &[Diag::Separation], "")?;
    noisy_series(ctx, job, &mut out, &p, &prep, &[Diag::Separation], "")?;
    let noiseless: Vec<f64> = out
        .rows
        .iter()
        .filter(|r| r.observable == "separation" && r.stage == "noiseless")
        .map(|r| r.value)
        .collect();
    let (n_prep, n_step) = entangling_counts(ctx, job, &p, &prep)?;
    let p2 = noise_model(ctx, 0).p2;
    let r = mixed_state_mean_separation(l.lx(), l.ly());
    let o_sep = *r.numer() as f64 / *r.denom() as f64;
    for (k, s) in noiseless.into_iter().enumerate() {
        let pk = 1.0 - (1.0 - p2).powi((n_prep + k * n_step) as i32);
        out.push(job, name(ctx), "p_global", "", job.time(k), pk, 0.0, "global");
        out.push(job, name(ctx), "separation", "", job.time(k), (1.0 - pk) * s + pk * o_sep, 0.0, "global");
    }
    Ok(out)
}

pub fn trotter_error_scan(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let prep = configured_prep(ctx)?;
    let mut trotter = Vec::new();
    evolve_exact(ctx, job, &p, &prep, |_, psi| {
        trotter.push(estimates(&Samples::exact(psi), l, &[Diag::Separation])[0].value);
        Ok(())
    })?;
    let h = build_hamiltonian(l, &p, &default_field_mask(l))?;
    let mut psi = ansatz_state(l, &p, &prep)?;
    for (k, s) in trotter.into_iter().enumerate() {
        if k > 0 {
            psi = exact_evolve(&psi, &h, job.dt)?;
        }
        let e = estimates(&Samples::exact(&psi), l, &[Diag::Separation])[0].value;
        let t = job.time(k);
        out.push(job, name(ctx), "separation", "", t, s, 0.0, "trotter");
        out.push(job, name(ctx), "separation", "", t, e, 0.0, "exact");
        out.push(job, name(ctx), "separation_error", "", t, s - e, 0.0, "trotter");
    }
    Ok(out)
}

pub fn loschmidt_calibration(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let prep = configured_prep(ctx)?;
    let noise = ctx.cfg.noise.clone().unwrap_or_default();
    let layout = QubitLayout::auto(l)?;
    let mut circuit = prep_circuit(l, &prep, prep_theta(&prep, l, &p, None)?, WalaMode::Ancilla, &layout)?;
    let spec = TrotterSpec::new(l, p.clone(), job.dt, job.n_steps).with_mode(EvolutionMode::GateLevel);
    let step = build_trotter_step(l, &spec, &layout)?;
    let terms = hamiltonian_terms(l, &p, &default_field_mask(l))?;
    for k in 0..=job.n_steps {
        if k > 0 {
            circuit.append(&step)?;
        }
        let model = noise_model(ctx, job.sub_seed(k as u64));
        let r = loschmidt_echo(l, &terms, &circuit, layout.n_qubits(), &model, noise.trajectories, noise.shots)?;
        let t = job.time(k);
        for (obs, v) in [
            ("e_measured", r.e_measured),
            ("e_exact", r.e_exact),
            ("p_loschmidt", r.p_loschmidt),
            ("p_eff", r.p_eff.value),
            ("retention", r.retention),
        ] {
            out.push(job, name(ctx), obs, "", t, v, f64::NAN, "echo");
        }
        out.retention.push(StepRecord { label: "echo_ancilla_zero".into(), t, value: r.retention });
        out.p_eff.push(StepRecord { label: "loschmidt".into(), t, value: r.p_eff.value });
    }
    Ok(out)
}

// ---- strings -------------------------------------------------------------

pub fn fig5_breaking(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let p = job.params(&ctx.cfg);
    let string = resolve_prep(&ctx.lattice, Prep::WalaString { path: None })?;
    series(ctx, job, &mut out, &p, &string, &[Diag::Charges], "string")?;
    series(ctx, job, &mut out, &p, &Prep::Wala, &[Diag::Charges], "vacuum")?;
    let vacuum: BTreeMap<(String, u64, String), (f64, f64)> = out
        .rows
        .iter()
        .filter(|r| r.observable == "a_v_vacuum")
        .map(|r| ((r.stage.clone(), r.t.to_bits(), r.site.clone()), (r.value, r.stderr)))
        .collect();
    let diffs: Vec<Row> = out
        .rows
        .iter()
        .filter(|r| r.observable == "a_v_string")
        .filter_map(|r| {
            let (v, e) = vacuum.get(&(r.stage.clone(), r.t.to_bits(), r.site.clone()))?;
            Some(Row {
                observable: "a_v_difference".into(),
                value: r.value - v,
                stderr: r.stderr.hypot(*e),
                ..r.clone()
            })
        })
        .collect();
    out.rows.extend(diffs);
    Ok(out)
}

/// `A₁` sits one row above the pinned row at column 1, `A₂` mirrors it below
/// (or on the pinned row when there is no row below).
pub fn resonance_vertices(l: &Lattice) -> Result<(usize, usize)> {
    let (_, (r, _)) = pinned(l, Side::Left).ok_or_else(|| Error::InvalidPath("no left pinned link".into()))?;
    if r == 0 {
        return Err(Error::InvalidPath("the pinned row needs a row above it".into()));
    }
    Ok((l.vertex_id(r - 1, 1), l.vertex_id((r + 1).min(l.ly() - 1), 1)))
}

pub fn fig5_resonance(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let (a1, a2) = resonance_vertices(l)?;
    let string = resolve_prep(l, Prep::WalaString { path: None })?;
    evolve_exact(ctx, job, &p, &string, |k, psi| {
        let a = vertex_expectations(psi, l)?;
        out.push(job, name(ctx), "p_a1", vsite(a1), job.time(k), excitation_probability(a[a1]), 0.0, "noiseless");
        out.push(job, name(ctx), "p_a2", vsite(a2), job.time(k), excitation_probability(a[a2]), 0.0, "noiseless");
        Ok(())
    })?;
    evolve_exact(ctx, job, &p, &Prep::Wala, |k, psi| {
        let a = vertex_expectations(psi, l)?;
        out.push(job, name(ctx), "p_avac", vsite(a1), job.time(k), excitation_probability(a[a1]), 0.0, "noiseless");
        Ok(())
    })?;
    Ok(out)
}

struct LinkSeries {
    zz: Vec<num_complex::Complex64>,
    z0: f64,
}

/// `⟨Z_l(t)Z_l(0)⟩` and `⟨Z_l(0)⟩` for every link, links in parallel.
fn link_correlators(ctx: &Ctx, job: &Job, p: &HamiltonianParams, psi0: StateVector) -> Result<Vec<LinkSeries>> {
    let (step, psi) = step_and_state(ctx, job, p, psi0)?;
    (0..ctx.lattice.n_links())
        .into_par_iter()
        .map(|l| {
            Ok(LinkSeries {
                zz: two_time_zz(&psi, l, Propagator::Trotter(&step), job.n_steps, ctx.cfg.correlator)?,
                z0: psi.expectation(&PauliString::single(l, Pauli::Z))?,
            })
        })
        .collect()
}

fn stage(ctx: &Ctx) -> &'static str {
    match ctx.cfg.correlator {
        lgt_core::observables::CorrelatorMethod::ExactOracle => "oracle",
        lgt_core::observables::CorrelatorMethod::HadamardEmulated => "hadamard",
    }
}

pub fn fig4_string_szz(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let p = job.params(&ctx.cfg);
    let psi0 = ansatz_state(&ctx.lattice, &p, &configured_prep(ctx)?)?;
    let st = stage(ctx);
    for (l, s) in link_correlators(ctx, job, &p, psi0)?.into_iter().enumerate() {
        out.push(job, name(ctx), "z0", lsite(l), 0.0, s.z0, 0.0, st);
        for (k, c) in s.zz.iter().enumerate() {
            let t = job.time(k);
            out.push(job, name(ctx), "zz_re", lsite(l), t, c.re, 0.0, st);
            out.push(job, name(ctx), "zz_im", lsite(l), t, c.im, 0.0, st);
            out.push(job, name(ctx), "s_zz", lsite(l), t, c.re * s.z0, 0.0, st);
        }
    }
    Ok(out)
}

pub fn edfig9_aux_correlators(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let prep = configured_prep(ctx)?;
    let psi0 = ansatz_state(l, &p, &prep)?;
    let st = stage(ctx);
    for (i, s) in link_correlators(ctx, job, &p, psi0)?.into_iter().enumerate() {
        out.push(job, name(ctx), "z0", lsite(i), 0.0, s.z0, 0.0, st);
        for (k, c) in s.zz.iter().enumerate() {
            out.push(job, name(ctx), "zz_im", lsite(i), job.time(k), c.im, 0.0, st);
        }
    }
    evolve_exact(ctx, job, &p, &prep, |k, psi| {
        for (i, z) in z_expectations(psi, l.n_links())?.into_iter().enumerate() {
            out.push(job, name(ctx), "z_t", lsite(i), job.time(k), z, 0.0, "noiseless");
        }
        Ok(())
    })?;
    Ok(out)
}

pub fn s5_string_correlator(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = JobOutput::default();
    let l = &ctx.lattice;
    let p = job.params(&ctx.cfg);
    let psi0 = ansatz_state(l, &p, &configured_prep(ctx)?)?;
    let (step, psi) = step_and_state(ctx, job, &p, psi0)?;
    let st = stage(ctx);
    let series = (1..=l.lx())
        .into_par_iter()
        .map(|j| string_correlator(&psi, l, j, Propagator::Trotter(&step), job.n_steps, ctx.cfg.correlator))
        .collect::<Result<Vec<_>>>()?;
    for (j, c) in series.iter().enumerate() {
        let site = format!("j{}", j + 1);
        for (k, v) in c.iter().enumerate() {
            let t = job.time(k);
            out.push(job, name(ctx), "c_re", site.clone(), t, v.re, 0.0, st);
            out.push(job, name(ctx), "c_im", site.clone(), t, v.im, 0.0, st);
            out.push(job, name(ctx), "c_abs", site.clone(), t, v.norm(), 0.0, st);
        }
    }
    Ok(out)
}

pub fn s6_lambda_zero_strings(ctx: &Ctx, job: &Job) -> Result<JobOutput> {
    let mut out = fig4_string_szz(ctx, job)?;
    out.rows.retain(|r| r.observable == "s_zz" || r.observable == "zz_re");
    Ok(out)
}

/// `X(λ) − X(0)` for S_ZZ and Re⟨Z(t)Z(0)⟩ at every λ > 0 of the grid.
pub fn s6_finalize(_cfg: &Resolved, rows: &[Row]) -> Vec<Row> {
    let key = |r: &Row| (r.observable.clone(), r.h_e.to_bits(), r.dt.to_bits(), r.site.clone(), r.t.to_bits(), r.stage.clone());
    let base: BTreeMap<_, f64> = rows.iter().filter(|r| r.lambda == 0.0).map(|r| (key(r), r.value)).collect();
    rows.iter()
        .filter(|r| r.lambda != 0.0)
        .filter_map(|r| {
            let b = base.get(&key(r))?;
            Some(Row {
                observable: format!("{}_difference", r.observable),
                value: r.value - b,
                stderr: 0.0,
                stage: "difference".into(),
                ..r.clone()
            })
        })
        .collect()
}

// ---- default criteria ----------------------------------------------------

fn f(pairs: &[(Column, Value)]) -> Vec<(Column, Value)> {
    pairs.to_vec()
}

fn bound(id: &str, description: &str, observable: &str, filter: Vec<(Column, Value)>, aggregate: Aggregate, min: Option<f64>, max: Option<f64>) -> Criterion {
    Criterion::new(
        id,
        description,
        Rule::ColumnBound {
            select: sel(observable, &filter),
            aggregate,
            min,
            max,
        },
    )
}

fn near(id: &str, description: &str, observable: &str, filter: Vec<(Column, Value)>, target: f64, tol: f64) -> Criterion {
    bound(id, description, observable, filter, Aggregate::Each, Some(target - tol), Some(target + tol))
}

fn noiseless_stage() -> (Column, Value) {
    (Column::Stage, json!("noiseless"))
}

fn t0() -> (Column, Value) {
    (Column::T, json!(0.0))
}

fn in_unit(id: &str, observable: &str, filter: Vec<(Column, Value)>) -> Criterion {
    bound(id, "probabilities stay in [0, 1]", observable, filter, Aggregate::Each, Some(-1e-9), Some(1.0 + 1e-9))
}

fn final_time(cfg: &Resolved, dt: f64) -> f64 {
    round_time(cfg.steps_for(dt) as f64 * dt)
}

pub fn fig2_energy_criteria(_: &Resolved) -> Vec<Criterion> {
    let chain = |other: &str| {
        vec![
            [(Column::Site, json!("wala"))].into_iter().collect(),
            [(Column::Site, json!(other))].into_iter().collect(),
        ]
    };
    let mut c: Vec<Criterion> = ["toric", "polarized"]
        .iter()
        .map(|o| {
            Criterion::new(
                &format!("wala_beats_{o}"),
                "the optimized ansatz is never worse than a fixed one",
                Rule::Ordering {
                    select: sel("energy_error", &[]),
                    join: vec![Column::HE, Column::Lambda],
                    chain: chain(o),
                    tol: 1e-9,
                },
            )
        })
        .collect();
    c.push(bound("variational", "ansatz energies lie above the ground energy", "energy_error", vec![], Aggregate::Each, Some(-1e-8), None));
    c
}

pub fn fig2_wala_terms_criteria(_: &Resolved) -> Vec<Criterion> {
    vec![Criterion::new(
        "wala_matches_analytic",
        "simulated term averages equal the closed forms",
        Rule::CompareColumns {
            a: sel("term_average", &[(Column::Stage, json!("simulated"))]),
            b: sel("term_average", &[(Column::Stage, json!("analytic"))]),
            join: vec![Column::HE, Column::Lambda, Column::Site],
            tol: 1e-10,
        },
    )]
}

pub fn wala_quality_criteria(cfg: &Resolved) -> Vec<Criterion> {
    cfg.lambda
        .iter()
        .filter_map(|&lam| {
            let max = if lam == 0.0 { 1e-2 } else if lam <= 0.25 { 1e-1 } else { return None };
            Some(bound(
                &format!("infidelity_lambda_{lam}"),
                "ansatz infidelity against the exact ground state",
                "infidelity",
                f(&[(Column::Lambda, json!(lam))]),
                Aggregate::Max,
                None,
                Some(max),
            ))
        })
        .collect()
}

fn is_pair(cfg: &Resolved) -> bool {
    matches!(cfg.prep, Some(Prep::WalaPair { .. }))
}

pub fn fig3_charges_criteria(cfg: &Resolved) -> Vec<Criterion> {
    let mut c = vec![in_unit("two_charge_probability", "two_charge_probability", vec![])];
    if cfg.noise.is_some() {
        return c;
    }
    if is_pair(cfg) {
        c.push(near("adjacent_start", "the pair starts one site apart", "separation", f(&[t0(), noiseless_stage()]), 1.0, 1e-9));
        if cfg.lambda.contains(&0.0) {
            c.push(Criterion::new(
                "separation_constant_lambda_0",
                "without string tension dynamics the charges do not move",
                Rule::ColumnConstant {
                    select: sel("separation", &[(Column::Lambda, json!(0.0))]),
                    group_by: vec![Column::HE, Column::Dt],
                    tol: 1e-10,
                },
            ));
        }
        let h_max = cfg.h_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if h_max >= 2.0 && cfg.lambda.iter().any(|&l| l > 0.0) {
            let r = mixed_state_mean_separation(cfg.lattice.lx, cfg.lattice.ly);
            let o = *r.numer() as f64 / *r.denom() as f64;
            c.push(bound(
                "confined_mean_separation",
                "strong fields keep the mean separation well below the fully mixed value",
                "separation",
                f(&[(Column::HE, json!(h_max)), (Column::Lambda, json!({"min": 1e-6}))]),
                Aggregate::Mean,
                None,
                Some(0.6 * o),
            ));
        }
    }
    c
}

pub fn fig3_superposition_criteria(_: &Resolved) -> Vec<Criterion> {
    ["plus", "minus"]
        .iter()
        .map(|b| {
            near(
                &format!("two_charges_{b}"),
                "both branches hold exactly two charges initially",
                &format!("charge_number_{b}"),
                f(&[t0()]),
                2.0,
                1e-9,
            )
        })
        .collect()
}

pub fn fig3_conditional_criteria(cfg: &Resolved) -> Vec<Criterion> {
    let mut c = vec![in_unit("conditional_probabilities", "conditional", vec![])];
    if cfg.noise.is_none() {
        c.push(near("reference_excited_at_start", "the reference vertex holds a charge initially", "p_reference", f(&[t0()]), 1.0, 1e-9));
    }
    c
}

pub fn s4_criteria(cfg: &Resolved) -> Vec<Criterion> {
    if cfg.noise.is_some() {
        return vec![in_unit("odd_sector", "odd_sector_probability", vec![])];
    }
    vec![
        near("odd_sector", "the flipped vertex forces an odd charge number", "odd_sector_probability", vec![], 1.0, 1e-9),
        near("charge_starts_at_edge", "the single charge starts on the flipped vertex", "charge_distance", f(&[t0()]), 0.0, 1e-9),
    ]
}

pub fn edfig4_criteria(_: &Resolved) -> Vec<Criterion> {
    vec![
        near("adjacent_start", "the noiseless pair starts one site apart", "separation", f(&[t0(), noiseless_stage()]), 1.0, 1e-9),
        in_unit("global_probability", "p_global", vec![]),
    ]
}

pub fn trotter_criteria(cfg: &Resolved) -> Vec<Criterion> {
    let mut c = vec![bound("same_start", "Trotter and exact series share the initial state", "separation_error", f(&[t0()]), Aggregate::AbsMax, None, Some(1e-12))];
    if cfg.dt.contains(&0.1) {
        c.push(bound("fine_step_tracks_exact", "dt = 0.1 follows the exact separation", "separation_error", f(&[(Column::Dt, json!(0.1))]), Aggregate::AbsMax, None, Some(0.02)));
    }
    c
}

pub fn loschmidt_criteria(_: &Resolved) -> Vec<Criterion> {
    vec![in_unit("p_eff_range", "p_eff", vec![]), in_unit("retention_range", "retention", vec![])]
}

pub fn fig5_breaking_criteria(cfg: &Resolved) -> Vec<Criterion> {
    let mut c = vec![];
    if cfg.noise.is_none() {
        c.push(bound("equal_start", "string and vacuum share <A_v> initially", "a_v_difference", f(&[t0()]), Aggregate::AbsMax, None, Some(1e-9)));
        c.push(near("no_grid_charges", "the string ends on the external vertices", "charge_number_string", f(&[t0()]), 0.0, 1e-9));
    }
    c
}

pub fn fig5_resonance_criteria(cfg: &Resolved) -> Vec<Criterion> {
    let mut c = vec![in_unit("p_a1_range", "p_a1", vec![])];
    if cfg.lambda.contains(&0.5) && cfg.h_e.len() >= 3 {
        let t = final_time(cfg, cfg.dt[0]);
        c.push(Criterion::new(
            "resonance_near_2",
            "charge creation at A1 peaks inside the field grid near h_E = 2",
            Rule::Argmax {
                select: sel("p_a1", &[(Column::Lambda, json!(0.5)), (Column::T, json!(t)), (Column::Dt, json!(cfg.dt[0]))]),
                over: Column::HE,
                group_by: vec![],
                min: 1.6,
                max: 2.4,
            },
        ));
    }
    c
}

pub fn fig4_criteria(_: &Resolved) -> Vec<Criterion> {
    vec![
        near("zz_starts_at_one", "Z squares to one", "zz_re", f(&[t0()]), 1.0, 1e-9),
        Criterion::new(
            "s_zz_starts_at_z",
            "S_ZZ(0) equals <Z(0)>",
            Rule::CompareColumns {
                a: sel("s_zz", &[t0()]),
                b: sel("z0", &[]),
                join: vec![Column::HE, Column::Lambda, Column::Dt, Column::Site],
                tol: 1e-12,
            },
        ),
    ]
}

pub fn edfig9_criteria(_: &Resolved) -> Vec<Criterion> {
    vec![
        bound("im_starts_at_zero", "Im<Z(0)Z(0)> vanishes", "zz_im", f(&[t0()]), Aggregate::AbsMax, None, Some(1e-9)),
        Criterion::new(
            "z_t_starts_at_z0",
            "<Z(t)> at t = 0 equals <Z(0)>",
            Rule::CompareColumns {
                a: sel("z_t", &[t0()]),
                b: sel("z0", &[]),
                join: vec![Column::HE, Column::Lambda, Column::Dt, Column::Site],
                tol: 1e-12,
            },
        ),
    ]
}

pub fn s5_criteria(cfg: &Resolved) -> Vec<Criterion> {
    let longer: Vec<Value> = (2..=cfg.lattice.lx).map(|j| json!(format!("j{j}"))).collect();
    vec![
        near("unit_string_starts_at_one", "C(1, 0) = 1", "c_re", f(&[t0(), (Column::Site, json!("j1"))]), 1.0, 1e-9),
        bound("long_strings_start_at_zero", "C(j >= 2, 0) = 0", "c_abs", f(&[t0(), (Column::Site, Value::Array(longer))]), Aggregate::AbsMax, None, Some(1e-9)),
    ]
}

pub fn s6_criteria(cfg: &Resolved) -> Vec<Criterion> {
    if !(cfg.lambda.contains(&0.0) && cfg.lambda.len() > 1) {
        return vec![];
    }
    vec![bound(
        "lambda_independent_s_zz",
        "S_ZZ barely depends on lambda up to t = 2.7",
        "s_zz_difference",
        f(&[(Column::T, json!({"max": 2.7}))]),
        Aggregate::AbsMax,
        None,
        Some(0.1),
    )]
}
