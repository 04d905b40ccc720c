//! Z-basis observables computed the same way from exact probabilities or from
//! shots, and the noisy pipeline that reports them per mitigation stage.

use lgt_core::circuits::{build_trotter_step, EvolutionMode, QubitLayout, TrotterSpec, WalaMode};
use lgt_core::lattice::{mixed_state_mean_separation, Lattice, VertexId};
use lgt_core::mitigation::{effective_depol, mitigated_parity, postselect, rescale, rescale_stderr, PostselectCriteria};
use lgt_core::model::HamiltonianParams;
use lgt_core::noise::{run_trajectory_series, NoiseModel, ReadoutModel};
use lgt_core::observables::vertex_masks;
use lgt_core::prep::{prep_circuit, prep_theta, prepare_state, Prep};
use lgt_core::shots::{clustered_mean_stderr, ShotTable};
use lgt_core::state::{StateVector, DEFAULT_QUBIT_CAP};
use lgt_core::Result;

use crate::exec::{Ctx, Job, JobOutput, StepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diag {
    /// Mean distance of the two charges, inside the two-charge sector.
    Separation,
    /// `⟨A_v⟩` per vertex and the mean charge number.
    Charges,
    /// `⟨Z_l⟩` per link.
    Links,
    /// Partner distribution given that this vertex holds one of two charges.
    Conditional(VertexId),
    /// Charges counted relative to a sign-flipped vertex.
    Quench(VertexId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub observable: &'static str,
    pub site: String,
    pub value: f64,
    pub stderr: f64,
}

fn est(observable: &'static str, site: impl Into<String>, (value, stderr): (f64, f64)) -> Estimate {
    Estimate {
        observable,
        site: site.into(),
        value,
        stderr,
    }
}

pub fn vsite(v: VertexId) -> String {
    format!("v{v}")
}

pub fn lsite(l: usize) -> String {
    format!("l{l}")
}

/// Weighted basis rows: exact probabilities, or unit-weight shots tagged
/// with their trajectory.
pub struct Samples {
    rows: Vec<(u64, f64)>,
    /// Trajectory of each shot; `None` for exact data.
    clusters: Option<Vec<u32>>,
}

impl Samples {
    pub fn exact(psi: &StateVector) -> Self {
        Self {
            rows: psi
                .amplitudes()
                .iter()
                .enumerate()
                .filter_map(|(b, a)| {
                    let p = a.norm_sqr();
                    (p > 0.0).then_some((b as u64, p))
                })
                .collect(),
            clusters: None,
        }
    }

    pub fn shots(table: &ShotTable) -> Self {
        Self {
            rows: table.rows().iter().map(|&r| (r, 1.0)).collect(),
            clusters: Some(table.trajectory_ids().to_vec()),
        }
    }

    /// Mean of `f` over the rows where it is defined, with its standard error
    /// and the weight fraction of those rows. Exact data has zero error; shot
    /// errors are clustered by trajectory, since shots of one trajectory share
    /// its noise history.
    pub fn mean(&self, f: impl Fn(u64) -> Option<f64>) -> (f64, f64, f64) {
        let total: f64 = self.rows.iter().map(|r| r.1).sum();
        let mut vals = Vec::new();
        let mut ids = Vec::new();
        let mut w = 0.0;
        let mut acc = 0.0;
        for (i, &(r, wt)) in self.rows.iter().enumerate() {
            if let Some(x) = f(r) {
                w += wt;
                acc += x * wt;
                vals.push(x);
                if let Some(c) = &self.clusters {
                    ids.push(c[i]);
                }
            }
        }
        if w == 0.0 {
            return (f64::NAN, f64::NAN, 0.0);
        }
        match &self.clusters {
            None => (acc / w, 0.0, w / total),
            Some(_) => {
                let (m, se) = clustered_mean_stderr(&vals, &ids).expect("aligned, non-empty");
                (m, se, w / total)
            }
        }
    }

    fn fraction(&self, f: impl Fn(u64) -> bool) -> (f64, f64) {
        let (m, se, _) = self.mean(|r| Some(if f(r) { 1.0 } else { 0.0 }));
        (m, se)
    }
}

fn odd(row: u64, mask: u64) -> bool {
    (row & mask).count_ones() & 1 == 1
}

fn violated(row: u64, masks: &[u64]) -> Vec<VertexId> {
    (0..masks.len()).filter(|&v| odd(row, masks[v])).collect()
}

pub fn estimates(s: &Samples, lattice: &Lattice, diags: &[Diag]) -> Vec<Estimate> {
    let masks = vertex_masks(lattice);
    let mut out = Vec::new();
    for d in diags {
        match *d {
            Diag::Separation => {
                let (m, se, frac) = s.mean(|r| match violated(r, &masks)[..] {
                    [a, b] => Some(lattice.manhattan_distance(a, b) as f64),
                    _ => None,
                });
                out.push(est("separation", "", (m, se)));
                let n2 = s.fraction(|r| violated(r, &masks).len() == 2);
                out.push(est("two_charge_probability", "", (frac, n2.1)));
            }
            Diag::Charges => {
                for (v, &m) in masks.iter().enumerate() {
                    let (a, se, _) = s.mean(|r| Some(if odd(r, m) { -1.0 } else { 1.0 }));
                    out.push(est("a_v", vsite(v), (a, se)));
                }
                let (n, se, _) = s.mean(|r| Some(violated(r, &masks).len() as f64));
                out.push(est("charge_number", "", (n, se)));
            }
            Diag::Links => {
                for l in 0..lattice.n_links() {
                    let (z, se, _) = s.mean(|r| Some(if r >> l & 1 == 1 { -1.0 } else { 1.0 }));
                    out.push(est("z", lsite(l), (z, se)));
                }
            }
            Diag::Conditional(reference) => {
                let pair = |r: u64| match violated(r, &masks)[..] {
                    [a, b] if a == reference => Some(b),
                    [a, b] if b == reference => Some(a),
                    _ => None,
                };
                out.push(est("p_reference", vsite(reference), s.fraction(|r| pair(r).is_some())));
                for v in (0..masks.len()).filter(|&v| v != reference) {
                    let (p, se, _) = s.mean(|r| pair(r).map(|w| if w == v { 1.0 } else { 0.0 }));
                    out.push(est("conditional", vsite(v), (p, se)));
                }
            }
            Diag::Quench(edge) => {
                let excited = |r: u64| -> Vec<VertexId> {
                    (0..masks.len()).filter(|&v| odd(r, masks[v]) != (v == edge)).collect()
                };
                out.push(est("odd_sector_probability", "", s.fraction(|r| excited(r).len() % 2 == 1)));
                out.push(est("single_charge_probability", "", s.fraction(|r| excited(r).len() == 1)));
                let (d, se, _) = s.mean(|r| match excited(r)[..] {
                    [v] => Some(lattice.manhattan_distance(edge, v) as f64),
                    _ => None,
                });
                out.push(est("charge_distance", "", (d, se)));
                for v in 0..masks.len() {
                    let m = masks[v];
                    out.push(est("p_excited", vsite(v), s.fraction(|r| odd(r, m) != (v == edge))));
                }
            }
        }
    }
    out
}

fn support(mask: u64) -> Vec<usize> {
    (0..64).filter(|q| mask >> q & 1 == 1).collect()
}

/// Parity estimates after inverting the readout channel. The standard error
/// is the raw one scaled by the parity contrast `Π|1 − ε₀ − ε₁|`.
fn readout_estimates(table: &ShotTable, lattice: &Lattice, diags: &[Diag], model: &ReadoutModel) -> Result<Vec<Estimate>> {
    let mut out = Vec::new();
    let parity = |observable: &'static str, site: String, mask: u64| -> Result<Estimate> {
        // Post-selection can reject every shot; the stage then has no estimate.
        if table.is_empty() {
            return Ok(est(observable, site, (f64::NAN, f64::NAN)));
        }
        let qubits = support(mask);
        let value = mitigated_parity(table, &qubits, model)?;
        let contrast: f64 = qubits
            .iter()
            .map(|&q| {
                let e = model.for_qubit(q);
                (1.0 - e.eps0 - e.eps1).abs()
            })
            .product();
        let raw = Samples::shots(table).mean(|r| Some(if odd(r, mask) { -1.0 } else { 1.0 })).1;
        Ok(est(observable, site, (value, raw / contrast)))
    };
    for d in diags {
        match d {
            Diag::Charges => {
                let mut n = 0.0;
                let mut var = 0.0;
                for (v, &m) in vertex_masks(lattice).iter().enumerate() {
                    let e = parity("a_v", vsite(v), m)?;
                    n += (1.0 - e.value) / 2.0;
                    var += (e.stderr / 2.0).powi(2);
                    out.push(e);
                }
                out.push(est("charge_number", "", (n, var.sqrt())));
            }
            Diag::Links => {
                for l in 0..lattice.n_links() {
                    out.push(parity("z", lsite(l), 1 << l)?);
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Global-depolarization rescaling of the estimates whose fully mixed value is known.
fn rescaled(estimates: &[Estimate], p: f64, lattice: &Lattice) -> Vec<Estimate> {
    let sep = mixed_state_mean_separation(lattice.lx(), lattice.ly());
    let o_sep = *sep.numer() as f64 / *sep.denom() as f64;
    estimates
        .iter()
        .filter_map(|e| {
            let o = match e.observable {
                "a_v" | "z" => 0.0,
                "charge_number" => lattice.n_vertices() as f64 / 2.0,
                "separation" => o_sep,
                _ => return None,
            };
            let (value, stderr) = match rescale(e.value, p, o) {
                Ok(v) => (v, rescale_stderr(e.stderr, p)),
                Err(_) => (f64::NAN, f64::NAN),
            };
            Some(Estimate {
                value,
                stderr,
                ..e.clone()
            })
        })
        .collect()
}

pub fn push_estimates(out: &mut JobOutput, job: &Job, scenario: &str, tag: &str, k: usize, stage: &str, es: &[Estimate]) {
    for e in es {
        let name = if tag.is_empty() {
            e.observable.to_string()
        } else {
            format!("{}_{tag}", e.observable)
        };
        out.push(job, scenario, &name, e.site.clone(), job.time(k), e.value, e.stderr, stage);
    }
}

/// Noiseless evolution of `prep` under `params`, calling `visit(k, ψ)` after
/// every step count `0..=n_steps`. Gate-level mode runs on the full layout.
pub fn evolve_exact(
    ctx: &Ctx,
    job: &Job,
    params: &HamiltonianParams,
    prep: &Prep,
    mut visit: impl FnMut(usize, &StateVector) -> Result<()>,
) -> Result<()> {
    let lattice = &ctx.lattice;
    let theta = prep_theta(prep, lattice, params, None)?;
    let (step, mut psi) = step_and_state(ctx, job, params, prepare_state(lattice, prep, theta)?)?;
    for k in 0..=job.n_steps {
        if k > 0 {
            step.run(&mut psi)?;
        }
        visit(k, &psi)?;
    }
    Ok(())
}

/// The configured Trotter step and `psi` padded to its register.
pub fn step_and_state(
    ctx: &Ctx,
    job: &Job,
    params: &HamiltonianParams,
    mut psi: StateVector,
) -> Result<(lgt_core::circuits::Circuit, StateVector)> {
    let lattice = &ctx.lattice;
    let layout = match ctx.cfg.mode {
        EvolutionMode::Direct => QubitLayout::links_only(lattice),
        EvolutionMode::GateLevel => QubitLayout::auto(lattice)?,
    };
    let spec = TrotterSpec::new(lattice, params.clone(), job.dt, job.n_steps).with_mode(ctx.cfg.mode);
    let step = build_trotter_step(lattice, &spec, &layout)?;
    if layout.n_qubits() > psi.n_qubits() {
        psi.extend_zero(layout.n_qubits() - psi.n_qubits(), DEFAULT_QUBIT_CAP)?;
    }
    Ok((step, psi))
}

pub fn exact_series(ctx: &Ctx, job: &Job, out: &mut JobOutput, params: &HamiltonianParams, prep: &Prep, diags: &[Diag], tag: &str) -> Result<()> {
    let name = ctx.cfg.scenario.name;
    evolve_exact(ctx, job, params, prep, |k, psi| {
        push_estimates(out, job, name, tag, k, "noiseless", &estimates(&Samples::exact(psi), &ctx.lattice, diags));
        Ok(())
    })
}

pub fn noise_model(ctx: &Ctx, seed: u64) -> NoiseModel {
    let n = ctx.cfg.noise.clone().unwrap_or_default();
    NoiseModel {
        p2: n.p2,
        readout: ReadoutModel::uniform(n.eps0, n.eps1),
        master_seed: seed,
    }
}

/// Gate-level noisy trajectories of `prep` + `n_steps` Trotter steps; one
/// shot table per step count. Noise always runs on the compiled circuits.
pub fn noisy_tables(ctx: &Ctx, job: &Job, params: &HamiltonianParams, prep: &Prep, seed: u64) -> Result<(Vec<ShotTable>, usize, usize)> {
    let lattice = &ctx.lattice;
    let n = ctx.cfg.noise.clone().unwrap_or_default();
    let layout = QubitLayout::auto(lattice)?;
    let theta = prep_theta(prep, lattice, params, None)?;
    let prep_c = prep_circuit(lattice, prep, theta, WalaMode::Ancilla, &layout)?;
    let spec = TrotterSpec::new(lattice, params.clone(), job.dt, job.n_steps).with_mode(EvolutionMode::GateLevel);
    let step = build_trotter_step(lattice, &spec, &layout)?;
    let tables = run_trajectory_series(
        &prep_c,
        &step,
        job.n_steps,
        None,
        &StateVector::zero(layout.n_qubits())?,
        &noise_model(ctx, seed),
        n.trajectories,
        n.shots,
    )?;
    Ok((tables, prep_c.entangling_count(), step.entangling_count()))
}

fn mitigated_base(ctx: &Ctx, raw: &ShotTable) -> Result<ShotTable> {
    if !ctx.cfg.mitigation.postselect_ancillas {
        return Ok(raw.clone());
    }
    let crit = PostselectCriteria {
        ancilla_zero: true,
        charge_count: None,
    };
    Ok(postselect(raw, None, crit)?.table)
}

fn readout_active(ctx: &Ctx) -> bool {
    ctx.cfg.mitigation.readout_inversion && !noise_model(ctx, 0).readout.is_ideal()
}

/// Best pre-rescaling estimates: post-selected, readout-inverted where possible.
fn best_estimates(ctx: &Ctx, base: &ShotTable, diags: &[Diag]) -> Result<Vec<Estimate>> {
    let mut es = estimates(&Samples::shots(base), &ctx.lattice, diags);
    if readout_active(ctx) {
        for r in readout_estimates(base, &ctx.lattice, diags, &noise_model(ctx, 0).readout)? {
            if let Some(e) = es.iter_mut().find(|e| e.observable == r.observable && e.site == r.site) {
                *e = r;
            }
        }
    }
    Ok(es)
}

/// Effective depolarization per step from the λ = 0 run of the same
/// circuit, where every `A_v` is conserved: the vertex-averaged `⟨A_v⟩`
/// decays from its noiseless value towards 0.
fn calibrate(ctx: &Ctx, job: &Job, params: &HamiltonianParams, prep: &Prep, tag: &str, out: &mut JobOutput) -> Result<Vec<f64>> {
    let cal = HamiltonianParams { lam: 0.0, ..params.clone() };
    let lattice = &ctx.lattice;
    let theta = prep_theta(prep, lattice, &cal, None)?;
    let psi0 = prepare_state(lattice, prep, theta)?;
    let mean_a = |es: &[Estimate]| {
        let a: Vec<f64> = es.iter().filter(|e| e.observable == "a_v").map(|e| e.value).collect();
        a.iter().sum::<f64>() / a.len() as f64
    };
    let o_initial = mean_a(&estimates(&Samples::exact(&psi0), lattice, &[Diag::Charges]));
    let (tables, _, _) = noisy_tables(ctx, job, &cal, prep, job.sub_seed(1))?;
    let mut p = Vec::with_capacity(tables.len());
    for (k, raw) in tables.iter().enumerate() {
        let base = mitigated_base(ctx, raw)?;
        let measured = mean_a(&best_estimates(ctx, &base, &[Diag::Charges])?);
        let pe = effective_depol(measured, o_initial, 0.0)?;
        out.p_eff.push(StepRecord {
            label: format!("{tag}{}stationary_a_v", if tag.is_empty() { "" } else { ":" }),
            t: job.time(k),
            value: pe.value,
        });
        p.push(pe.value);
    }
    Ok(p)
}

/// Noisy data for `prep` at stages `raw`, `postselected`, `readout_mitigated`
/// and `rescaled`, as enabled by the mitigation config.
pub fn noisy_series(ctx: &Ctx, job: &Job, out: &mut JobOutput, params: &HamiltonianParams, prep: &Prep, diags: &[Diag], tag: &str) -> Result<()> {
    let name = ctx.cfg.scenario.name;
    let m = ctx.cfg.mitigation;
    let p_eff = if m.rescale {
        Some(calibrate(ctx, job, params, prep, tag, out)?)
    } else {
        None
    };
    let (tables, _, _) = noisy_tables(ctx, job, params, prep, job.sub_seed(0))?;
    for (k, raw) in tables.iter().enumerate() {
        push_estimates(out, job, name, tag, k, "raw", &estimates(&Samples::shots(raw), &ctx.lattice, diags));
        let base = mitigated_base(ctx, raw)?;
        if m.postselect_ancillas {
            out.retention.push(StepRecord {
                label: format!("{tag}{}ancilla_zero", if tag.is_empty() { "" } else { ":" }),
                t: job.time(k),
                value: base.len() as f64 / raw.len() as f64,
            });
            push_estimates(out, job, name, tag, k, "postselected", &estimates(&Samples::shots(&base), &ctx.lattice, diags));
        }
        if readout_active(ctx) {
            let r = readout_estimates(&base, &ctx.lattice, diags, &noise_model(ctx, 0).readout)?;
            push_estimates(out, job, name, tag, k, "readout_mitigated", &r);
        }
        if let Some(p) = &p_eff {
            let best = best_estimates(ctx, &base, diags)?;
            push_estimates(out, job, name, tag, k, "rescaled", &rescaled(&best, p[k], &ctx.lattice));
        }
    }
    Ok(())
}

/// Noiseless series, or the noisy stages when the config has a noise model.
pub fn series(ctx: &Ctx, job: &Job, out: &mut JobOutput, params: &HamiltonianParams, prep: &Prep, diags: &[Diag], tag: &str) -> Result<()> {
    if ctx.cfg.noise.is_some() {
        noisy_series(ctx, job, out, params, prep, diags, tag)
    } else {
        exact_series(ctx, job, out, params, prep, diags, tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lgt_core::lattice::{build_lattice, LatticeSpec};

    #[test]
    fn exact_and_shot_estimates_agree_on_a_basis_state() {
        let l = build_lattice(&LatticeSpec::new(3, 2)).unwrap();
        let link = l.horizontal_link(0, 0).unwrap();
        let psi = StateVector::basis(l.n_links(), 1 << link).unwrap();
        let table = ShotTable::from_rows(l.n_links(), vec![], vec![1 << link; 5]);
        let diags = [Diag::Separation, Diag::Charges, Diag::Links, Diag::Conditional(0), Diag::Quench(0)];
        let a = estimates(&Samples::exact(&psi), &l, &diags);
        let b = estimates(&Samples::shots(&table), &l, &diags);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.observable, &x.site), (y.observable, &y.site));
            assert!(x.value == y.value || (x.value.is_nan() && y.value.is_nan()), "{x:?} {y:?}");
            assert_eq!(x.stderr, 0.0);
        }
        let get = |o: &str, s: &str| a.iter().find(|e| e.observable == o && e.site == s).unwrap().value;
        assert_eq!(get("separation", ""), 1.0);
        assert_eq!(get("charge_number", ""), 2.0);
        assert_eq!(get("p_reference", "v0"), 1.0);
        assert_eq!(get("conditional", "v1"), 1.0);
        // the flipped vertex 0 is the one charge that exists relative to the quench signs
        assert_eq!(get("p_excited", "v0"), 0.0);
        assert_eq!(get("p_excited", "v1"), 1.0);
        assert_eq!(get("charge_distance", ""), 1.0);
        assert_eq!(get("odd_sector_probability", ""), 1.0);
    }

    #[test]
    fn rescaling_inverts_global_depolarization() {
        let l = build_lattice(&LatticeSpec::new(3, 2)).unwrap();
        let p = 0.3;
        let es = vec![
            est("a_v", "v0", (0.7 * 0.6, 0.01)),
            est("separation", "", (0.7 * 1.2 + 0.3 * 5.0 / 3.0, 0.0)),
            est("p_reference", "v0", (0.5, 0.0)),
        ];
        let r = rescaled(&es, p, &l);
        assert_eq!(r.len(), 2);
        assert!((r[0].value - 0.6).abs() < 1e-12 && (r[0].stderr - 0.01 / 0.7).abs() < 1e-12);
        assert!((r[1].value - 1.2).abs() < 1e-12);
    }
}
