//! Post-selection, readout-confusion inversion, global-depolarizing
//! rescaling and Loschmidt-echo calibration.

use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::lattice::{mixed_state_mean_separation, Lattice};
use crate::model::{Term, TermKind};
use crate::noise::{run_trajectories, NoiseModel, ReadoutModel};
use crate::observables::{charge_count, vertex_masks};
use crate::shots::ShotTable;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PostselectCriteria {
    pub ancilla_zero: bool,
    pub charge_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Postselected {
    pub table: ShotTable,
    pub kept: usize,
    pub total: usize,
}

impl Postselected {
    /// Fraction of rows kept; `NaN` for an empty input.
    pub fn retention(&self) -> f64 {
        self.kept as f64 / self.total as f64
    }
}

pub fn postselect(
    shots: &ShotTable,
    lattice: Option<&Lattice>,
    criteria: PostselectCriteria,
) -> Result<Postselected> {
    let masks = match (criteria.charge_count, lattice) {
        (Some(_), Some(l)) => {
            if l.n_links() > shots.n_qubits() {
                return Err(Error::DimensionMismatch(shots.n_qubits(), l.n_links()));
            }
            vertex_masks(l)
        }
        (Some(_), None) => return Err(Error::Unsupported("charge criterion needs a lattice".into())),
        _ => Vec::new(),
    };
    let anc = if criteria.ancilla_zero { shots.ancilla_mask() } else { 0 };
    let table = shots.filter(|r| {
        r & anc == 0 && criteria.charge_count.is_none_or(|k| charge_count(r, &masks) == k)
    });
    Ok(Postselected {
        kept: table.len(),
        total: shots.len(),
        table,
    })
}

fn confusion(model: &ReadoutModel, q: usize) -> [[f64; 2]; 2] {
    let e = model.for_qubit(q);
    // column = true bit, row = read bit
    [[1.0 - e.eps0, e.eps1], [e.eps0, 1.0 - e.eps1]]
}

fn apply_per_qubit(p: &mut [f64], qubits: &[usize], mats: impl Fn(usize) -> Result<[[f64; 2]; 2]>) -> Result<()> {
    if p.len() != 1 << qubits.len() {
        return Err(Error::DimensionMismatch(p.len(), 1 << qubits.len()));
    }
    for (i, &q) in qubits.iter().enumerate() {
        let m = mats(q)?;
        let bit = 1 << i;
        for b in 0..p.len() {
            if b & bit == 0 {
                let (a0, a1) = (p[b], p[b | bit]);
                p[b] = m[0][0] * a0 + m[0][1] * a1;
                p[b | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
    Ok(())
}

/// Push a true distribution through the readout channel.
pub fn corrupt_distribution(p: &[f64], qubits: &[usize], model: &ReadoutModel) -> Result<Vec<f64>> {
    let mut out = p.to_vec();
    apply_per_qubit(&mut out, qubits, |q| Ok(confusion(model, q)))?;
    Ok(out)
}

/// `R⁻¹·p` for the tensor-product confusion matrix `R`. Bit `i` of an index
/// is `qubits[i]`. Negative entries are kept.
pub fn invert_readout(p: &[f64], qubits: &[usize], model: &ReadoutModel) -> Result<Vec<f64>> {
    let mut out = p.to_vec();
    apply_per_qubit(&mut out, qubits, |q| {
        let [[a, b], [c, d]] = confusion(model, q);
        let det = a * d - b * c;
        if det.abs() < 1e-12 {
            return Err(Error::SingularReadout(q));
        }
        Ok([[d / det, -b / det], [-c / det, a / det]])
    })?;
    Ok(out)
}

/// Clip negatives to zero and renormalize, for display.
pub fn clip_and_renormalize(p: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    clipped.iter().map(|x| x / s).collect()
}

/// Readout-mitigated `⟨Z_{q₁}⋯Z_{q_k}⟩` from shots.
pub fn mitigated_parity(shots: &ShotTable, qubits: &[usize], model: &ReadoutModel) -> Result<f64> {
    let p = invert_readout(&shots.marginal(qubits)?, qubits, model)?;
    Ok(p.iter()
        .enumerate()
        .map(|(b, x)| if b.count_ones() & 1 == 1 { -x } else { *x })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PEff {
    /// Clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    /// Set when the raw estimate left `[0, 1]`.
    pub flagged: bool,
}

impl PEff {
    fn new(raw: f64) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            raw,
            flagged: !(0.0..=1.0).contains(&raw),
        }
    }
}

pub fn effective_depol(measured: f64, o_initial: f64, o_depolarized: f64) -> Result<PEff> {
    let den = o_depolarized - o_initial;
    if den.abs() < 1e-14 {
        return Err(Error::Degenerate(format!(
            "initial and depolarized references coincide at {o_initial}"
        )));
    }
    Ok(PEff::new((measured - o_initial) / den))
}

pub fn rescale(measured: f64, p_eff: f64, o_depolarized: f64) -> Result<f64> {
    if p_eff >= 1.0 {
        return Err(Error::OutOfRange(format!("p_eff = {p_eff}")));
    }
    Ok((measured - p_eff * o_depolarized) / (1.0 - p_eff))
}

/// Standard error of a rescaled value.
pub fn rescale_stderr(stderr: f64, p_eff: f64) -> f64 {
    stderr / (1.0 - p_eff)
}

/// The global depolarizing channel on an expectation value.
pub fn depolarize_value(x: f64, p: f64, o_depolarized: f64) -> f64 {
    (1.0 - p) * x + p * o_depolarized
}

/// `p_eff = √(1 − E_measured/E_exact)`.
pub fn loschmidt_p_eff(e_measured: f64, e_exact: f64) -> Result<PEff> {
    if e_exact == 0.0 {
        return Err(Error::Degenerate("zero Loschmidt reference energy".into()));
    }
    let ratio = e_measured / e_exact;
    if ratio.is_nan() {
        return Ok(PEff::new(f64::NAN));
    }
    if ratio > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!("Loschmidt ratio {ratio} exceeds 1")));
    }
    let raw = (1.0 - ratio).max(0.0).sqrt();
    Ok(PEff::new(raw))
}

/// Echoed energy with every Pauli term at `+1`: the sum of all coefficients.
/// With positive signs this is `−(λ + h_E)·N − J_E·N_A − J_M·N_B`.
pub fn loschmidt_energy_exact(terms: &[Term]) -> f64 {
    terms.iter().map(|t| t.coeff).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    StationaryObservable,
    Loschmidt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigationRecord {
    pub source: ReferenceSource,
    pub o_initial: f64,
    pub o_depolarized: f64,
    pub p_eff: Vec<PEff>,
}

impl MitigationRecord {
    /// `p_eff` per time point from a calibration series of the same observable.
    pub fn from_stationary(calibration: &[f64], o_initial: f64, o_depolarized: f64) -> Result<Self> {
        Ok(Self {
            source: ReferenceSource::StationaryObservable,
            o_initial,
            o_depolarized,
            p_eff: calibration
                .iter()
                .map(|&m| effective_depol(m, o_initial, o_depolarized))
                .collect::<Result<_>>()?,
        })
    }

    pub fn rescale_series(&self, measured: &[f64], o_depolarized: f64) -> Result<Vec<f64>> {
        if measured.len() != self.p_eff.len() {
            return Err(Error::GridMismatch(format!("{} vs {}", measured.len(), self.p_eff.len())));
        }
        measured
            .iter()
            .zip(&self.p_eff)
            .map(|(&m, p)| rescale(m, p.value, o_depolarized))
            .collect()
    }
}

/// Maximally mixed value of each observable family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ObservableKind {
    Separation { lx: usize, ly: usize },
    TracelessPauli,
    VertexExcitation,
}

pub fn o_depolarized(kind: ObservableKind) -> f64 {
    match kind {
        ObservableKind::Separation { lx, ly } => {
            let r = mixed_state_mean_separation(lx, ly);
            *r.numer() as f64 / *r.denom() as f64
        }
        ObservableKind::TracelessPauli => 0.0,
        ObservableKind::VertexExcitation => 0.5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoschmidtResult {
    pub e_measured: f64,
    pub e_exact: f64,
    pub p_loschmidt: f64,
    pub p_eff: PEff,
    pub retention: f64,
}

/// Noisy echo `U†U` of a preparation circuit, read out in the Z basis for
/// diagonal terms and, wrapped in Hadamards on every link, in the X basis for
/// the rest. Both echoes ideally return `+1` for every term.
pub fn loschmidt_echo(
    lattice: &Lattice,
    terms: &[Term],
    prep: &Circuit,
    n_qubits: usize,
    model: &NoiseModel,
    n_traj: usize,
    shots: usize,
) -> Result<LoschmidtResult> {
    let links = lattice.n_links();
    let mut z_echo = Circuit::new(n_qubits);
    z_echo.append(prep)?;
    z_echo.append(&prep.inverse())?;
    let mut x_echo = Circuit::new(n_qubits);
    for l in 0..links {
        x_echo.push(Gate::H, &[l])?;
    }
    x_echo.append(&z_echo)?;
    for l in 0..links {
        x_echo.push(Gate::H, &[l])?;
    }
    let psi0 = StateVector::zero(n_qubits)?;
    let select = PostselectCriteria {
        ancilla_zero: true,
        charge_count: None,
    };
    let z = postselect(&run_trajectories(&z_echo, &psi0, model, n_traj, shots)?, None, select)?;
    let x_model = NoiseModel {
        master_seed: model.master_seed ^ 0x9e37_79b9_7f4a_7c15,
        ..model.clone()
    };
    let x = postselect(&run_trajectories(&x_echo, &psi0, &x_model, n_traj, shots)?, None, select)?;
    // With every shot rejected there is nothing to average.
    let e_measured = if z.table.is_empty() || x.table.is_empty() {
        f64::NAN
    } else {
        let mut e = 0.0;
        for t in terms {
            let table = match t.kind {
                TermKind::FieldX(_) | TermKind::Plaquette(_) => &x.table,
                _ => &z.table,
            };
            e += t.coeff * table.parity_mean(t.pauli.support_mask())?.0;
        }
        e
    };
    let e_exact = loschmidt_energy_exact(terms);
    let p_eff = loschmidt_p_eff(e_measured, e_exact)?;
    Ok(LoschmidtResult {
        e_measured,
        e_exact,
        p_loschmidt: 1.0 - e_measured / e_exact,
        p_eff,
        retention: (z.kept + x.kept) as f64 / (z.total + x.total) as f64,
    })
}
