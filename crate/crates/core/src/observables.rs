//! Measured quantities: charge parities and separations, heatmaps,
//! conditional maps, two-time correlators and the string correlator.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_hadamard_test, estimator_operator, Circuit};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeSpec, LinkId, LinkKind, Node, PathSpec, Side, VertexId};
use crate::pauli::{Pauli, PauliString};
use crate::reference::{exact_evolve, SparseHamiltonian};
use crate::shots::{mean_stderr, ShotTable};
use crate::state::{StateVector, DEFAULT_QUBIT_CAP};

/// Link-bit mask of each vertex support.
pub fn vertex_masks(lattice: &Lattice) -> Vec<u64> {
    (0..lattice.n_vertices())
        .map(|v| lattice.vertex_support(v).iter().fold(0, |m, &l| m | 1 << l))
        .collect()
}

fn violated(row: u64, masks: &[u64]) -> impl Iterator<Item = VertexId> + '_ {
    masks
        .iter()
        .enumerate()
        .filter(move |(_, m)| (row & **m).count_ones() & 1 == 1)
        .map(|(v, _)| v)
}

/// Number of vertices with `A_v = −1` in `row`.
pub fn charge_count(row: u64, masks: &[u64]) -> usize {
    violated(row, masks).count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChargeRecord {
    pub parities: Vec<i8>,
    pub violated: Vec<VertexId>,
    pub sector: usize,
}

/// Vertex parities of one bitstring (qubit-0-first, links first).
pub fn vertex_parities(bits: &[bool], lattice: &Lattice) -> Result<ChargeRecord> {
    if bits.len() < lattice.n_links() {
        return Err(Error::DimensionMismatch(bits.len(), lattice.n_links()));
    }
    let parities: Vec<i8> = (0..lattice.n_vertices())
        .map(|v| {
            let ones = lattice.vertex_support(v).iter().filter(|&&l| bits[l]).count();
            if ones % 2 == 1 {
                -1
            } else {
                1
            }
        })
        .collect();
    let violated: Vec<VertexId> = (0..parities.len()).filter(|&v| parities[v] < 0).collect();
    Ok(ChargeRecord {
        sector: violated.len(),
        parities,
        violated,
    })
}

pub fn row_bits(row: u64, n: usize) -> Vec<bool> {
    (0..n).map(|q| row >> q & 1 == 1).collect()
}

fn pair_distance(row: u64, masks: &[u64], lattice: &Lattice) -> Option<usize> {
    let mut it = violated(row, masks);
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Some(lattice.manhattan_distance(a, b)),
        _ => None,
    }
}

/// Mean Manhattan distance of the two charges over a two-charge table.
pub fn mean_separation(shots: &ShotTable, lattice: &Lattice) -> Result<(f64, f64)> {
    let masks = vertex_masks(lattice);
    let d: Vec<f64> = shots
        .rows()
        .iter()
        .map(|&r| {
            pair_distance(r, &masks, lattice)
                .map(|d| d as f64)
                .ok_or_else(|| Error::OutOfRange("row outside the two-charge sector".into()))
        })
        .collect::<Result<_>>()?;
    mean_stderr(d)
}

/// Probability of the two-charge sector and the mean separation inside it.
pub fn mean_separation_exact(psi: &StateVector, lattice: &Lattice) -> Result<(f64, f64)> {
    let masks = vertex_masks(lattice);
    let (mut p2, mut acc) = (0.0, 0.0);
    for (b, a) in psi.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        if let Some(d) = pair_distance(b as u64, &masks, lattice) {
            p2 += w;
            acc += w * d as f64;
        }
    }
    if p2 < 1e-14 {
        return Err(Error::ZeroProbabilityBranch(p2));
    }
    Ok((p2, acc / p2))
}

/// `⟨A_v⟩` per vertex from shots, with standard errors.
pub fn excitation_heatmap(shots: &ShotTable, lattice: &Lattice) -> Result<Vec<(f64, f64)>> {
    vertex_masks(lattice).iter().map(|&m| shots.parity_mean(m)).collect()
}

/// `⟨Z_l⟩` per link from shots, with standard errors.
pub fn z_field_map(shots: &ShotTable, n_links: usize) -> Result<Vec<(f64, f64)>> {
    (0..n_links).map(|l| shots.parity_mean(1 << l)).collect()
}

pub fn vertex_expectations(psi: &StateVector, lattice: &Lattice) -> Result<Vec<f64>> {
    (0..lattice.n_vertices())
        .map(|v| psi.expectation(&PauliString::z_on(lattice.vertex_support(v))?))
        .collect()
}

pub fn z_expectations(psi: &StateVector, n_links: usize) -> Result<Vec<f64>> {
    (0..n_links)
        .map(|l| psi.expectation(&PauliString::single(l, Pauli::Z)))
        .collect()
}

/// `P(A_v) = (1 − ⟨A_v⟩)/2`, the probability that vertex `v` holds a charge.
pub fn excitation_probability(a_v: f64) -> f64 {
    (1.0 - a_v) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalMap {
    pub reference: VertexId,
    /// Unconditioned probability that the reference vertex is excited.
    pub reference_probability: f64,
    /// Partner distribution given the reference is excited; `None` if it never is.
    pub partner: Option<Vec<f64>>,
}

fn conditional_from(
    rows: impl Iterator<Item = (u64, f64)>,
    lattice: &Lattice,
    reference: VertexId,
) -> Result<ConditionalMap> {
    if reference >= lattice.n_vertices() {
        return Err(Error::OutOfRange(format!("vertex {reference}")));
    }
    let masks = vertex_masks(lattice);
    let mut total = 0.0;
    let mut hit = 0.0;
    let mut partner = vec![0.0; lattice.n_vertices()];
    for (row, w) in rows {
        total += w;
        let v: Vec<VertexId> = violated(row, &masks).collect();
        if v.len() != 2 || !v.contains(&reference) {
            continue;
        }
        hit += w;
        partner[if v[0] == reference { v[1] } else { v[0] }] += w;
    }
    if total == 0.0 {
        return Err(Error::EmptySamples);
    }
    Ok(ConditionalMap {
        reference,
        reference_probability: hit / total,
        partner: (hit > 0.0).then(|| partner.iter().map(|p| p / hit).collect()),
    })
}

pub fn conditional_map(shots: &ShotTable, lattice: &Lattice, reference: VertexId) -> Result<ConditionalMap> {
    conditional_from(shots.rows().iter().map(|&r| (r, 1.0)), lattice, reference)
}

pub fn conditional_map_exact(psi: &StateVector, lattice: &Lattice, reference: VertexId) -> Result<ConditionalMap> {
    let rows = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| (b as u64, a.norm_sqr()));
    conditional_from(rows, lattice, reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorMethod {
    HadamardEmulated,
    #[default]
    ExactOracle,
}

/// One step of time evolution.
#[derive(Debug, Clone, Copy)]
pub enum Propagator<'a> {
    /// A compiled Trotter step.
    Trotter(&'a Circuit),
    /// `exp(−iH·dt)` by Krylov propagation.
    Exact(&'a SparseHamiltonian, f64),
}

impl Propagator<'_> {
    pub fn apply(&self, psi: &mut StateVector) -> Result<()> {
        match self {
            Propagator::Trotter(c) => c.run(psi),
            Propagator::Exact(h, dt) => {
                *psi = exact_evolve(psi, h, *dt)?;
                Ok(())
            }
        }
    }
}

/// `C(n) = ⟨ψ|B(n·dt) A(0)|ψ⟩ = ⟨Uⁿψ|B|UⁿAψ⟩` for `n = 0..=n_steps`.
pub fn two_time_series(
    psi: &StateVector,
    a: &PauliString,
    b: &PauliString,
    step: Propagator<'_>,
    n_steps: usize,
    method: CorrelatorMethod,
) -> Result<Vec<Complex64>> {
    for p in [a, b] {
        if p.max_qubit() >= psi.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: p.max_qubit(),
                n_qubits: psi.n_qubits(),
            });
        }
    }
    let mut out = Vec::with_capacity(n_steps + 1);
    match method {
        CorrelatorMethod::ExactOracle => {
            let mut left = psi.clone();
            let mut right = psi.clone();
            right.apply_pauli(a)?;
            for k in 0..=n_steps {
                if k > 0 {
                    step.apply(&mut left)?;
                    step.apply(&mut right)?;
                }
                out.push(left.matrix_element(&right, b));
            }
        }
        CorrelatorMethod::HadamardEmulated => {
            if matches!(step, Propagator::Exact(..)) {
                return Err(Error::Unsupported("Hadamard emulation needs a gate-level step".into()));
            }
            let anc = psi.n_qubits();
            let est = estimator_operator(b, anc)?;
            let mut branches = Vec::with_capacity(2);
            for phi in [0.0, FRAC_PI_2] {
                let mut joint = psi.clone();
                joint.extend_zero(1, DEFAULT_QUBIT_CAP)?;
                build_hadamard_test(a, anc, FRAC_PI_2, phi)?.run(&mut joint)?;
                branches.push(joint);
            }
            for k in 0..=n_steps {
                if k > 0 {
                    for j in branches.iter_mut() {
                        step.apply(j)?;
                    }
                }
                let re = branches[0].expectation(&est)?;
                let im = -branches[1].expectation(&est)?;
                out.push(Complex64::new(re, im));
            }
        }
    }
    Ok(out)
}

/// `⟨Z_l(t)Z_l(0)⟩` along the step grid.
pub fn two_time_zz(
    psi: &StateVector,
    link: LinkId,
    step: Propagator<'_>,
    n_steps: usize,
    method: CorrelatorMethod,
) -> Result<Vec<Complex64>> {
    let z = PauliString::single(link, Pauli::Z);
    two_time_series(psi, &z, &z, step, n_steps, method)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub re: Vec<f64>,
    pub re_err: Vec<f64>,
    pub im: Vec<f64>,
    pub im_err: Vec<f64>,
}

impl CorrelatorSeries {
    pub fn exact(label: impl Into<String>, dt: f64, values: &[Complex64]) -> Self {
        let n = values.len();
        Self {
            label: label.into(),
            times: (0..n).map(|k| k as f64 * dt).collect(),
            re: values.iter().map(|c| c.re).collect(),
            re_err: vec![0.0; n],
            im: values.iter().map(|c| c.im).collect(),
            im_err: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.times.len();
        if [self.re.len(), self.re_err.len(), self.im.len(), self.im_err.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::GridMismatch(self.label.clone()));
        }
        Ok(())
    }
}

/// `S_ZZ(t) = Re⟨Z(t)Z(0)⟩ · ⟨Z(0)⟩` with propagated errors; returned in `re`.
pub fn s_zz(series: &CorrelatorSeries, z0: (f64, f64)) -> Result<CorrelatorSeries> {
    series.check()?;
    let (z, dz) = z0;
    let n = series.len();
    Ok(CorrelatorSeries {
        label: format!("s_zz:{}", series.label),
        times: series.times.clone(),
        re: series.re.iter().map(|r| r * z).collect(),
        re_err: series
            .re
            .iter()
            .zip(&series.re_err)
            .map(|(r, dr)| ((z * dr).powi(2) + (r * dz).powi(2)).sqrt())
            .collect(),
        im: vec![0.0; n],
        im_err: vec![0.0; n],
    })
}

/// Pointwise `a − b` of the real parts on a shared time grid.
pub fn series_difference(a: &CorrelatorSeries, b: &CorrelatorSeries) -> Result<Vec<f64>> {
    a.check()?;
    b.check()?;
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(Error::GridMismatch(format!("{} vs {}", a.label, b.label)));
    }
    Ok(a.re.iter().zip(&b.re).map(|(x, y)| x - y).collect())
}

/// Lattice with one pinned link on each side of the middle row.
pub fn string_lattice_spec(lx: usize, ly: usize) -> LatticeSpec {
    let r = ly / 2;
    LatticeSpec::new(lx, ly)
        .with_pinned(Side::Left, r, 0)
        .with_pinned(Side::Right, r, lx - 1)
}

fn pinned_on(lattice: &Lattice, side: Side) -> Option<(LinkId, VertexId)> {
    lattice.pinned_links().find_map(|l| match (l.kind, lattice.link_nodes(l.id)) {
        (LinkKind::Pinned(s), nodes) if s == side => nodes.iter().find_map(|n| match n {
            Node::Vertex(v) => Some((l.id, *v)),
            _ => None,
        }),
        _ => None,
    })
}

/// Left-to-right string through the pinned pair that detours one row up
/// over the two central columns. Requires `lx = 4` and a middle row `r ≥ 1`.
pub fn bumped_string(lattice: &Lattice) -> Result<PathSpec> {
    let (left, vl) = pinned_on(lattice, Side::Left).ok_or_else(|| Error::InvalidPath("no left pinned link".into()))?;
    let (right, vr) =
        pinned_on(lattice, Side::Right).ok_or_else(|| Error::InvalidPath("no right pinned link".into()))?;
    let (r, _) = lattice.vertex_coords(vl);
    if lattice.vertex_coords(vr).0 != r || r == 0 || lattice.lx() != 4 {
        return Err(Error::InvalidPath("bumped string needs lx = 4 and a pinned middle row".into()));
    }
    PathSpec::through_vertices(
        lattice,
        Some(left),
        &[(r, 0), (r, 1), (r - 1, 1), (r - 1, 2), (r, 2), (r, 3)],
        Some(right),
    )
}

/// `Q₁…Q_j`: the left pinned link followed by `j − 1` horizontal links of its row.
pub fn string_prefix(lattice: &Lattice, j: usize) -> Result<Vec<LinkId>> {
    let (q1, v) = pinned_on(lattice, Side::Left).ok_or_else(|| Error::InvalidPath("no left pinned link".into()))?;
    if j == 0 || j > lattice.lx() {
        return Err(Error::OutOfRange(format!("string length {j} on a row of {}", lattice.lx())));
    }
    let (r, _) = lattice.vertex_coords(v);
    let mut links = vec![q1];
    for c in 0..j - 1 {
        links.push(lattice.horizontal_link(r, c).expect("column inside the row"));
    }
    Ok(links)
}

/// `C(j, n·dt) = ⟨ψ|(X_{Q₁}…X_{Q_j})(t) X_{Q₁}(0)|ψ⟩`.
pub fn string_correlator(
    psi: &StateVector,
    lattice: &Lattice,
    j: usize,
    step: Propagator<'_>,
    n_steps: usize,
    method: CorrelatorMethod,
) -> Result<Vec<Complex64>> {
    let links = string_prefix(lattice, j)?;
    let a = PauliString::single(links[0], Pauli::X);
    let b = PauliString::x_on(&links)?;
    two_time_series(psi, &a, &b, step, n_steps, method)
}
