//! Exact reference solvers: a compiled sparse Hamiltonian, Lanczos ground
//! states, Krylov time propagation and a dense oracle for small systems.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuits::{build_wala, QubitLayout, WalaMode};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LinkId};
use crate::model::{hamiltonian_terms, HamiltonianParams, Term};
use crate::state::{StateVector, DEFAULT_QUBIT_CAP};
use crate::wala::optimize_theta;

/// Largest register handled by the dense oracle.
pub const DENSE_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone)]
struct OffDiagonal {
    x: usize,
    z: usize,
    weight: Complex64,
}

/// Hamiltonian stored as a diagonal plus one bit-flip pattern per
/// off-diagonal Pauli term.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    n_qubits: usize,
    terms: Vec<Term>,
    diag: Vec<f64>,
    off: Vec<OffDiagonal>,
}

pub fn build_hamiltonian(
    lattice: &Lattice,
    params: &HamiltonianParams,
    field_mask: &BTreeSet<LinkId>,
) -> Result<SparseHamiltonian> {
    SparseHamiltonian::from_terms(lattice.n_links(), hamiltonian_terms(lattice, params, field_mask)?)
}

impl SparseHamiltonian {
    pub fn from_terms(n_qubits: usize, terms: Vec<Term>) -> Result<Self> {
        if n_qubits > DEFAULT_QUBIT_CAP {
            return Err(Error::QubitCapExceeded {
                requested: n_qubits,
                cap: DEFAULT_QUBIT_CAP,
            });
        }
        let dim = 1usize << n_qubits;
        let mut diag = vec![0.0; dim];
        let mut off: Vec<OffDiagonal> = Vec::new();
        for t in &terms {
            if t.pauli.max_qubit() >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: t.pauli.max_qubit(),
                    n_qubits,
                });
            }
            let base = t.pauli.base_phase() * t.coeff;
            if t.pauli.is_diagonal() {
                let z = t.pauli.z_mask() as usize;
                for (b, d) in diag.iter_mut().enumerate() {
                    *d += if (b & z).count_ones() & 1 == 1 { -base.re } else { base.re };
                }
            } else {
                let (x, z) = (t.pauli.x_mask() as usize, t.pauli.z_mask() as usize);
                match off.iter_mut().find(|o| o.x == x && o.z == z) {
                    Some(o) => o.weight += base,
                    None => off.push(OffDiagonal { x, z, weight: base }),
                }
            }
        }
        Ok(Self {
            n_qubits,
            terms,
            diag,
            off,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    fn is_real(&self) -> bool {
        self.off.iter().all(|o| o.weight.im == 0.0)
    }

    #[inline]
    fn row<T, F>(&self, b: usize, get: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Copy,
        F: Fn(usize) -> T,
        T: MulWeight,
    {
        let mut acc = get(b) * self.diag[b];
        for o in &self.off {
            let src = b ^ o.x;
            let v = get(src);
            let v = if (src & o.z).count_ones() & 1 == 1 { v * -1.0 } else { v };
            acc = acc + v.mul_weight(o.weight);
        }
        acc
    }

    /// `out ← H·v` for complex vectors.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        fill(out, |b| self.row(b, |i| v[i]));
    }

    fn apply_real(&self, v: &[f64], out: &mut [f64]) {
        fill(out, |b| self.row(b, |i| v[i]));
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch(psi.n_qubits(), self.n_qubits));
        }
        let mut hv = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(psi.amplitudes(), &mut hv);
        Ok(psi
            .amplitudes()
            .iter()
            .zip(&hv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum())
    }

    /// Dense real matrix; only for small registers.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.n_qubits > DENSE_MAX_QUBITS {
            return Err(Error::Unsupported(format!(
                "dense matrix of {} qubits",
                self.n_qubits
            )));
        }
        if !self.is_real() {
            return Err(Error::Unsupported("complex Hamiltonian".into()));
        }
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        let mut col = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            self.apply_real(&e, &mut col);
            m.set_column(j, &DVector::from_column_slice(&col));
            e[j] = 0.0;
        }
        Ok(m)
    }
}

trait MulWeight {
    fn mul_weight(self, w: Complex64) -> Self;
}

impl MulWeight for f64 {
    fn mul_weight(self, w: Complex64) -> f64 {
        self * w.re
    }
}

impl MulWeight for Complex64 {
    fn mul_weight(self, w: Complex64) -> Complex64 {
        self * w
    }
}

fn fill<T: Send, F: Fn(usize) -> T + Send + Sync>(out: &mut [T], f: F) {
    #[cfg(feature = "parallel")]
    if out.len() >= 1 << 14 {
        use rayon::prelude::*;
        out.par_iter_mut().enumerate().for_each(|(b, o)| *o = f(b));
        return;
    }
    for (b, o) in out.iter_mut().enumerate() {
        *o = f(b);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 80,
            max_restarts: 200,
            tol: 1e-9,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// `‖Hψ − Eψ‖`.
    pub residual: f64,
    /// Distance to the next Ritz value of the final Krylov space.
    pub gap_estimate: f64,
    pub matvecs: usize,
}

pub fn ground_state(h: &SparseHamiltonian) -> Result<GroundState> {
    ground_state_with(h, &LanczosOptions::default())
}

/// Thick-free restarted Lanczos with full reorthogonalization, restarted
/// from the current Ritz vector until the explicit residual meets `tol`.
pub fn ground_state_with(h: &SparseHamiltonian, opts: &LanczosOptions) -> Result<GroundState> {
    if !h.is_real() {
        return Err(Error::Unsupported("Lanczos path requires a real Hamiltonian".into()));
    }
    let dim = h.dim();
    let m = opts.krylov_dim.min(dim).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize_real(&mut v);
    let mut w = vec![0.0; dim];
    let mut matvecs = 0;
    for _ in 0..opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![v.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            h.apply_real(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            alpha.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = dot(&w, &w).sqrt();
            if j + 1 == m || b < 1e-12 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let i0 = order[0];
        let theta = eig.eigenvalues[i0];
        let gap = order.get(1).map_or(f64::INFINITY, |&i1| eig.eigenvalues[i1] - theta);
        let mut ritz = vec![0.0; dim];
        for (j, q) in basis.iter().take(k).enumerate() {
            let s = eig.eigenvectors[(j, i0)];
            ritz.iter_mut().zip(q).for_each(|(r, x)| *r += s * x);
        }
        normalize_real(&mut ritz);
        h.apply_real(&ritz, &mut w);
        matvecs += 1;
        let energy = dot(&ritz, &w);
        let residual = w
            .iter()
            .zip(&ritz)
            .map(|(hv, r)| (hv - energy * r).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= opts.tol {
            let amps = ritz.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            return Ok(GroundState {
                energy,
                state: StateVector::from_amplitudes(amps)?,
                residual,
                gap_estimate: gap,
                matvecs,
            });
        }
        v = ritz;
    }
    Err(Error::NoConvergence("lanczos", opts.max_restarts))
}

fn normalize_real(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub krylov_dim: usize,
    /// Bound on the a-posteriori error estimate per substep.
    pub tol: f64,
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 36,
            tol: 1e-12,
            max_substeps: 100_000,
        }
    }
}

pub fn exact_evolve(psi: &StateVector, h: &SparseHamiltonian, t: f64) -> Result<StateVector> {
    exact_evolve_with(psi, h, t, &KrylovOptions::default())
}

/// `exp(−iHt)|ψ⟩` by Lanczos–Krylov propagation with adaptive substeps.
pub fn exact_evolve_with(
    psi: &StateVector,
    h: &SparseHamiltonian,
    t: f64,
    opts: &KrylovOptions,
) -> Result<StateVector> {
    if t < 0.0 {
        return Err(Error::OutOfRange(format!("t = {t}")));
    }
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch(psi.n_qubits(), h.n_qubits()));
    }
    let dim = h.dim();
    let m = opts.krylov_dim.min(dim).max(2);
    let mut cur = psi.amplitudes().to_vec();
    let mut remaining = t;
    let mut tau = t.min(1.0);
    let mut substeps = 0;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    while remaining > 1e-15 {
        substeps += 1;
        if substeps > opts.max_substeps {
            return Err(Error::NoConvergence("krylov", opts.max_substeps));
        }
        let norm = cdot(&cur, &cur).re.sqrt();
        let mut basis: Vec<Vec<Complex64>> = vec![cur.iter().map(|x| x / norm).collect()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut tail = 0.0;
        for j in 0..m {
            h.apply(&basis[j], &mut w);
            alpha.push(cdot(&basis[j], &w).re);
            for _ in 0..2 {
                for q in &basis {
                    let c = cdot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = cdot(&w, &w).re.sqrt();
            if b < 1e-12 {
                break;
            }
            if j + 1 == m {
                tail = b;
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let k = alpha.len();
        let mut tm = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            tm[(i, i)] = alpha[i];
            if i + 1 < k {
                tm[(i, i + 1)] = beta[i];
                tm[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(tm);
        let step = tau.min(remaining);
        // coefficients of exp(−iT·step)·e₁ in the Krylov basis
        let coeffs = |s: f64| -> Vec<Complex64> {
            (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| {
                            let q = &eig.eigenvectors;
                            Complex64::from_polar(q[(i, j)] * q[(0, j)], -eig.eigenvalues[j] * s)
                        })
                        .sum()
                })
                .collect()
        };
        let c = coeffs(step);
        let err = tail * c[k - 1].norm();
        if err > opts.tol && step > 1e-10 {
            tau = step / 2.0;
            continue;
        }
        cur.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (ci, q) in c.iter().zip(&basis) {
            let s = ci * norm;
            cur.iter_mut().zip(q).for_each(|(x, y)| *x += s * y);
        }
        remaining -= step;
        if err < opts.tol * 1e-3 {
            tau = (step * 1.5).min(2.0);
        }
    }
    StateVector::from_amplitudes(cur)
}

/// Dense eigendecomposition oracle for registers of at most 12 qubits.
pub struct DenseOracle {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl DenseOracle {
    pub fn new(h: &SparseHamiltonian) -> Result<Self> {
        Ok(Self {
            eig: SymmetricEigen::new(h.to_dense()?),
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.eig.eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn ground_state(&self) -> Result<StateVector> {
        let i = self.eig.eigenvalues.imin();
        let col = self.eig.eigenvectors.column(i);
        StateVector::from_amplitudes(col.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let q = &self.eig.eigenvectors;
        let d = q.nrows();
        if psi.dim() != d {
            return Err(Error::DimensionMismatch(psi.dim(), d));
        }
        let a = psi.amplitudes();
        let proj: Vec<Complex64> = (0..d)
            .map(|j| {
                let c: Complex64 = (0..d).map(|i| a[i] * q[(i, j)]).sum();
                c * Complex64::from_polar(1.0, -self.eig.eigenvalues[j] * t)
            })
            .collect();
        let out = (0..d)
            .map(|i| (0..d).map(|j| proj[j] * q[(i, j)]).sum())
            .collect();
        StateVector::from_amplitudes(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalaQuality {
    pub theta: f64,
    pub e_exact: f64,
    pub e_wala: f64,
    pub relative_energy_error: f64,
    pub infidelity: f64,
}

/// Compare the optimized ansatz with the exact ground state.
pub fn wala_quality(lattice: &Lattice, params: &HamiltonianParams) -> Result<WalaQuality> {
    if lattice.pinned_links().next().is_some() {
        return Err(Error::Unsupported("ansatz quality on lattices with pinned links".into()));
    }
    let sol = optimize_theta(lattice.lx(), lattice.ly(), params)?;
    let layout = QubitLayout::links_only(lattice);
    let mut psi = StateVector::zero(lattice.n_links())?;
    build_wala(lattice, sol.theta, WalaMode::AncillaFree, &layout)?.run(&mut psi)?;
    let h = build_hamiltonian(lattice, params, &BTreeSet::new())?;
    let gs = ground_state(&h)?;
    let e_wala = h.energy(&psi)?;
    Ok(WalaQuality {
        theta: sol.theta,
        e_exact: gs.energy,
        e_wala,
        relative_energy_error: (gs.energy - e_wala).abs() / gs.energy.abs(),
        infidelity: 1.0 - gs.state.fidelity(&psi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeSpec};
    use crate::pauli::{Pauli, PauliString};

    fn lattice(lx: usize, ly: usize) -> Lattice {
        build_lattice(&LatticeSpec::new(lx, ly)).unwrap()
    }

    fn ham(lat: &Lattice, p: &HamiltonianParams) -> SparseHamiltonian {
        build_hamiltonian(lat, p, &BTreeSet::new()).unwrap()
    }

    #[test]
    fn stabilizer_limit_energies() {
        let lat = lattice(2, 3);
        let gs = ground_state(&ham(&lat, &HamiltonianParams::default())).unwrap();
        assert!((gs.energy + 8.0).abs() < 1e-9);
        assert!(gs.residual <= 1e-8);

        let lat = lattice(4, 3);
        let gs = ground_state(&ham(&lat, &HamiltonianParams::default())).unwrap();
        assert!((gs.energy + 18.0).abs() < 1e-9);

        // a lone sign flip frustrates the global parity constraint
        let p = HamiltonianParams::default().with_override(5, -1);
        let gs = ground_state(&ham(&lat, &p)).unwrap();
        assert!((gs.energy + 16.0).abs() < 1e-9);

        let p = HamiltonianParams::default().with_override(5, -1).with_override(6, -1);
        let gs = ground_state(&ham(&lat, &p)).unwrap();
        assert!((gs.energy + 18.0).abs() < 1e-9);
        for v in [5, 6] {
            let a = PauliString::z_on(lat.vertex_support(v)).unwrap();
            assert!((gs.state.expectation(&a).unwrap() + 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn polarized_limit() {
        let lat = lattice(2, 3);
        let h = 1e4;
        let gs = ground_state(&ham(&lat, &HamiltonianParams::new(h, 0.0))).unwrap();
        assert!((gs.energy / h + 7.0).abs() < 1e-3);
    }

    #[test]
    fn energy_is_sum_of_terms() {
        let lat = lattice(2, 3);
        let h = ham(&lat, &HamiltonianParams::new(0.6, 0.3).with_override(1, -1));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = StateVector::random(7, &mut rng).unwrap();
        let termwise: f64 = h
            .terms()
            .iter()
            .map(|t| t.coeff * psi.expectation(&t.pauli).unwrap())
            .sum();
        assert!((h.energy(&psi).unwrap() - termwise).abs() < 1e-10);
    }

    #[test]
    fn lanczos_agrees_with_dense_and_restarts() {
        let lat = lattice(2, 3);
        let h = ham(&lat, &HamiltonianParams::new(0.6, 0.25));
        let dense = DenseOracle::new(&h).unwrap();
        let a = ground_state(&h).unwrap();
        assert!((a.energy - dense.ground_energy()).abs() < 1e-10);
        let b = ground_state_with(&h, &LanczosOptions { seed: 99, ..Default::default() }).unwrap();
        assert!((a.energy - b.energy).abs() < 1e-10);
        assert!(a.state.fidelity(&dense.ground_state().unwrap()).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn krylov_matches_dense_propagation() {
        let lat = lattice(2, 2);
        let h = ham(&lat, &HamiltonianParams::new(0.7, 0.4));
        let dense = DenseOracle::new(&h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = StateVector::random(4, &mut rng).unwrap();
        for t in [0.0, 0.3, 2.5] {
            let a = exact_evolve(&psi, &h, t).unwrap();
            let b = dense.evolve(&psi, t).unwrap();
            assert!((a.overlap(&b).unwrap() - 1.0).norm() < 1e-9, "t={t}");
        }
        let lat = lattice(2, 3);
        let h = ham(&lat, &HamiltonianParams::new(1.3, 0.25));
        let dense = DenseOracle::new(&h).unwrap();
        let psi = StateVector::random(7, &mut rng).unwrap();
        let a = exact_evolve(&psi, &h, 4.0).unwrap();
        let b = dense.evolve(&psi, 4.0).unwrap();
        assert!((a.overlap(&b).unwrap() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn evolution_conserves_energy_and_vertices() {
        let lat = lattice(2, 3);
        let h = ham(&lat, &HamiltonianParams::new(0.8, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = StateVector::random(7, &mut rng).unwrap();
        let e0 = h.energy(&psi).unwrap();
        let a0 = PauliString::z_on(lat.vertex_support(2)).unwrap();
        let v0 = psi.expectation(&a0).unwrap();
        let out = exact_evolve(&psi, &h, 5.0).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
        assert!((h.energy(&out).unwrap() - e0).abs() < 1e-8);
        assert!((out.expectation(&a0).unwrap() - v0).abs() < 1e-9);
    }

    #[test]
    fn eigenstate_only_gains_phase() {
        let lat = lattice(2, 2);
        let h = ham(&lat, &HamiltonianParams::new(0.5, 0.5));
        let gs = ground_state(&h).unwrap();
        let out = exact_evolve(&gs.state, &h, 1.7).unwrap();
        assert!((gs.state.overlap(&out).unwrap().norm() - 1.0).abs() < 1e-9);
        assert_eq!(exact_evolve(&gs.state, &h, 0.0).unwrap(), gs.state);
    }

    #[test]
    fn wala_quality_is_exact_in_toric_limit() {
        let q = wala_quality(&lattice(2, 3), &HamiltonianParams::default()).unwrap();
        assert!(q.relative_energy_error < 1e-9);
        assert!(q.infidelity < 1e-9);
    }

    #[test]
    fn rejects_complex_terms_in_dense_and_lanczos() {
        let terms = vec![Term {
            coeff: 1.0,
            pauli: PauliString::single(0, Pauli::Y),
            kind: crate::model::TermKind::FieldX(0),
        }];
        let h = SparseHamiltonian::from_terms(2, terms).unwrap();
        assert!(ground_state(&h).is_err());
        assert!(h.to_dense().is_err());
    }
}
