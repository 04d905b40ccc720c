//! Dense statevector. Qubit 0 is the least-significant bit of the basis index.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gate::{Gate, Mat2};
use crate::pauli::{Pauli, PauliString};

pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Below this many amplitudes kernels stay on the calling thread.
#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 1 << 14;
const SUM_CHUNK: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Run `f(offset, block)` on every aligned block of `block_len` amplitudes.
fn for_each_block<F>(amps: &mut [Complex64], block_len: usize, f: F)
where
    F: Fn(usize, &mut [Complex64]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if amps.len() >= PAR_MIN_LEN && amps.len() / block_len >= 2 {
        use rayon::prelude::*;
        amps.par_chunks_mut(block_len)
            .enumerate()
            .for_each(|(i, c)| f(i * block_len, c));
        return;
    }
    for (i, c) in amps.chunks_mut(block_len).enumerate() {
        f(i * block_len, c);
    }
}

fn for_each_amp<F>(amps: &mut [Complex64], f: F)
where
    F: Fn(usize, &mut Complex64) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if amps.len() >= PAR_MIN_LEN {
        use rayon::prelude::*;
        amps.par_iter_mut().enumerate().for_each(|(b, a)| f(b, a));
        return;
    }
    for (b, a) in amps.iter_mut().enumerate() {
        f(b, a);
    }
}

fn sum_over<F>(len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Send + Sync,
{
    // Fixed chunks summed in order: the result does not depend on the
    // thread count, on work stealing or on the `parallel` feature.
    let chunk = |c: usize| -> Complex64 { (c * SUM_CHUNK..((c + 1) * SUM_CHUNK).min(len)).map(&f).sum() };
    let n_chunks = len.div_ceil(SUM_CHUNK);
    #[cfg(feature = "parallel")]
    if len >= PAR_MIN_LEN {
        use rayon::prelude::*;
        let partial: Vec<Complex64> = (0..n_chunks).into_par_iter().map(chunk).collect();
        return partial.into_iter().sum();
    }
    (0..n_chunks).map(chunk).sum()
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(n_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        Self::basis_with_cap(n_qubits, 0, cap)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        Self::basis_with_cap(n_qubits, index, DEFAULT_QUBIT_CAP)
    }

    fn basis_with_cap(n_qubits: usize, index: usize, cap: usize) -> Result<Self> {
        if n_qubits > cap {
            return Err(Error::QubitCapExceeded {
                requested: n_qubits,
                cap,
            });
        }
        if n_qubits == 0 {
            return Err(Error::OutOfRange("need at least one qubit".into()));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wrap raw amplitudes; the length must be a power of two. No normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::OutOfRange(format!("amplitude count {len}")));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Normalized random state (uniform box components; adequate for tests).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        for a in &mut s.amps {
            *a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        s.normalize()?;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_sqr().sqrt();
        if n < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(n)
    }

    /// Append `extra` qubits in |0⟩ as the new most-significant qubits.
    pub fn extend_zero(&mut self, extra: usize, cap: usize) -> Result<()> {
        let n = self.n_qubits + extra;
        if n > cap {
            return Err(Error::QubitCapExceeded { requested: n, cap });
        }
        self.amps.resize(1 << n, Complex64::new(0.0, 0.0));
        self.n_qubits = n;
        Ok(())
    }

    /// Drop the top `n_qubits - keep` qubits, which must be in |0⟩.
    pub fn truncate_zero(&mut self, keep: usize) -> Result<()> {
        if keep == 0 || keep > self.n_qubits {
            return Err(Error::OutOfRange(format!("keep {keep} of {}", self.n_qubits)));
        }
        let leak: f64 = self.amps[1 << keep..].iter().map(|a| a.norm_sqr()).sum();
        if leak > 1e-10 {
            return Err(Error::OutOfRange(format!(
                "discarded qubits carry weight {leak:e}"
            )));
        }
        self.amps.truncate(1 << keep);
        self.n_qubits = keep;
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (i, &q) in targets.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
            if targets[..i].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::Arity {
                gate: gate.name(),
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        self.check_targets(targets)?;
        match gate {
            Gate::Cnot => self.cnot(targets[0], targets[1]),
            Gate::Cz => self.cz(targets[0], targets[1]),
            Gate::PauliExp { paulis, angle } => {
                let p = PauliString::new(targets.iter().copied().zip(paulis.iter().copied()))?;
                self.apply_pauli_exp(&p, *angle)?;
            }
            Gate::X => self.apply_pauli(&PauliString::single(targets[0], Pauli::X))?,
            Gate::Z => self.apply_pauli(&PauliString::single(targets[0], Pauli::Z))?,
            g => {
                let m = g.matrix().expect("single-qubit gate has a matrix");
                self.apply_1q(targets[0], &m);
            }
        }
        Ok(())
    }

    /// Apply a 2×2 unitary to qubit `q` (unchecked index).
    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let half = 1usize << q;
        let m = *m;
        if m[0][1] == Complex64::new(0.0, 0.0) && m[1][0] == Complex64::new(0.0, 0.0) {
            let (d0, d1) = (m[0][0], m[1][1]);
            for_each_amp(&mut self.amps, move |b, a| {
                *a *= if b & half == 0 { d0 } else { d1 };
            });
            return;
        }
        for_each_block(&mut self.amps, half << 1, move |_, c| {
            let (lo, hi) = c.split_at_mut(half);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        });
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for_each_block(&mut self.amps, cb.max(tb) << 1, move |_, c| {
            for i in 0..c.len() {
                if i & cb != 0 && i & tb == 0 {
                    c.swap(i, i | tb);
                }
            }
        });
    }

    fn cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for_each_amp(&mut self.amps, move |i, amp| {
            if i & mask == mask {
                *amp = -*amp;
            }
        });
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.max_qubit() >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: p.max_qubit(),
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    /// `|ψ⟩ ← P|ψ⟩`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_pauli(p)?;
        let base = p.base_phase();
        let x = p.x_mask() as usize;
        let p = *p;
        if x == 0 {
            for_each_amp(&mut self.amps, move |b, a| *a *= p.phase_on(base, b));
            return Ok(());
        }
        let pivot = 63 - (x as u64).leading_zeros() as usize;
        let pbit = 1usize << pivot;
        for_each_block(&mut self.amps, pbit << 1, move |off, c| {
            for i in 0..pbit {
                let j = i ^ x;
                let (b, b1) = (off + i, off + j);
                let (u, v) = (c[i], c[j]);
                c[j] = p.phase_on(base, b) * u;
                c[i] = p.phase_on(base, b1) * v;
            }
        });
        Ok(())
    }

    /// Flip every qubit in `mask`.
    pub fn apply_x_mask(&mut self, mask: u64) -> Result<()> {
        if mask == 0 {
            return Ok(());
        }
        self.apply_pauli(&PauliString::from_masks(mask, 0)?)
    }

    /// `|ψ⟩ ← exp(i·angle·P)|ψ⟩ = (cos(angle) + i·sin(angle)·P)|ψ⟩`.
    pub fn apply_pauli_exp(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        self.check_pauli(p)?;
        let (s, c) = angle.sin_cos();
        let base = p.base_phase();
        let x = p.x_mask() as usize;
        let p = *p;
        let is = Complex64::new(0.0, s);
        if x == 0 {
            // diagonal: phase e^{±i·angle} depending on the eigenvalue
            let plus = Complex64::new(c, s);
            let minus = Complex64::new(c, -s);
            for_each_amp(&mut self.amps, move |b, a| {
                *a *= if p.phase_on(base, b).re > 0.0 { plus } else { minus };
            });
            return Ok(());
        }
        let pivot = 63 - (x as u64).leading_zeros() as usize;
        let pbit = 1usize << pivot;
        for_each_block(&mut self.amps, pbit << 1, move |off, chunk| {
            for i in 0..pbit {
                let j = i ^ x;
                let (u, v) = (chunk[i], chunk[j]);
                chunk[i] = c * u + is * p.phase_on(base, off + j) * v;
                chunk[j] = c * v + is * p.phase_on(base, off + i) * u;
            }
        });
        Ok(())
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_pauli(p)?;
        Ok(self.matrix_element(self, p).re)
    }

    /// `⟨self|P|other⟩` with no range check beyond the Pauli support.
    pub fn matrix_element(&self, other: &StateVector, p: &PauliString) -> Complex64 {
        let base = p.base_phase();
        let x = p.x_mask() as usize;
        let (a, b) = (&self.amps, &other.amps);
        sum_over(a.len(), |i| a[i ^ x].conj() * p.phase_on(base, i) * b[i])
    }

    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let (a, b) = (&self.amps, &other.amps);
        Ok(sum_over(a.len(), |i| a[i].conj() * b[i]))
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// `self ← self + k·other`.
    pub fn add_scaled(&mut self, k: Complex64, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += k * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, k: Complex64) {
        for a in &mut self.amps {
            *a *= k;
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(b, _)| b & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Project qubit `q` onto `outcome` and renormalize; returns the
    /// pre-measurement probability of that outcome.
    pub fn project(&mut self, q: usize, outcome: bool) -> Result<f64> {
        self.check_targets(&[q])?;
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p <= 1e-12 {
            return Err(Error::ZeroProbabilityBranch(p));
        }
        let bit = 1usize << q;
        let inv = 1.0 / p.sqrt();
        for (b, a) in self.amps.iter_mut().enumerate() {
            if (b & bit != 0) == outcome {
                *a *= inv;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Draw basis indices from the Born distribution.
    pub fn sample<R: Rng + ?Sized>(&self, n_shots: usize, rng: &mut R) -> Vec<u64> {
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        (0..n_shots)
            .map(|_| {
                let r = rng.gen::<f64>() * total;
                let idx = cdf.partition_point(|&c| c <= r);
                // skip trailing zero-weight entries hit by rounding
                let mut idx = idx.min(cdf.len() - 1);
                while idx > 0 && self.amps[idx].norm_sqr() == 0.0 {
                    idx -= 1;
                }
                idx as u64
            })
            .collect()
    }
}
