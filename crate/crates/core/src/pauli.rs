//! Pauli strings over at most 64 qubits stored as x/z bit masks.
//!
//! A string acts on a basis state as `P|b⟩ = sign · i^{n_Y} · (−1)^{|b ∧ z|} |b ⊕ x⟩`,
//! i.e. `P = sign · i^{n_Y} · X^x Z^z`; a Y factor sets both bits.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
    negative: bool,
}

impl PauliString {
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let (mut x, mut z) = (0u64, 0u64);
        for (q, p) in ops {
            if q >= 64 {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: 64,
                });
            }
            let bit = 1u64 << q;
            if (x | z) & bit != 0 {
                return Err(Error::DuplicateTarget(q));
            }
            match p {
                Pauli::X => x |= bit,
                Pauli::Y => {
                    x |= bit;
                    z |= bit
                }
                Pauli::Z => z |= bit,
            }
        }
        if x | z == 0 {
            return Err(Error::EmptyPauli);
        }
        Ok(Self {
            x,
            z,
            negative: false,
        })
    }

    pub fn z_on(qubits: &[usize]) -> Result<Self> {
        Self::new(qubits.iter().map(|&q| (q, Pauli::Z)))
    }

    pub fn x_on(qubits: &[usize]) -> Result<Self> {
        Self::new(qubits.iter().map(|&q| (q, Pauli::X)))
    }

    pub fn single(q: usize, p: Pauli) -> Self {
        Self::new([(q, p)]).expect("single-qubit Pauli below 64 is valid")
    }

    /// Build from raw masks; `x | z` must be non-zero.
    pub fn from_masks(x: u64, z: u64) -> Result<Self> {
        if x | z == 0 {
            return Err(Error::EmptyPauli);
        }
        Ok(Self {
            x,
            z,
            negative: false,
        })
    }

    pub fn negated(mut self) -> Self {
        self.negative = !self.negative;
        self
    }

    pub fn with_sign(self, sign: i8) -> Self {
        if sign < 0 {
            self.negated()
        } else {
            self
        }
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn n_y(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Highest qubit index touched.
    pub fn max_qubit(&self) -> usize {
        63 - self.support_mask().leading_zeros() as usize
    }

    pub fn support(&self) -> Vec<usize> {
        bits(self.support_mask()).collect()
    }

    pub fn ops(&self) -> Vec<(usize, Pauli)> {
        bits(self.support_mask())
            .map(|q| {
                let b = 1u64 << q;
                let p = match (self.x & b != 0, self.z & b != 0) {
                    (true, true) => Pauli::Y,
                    (true, false) => Pauli::X,
                    _ => Pauli::Z,
                };
                (q, p)
            })
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    /// `sign · i^{n_Y}`, the basis-independent part of the action.
    pub fn base_phase(&self) -> Complex64 {
        let k = (self.n_y() + if self.negative { 2 } else { 0 }) % 4;
        [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][k as usize]
    }

    /// Phase `c(b)` with `P|b⟩ = c(b)|b ⊕ x⟩`.
    #[inline]
    pub fn phase_on(&self, base: Complex64, b: usize) -> Complex64 {
        if (b as u64 & self.z).count_ones() & 1 == 1 {
            -base
        } else {
            base
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            write!(f, "-")?;
        }
        for (i, (q, p)) in self.ops().into_iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{p:?}{q}")?;
        }
        Ok(())
    }
}

pub(crate) fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let q = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(q)
        }
    })
}
