//! Native gate set.
//!
//! Rotations follow `R_σ(θ) = exp(−iθσ/2)`. `Phase(φ) = diag(1, e^{iφ})`.
//! `PhasedXZ` uses the `Z^z Z^a X^x Z^{−a}` convention with `Z^t = diag(1, e^{iπt})`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::pauli::Pauli;

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    Rx { theta: f64 },
    Ry { theta: f64 },
    Rz { theta: f64 },
    Phase { phi: f64 },
    /// `exp(−i·angle·(n·σ)/2)` for a unit axis `n`.
    Rn { axis: [f64; 3], angle: f64 },
    PhasedXz { x: f64, z: f64, a: f64 },
    /// Control first, target second.
    Cnot,
    Cz,
    /// `exp(i·angle·P)` with `P` the listed Paulis on the gate's targets, in order.
    PauliExp { paulis: Vec<Pauli>, angle: f64 },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H => "h",
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::Rx { .. } => "rx",
            Gate::Ry { .. } => "ry",
            Gate::Rz { .. } => "rz",
            Gate::Phase { .. } => "phase",
            Gate::Rn { .. } => "rn",
            Gate::PhasedXz { .. } => "phased_xz",
            Gate::Cnot => "cnot",
            Gate::Cz => "cz",
            Gate::PauliExp { .. } => "pauli_exp",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz => 2,
            Gate::PauliExp { paulis, .. } => paulis.len(),
            _ => 1,
        }
    }

    /// Two-qubit native entanglers; Pauli exponentials are not native and are
    /// never counted.
    pub fn is_entangling(&self) -> bool {
        matches!(self, Gate::Cnot | Gate::Cz)
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Gate::Rx { theta } | Gate::Ry { theta } | Gate::Rz { theta } => vec![*theta],
            Gate::Phase { phi } => vec![*phi],
            Gate::Rn { axis, angle } => vec![axis[0], axis[1], axis[2], *angle],
            Gate::PhasedXz { x, z, a } => vec![*x, *z, *a],
            Gate::PauliExp { angle, .. } => vec![*angle],
            _ => Vec::new(),
        }
    }

    /// Matrix of a single-qubit gate in the `{|0⟩, |1⟩}` basis.
    pub fn matrix(&self) -> Option<Mat2> {
        let m = match *self {
            Gate::H => {
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[r, r], [r, -r]]
            }
            Gate::X => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Y => [[ZERO, -I], [I, ZERO]],
            Gate::Z => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::S => [[ONE, ZERO], [ZERO, I]],
            Gate::Sdg => [[ONE, ZERO], [ZERO, -I]],
            Gate::Rx { theta } => rn([1.0, 0.0, 0.0], theta),
            Gate::Ry { theta } => rn([0.0, 1.0, 0.0], theta),
            Gate::Rz { theta } => rn([0.0, 0.0, 1.0], theta),
            Gate::Phase { phi } => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, phi)]],
            Gate::Rn { axis, angle } => rn(axis, angle),
            Gate::PhasedXz { x, z, a } => {
                let zp = |t: f64| [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, PI * t)]];
                let g = Complex64::from_polar(1.0, PI * x / 2.0);
                let (s, c) = (PI * x / 2.0).sin_cos();
                let xp = [[g * c, -I * g * s], [-I * g * s, g * c]];
                mul(&zp(z + a), &mul(&xp, &zp(-a)))
            }
            _ => return None,
        };
        Some(m)
    }

    pub fn inverse(&self) -> Gate {
        match self.clone() {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::Rx { theta } => Gate::Rx { theta: -theta },
            Gate::Ry { theta } => Gate::Ry { theta: -theta },
            Gate::Rz { theta } => Gate::Rz { theta: -theta },
            Gate::Phase { phi } => Gate::Phase { phi: -phi },
            Gate::Rn { axis, angle } => Gate::Rn { axis, angle: -angle },
            Gate::PhasedXz { x, z, a } => Gate::PhasedXz { x: -x, z: -z, a: z + a },
            Gate::PauliExp { paulis, angle } => Gate::PauliExp { paulis, angle: -angle },
            g => g,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        match self {
            Gate::Z | Gate::S | Gate::Sdg | Gate::Rz { .. } | Gate::Phase { .. } | Gate::Cz => true,
            Gate::PauliExp { paulis, .. } => paulis.iter().all(|p| *p == Pauli::Z),
            _ => false,
        }
    }
}

fn rn(axis: [f64; 3], angle: f64) -> Mat2 {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [nx, ny, nz] = axis.map(|a| a / norm);
    let (s, c) = (angle / 2.0).sin_cos();
    [
        [Complex64::new(c, -s * nz), Complex64::new(-s * ny, -s * nx)],
        [Complex64::new(s * ny, -s * nx), Complex64::new(c, s * nz)],
    ]
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat2, b: &Mat2) -> bool {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .all(|(x, y)| (x - y).norm() < 1e-12)
    }

    fn unitary(m: &Mat2) -> bool {
        let dag = [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]];
        close(&mul(m, &dag), &[[ONE, ZERO], [ZERO, ONE]])
    }

    #[test]
    fn all_single_qubit_gates_are_unitary() {
        for g in [
            Gate::H,
            Gate::X,
            Gate::Y,
            Gate::Z,
            Gate::S,
            Gate::Sdg,
            Gate::Rx { theta: 0.3 },
            Gate::Ry { theta: -1.1 },
            Gate::Rz { theta: 2.0 },
            Gate::Phase { phi: 0.7 },
            Gate::Rn { axis: [0.3, -0.2, 0.9], angle: 1.3 },
            Gate::PhasedXz { x: 0.4, z: -0.3, a: 0.25 },
        ] {
            assert!(unitary(&g.matrix().unwrap()), "{g:?}");
        }
    }

    #[test]
    fn rotations_reduce_to_paulis_at_pi() {
        let rx = Gate::Rx { theta: PI }.matrix().unwrap();
        let x = Gate::X.matrix().unwrap();
        let minus_i_x = x.map(|r| r.map(|v| -I * v));
        assert!(close(&rx, &minus_i_x));
        // Rn about z matches Rz
        assert!(close(
            &Gate::Rn { axis: [0.0, 0.0, 2.0], angle: 0.4 }.matrix().unwrap(),
            &Gate::Rz { theta: 0.4 }.matrix().unwrap()
        ));
    }

    #[test]
    fn phased_xz_special_cases() {
        // x=1, z=0, a=0 is exactly X
        assert!(close(
            &Gate::PhasedXz { x: 1.0, z: 0.0, a: 0.0 }.matrix().unwrap(),
            &Gate::X.matrix().unwrap()
        ));
        // x=0 is a Z power
        assert!(close(
            &Gate::PhasedXz { x: 0.0, z: 0.5, a: 0.3 }.matrix().unwrap(),
            &Gate::S.matrix().unwrap()
        ));
    }

    #[test]
    fn metadata() {
        assert!(Gate::Cz.is_entangling());
        assert!(!Gate::PauliExp { paulis: vec![Pauli::Z, Pauli::Z], angle: 0.1 }.is_entangling());
        assert_eq!(Gate::Cnot.arity(), 2);
        assert_eq!(Gate::Rn { axis: [1.0, 0.0, 0.0], angle: 0.5 }.params().len(), 4);
    }
}
