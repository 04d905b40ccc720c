//! Hadamard-test fragment for two-time correlators `⟨B(t)A(0)⟩`.
//!
//! The ancilla starts in `cos(ϑ/2)|0⟩ + e^{iφ} sin(ϑ/2)|1⟩`, controls `A`,
//! and after evolving the system the estimator `⟨B·X_a⟩` equals
//! `sinϑ cosφ Re C − sinϑ sinφ Im C`.

use super::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::pauli::{Pauli, PauliString};

/// Ancilla preparation followed by controlled-`A`; `a_op` must be a single X or Z.
pub fn build_hadamard_test(
    a_op: &PauliString,
    ancilla: usize,
    vartheta: f64,
    phi: f64,
) -> Result<Circuit> {
    let ops = a_op.ops();
    let (q, controlled) = match ops.as_slice() {
        [(q, Pauli::Z)] if a_op.sign() == 1 => (*q, Gate::Cz),
        [(q, Pauli::X)] if a_op.sign() == 1 => (*q, Gate::Cnot),
        _ => {
            return Err(Error::Unsupported(format!(
                "controlled operator must be a single X or Z, got {a_op}"
            )))
        }
    };
    if q == ancilla {
        return Err(Error::DuplicateTarget(q));
    }
    let mut c = Circuit::new(q.max(ancilla) + 1);
    c.declare_ancilla(ancilla);
    c.push(Gate::Ry { theta: vartheta }, &[ancilla])?;
    c.push(Gate::Phase { phi }, &[ancilla])?;
    c.push(controlled, &[ancilla, q])?;
    Ok(c)
}

/// The measured operator `B ⊗ X_a`.
pub fn estimator_operator(b: &PauliString, ancilla: usize) -> Result<PauliString> {
    if b.support_mask() & (1 << ancilla) != 0 {
        return Err(Error::DuplicateTarget(ancilla));
    }
    let mut ops = b.ops();
    ops.push((ancilla, Pauli::X));
    Ok(PauliString::new(ops)?.with_sign(b.sign()))
}

/// Basis rotations that map `B ⊗ X_a` onto a Z-parity readout.
pub fn readout_rotation(b: &PauliString, ancilla: usize) -> Result<Circuit> {
    let est = estimator_operator(b, ancilla)?;
    let mut c = Circuit::new(est.max_qubit() + 1);
    for (q, p) in est.ops() {
        match p {
            Pauli::X => c.push(Gate::H, &[q])?,
            Pauli::Y => {
                c.push(Gate::Sdg, &[q])?;
                c.push(Gate::H, &[q])?;
            }
            Pauli::Z => {}
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    /// ⟨ψ|U† B U A|ψ⟩ with U a fixed random-ish circuit.
    fn setup() -> (StateVector, Circuit, PauliString, PauliString) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = StateVector::random(3, &mut rng).unwrap();
        let mut u = Circuit::new(3);
        u.push(Gate::Rx { theta: 0.4 }, &[0]).unwrap();
        u.push(Gate::Cnot, &[0, 2]).unwrap();
        u.push(Gate::Ry { theta: 1.3 }, &[1]).unwrap();
        u.push(Gate::Cz, &[1, 2]).unwrap();
        u.push(Gate::Rz { theta: 0.8 }, &[2]).unwrap();
        u.push(Gate::Rx { theta: 0.9 }, &[2]).unwrap();
        u.push(Gate::Ry { theta: 0.5 }, &[1]).unwrap();
        u.push(Gate::Cnot, &[1, 0]).unwrap();
        u.push(Gate::Rx { theta: 0.7 }, &[1]).unwrap();
        let a = PauliString::single(1, Pauli::Z);
        let b = PauliString::single(2, Pauli::Z);
        (psi, u, a, b)
    }

    fn exact(psi: &StateVector, u: &Circuit, a: &PauliString, b: &PauliString) -> Complex64 {
        let mut left = psi.clone();
        u.run(&mut left).unwrap();
        let mut right = psi.clone();
        right.apply_pauli(a).unwrap();
        u.run(&mut right).unwrap();
        left.matrix_element(&right, b)
    }

    fn emulate(psi: &StateVector, u: &Circuit, a: &PauliString, b: &PauliString, th: f64, ph: f64) -> f64 {
        let anc = 3;
        let mut s = psi.clone();
        s.extend_zero(1, 26).unwrap();
        build_hadamard_test(a, anc, th, ph).unwrap().run(&mut s).unwrap();
        u.run(&mut s).unwrap();
        s.expectation(&estimator_operator(b, anc).unwrap()).unwrap()
    }

    #[test]
    fn estimator_follows_sign_convention() {
        let (psi, u, a, b) = setup();
        for a_op in [a, PauliString::single(0, Pauli::X)] {
            let c = exact(&psi, &u, &a_op, &b);
            assert!(c.im.abs() > 1e-3, "test needs a non-trivial imaginary part");
            assert!((emulate(&psi, &u, &a_op, &b, FRAC_PI_2, 0.0) - c.re).abs() < 1e-12);
            assert!((emulate(&psi, &u, &a_op, &b, FRAC_PI_2, FRAC_PI_2) + c.im).abs() < 1e-12);
            assert!(emulate(&psi, &u, &a_op, &b, 0.0, 0.0).abs() < 1e-12);
            let (th, ph) = (1.1f64, 0.6f64);
            let expect = th.sin() * ph.cos() * c.re - th.sin() * ph.sin() * c.im;
            assert!((emulate(&psi, &u, &a_op, &b, th, ph) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsupported_operators() {
        assert!(build_hadamard_test(&PauliString::single(0, Pauli::Y), 3, 1.0, 0.0).is_err());
        assert!(build_hadamard_test(&PauliString::z_on(&[0, 1]).unwrap(), 3, 1.0, 0.0).is_err());
        assert!(build_hadamard_test(&PauliString::single(3, Pauli::Z), 3, 1.0, 0.0).is_err());
    }

    #[test]
    fn readout_rotation_diagonalizes() {
        let b = PauliString::new([(0, Pauli::X), (1, Pauli::Z)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = StateVector::random(3, &mut rng).unwrap();
        let want = s.expectation(&estimator_operator(&b, 2).unwrap()).unwrap();
        let mut r = s.clone();
        readout_rotation(&b, 2).unwrap().run(&mut r).unwrap();
        let got = r.expectation(&PauliString::z_on(&[0, 1, 2]).unwrap()).unwrap();
        assert!((want - got).abs() < 1e-12);
    }
}
