//! Two-string superpositions `(X_{s1} ± X_{s2})|ψ₀⟩`.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Circuit;
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::lattice::{Lattice, Node, PathSpec};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    /// Ancilla outcome that selects this branch.
    pub fn outcome(self) -> bool {
        self == Branch::Minus
    }
}

/// Default pair of L-shaped length-2 strings around plaquette `(row, col)`:
/// `s1` runs along the top edge then down the right edge, `s2` along the top
/// edge then down the left edge. Their four endpoints are the plaquette's
/// corners, each excited in exactly one branch.
pub fn default_superposition_paths(
    lattice: &Lattice,
    row: usize,
    col: usize,
) -> Result<(PathSpec, PathSpec)> {
    let s1 = PathSpec::through_vertices(lattice, None, &[(row, col), (row, col + 1), (row + 1, col + 1)], None)?;
    let s2 = PathSpec::through_vertices(lattice, None, &[(row, col + 1), (row, col), (row + 1, col)], None)?;
    Ok((s1, s2))
}

/// Central plaquette used by the default superposition.
pub fn central_plaquette(lattice: &Lattice) -> (usize, usize) {
    ((lattice.ly() - 2) / 2, (lattice.lx() - 2) / 2)
}

fn check_pair_paths(lattice: &Lattice, s: &PathSpec) -> Result<()> {
    match s.endpoints() {
        [Node::Vertex(a), Node::Vertex(b)] if lattice.manhattan_distance(a, b) == 2 => Ok(()),
        e => Err(Error::InvalidPath(format!(
            "superposition strings must join two grid vertices at distance 2, got {e:?}"
        ))),
    }
}

/// Direct construction by state arithmetic on the link register.
pub fn superpose_direct(
    lattice: &Lattice,
    psi0: &StateVector,
    s1: &PathSpec,
    s2: &PathSpec,
    branch: Branch,
) -> Result<StateVector> {
    check_pair_paths(lattice, s1)?;
    check_pair_paths(lattice, s2)?;
    let mut a = psi0.clone();
    a.apply_x_mask(s1.mask())?;
    let mut b = psi0.clone();
    b.apply_x_mask(s2.mask())?;
    a.add_scaled(Complex64::new(branch.sign(), 0.0), &b)?;
    if a.norm_sqr() < 1e-20 {
        return Err(Error::ZeroNorm);
    }
    a.normalize()?;
    Ok(a)
}

/// Ancilla circuit producing `|0⟩(X₁+X₂)|ψ⟩/2 + |1⟩(X₁−X₂)|ψ⟩/2`; projecting
/// `ancilla` onto `branch.outcome()` selects the branch.
pub fn build_superposition_circuit(
    lattice: &Lattice,
    s1: &PathSpec,
    s2: &PathSpec,
    ancilla: usize,
) -> Result<Circuit> {
    check_pair_paths(lattice, s1)?;
    check_pair_paths(lattice, s2)?;
    let a: BTreeSet<_> = s1.links().iter().copied().collect();
    let b: BTreeSet<_> = s2.links().iter().copied().collect();
    let mut c = Circuit::new(ancilla.max(lattice.n_links() - 1) + 1);
    c.declare_ancilla(ancilla);
    c.push(Gate::H, &[ancilla])?;
    for &l in a.intersection(&b) {
        c.push(Gate::X, &[l])?;
    }
    c.push(Gate::X, &[ancilla])?;
    for &l in a.difference(&b) {
        c.push(Gate::Cnot, &[ancilla, l])?;
    }
    c.push(Gate::X, &[ancilla])?;
    for &l in b.difference(&a) {
        c.push(Gate::Cnot, &[ancilla, l])?;
    }
    c.push(Gate::H, &[ancilla])?;
    Ok(c)
}

/// Gate-level preparation on `psi0` (link register only): appends the
/// ancilla, runs the circuit, projects and drops the ancilla. Returns the
/// branch probability and the link-register state.
pub fn superpose_gate_level(
    lattice: &Lattice,
    psi0: &StateVector,
    s1: &PathSpec,
    s2: &PathSpec,
    branch: Branch,
    cap: usize,
) -> Result<(f64, StateVector)> {
    let n = psi0.n_qubits();
    let c = build_superposition_circuit(lattice, s1, s2, n)?;
    let mut s = psi0.clone();
    s.extend_zero(1, cap)?;
    c.run(&mut s)?;
    let p = s.project(n, branch.outcome())?;
    if branch.outcome() {
        s.apply_gate(&Gate::X, &[n])?;
    }
    s.truncate_zero(n)?;
    Ok((p, s))
}
