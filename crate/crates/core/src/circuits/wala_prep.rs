use serde::{Deserialize, Serialize};

use super::{Circuit, QubitLayout};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::lattice::{Lattice, PlaquetteId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalaMode {
    /// Rotation on a plaquette ancilla, parity fanned out, ancilla uncomputed.
    Ancilla,
    /// Rotation directly on the plaquette's top link, which acts as control.
    #[default]
    AncillaFree,
}

/// Plaquettes bottom row first, right to left within a row. Each plaquette's
/// top link is untouched until its own block, so its rotation acts on |0⟩.
pub fn plaquette_order(lattice: &Lattice) -> Vec<PlaquetteId> {
    let w = lattice.lx() - 1;
    (0..lattice.ly() - 1)
        .rev()
        .flat_map(|r| (0..w).rev().map(move |c| r * w + c))
        .collect()
}

/// Circuit preparing `∏_p (cos(θ/2) + sin(θ/2)·B_p)|0…0⟩` on the link qubits.
pub fn build_wala(
    lattice: &Lattice,
    theta: f64,
    mode: WalaMode,
    layout: &QubitLayout,
) -> Result<Circuit> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::OutOfRange(format!("theta {theta} outside [0, pi]")));
    }
    let mut c = Circuit::new(layout.n_qubits());
    for p in plaquette_order(lattice) {
        let [top, bottom, left, right] = *lattice.plaquette_support(p);
        match mode {
            WalaMode::AncillaFree => {
                c.push(Gate::Ry { theta }, &[top])?;
                for l in [bottom, left, right] {
                    c.push(Gate::Cnot, &[top, l])?;
                }
            }
            WalaMode::Ancilla => {
                if !layout.has_ancillas() {
                    return Err(Error::Unsupported(
                        "ancilla-mode preparation needs a layout with ancillas".into(),
                    ));
                }
                let a = layout.plaquette_ancilla(p);
                c.declare_ancilla(a);
                c.push(Gate::Ry { theta }, &[a])?;
                for l in [top, bottom, left, right] {
                    c.push(Gate::Cnot, &[a, l])?;
                }
                c.push(Gate::Cnot, &[top, a])?;
            }
        }
    }
    Ok(c)
}
