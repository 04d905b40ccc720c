use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::state::DEFAULT_QUBIT_CAP;

/// Qubits kept free above the layout for Hadamard-test or superposition ancillas.
pub const LAYOUT_RESERVE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AncillaMode {
    /// One ancilla per vertex and per plaquette.
    Parallel,
    /// A single ancilla reused by every stabilizer block in turn.
    Recycled,
    /// Parallel when it fits under the cap, otherwise recycled.
    #[default]
    Auto,
}

/// Qubit assignment: links occupy `0..n_links`, stabilizer ancillas follow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    n_links: usize,
    vertex_ancilla: Vec<usize>,
    plaquette_ancilla: Vec<usize>,
    n_qubits: usize,
    recycled: bool,
}

impl QubitLayout {
    pub fn new(lattice: &Lattice, mode: AncillaMode, cap: usize) -> Result<Self> {
        let l = lattice.n_links();
        let (v, p) = (lattice.n_vertices(), lattice.n_plaquettes());
        let parallel_size = l + v + p;
        let recycled = match mode {
            AncillaMode::Parallel => false,
            AncillaMode::Recycled => true,
            AncillaMode::Auto => parallel_size + LAYOUT_RESERVE > cap,
        };
        let layout = if recycled {
            Self {
                n_links: l,
                vertex_ancilla: vec![l; v],
                plaquette_ancilla: vec![l; p],
                n_qubits: l + 1,
                recycled,
            }
        } else {
            Self {
                n_links: l,
                vertex_ancilla: (l..l + v).collect(),
                plaquette_ancilla: (l + v..l + v + p).collect(),
                n_qubits: parallel_size,
                recycled,
            }
        };
        if layout.n_qubits > cap {
            return Err(Error::QubitCapExceeded {
                requested: layout.n_qubits,
                cap,
            });
        }
        Ok(layout)
    }

    pub fn auto(lattice: &Lattice) -> Result<Self> {
        Self::new(lattice, AncillaMode::Auto, DEFAULT_QUBIT_CAP)
    }

    /// Links only; for direct-mode evolution and the ancilla-free preparation.
    pub fn links_only(lattice: &Lattice) -> Self {
        Self {
            n_links: lattice.n_links(),
            vertex_ancilla: Vec::new(),
            plaquette_ancilla: Vec::new(),
            n_qubits: lattice.n_links(),
            recycled: false,
        }
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn is_recycled(&self) -> bool {
        self.recycled
    }

    pub fn has_ancillas(&self) -> bool {
        self.n_qubits > self.n_links
    }

    pub fn vertex_ancilla(&self, v: usize) -> usize {
        self.vertex_ancilla[v]
    }

    pub fn plaquette_ancilla(&self, p: usize) -> usize {
        self.plaquette_ancilla[p]
    }

    pub fn ancillas(&self) -> Vec<usize> {
        (self.n_links..self.n_qubits).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeSpec};

    #[test]
    fn auto_switches_on_size() {
        let small = build_lattice(&LatticeSpec::new(2, 3)).unwrap();
        let l = QubitLayout::auto(&small).unwrap();
        assert!(!l.is_recycled());
        assert_eq!(l.n_qubits(), 7 + 6 + 2);
        assert_eq!(l.plaquette_ancilla(1), 14);

        let big = build_lattice(&LatticeSpec::new(4, 3)).unwrap();
        let l = QubitLayout::auto(&big).unwrap();
        assert!(l.is_recycled());
        assert_eq!(l.n_qubits(), 18);
        assert_eq!(l.vertex_ancilla(5), 17);

        assert!(QubitLayout::new(&big, AncillaMode::Parallel, DEFAULT_QUBIT_CAP).is_err());
    }
}
