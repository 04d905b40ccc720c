//! Hamiltonian parameters and the term list shared by the Trotter compiler and
//! the exact solvers.
//!
//! `H = −J_E Σ_v s_v A_v − J_E Σ_ext Z_ext − J_M Σ_p B_p − h_E Σ_l Z_l − λ Σ_l X_l`
//! where the field sums skip masked links, and every pinned link contributes a
//! one-Z term for its external vertex.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LinkId, PlaquetteId, VertexId};
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    #[serde(default = "one")]
    pub j_e: f64,
    #[serde(default = "one")]
    pub j_m: f64,
    #[serde(default)]
    pub h_e: f64,
    #[serde(default)]
    pub lam: f64,
    /// Vertices whose `A_v` coefficient sign is flipped to −1.
    #[serde(default)]
    pub vertex_sign_overrides: BTreeMap<VertexId, i8>,
}

fn one() -> f64 {
    1.0
}

impl Default for HamiltonianParams {
    fn default() -> Self {
        Self {
            j_e: 1.0,
            j_m: 1.0,
            h_e: 0.0,
            lam: 0.0,
            vertex_sign_overrides: BTreeMap::new(),
        }
    }
}

impl HamiltonianParams {
    pub fn new(h_e: f64, lam: f64) -> Self {
        Self {
            h_e,
            lam,
            ..Self::default()
        }
    }

    pub fn with_override(mut self, v: VertexId, sign: i8) -> Self {
        self.vertex_sign_overrides.insert(v, sign);
        self
    }

    pub fn vertex_sign(&self, v: VertexId) -> f64 {
        match self.vertex_sign_overrides.get(&v) {
            Some(&s) if s < 0 => -1.0,
            _ => 1.0,
        }
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        for (&v, &s) in &self.vertex_sign_overrides {
            if v >= lattice.n_vertices() {
                return Err(Error::OutOfRange(format!("override on vertex {v}")));
            }
            if s != 1 && s != -1 {
                return Err(Error::OutOfRange(format!("override sign {s}")));
            }
        }
        for (name, x) in [("j_e", self.j_e), ("j_m", self.j_m), ("h_e", self.h_e), ("lam", self.lam)] {
            if !x.is_finite() {
                return Err(Error::OutOfRange(format!("{name} = {x}")));
            }
        }
        Ok(())
    }
}

/// Links whose field terms are dropped: by default every pinned link.
pub fn default_field_mask(lattice: &Lattice) -> BTreeSet<LinkId> {
    lattice.pinned_link_ids()
}

pub fn validate_field_mask(lattice: &Lattice, mask: &BTreeSet<LinkId>) -> Result<()> {
    for &l in mask {
        if l >= lattice.n_links() || !lattice.link(l).is_pinned() {
            return Err(Error::InvalidFieldMask(l));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermKind {
    Vertex(VertexId),
    /// Vertex at the far end of a pinned link.
    External(LinkId),
    Plaquette(PlaquetteId),
    FieldZ(LinkId),
    FieldX(LinkId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub pauli: PauliString,
    pub kind: TermKind,
}

/// All Hamiltonian terms with non-zero coefficient, in a fixed order:
/// vertices, external vertices, plaquettes, then Z and X fields per link.
pub fn hamiltonian_terms(
    lattice: &Lattice,
    params: &HamiltonianParams,
    field_mask: &BTreeSet<LinkId>,
) -> Result<Vec<Term>> {
    params.validate(lattice)?;
    validate_field_mask(lattice, field_mask)?;
    let mut terms = Vec::new();
    let mut push = |coeff: f64, pauli: PauliString, kind| {
        if coeff != 0.0 {
            terms.push(Term { coeff, pauli, kind });
        }
    };
    for v in 0..lattice.n_vertices() {
        push(
            -params.j_e * params.vertex_sign(v),
            PauliString::z_on(lattice.vertex_support(v))?,
            TermKind::Vertex(v),
        );
    }
    for l in lattice.pinned_links() {
        push(-params.j_e, PauliString::single(l.id, Pauli::Z), TermKind::External(l.id));
    }
    for p in 0..lattice.n_plaquettes() {
        push(
            -params.j_m,
            PauliString::x_on(lattice.plaquette_support(p))?,
            TermKind::Plaquette(p),
        );
    }
    for l in 0..lattice.n_links() {
        if field_mask.contains(&l) {
            continue;
        }
        push(-params.h_e, PauliString::single(l, Pauli::Z), TermKind::FieldZ(l));
        push(-params.lam, PauliString::single(l, Pauli::X), TermKind::FieldX(l));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeSpec, Side};

    #[test]
    fn term_counts() {
        let lat = build_lattice(&LatticeSpec::new(2, 2)).unwrap();
        let none = BTreeSet::new();
        let t = hamiltonian_terms(&lat, &HamiltonianParams::default(), &none).unwrap();
        assert_eq!(t.len(), 5);
        let t = hamiltonian_terms(&lat, &HamiltonianParams::new(0.3, 0.2), &none).unwrap();
        assert_eq!(t.len(), 4 + 1 + 2 * 4);
    }

    #[test]
    fn pinned_links_add_external_vertex_and_skip_fields() {
        let lat = build_lattice(&LatticeSpec::new(3, 2).with_pinned(Side::Left, 0, 0)).unwrap();
        let mask = default_field_mask(&lat);
        let t = hamiltonian_terms(&lat, &HamiltonianParams::new(0.5, 0.5), &mask).unwrap();
        let n_unmasked = lat.n_links() - 1;
        assert_eq!(t.len(), 6 + 1 + 2 + 2 * n_unmasked);
        assert!(t.iter().any(|x| x.kind == TermKind::External(7)));
        assert!(!t.iter().any(|x| x.kind == TermKind::FieldZ(7)));
    }

    #[test]
    fn mask_must_be_pinned() {
        let lat = build_lattice(&LatticeSpec::new(2, 2)).unwrap();
        let mask = BTreeSet::from([0]);
        assert_eq!(
            hamiltonian_terms(&lat, &HamiltonianParams::default(), &mask),
            Err(Error::InvalidFieldMask(0))
        );
    }

    #[test]
    fn overrides_flip_vertex_coefficient() {
        let lat = build_lattice(&LatticeSpec::new(2, 2)).unwrap();
        let p = HamiltonianParams::default().with_override(2, -1);
        let t = hamiltonian_terms(&lat, &p, &BTreeSet::new()).unwrap();
        assert_eq!(t[2].coeff, 1.0);
        assert_eq!(t[1].coeff, -1.0);
        assert!(HamiltonianParams::default()
            .with_override(9, -1)
            .validate(&lat)
            .is_err());
    }
}
