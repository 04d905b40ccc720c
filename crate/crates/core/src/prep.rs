//! Initial states: the WALA vacuum with optional charge pair, string or
//! two-string superposition on top, plus the toric and polarized references.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuits::{
    build_wala, central_plaquette, default_superposition_paths, superpose_direct, Branch, Circuit,
    QubitLayout, WalaMode,
};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::lattice::{Lattice, LinkId, PathSpec};
use crate::model::HamiltonianParams;
use crate::observables::bumped_string;
use crate::state::StateVector;
use crate::wala::optimize_theta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prep {
    Wala,
    /// X on one link: two adjacent charges. Defaults to the central link.
    WalaPair {
        #[serde(default)]
        link: Option<LinkId>,
    },
    WalaSuperposition {
        branch: Branch,
        #[serde(default)]
        s1: Option<Vec<LinkId>>,
        #[serde(default)]
        s2: Option<Vec<LinkId>>,
    },
    /// X along a path; defaults to the bumped string between pinned links.
    WalaString {
        #[serde(default)]
        path: Option<Vec<LinkId>>,
    },
    Toric,
    Polarized,
}

impl Prep {
    pub fn name(&self) -> &'static str {
        match self {
            Prep::Wala => "wala",
            Prep::WalaPair { .. } => "wala+pair",
            Prep::WalaSuperposition { .. } => "wala+superposition",
            Prep::WalaString { .. } => "wala+string",
            Prep::Toric => "toric",
            Prep::Polarized => "polarized",
        }
    }
}

/// Link at the centre of the grid: vertical when the column count is odd.
pub fn default_pair_link(lattice: &Lattice) -> LinkId {
    let (lx, ly) = (lattice.lx(), lattice.ly());
    if lx % 2 == 1 {
        lattice.vertical_link((ly - 2) / 2, lx / 2)
    } else {
        lattice.horizontal_link((ly - 1) / 2, (lx - 2) / 2)
    }
    .expect("grid is at least 2x2")
}

/// Ansatz angle for `prep`: fixed for the toric/polarized references,
/// otherwise `theta` if given, else the finite-lattice optimum.
pub fn prep_theta(prep: &Prep, lattice: &Lattice, params: &HamiltonianParams, theta: Option<f64>) -> Result<f64> {
    Ok(match prep {
        Prep::Toric => FRAC_PI_2,
        Prep::Polarized => 0.0,
        _ => match theta {
            Some(t) => t,
            None => optimize_theta(lattice.lx(), lattice.ly(), params)?.theta,
        },
    })
}

fn string_mask(lattice: &Lattice, prep: &Prep) -> Result<u64> {
    Ok(match prep {
        Prep::WalaPair { link } => {
            let l = link.unwrap_or_else(|| default_pair_link(lattice));
            if l >= lattice.n_links() {
                return Err(Error::OutOfRange(format!("link {l}")));
            }
            1 << l
        }
        Prep::WalaString { path } => match path {
            Some(links) => PathSpec::new(lattice, links.clone())?.mask(),
            None => bumped_string(lattice)?.mask(),
        },
        _ => 0,
    })
}

fn superposition_paths(
    lattice: &Lattice,
    s1: &Option<Vec<LinkId>>,
    s2: &Option<Vec<LinkId>>,
) -> Result<(PathSpec, PathSpec)> {
    match (s1, s2) {
        (Some(a), Some(b)) => Ok((PathSpec::new(lattice, a.clone())?, PathSpec::new(lattice, b.clone())?)),
        (None, None) => {
            let (r, c) = central_plaquette(lattice);
            default_superposition_paths(lattice, r, c)
        }
        _ => Err(Error::InvalidPath("give both superposition paths or neither".into())),
    }
}

/// Link-register state for `prep` at ansatz angle `theta`.
pub fn prepare_state(lattice: &Lattice, prep: &Prep, theta: f64) -> Result<StateVector> {
    let mut psi = StateVector::zero(lattice.n_links())?;
    if !matches!(prep, Prep::Polarized) {
        build_wala(lattice, theta, WalaMode::AncillaFree, &QubitLayout::links_only(lattice))?.run(&mut psi)?;
    }
    if let Prep::WalaSuperposition { branch, s1, s2 } = prep {
        let (a, b) = superposition_paths(lattice, s1, s2)?;
        return superpose_direct(lattice, &psi, &a, &b, *branch);
    }
    let mask = string_mask(lattice, prep)?;
    if mask != 0 {
        psi.apply_x_mask(mask)?;
    }
    Ok(psi)
}

/// Gate-level preparation on `layout`. Superpositions need a measured
/// ancilla and are only available through [`prepare_state`].
pub fn prep_circuit(
    lattice: &Lattice,
    prep: &Prep,
    theta: f64,
    mode: WalaMode,
    layout: &QubitLayout,
) -> Result<Circuit> {
    if matches!(prep, Prep::WalaSuperposition { .. }) {
        return Err(Error::Unsupported("superposition preparation in a shot-sampled circuit".into()));
    }
    let mut c = if matches!(prep, Prep::Polarized) {
        Circuit::new(layout.n_qubits())
    } else {
        build_wala(lattice, theta, mode, layout)?
    };
    let mask = string_mask(lattice, prep)?;
    for l in 0..lattice.n_links() {
        if mask >> l & 1 == 1 {
            c.push(Gate::X, &[l])?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::AncillaMode;
    use crate::lattice::{build_lattice, LatticeSpec};
    use crate::observables::{mean_separation_exact, string_lattice_spec, vertex_expectations};

    #[test]
    fn pair_prep_has_adjacent_charges() {
        let l = build_lattice(&LatticeSpec::new(4, 3)).unwrap();
        let p = Prep::WalaPair { link: None };
        let psi = prepare_state(&l, &p, 0.9).unwrap();
        let (p2, sep) = mean_separation_exact(&psi, &l).unwrap();
        assert!((p2 - 1.0).abs() < 1e-12 && (sep - 1.0).abs() < 1e-12);
        let a = vertex_expectations(&psi, &l).unwrap();
        assert_eq!(a.iter().filter(|x| (**x + 1.0).abs() < 1e-12).count(), 2);
    }

    #[test]
    fn circuit_and_state_agree() {
        let l = build_lattice(&string_lattice_spec(4, 3)).unwrap();
        let layout = QubitLayout::new(&l, AncillaMode::Recycled, 26).unwrap();
        for prep in [Prep::Wala, Prep::WalaString { path: None }, Prep::Polarized, Prep::Toric] {
            let theta = prep_theta(&prep, &l, &HamiltonianParams::new(0.6, 0.25), None).unwrap();
            let direct = prepare_state(&l, &prep, theta).unwrap();
            for mode in [WalaMode::AncillaFree, WalaMode::Ancilla] {
                let c = prep_circuit(&l, &prep, theta, mode, &layout).unwrap();
                let mut s = StateVector::zero(layout.n_qubits()).unwrap();
                c.run(&mut s).unwrap();
                s.truncate_zero(l.n_links()).unwrap();
                assert!(s.fidelity(&direct).unwrap() > 1.0 - 1e-12, "{}", prep.name());
            }
        }
    }

    #[test]
    fn references_and_errors() {
        let l = build_lattice(&LatticeSpec::new(4, 3)).unwrap();
        let p = HamiltonianParams::new(0.6, 0.0);
        assert_eq!(prep_theta(&Prep::Toric, &l, &p, Some(0.1)).unwrap(), FRAC_PI_2);
        assert_eq!(prep_theta(&Prep::Polarized, &l, &p, None).unwrap(), 0.0);
        assert_eq!(prep_theta(&Prep::Wala, &l, &p, Some(0.3)).unwrap(), 0.3);
        let psi = prepare_state(&l, &Prep::Polarized, 0.0).unwrap();
        assert_eq!(psi.amplitudes()[0].re, 1.0);
        assert!(prepare_state(&l, &Prep::WalaString { path: None }, 1.0).is_err());
        assert!(prepare_state(&l, &Prep::WalaPair { link: Some(40) }, 1.0).is_err());
        let sup = Prep::WalaSuperposition { branch: Branch::Minus, s1: None, s2: None };
        assert!(prepare_state(&l, &sup, 1.0).is_ok());
        assert!(prep_circuit(&l, &sup, 1.0, WalaMode::AncillaFree, &QubitLayout::links_only(&l)).is_err());
        let js = serde_json::to_string(&sup).unwrap();
        assert_eq!(serde_json::from_str::<Prep>(&js).unwrap(), sup);
    }
}
