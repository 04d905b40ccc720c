use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Circuit, QubitLayout};
use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::lattice::{Direction, Lattice, LinkId};
use crate::model::{default_field_mask, validate_field_mask, HamiltonianParams};
use crate::pauli::Pauli;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionMode {
    /// Stabilizer terms as exact multi-qubit Pauli exponentials.
    #[default]
    Direct,
    /// CNOT parity ladders onto stabilizer ancillas.
    GateLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterSpec {
    pub params: HamiltonianParams,
    pub dt: f64,
    pub n_steps: usize,
    pub mode: EvolutionMode,
    pub field_mask: BTreeSet<LinkId>,
}

impl TrotterSpec {
    /// Spec with the default mask (all pinned links).
    pub fn new(lattice: &Lattice, params: HamiltonianParams, dt: f64, n_steps: usize) -> Self {
        Self {
            params,
            dt,
            n_steps,
            mode: EvolutionMode::Direct,
            field_mask: default_field_mask(lattice),
        }
    }

    pub fn with_mode(mut self, mode: EvolutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::OutOfRange(format!("dt = {}", self.dt)));
        }
        self.params.validate(lattice)?;
        validate_field_mask(lattice, &self.field_mask)
    }
}

/// Entangling-layer order of the parity ladders. Vertex and plaquette ladders
/// share the schedule, so each layer touches disjoint links.
pub const LADDER_ORDER: [Direction; 4] = [Direction::N, Direction::E, Direction::W, Direction::S];

/// Single-qubit field rotation `exp[i·dt·(λX + h_E Z)]`, or `None` if both vanish.
pub fn field_gate(params: &HamiltonianParams, dt: f64) -> Option<Gate> {
    let r = params.lam.hypot(params.h_e);
    (r > 0.0).then(|| Gate::Rn {
        axis: [-params.lam / r, 0.0, -params.h_e / r],
        angle: 2.0 * dt * r,
    })
}

/// One first-order step: field rotations, then all stabilizer exponentials.
pub fn build_trotter_step(
    lattice: &Lattice,
    spec: &TrotterSpec,
    layout: &QubitLayout,
) -> Result<Circuit> {
    spec.validate(lattice)?;
    let p = &spec.params;
    let dt = spec.dt;
    let mut c = Circuit::new(layout.n_qubits());

    if let Some(g) = field_gate(p, dt) {
        for l in 0..lattice.n_links() {
            if !spec.field_mask.contains(&l) {
                c.push(g.clone(), &[l])?;
            }
        }
    }
    for l in lattice.pinned_links() {
        c.push(Gate::Rz { theta: -2.0 * p.j_e * dt }, &[l.id])?;
    }

    match spec.mode {
        EvolutionMode::Direct => {
            for v in 0..lattice.n_vertices() {
                let s = lattice.vertex_support(v);
                c.push(
                    Gate::PauliExp {
                        paulis: vec![Pauli::Z; s.len()],
                        angle: p.j_e * p.vertex_sign(v) * dt,
                    },
                    s,
                )?;
            }
            for q in 0..lattice.n_plaquettes() {
                c.push(
                    Gate::PauliExp {
                        paulis: vec![Pauli::X; 4],
                        angle: p.j_m * dt,
                    },
                    lattice.plaquette_support(q),
                )?;
            }
        }
        EvolutionMode::GateLevel => {
            if !layout.has_ancillas() {
                return Err(Error::Unsupported(
                    "gate-level evolution needs a layout with ancillas".into(),
                ));
            }
            for a in layout.ancillas() {
                c.declare_ancilla(a);
            }
            if layout.is_recycled() {
                for v in 0..lattice.n_vertices() {
                    vertex_block(&mut c, lattice, layout, p, dt, v)?;
                }
                for q in 0..lattice.n_plaquettes() {
                    plaquette_block(&mut c, lattice, layout, p, dt, q)?;
                }
            } else {
                parallel_stabilizers(&mut c, lattice, layout, p, dt)?;
            }
        }
    }
    Ok(c)
}

fn vertex_rz(p: &HamiltonianParams, dt: f64, v: usize) -> Gate {
    Gate::Rz {
        theta: -2.0 * p.j_e * p.vertex_sign(v) * dt,
    }
}

fn vertex_block(
    c: &mut Circuit,
    lattice: &Lattice,
    layout: &QubitLayout,
    p: &HamiltonianParams,
    dt: f64,
    v: usize,
) -> Result<()> {
    let a = layout.vertex_ancilla(v);
    let links: Vec<_> = LADDER_ORDER
        .iter()
        .filter_map(|&d| lattice.vertex_link(v, d))
        .collect();
    for &l in &links {
        c.push(Gate::Cnot, &[l, a])?;
    }
    c.push(vertex_rz(p, dt, v), &[a])?;
    for &l in links.iter().rev() {
        c.push(Gate::Cnot, &[l, a])?;
    }
    Ok(())
}

fn plaquette_block(
    c: &mut Circuit,
    lattice: &Lattice,
    layout: &QubitLayout,
    p: &HamiltonianParams,
    dt: f64,
    q: usize,
) -> Result<()> {
    let a = layout.plaquette_ancilla(q);
    c.push(Gate::H, &[a])?;
    for d in LADDER_ORDER {
        c.push(Gate::Cnot, &[a, lattice.plaquette_link(q, d)])?;
    }
    c.push(Gate::H, &[a])?;
    c.push(Gate::Rz { theta: -2.0 * p.j_m * dt }, &[a])?;
    c.push(Gate::H, &[a])?;
    for d in LADDER_ORDER.iter().rev() {
        c.push(Gate::Cnot, &[a, lattice.plaquette_link(q, *d)])?;
    }
    c.push(Gate::H, &[a])?;
    Ok(())
}

fn parallel_stabilizers(
    c: &mut Circuit,
    lattice: &Lattice,
    layout: &QubitLayout,
    p: &HamiltonianParams,
    dt: f64,
) -> Result<()> {
    let ladder_layer = |c: &mut Circuit, d: Direction| -> Result<()> {
        c.barrier();
        for v in 0..lattice.n_vertices() {
            if let Some(l) = lattice.vertex_link(v, d) {
                c.push(Gate::Cnot, &[l, layout.vertex_ancilla(v)])?;
            }
        }
        for q in 0..lattice.n_plaquettes() {
            c.push(Gate::Cnot, &[layout.plaquette_ancilla(q), lattice.plaquette_link(q, d)])?;
        }
        Ok(())
    };
    for q in 0..lattice.n_plaquettes() {
        c.push(Gate::H, &[layout.plaquette_ancilla(q)])?;
    }
    for d in LADDER_ORDER {
        ladder_layer(c, d)?;
    }
    for v in 0..lattice.n_vertices() {
        c.push(vertex_rz(p, dt, v), &[layout.vertex_ancilla(v)])?;
    }
    for q in 0..lattice.n_plaquettes() {
        let a = layout.plaquette_ancilla(q);
        c.push(Gate::H, &[a])?;
        c.push(Gate::Rz { theta: -2.0 * p.j_m * dt }, &[a])?;
        c.push(Gate::H, &[a])?;
    }
    for d in LADDER_ORDER.iter().rev() {
        ladder_layer(c, *d)?;
    }
    for q in 0..lattice.n_plaquettes() {
        c.push(Gate::H, &[layout.plaquette_ancilla(q)])?;
    }
    Ok(())
}

/// Apply `n` repetitions of a step circuit.
pub fn run_steps(step: &Circuit, state: &mut StateVector, n: usize) -> Result<()> {
    for _ in 0..n {
        step.run(state)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::AncillaMode;
    use crate::lattice::{build_lattice, entangling_count_per_cycle, LatticeSpec, Side};
    use crate::state::DEFAULT_QUBIT_CAP;
    use nalgebra::{DMatrix, Matrix2};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn field_gate_matches_dense_exponential() {
        let p = HamiltonianParams::new(0.7, 0.3);
        let dt = 0.37;
        let m = field_gate(&p, dt).unwrap().matrix().unwrap();
        let h = Matrix2::new(
            Complex64::new(p.h_e, 0.0),
            Complex64::new(p.lam, 0.0),
            Complex64::new(p.lam, 0.0),
            Complex64::new(-p.h_e, 0.0),
        );
        let gen = DMatrix::from_fn(2, 2, |i, j| h[(i, j)] * Complex64::new(0.0, dt));
        let u = gen.exp();
        for i in 0..2 {
            for j in 0..2 {
                assert!((u[(i, j)] - m[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gate_counts_match_closed_form() {
        for lx in 2..=4 {
            for ly in 2..=4 {
                let lat = build_lattice(&LatticeSpec::new(lx, ly)).unwrap();
                let spec = TrotterSpec::new(&lat, HamiltonianParams::new(0.5, 0.25), 0.3, 1)
                    .with_mode(EvolutionMode::GateLevel);
                for mode in [AncillaMode::Parallel, AncillaMode::Recycled] {
                    let Ok(layout) = QubitLayout::new(&lat, mode, 64) else { continue };
                    let c = build_trotter_step(&lat, &spec, &layout).unwrap();
                    assert_eq!(c.entangling_count(), entangling_count_per_cycle(lx, ly));
                    if mode == AncillaMode::Parallel {
                        assert_eq!(c.entangling_depth(), 8, "{lx}x{ly}");
                    }
                }
            }
        }
    }

    fn compare_modes(lat: &Lattice, params: HamiltonianParams, dt: f64, mode: AncillaMode, seed: u64) {
        let layout = QubitLayout::new(lat, mode, DEFAULT_QUBIT_CAP).unwrap();
        let spec = TrotterSpec::new(lat, params, dt, 1);
        let direct = build_trotter_step(lat, &spec, &QubitLayout::links_only(lat)).unwrap();
        let gate = build_trotter_step(lat, &spec.clone().with_mode(EvolutionMode::GateLevel), &layout)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StateVector::random(lat.n_links(), &mut rng).unwrap();
        let mut a = psi.clone();
        direct.run(&mut a).unwrap();
        let mut b = psi;
        b.extend_zero(layout.n_qubits() - lat.n_links(), DEFAULT_QUBIT_CAP).unwrap();
        gate.run(&mut b).unwrap();
        for q in layout.ancillas() {
            assert!(b.prob_one(q) < 1e-12);
        }
        b.truncate_zero(lat.n_links()).unwrap();
        let f = a.fidelity(&b).unwrap();
        assert!(f > 1.0 - 1e-10, "fidelity {f}");
        // the step is exact including the global phase
        assert!((a.overlap(&b).unwrap() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn gate_level_matches_direct() {
        let lat = build_lattice(&LatticeSpec::new(2, 3)).unwrap();
        let p = HamiltonianParams::new(0.6, 0.25).with_override(3, -1);
        compare_modes(&lat, p.clone(), 0.3, AncillaMode::Parallel, 1);
        compare_modes(&lat, p, 0.3, AncillaMode::Recycled, 2);
        let lat = build_lattice(&LatticeSpec::new(3, 2).with_pinned(Side::Left, 1, 0)).unwrap();
        compare_modes(&lat, HamiltonianParams::new(1.1, 0.4), 0.2, AncillaMode::Parallel, 3);
        compare_modes(&lat, HamiltonianParams::new(1.1, 0.4), 0.2, AncillaMode::Recycled, 4);
    }

    #[test]
    fn stabilizer_limit_keeps_toric_state() {
        use crate::circuits::{build_wala, WalaMode};
        let lat = build_lattice(&LatticeSpec::new(3, 2)).unwrap();
        let layout = QubitLayout::links_only(&lat);
        let prep = build_wala(&lat, std::f64::consts::FRAC_PI_2, WalaMode::AncillaFree, &layout).unwrap();
        let mut s = StateVector::zero(lat.n_links()).unwrap();
        prep.run(&mut s).unwrap();
        let s0 = s.clone();
        let step = build_trotter_step(&lat, &TrotterSpec::new(&lat, HamiltonianParams::default(), 0.4, 1), &layout)
            .unwrap();
        run_steps(&step, &mut s, 5).unwrap();
        assert!((s0.overlap(&s).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let lat = build_lattice(&LatticeSpec::new(2, 2)).unwrap();
        let layout = QubitLayout::links_only(&lat);
        let mut spec = TrotterSpec::new(&lat, HamiltonianParams::default(), 0.0, 1);
        assert!(build_trotter_step(&lat, &spec, &layout).is_err());
        spec.dt = 0.1;
        spec.field_mask.insert(0);
        assert_eq!(
            build_trotter_step(&lat, &spec, &layout),
            Err(Error::InvalidFieldMask(0))
        );
        spec.field_mask.clear();
        spec.mode = EvolutionMode::GateLevel;
        assert!(build_trotter_step(&lat, &spec, &layout).is_err());
    }
}
