use serde::Serialize;

use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::state::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Op {
    pub gate: Gate,
    pub targets: Vec<usize>,
    pub layer: usize,
}

/// Gate list with as-soon-as-possible layering. A gate lands in the first
/// layer after the last gate touching any of its qubits, so program order on
/// each qubit is preserved and no layer repeats a qubit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Op>,
    next_free: Vec<usize>,
    ancillas: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            next_free: vec![0; n_qubits],
            ancillas: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn ancillas(&self) -> &[usize] {
        &self.ancillas
    }

    pub fn declare_ancilla(&mut self, q: usize) {
        if !self.ancillas.contains(&q) {
            self.ancillas.push(q);
            self.ancillas.sort_unstable();
        }
    }

    pub fn push(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::Arity {
                gate: gate.name(),
                expected: gate.arity(),
                got: targets.len(),
            });
        }
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
        let layer = targets.iter().map(|&q| self.next_free[q]).max().unwrap_or(0);
        for &q in targets {
            self.next_free[q] = layer + 1;
        }
        self.ops.push(Op {
            gate,
            targets: targets.to_vec(),
            layer,
        });
        Ok(())
    }

    /// Align every qubit to the current depth so later gates start a fresh layer.
    pub fn barrier(&mut self) {
        let d = self.depth();
        self.next_free.iter_mut().for_each(|n| *n = d);
    }

    /// Append another circuit after this one.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        for op in &other.ops {
            self.push(op.gate.clone(), &op.targets)?;
        }
        for &a in &other.ancillas {
            self.declare_ancilla(a);
        }
        Ok(())
    }

    /// The adjoint circuit: reversed order, each gate inverted.
    pub fn inverse(&self) -> Circuit {
        let mut c = Circuit::new(self.n_qubits);
        for op in self.ops.iter().rev() {
            c.push(op.gate.inverse(), &op.targets).expect("targets already validated");
        }
        c.ancillas = self.ancillas.clone();
        c
    }

    pub fn depth(&self) -> usize {
        self.next_free.iter().copied().max().unwrap_or(0)
    }

    pub fn entangling_count(&self) -> usize {
        self.ops.iter().filter(|op| op.gate.is_entangling()).count()
    }

    pub fn layers(&self) -> Vec<Vec<&Op>> {
        let mut layers = vec![Vec::new(); self.depth()];
        for op in &self.ops {
            layers[op.layer].push(op);
        }
        layers
    }

    /// Entangling layers, i.e. layers holding at least one two-qubit gate.
    pub fn entangling_depth(&self) -> usize {
        self.layers()
            .iter()
            .filter(|l| l.iter().any(|op| op.gate.is_entangling()))
            .count()
    }

    /// Apply every gate to `state`, which may have more qubits than declared.
    pub fn run(&self, state: &mut StateVector) -> Result<()> {
        if state.n_qubits() < self.n_qubits {
            return Err(Error::DimensionMismatch(state.n_qubits(), self.n_qubits));
        }
        for op in &self.ops {
            state.apply_gate(&op.gate, &op.targets)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gates: Vec<_> = self
            .ops
            .iter()
            .map(|op| {
                serde_json::json!({
                    "layer": op.layer,
                    "gate": op.gate.name(),
                    "targets": op.targets,
                    "params": op.gate.params(),
                })
            })
            .collect();
        serde_json::json!({
            "n_qubits": self.n_qubits,
            "ancillas": self.ancillas,
            "entangling_count": self.entangling_count(),
            "depth": self.depth(),
            "gates": gates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asap_layering() {
        let mut c = Circuit::new(3);
        c.push(Gate::H, &[0]).unwrap();
        c.push(Gate::H, &[1]).unwrap();
        c.push(Gate::Cnot, &[0, 1]).unwrap();
        c.push(Gate::X, &[2]).unwrap();
        c.push(Gate::Cz, &[1, 2]).unwrap();
        let layers: Vec<_> = c.ops().iter().map(|o| o.layer).collect();
        assert_eq!(layers, vec![0, 0, 1, 0, 2]);
        assert_eq!(c.depth(), 3);
        assert_eq!(c.entangling_count(), 2);
        assert_eq!(c.entangling_depth(), 2);
        for layer in c.layers() {
            let mut qs: Vec<_> = layer.iter().flat_map(|o| o.targets.clone()).collect();
            let n = qs.len();
            qs.sort();
            qs.dedup();
            assert_eq!(qs.len(), n);
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::Cz, &[0, 0]).is_err());
        assert!(c.push(Gate::H, &[2]).is_err());
    }

    #[test]
    fn inverse_undoes_circuit() {
        use crate::pauli::Pauli;
        use rand::SeedableRng;
        let mut c = Circuit::new(3);
        let gates = [
            (Gate::H, vec![0]),
            (Gate::S, vec![1]),
            (Gate::Rx { theta: 0.4 }, vec![2]),
            (Gate::Phase { phi: 1.1 }, vec![0]),
            (Gate::Rn { axis: [0.3, -0.2, 0.9], angle: 0.8 }, vec![1]),
            (Gate::PhasedXz { x: 0.3, z: -0.7, a: 0.25 }, vec![2]),
            (Gate::Cnot, vec![0, 2]),
            (Gate::Cz, vec![1, 2]),
            (Gate::PauliExp { paulis: vec![Pauli::X, Pauli::Y], angle: 0.6 }, vec![2, 0]),
        ];
        for (g, t) in gates {
            c.push(g, &t).unwrap();
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::random(3, &mut rng).unwrap();
        let mut phi = psi.clone();
        c.run(&mut phi).unwrap();
        c.inverse().run(&mut phi).unwrap();
        assert!((psi.overlap(&phi).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn json_gate_list() {
        let mut c = Circuit::new(2);
        c.push(Gate::Ry { theta: 0.5 }, &[0]).unwrap();
        c.push(Gate::Cnot, &[0, 1]).unwrap();
        let js = c.to_json();
        assert_eq!(js["gates"][1]["gate"], "cnot");
        assert_eq!(js["gates"][1]["layer"], 1);
        assert_eq!(js["gates"][0]["params"][0], 0.5);
    }
}
