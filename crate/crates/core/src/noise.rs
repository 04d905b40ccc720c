//! Pauli-trajectory noise: two-qubit depolarizing kicks after every entangler
//! and independent readout bit flips.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::shots::{ShotTable, TrajectorySeed};
use crate::state::StateVector;

pub const DEFAULT_P2: f64 = 0.007;
pub const DEFAULT_EPS0: f64 = 0.006;
pub const DEFAULT_EPS1: f64 = 0.02;
pub const DEFAULT_TRAJECTORIES: usize = 30;
pub const DEFAULT_SHOTS: usize = 400;

/// Probability of reading 1 given 0 (`eps0`) and 0 given 1 (`eps1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    pub eps0: f64,
    pub eps1: f64,
}

impl ReadoutError {
    pub const IDEAL: ReadoutError = ReadoutError { eps0: 0.0, eps1: 0.0 };

    pub fn flip_prob(&self, bit: bool) -> f64 {
        if bit {
            self.eps1
        } else {
            self.eps0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    pub default: ReadoutError,
    #[serde(default)]
    pub per_qubit: BTreeMap<usize, ReadoutError>,
}

impl Default for ReadoutModel {
    fn default() -> Self {
        Self::uniform(DEFAULT_EPS0, DEFAULT_EPS1)
    }
}

impl ReadoutModel {
    pub fn uniform(eps0: f64, eps1: f64) -> Self {
        Self {
            default: ReadoutError { eps0, eps1 },
            per_qubit: BTreeMap::new(),
        }
    }

    pub fn ideal() -> Self {
        Self::uniform(0.0, 0.0)
    }

    pub fn for_qubit(&self, q: usize) -> ReadoutError {
        self.per_qubit.get(&q).copied().unwrap_or(self.default)
    }

    pub fn is_ideal(&self) -> bool {
        std::iter::once(&self.default)
            .chain(self.per_qubit.values())
            .all(|e| *e == ReadoutError::IDEAL)
    }

    /// Flip probabilities must lie in `[0, 1]`; inversion additionally needs
    /// `eps0 + eps1 ≠ 1`, checked where it is used.
    pub fn validate(&self) -> Result<()> {
        for e in std::iter::once(&self.default).chain(self.per_qubit.values()) {
            for p in [e.eps0, e.eps1] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::OutOfRange(format!("readout flip probability {p}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub p2: f64,
    pub readout: ReadoutModel,
    pub master_seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p2: DEFAULT_P2,
            readout: ReadoutModel::default(),
            master_seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn noiseless(master_seed: u64) -> Self {
        Self {
            p2: 0.0,
            readout: ReadoutModel::ideal(),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p2) {
            return Err(Error::OutOfRange(format!("p2 = {}", self.p2)));
        }
        self.readout.validate()
    }
}

/// Independent generator for trajectory `index`.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

const PAULIS: [Option<Pauli>; 4] = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];

/// With probability `p2`, apply one of the 15 non-identity Paulis on `(a, b)`.
pub fn depolarize_pair<R: Rng + ?Sized>(
    state: &mut StateVector,
    a: usize,
    b: usize,
    p2: f64,
    rng: &mut R,
) -> Result<Option<PauliString>> {
    if p2 <= 0.0 || rng.gen::<f64>() >= p2 {
        return Ok(None);
    }
    let k = rng.gen_range(1..16);
    let ops = [(a, PAULIS[k & 3]), (b, PAULIS[k >> 2])]
        .into_iter()
        .filter_map(|(q, p)| p.map(|p| (q, p)));
    let p = PauliString::new(ops)?;
    state.apply_pauli(&p)?;
    Ok(Some(p))
}

pub fn apply_readout_noise<R: Rng + ?Sized>(
    bits: u64,
    n_qubits: usize,
    readout: &ReadoutModel,
    rng: &mut R,
) -> u64 {
    let mut out = bits;
    for q in 0..n_qubits {
        let p = readout.for_qubit(q).flip_prob(bits >> q & 1 == 1);
        if p > 0.0 && rng.gen::<f64>() < p {
            out ^= 1 << q;
        }
    }
    out
}

/// Run `circuit` with depolarizing kicks after every entangling gate.
pub fn run_noisy<R: Rng + ?Sized>(
    circuit: &Circuit,
    state: &mut StateVector,
    p2: f64,
    rng: &mut R,
) -> Result<usize> {
    if state.n_qubits() < circuit.n_qubits() {
        return Err(Error::DimensionMismatch(state.n_qubits(), circuit.n_qubits()));
    }
    let mut kicks = 0;
    for op in circuit.ops() {
        state.apply_gate(&op.gate, &op.targets)?;
        if op.gate.is_entangling() && depolarize_pair(state, op.targets[0], op.targets[1], p2, rng)?.is_some() {
            kicks += 1;
        }
    }
    Ok(kicks)
}

fn sample_noisy<R: Rng + ?Sized>(
    state: &StateVector,
    shots: usize,
    readout: &ReadoutModel,
    rng: &mut R,
) -> Vec<u64> {
    let mut rows = state.sample(shots, rng);
    if !readout.is_ideal() {
        for r in rows.iter_mut() {
            *r = apply_readout_noise(*r, state.n_qubits(), readout, rng);
        }
    }
    rows
}

pub(crate) fn map_indexed<T: Send, F: Fn(usize) -> T + Send + Sync>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn check_run(model: &NoiseModel, n_traj: usize) -> Result<()> {
    if n_traj == 0 {
        return Err(Error::OutOfRange("n_traj must be at least 1".into()));
    }
    model.validate()
}

/// Sample `shots_per_traj` shots from each of `n_traj` noisy trajectories.
pub fn run_trajectories(
    circuit: &Circuit,
    initial: &StateVector,
    model: &NoiseModel,
    n_traj: usize,
    shots_per_traj: usize,
) -> Result<ShotTable> {
    check_run(model, n_traj)?;
    let per_traj = map_indexed(n_traj, |i| -> Result<Vec<u64>> {
        let mut rng = trajectory_rng(model.master_seed, i as u64);
        let mut psi = initial.clone();
        run_noisy(circuit, &mut psi, model.p2, &mut rng)?;
        Ok(sample_noisy(&psi, shots_per_traj, &model.readout, &mut rng))
    });
    let mut table = ShotTable::new(initial.n_qubits(), circuit.ancillas().to_vec());
    for (i, rows) in per_traj.into_iter().enumerate() {
        let seed = TrajectorySeed {
            master_seed: model.master_seed,
            stream: i as u64,
        };
        table.push_trajectory(seed, &rows?);
    }
    Ok(table)
}

/// One noisy run of `prep` followed by `n_steps` repetitions of `step`, sampled
/// after every step count `0..=n_steps`. `readout` (basis rotation) acts on a
/// copy before sampling. Time points of one trajectory share its noise history.
#[allow(clippy::too_many_arguments)]
pub fn run_trajectory_series(
    prep: &Circuit,
    step: &Circuit,
    n_steps: usize,
    readout: Option<&Circuit>,
    initial: &StateVector,
    model: &NoiseModel,
    n_traj: usize,
    shots_per_traj: usize,
) -> Result<Vec<ShotTable>> {
    check_run(model, n_traj)?;
    let per_traj = map_indexed(n_traj, |i| -> Result<Vec<Vec<u64>>> {
        let mut rng = trajectory_rng(model.master_seed, i as u64);
        let mut psi = initial.clone();
        run_noisy(prep, &mut psi, model.p2, &mut rng)?;
        let mut out = Vec::with_capacity(n_steps + 1);
        for k in 0..=n_steps {
            if k > 0 {
                run_noisy(step, &mut psi, model.p2, &mut rng)?;
            }
            let rows = match readout {
                Some(rot) => {
                    let mut m = psi.clone();
                    run_noisy(rot, &mut m, model.p2, &mut rng)?;
                    sample_noisy(&m, shots_per_traj, &model.readout, &mut rng)
                }
                None => sample_noisy(&psi, shots_per_traj, &model.readout, &mut rng),
            };
            out.push(rows);
        }
        Ok(out)
    });
    let mut ancillas: Vec<usize> = prep.ancillas().iter().chain(step.ancillas()).copied().collect();
    ancillas.sort_unstable();
    ancillas.dedup();
    let mut tables = vec![ShotTable::new(initial.n_qubits(), ancillas); n_steps + 1];
    for (i, series) in per_traj.into_iter().enumerate() {
        let seed = TrajectorySeed {
            master_seed: model.master_seed,
            stream: i as u64,
        };
        for (t, rows) in tables.iter_mut().zip(series?) {
            t.push_trajectory(seed, &rows);
        }
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::Gate;

    fn bell() -> Circuit {
        let mut c = Circuit::new(2);
        c.push(Gate::H, &[0]).unwrap();
        c.push(Gate::Cnot, &[0, 1]).unwrap();
        c
    }

    #[test]
    fn noiseless_matches_plain_sampling() {
        let c = bell();
        let psi0 = StateVector::zero(2).unwrap();
        let model = NoiseModel::noiseless(11);
        let t = run_trajectories(&c, &psi0, &model, 3, 50).unwrap();
        let mut psi = psi0.clone();
        c.run(&mut psi).unwrap();
        for i in 0..3 {
            let mut rng = trajectory_rng(11, i);
            let rows = psi.sample(50, &mut rng);
            assert_eq!(&t.rows()[i as usize * 50..(i as usize + 1) * 50], &rows[..]);
        }
        assert!(t.rows().iter().all(|&r| r == 0 || r == 3));
    }

    #[test]
    fn runs_are_reproducible() {
        let c = bell();
        let psi0 = StateVector::zero(2).unwrap();
        let model = NoiseModel {
            p2: 0.3,
            master_seed: 5,
            ..NoiseModel::default()
        };
        let a = run_trajectories(&c, &psi0, &model, 8, 100).unwrap();
        let b = run_trajectories(&c, &psi0, &model, 8, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seeds()[7], TrajectorySeed { master_seed: 5, stream: 7 });
        let other = NoiseModel { master_seed: 6, ..model };
        assert_ne!(a, run_trajectories(&c, &psi0, &other, 8, 100).unwrap());
    }

    #[test]
    fn full_depolarization_decays_stabilizers() {
        // 8 of the 15 kicks anticommute with ZZ, so each CZ multiplies ⟨ZZ⟩ by −1/15
        let psi0 = StateVector::zero(2).unwrap();
        let zz = PauliString::z_on(&[0, 1]).unwrap();
        let mut prev = 1.0;
        for n in [1usize, 2, 4] {
            let mut cc = Circuit::new(2);
            for _ in 0..n {
                cc.push(Gate::Cz, &[0, 1]).unwrap();
            }
            let model = NoiseModel {
                p2: 1.0,
                readout: ReadoutModel::ideal(),
                master_seed: 1,
            };
            let t = run_trajectories(&cc, &psi0, &model, 4000, 1).unwrap();
            let (m, se) = t.parity_mean(zz.z_mask()).unwrap();
            let expected = (-1.0f64 / 15.0).powi(n as i32);
            assert!((m - expected).abs() < 4.0 * se.max(1e-3), "n={n}: {m} vs {expected}");
            assert!(m.abs() <= prev + 4.0 * se);
            prev = m.abs();
        }
    }

    #[test]
    fn readout_flip_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(apply_readout_noise(0b1011, 4, &ReadoutModel::ideal(), &mut rng), 0b1011);
        let all_flip = ReadoutModel::uniform(0.0, 1.0);
        assert_eq!(apply_readout_noise(0b1111, 4, &all_flip, &mut rng), 0);
        let m = ReadoutModel::default();
        let n = 1_000_000;
        let flips: u64 = (0..n / 8)
            .map(|_| apply_readout_noise(0, 8, &m, &mut rng).count_ones() as u64)
            .sum();
        let f = flips as f64 / n as f64;
        let sigma = (0.006f64 * 0.994 / n as f64).sqrt();
        assert!((f - 0.006).abs() < 3.0 * sigma, "{f}");
    }

    #[test]
    fn per_qubit_overrides() {
        let mut m = ReadoutModel::ideal();
        m.per_qubit.insert(2, ReadoutError { eps0: 1.0, eps1: 0.0 });
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_readout_noise(0, 4, &m, &mut rng), 0b100);
        assert!(ReadoutModel::uniform(1.5, 0.0).validate().is_err());
        assert!(NoiseModel { p2: -0.1, ..NoiseModel::default() }.validate().is_err());
    }

    #[test]
    fn series_time_zero_is_prep_only() {
        let c = bell();
        let mut step = Circuit::new(2);
        step.push(Gate::X, &[1]).unwrap();
        let psi0 = StateVector::zero(2).unwrap();
        let tables =
            run_trajectory_series(&c, &step, 2, None, &psi0, &NoiseModel::noiseless(1), 2, 64).unwrap();
        assert_eq!(tables.len(), 3);
        assert!(tables[0].rows().iter().all(|&r| r == 0 || r == 3));
        assert!(tables[1].rows().iter().all(|&r| r == 1 || r == 2));
        assert!(tables[2].rows().iter().all(|&r| r == 0 || r == 3));
        assert!(run_trajectory_series(&c, &step, 1, None, &psi0, &NoiseModel::default(), 0, 1).is_err());
    }
}
